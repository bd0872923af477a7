#pragma once

#include "core/common.hpp"
#include "core/dsp.hpp"

namespace mdgait::cvd {

/// Cadence grid and Doppler condensation parameters. The defaults realize the
/// standard representation geometry: cadence 0..5.12 Hz in 0.04 Hz steps
/// (129 bins) and the 0..500 Hz Doppler half-plane averaged in groups of 4
/// raw bins, which yields 101 Doppler pixels including the zero bin (the last
/// group is partial).
struct CvdConfig {
  double cadence_step_hz = 0.04;
  std::size_t cadence_bins = 129;
  double doppler_max_hz = 500.0;
  std::size_t doppler_group = 4;
};

/// Cadence-velocity diagram, [n_doppler x n_cadence] row-major. Doppler rows
/// run from zero Doppler outward (signed axis values; negative for away).
struct CVDImage {
  std::vector<double> values;
  std::size_t n_doppler = 0;
  std::size_t n_cadence = 0;
  std::vector<double> doppler_axis_hz;
  std::vector<double> cadence_axis_hz;
  bool preprocessed = false;

  double at(std::size_t d, std::size_t c) const { return values[d * n_cadence + c]; }
  double& at(std::size_t d, std::size_t c) { return values[d * n_cadence + c]; }
};

struct CadenceSpectrum {
  std::vector<double> values;
  std::vector<double> cadence_axis_hz;
};

struct DopplerSpectrum {
  std::vector<double> values;
  std::vector<double> doppler_axis_hz;
};

/// Doppler-condensed spectrogram image, [n_doppler x n_time] row-major, same
/// Doppler pixel layout as the CVD; amplitude normalized to [0, 1].
struct SpectrogramImage {
  std::vector<double> values;
  std::size_t n_doppler = 0;
  std::size_t n_time = 0;
  std::vector<double> doppler_axis_hz;
  std::vector<double> time_axis_s;

  double at(std::size_t d, std::size_t t) const { return values[d * n_time + t]; }
  double& at(std::size_t d, std::size_t t) { return values[d * n_time + t]; }
};

// Fourier transform of the spectrogram along time, per condensed Doppler
// pixel, after per-pixel temporal mean removal; magnitudes on the cadence
// grid (zero-padded FT to reach the cadence resolution), normalized to [0,1].
CVDImage compute_cvd(const dsp::Spectrogram& spec, Direction direction, const CvdConfig& cfg);

// Mean over Doppler rows: the mean cadence spectrum.
CadenceSpectrum mean_cadence_spectrum(const CVDImage& cvd);

// Mean over cadence columns: the mean Doppler spectrum.
DopplerSpectrum mean_doppler_spectrum(const CVDImage& cvd);

// Warps the CVD so the fundamental micro-Doppler frequency maps to 1 Hz on
// the cadence axis and the maximal Doppler shift maps to doppler_max_hz on
// the Doppler axis, bilinearly resampled onto the standard grid and
// renormalized to [0, 1].
CVDImage preprocess_cvd(const CVDImage& cvd, double f_md_hz, double f_dmax_hz,
                        const CvdConfig& cfg);

// Cadence spectrum taken from the time-domain signal directly: high-pass the
// mean-removed baseband at cutoff_hz (spectral zeroing), detect the magnitude
// envelope |s(n)|, remove its mean, and evaluate the FT magnitude on the
// cadence grid; normalized to [0, 1].
CadenceSpectrum ft_filtered_time(const IQRecording& rec, double cutoff_hz, const CvdConfig& cfg);

// Doppler-condensed, direction-cropped spectrogram representation. Each time
// pixel averages frames_per_pixel consecutive frames (missing trailing frames
// count as zero, so the pixel count stays tied to the recording duration).
SpectrogramImage condense_spectrogram(const dsp::Spectrogram& spec, Direction direction,
                                      std::size_t frames_per_pixel, std::size_t n_time_pixels,
                                      const CvdConfig& cfg);

}  // namespace mdgait::cvd
