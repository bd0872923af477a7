#pragma once

#include "core/common.hpp"

namespace mdgait::dsp {

/// Short-time Fourier transform parameters. The defaults give a ~0.1 s
/// Hamming window at the stock sampling rate; hop is in samples.
struct StftConfig {
  std::size_t window_length = 0;  // 0 = round(0.1 * sampling frequency)
  std::size_t hop = 1;
  std::size_t fft_size = 2048;

  std::size_t effective_window(double sampling_frequency_hz) const;
};

/// Squared-magnitude STFT on a zero-centered Doppler axis.
/// values is row-major [n_frames x n_bins]; bin fft_size/2 is 0 Hz and the
/// axis ascends in steps of fs/fft_size. time_axis_s holds frame start times.
struct Spectrogram {
  std::vector<double> values;
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<double> doppler_axis_hz;
  std::vector<double> time_axis_s;
  double frame_rate_hz = 0.0;
  bool noise_reduced = false;

  double at(std::size_t frame, std::size_t bin) const {
    return values[frame * n_bins + bin];
  }
  double& at(std::size_t frame, std::size_t bin) {
    return values[frame * n_bins + bin];
  }
};

/// Envelope (extremal micro-Doppler trajectory) in Hz, one value per frame,
/// signed according to the Doppler half-plane it was extracted from.
struct EnvelopeSignal {
  std::vector<double> values_hz;
  std::vector<double> time_axis_s;
  double frame_rate_hz = 0.0;
};

/// Short-time energy of the micro-Doppler band, one value per frame.
struct EnergySignal {
  std::vector<double> values;
  std::vector<double> time_axis_s;
  double frame_rate_hz = 0.0;
};

// Subtracts the complex mean of the samples (DC / static-clutter removal).
IQRecording remove_mean(const IQRecording& rec);

// Windowed squared-magnitude STFT. Frames whose window would run past the end
// of the signal are dropped, not padded.
Spectrogram spectrogram(const IQRecording& rec, const StftConfig& cfg);

/// Adaptive per-bin noise threshold parameters: the threshold of a Doppler bin
/// is the given quantile of that bin's energies over time, raised by margin_db.
struct DenoiseParams {
  double quantile = 0.6;
  double margin_db = 6.0;
};

std::vector<double> compute_noise_thresholds(const Spectrogram& spec, const DenoiseParams& p);

// Zeroes entries strictly below their bin threshold; marks the result reduced.
Spectrogram apply_noise_thresholds(const Spectrogram& spec, const std::vector<double>& thresholds);

// compute + apply. Refuses spectrograms that are already noise reduced.
Spectrogram denoise(const Spectrogram& spec, const DenoiseParams& p);

// Per frame, walks the direction's Doppler half-plane from zero outward and
// returns the frequency at which the cumulative frame energy reaches
// energy_fraction of the half-plane total. Zero-energy frames produce 0 Hz.
EnvelopeSignal envelope(const Spectrogram& spec, Direction direction, double energy_fraction = 0.95);

// Mean energy per frame over the micro-Doppler bins: sign matching the
// direction and |Doppler| above torso_exclusion_hz.
EnergySignal energy_signal(const Spectrogram& spec, Direction direction, double torso_exclusion_hz);

}  // namespace mdgait::dsp
