#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "core/common.hpp"
#include "core/cvd.hpp"
#include "core/dsp.hpp"
#include "core/features.hpp"
#include "core/ml.hpp"

namespace mdgait::pipeline {

/// Every knob of the recording -> features dataflow in one declarative
/// document. The defaults realize the standard geometry: 0.1 s Hamming
/// window, hop 20 (128 frames/s at the stock sampling rate), 2048-point FFT,
/// cadence grid 0..5.12 Hz, Doppler cap 500 Hz.
struct PipelineConfig {
  RadarConfig radar;
  dsp::StftConfig stft{.window_length = 0, .hop = 20, .fft_size = 2048};
  dsp::DenoiseParams denoise;
  cvd::CvdConfig cadence;
  features::SOHConfig soh;

  double envelope_energy_fraction = 0.95;
  double torso_guard_hz = 25.0;  // energy signal excludes |f| <= |f_D(v0)| + guard
  std::size_t frames_per_pixel = 4;
  // 0 derives the pixel count from the recording duration, so trailing
  // partially-covered pixels are zero-filled rather than dropped.
  std::size_t spectrogram_time_pixels = 0;

  void validate() const;
};

/// Everything the single-recording dataflow produces, computed in one pass.
struct Analysis {
  dsp::Spectrogram spectrogram;  // noise-reduced
  dsp::EnvelopeSignal envelope;
  dsp::EnergySignal energy;
  cvd::CVDImage cvd_image;
  cvd::CadenceSpectrum mcs;
  cvd::DopplerSpectrum mds;

  double v0_mps = 0.0;
  double f_md_hz = 0.0;
  double f_dmax_hz = 0.0;
  double cv = 0.0;
  bool cv_flagged = false;  // fewer than two envelope peaks; cv imputed 0
  features::SOHModel soh;
  features::PhysicalFeatures phy;
};

Analysis analyze(const IQRecording& rec, const PipelineConfig& cfg);

/// A representation image/vector, row-major, with physical axes: rows are
/// Doppler pixels (Hz, signed), columns are time (s) or cadence (Hz)
/// depending on the kind. 1-D representations have row_axis {0}.
struct Representation {
  RepresentationKind kind = RepresentationKind::Spectrogram;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> row_axis;
  std::vector<double> col_axis;
  std::string row_label;
  std::string col_label;
};

// The standard (rows, cols) shape of each representation.
std::pair<std::size_t, std::size_t> representation_dims(RepresentationKind kind);

// Computes one representation of a recording. With enforce_standard_dims the
// produced shape must equal representation_dims(kind) — a violation is a
// configuration bug and aborts with a diagnostic.
Representation represent(const IQRecording& rec, RepresentationKind kind,
                         const PipelineConfig& cfg, bool enforce_standard_dims = true);

// Same, reusing an existing analysis of the recording (rec is still needed
// for the time-domain representation).
Representation represent(const Analysis& analysis, const IQRecording& rec,
                         RepresentationKind kind, const PipelineConfig& cfg,
                         bool enforce_standard_dims = true);

enum class FeatureSet : int { Phy = 0, B1, B2, R1, R2 };

std::string to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& s);
std::vector<std::string> feature_names(FeatureSet set);

std::vector<double> feature_vector(const Analysis& analysis, FeatureSet set);

/// Labeled feature matrix for classification experiments.
struct LabeledMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<GaitClass> labels;
  std::vector<std::string> subjects;
  std::vector<Direction> directions;
};

// Runs the full dataflow over count recordings pulled from source(i)
// (parallel across recordings) and collects one feature matrix. Recordings
// must carry labels; unlabeled data is a hard error for supervised work.
LabeledMatrix batch_features(const std::function<IQRecording(std::size_t)>& source,
                             std::size_t count, FeatureSet set, const PipelineConfig& cfg);

// Vectorized representation matrix (e.g. the PCA front end's input).
LabeledMatrix batch_representation(const std::function<IQRecording(std::size_t)>& source,
                                   std::size_t count, RepresentationKind kind,
                                   const PipelineConfig& cfg);

/// One pass over the data that feeds every comparison experiment at once:
/// all five feature sets plus one vectorized representation.
struct BatchExtraction {
  LabeledMatrix phy, b1, b2, r1, r2;
  LabeledMatrix representation;
  RepresentationKind representation_kind = RepresentationKind::CvdPre;
};

BatchExtraction batch_all(const std::function<IQRecording(std::size_t)>& source,
                          std::size_t count, RepresentationKind representation_kind,
                          const PipelineConfig& cfg);

}  // namespace mdgait::pipeline
