#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdgait::pipeline {
namespace {

std::size_t derive_time_pixels(const IQRecording& rec, const PipelineConfig& cfg) {
  if (cfg.spectrogram_time_pixels > 0) return cfg.spectrogram_time_pixels;
  const double duration = static_cast<double>(rec.samples.size()) / rec.sampling_frequency_hz;
  const double frame_rate = rec.sampling_frequency_hz / static_cast<double>(cfg.stft.hop);
  const auto pixels = static_cast<std::size_t>(
      std::llround(duration * frame_rate / static_cast<double>(cfg.frames_per_pixel)));
  if (pixels == 0) throw std::invalid_argument("recording too short for one time pixel");
  return pixels;
}

void append_labeled_row(LabeledMatrix& m, std::vector<double> row, const IQRecording& rec,
                        std::size_t slot) {
  if (!rec.label.has_value()) {
    throw std::invalid_argument("batch extraction requires labeled recordings");
  }
  m.rows[slot] = std::move(row);
  m.labels[slot] = *rec.label;
  m.subjects[slot] = rec.subject_id;
  m.directions[slot] = rec.direction;
}

LabeledMatrix make_sized(std::size_t count) {
  LabeledMatrix m;
  m.rows.resize(count);
  m.labels.resize(count, GaitClass::NW);
  m.subjects.resize(count);
  m.directions.resize(count, Direction::Toward);
  return m;
}

}  // namespace

void PipelineConfig::validate() const {
  radar.validate();
  if (stft.hop == 0) throw std::invalid_argument("hop must be at least 1");
  if (stft.fft_size == 0) throw std::invalid_argument("fft size must be at least 1");
  if (!(envelope_energy_fraction > 0.0 && envelope_energy_fraction <= 1.0)) {
    throw std::invalid_argument("envelope energy fraction must be in (0, 1]");
  }
  if (!(torso_guard_hz >= 0.0)) throw std::invalid_argument("torso guard must be >= 0");
  if (frames_per_pixel == 0) throw std::invalid_argument("frames per pixel must be at least 1");
  if (!(cadence.cadence_step_hz > 0.0) || cadence.cadence_bins < 2) {
    throw std::invalid_argument("cadence grid malformed");
  }
}

Analysis analyze(const IQRecording& rec, const PipelineConfig& cfg) {
  cfg.validate();
  if (rec.samples.empty()) throw std::invalid_argument("analyze: empty recording");

  Analysis a;
  a.spectrogram = dsp::denoise(dsp::spectrogram(rec, cfg.stft), cfg.denoise);
  a.envelope = dsp::envelope(a.spectrogram, rec.direction, cfg.envelope_energy_fraction);
  a.cvd_image = cvd::compute_cvd(a.spectrogram, rec.direction, cfg.cadence);
  a.mcs = cvd::mean_cadence_spectrum(a.cvd_image);
  a.mds = cvd::mean_doppler_spectrum(a.cvd_image);

  a.v0_mps = features::estimate_base_velocity(a.mds, cfg.radar);
  const double torso_line = std::abs(doppler_shift(a.v0_mps, cfg.radar.aspect_angle_rad, cfg.radar));
  a.energy = dsp::energy_signal(a.spectrogram, rec.direction, torso_line + cfg.torso_guard_hz);

  a.f_md_hz = features::estimate_fmd(a.envelope, cfg.cadence.cadence_step_hz,
                                     cfg.cadence.cadence_bins);
  a.f_dmax_hz = features::estimate_fdmax(a.envelope, rec.direction);
  try {
    a.cv = features::coefficient_of_variation(a.envelope);
  } catch (const std::exception&) {
    // Too few envelope peaks: the feature is zero-imputed and flagged so the
    // vector keeps its fixed arity.
    a.cv = 0.0;
    a.cv_flagged = true;
  }
  a.soh = features::fit_soh(a.energy.values, a.energy.frame_rate_hz, a.f_md_hz, cfg.soh);
  a.phy = features::make_physical_features(a.f_md_hz, a.f_dmax_hz, a.cv, a.soh);
  return a;
}

std::pair<std::size_t, std::size_t> representation_dims(RepresentationKind kind) {
  switch (kind) {
    case RepresentationKind::Spectrogram: return {101, 192};
    case RepresentationKind::Cvd: return {101, 129};
    case RepresentationKind::Mcs: return {1, 129};
    case RepresentationKind::CvdPre: return {101, 129};
    case RepresentationKind::McsPre: return {1, 129};
    case RepresentationKind::FtFilteredTime: return {1, 129};
  }
  throw std::invalid_argument("unknown representation");
}

Representation represent(const Analysis& analysis, const IQRecording& rec,
                         RepresentationKind kind, const PipelineConfig& cfg,
                         bool enforce_standard_dims) {
  Representation out;
  out.kind = kind;
  switch (kind) {
    case RepresentationKind::Spectrogram: {
      const auto img = cvd::condense_spectrogram(analysis.spectrogram, rec.direction,
                                                 cfg.frames_per_pixel,
                                                 derive_time_pixels(rec, cfg), cfg.cadence);
      out.values = img.values;
      out.rows = img.n_doppler;
      out.cols = img.n_time;
      out.row_axis = img.doppler_axis_hz;
      out.col_axis = img.time_axis_s;
      out.row_label = "Doppler (Hz)";
      out.col_label = "time (s)";
      break;
    }
    case RepresentationKind::Cvd: {
      out.values = analysis.cvd_image.values;
      out.rows = analysis.cvd_image.n_doppler;
      out.cols = analysis.cvd_image.n_cadence;
      out.row_axis = analysis.cvd_image.doppler_axis_hz;
      out.col_axis = analysis.cvd_image.cadence_axis_hz;
      out.row_label = "Doppler (Hz)";
      out.col_label = "cadence (Hz)";
      break;
    }
    case RepresentationKind::Mcs: {
      out.values = analysis.mcs.values;
      out.rows = 1;
      out.cols = analysis.mcs.values.size();
      out.row_axis = {0.0};
      out.col_axis = analysis.mcs.cadence_axis_hz;
      out.col_label = "cadence (Hz)";
      break;
    }
    case RepresentationKind::CvdPre: {
      const auto warped = cvd::preprocess_cvd(analysis.cvd_image, analysis.f_md_hz,
                                              analysis.f_dmax_hz, cfg.cadence);
      out.values = warped.values;
      out.rows = warped.n_doppler;
      out.cols = warped.n_cadence;
      out.row_axis = warped.doppler_axis_hz;
      out.col_axis = warped.cadence_axis_hz;
      out.row_label = "Doppler (norm)";
      out.col_label = "cadence (norm)";
      break;
    }
    case RepresentationKind::McsPre: {
      const auto warped = cvd::preprocess_cvd(analysis.cvd_image, analysis.f_md_hz,
                                              analysis.f_dmax_hz, cfg.cadence);
      const auto mcs = cvd::mean_cadence_spectrum(warped);
      out.values = mcs.values;
      out.rows = 1;
      out.cols = mcs.values.size();
      out.row_axis = {0.0};
      out.col_axis = mcs.cadence_axis_hz;
      out.col_label = "cadence (norm)";
      break;
    }
    case RepresentationKind::FtFilteredTime: {
      const double cutoff =
          std::abs(doppler_shift(2.0 * std::abs(analysis.v0_mps), cfg.radar.aspect_angle_rad,
                                 cfg.radar));
      const auto spectrum = cvd::ft_filtered_time(rec, cutoff, cfg.cadence);
      out.values = spectrum.values;
      out.rows = 1;
      out.cols = spectrum.values.size();
      out.row_axis = {0.0};
      out.col_axis = spectrum.cadence_axis_hz;
      out.col_label = "cadence (Hz)";
      break;
    }
  }
  if (enforce_standard_dims) {
    const auto [rows, cols] = representation_dims(kind);
    if (out.rows != rows || out.cols != cols) {
      throw std::runtime_error("representation '" + to_string(kind) + "' produced " +
                               std::to_string(out.rows) + "x" + std::to_string(out.cols) +
                               ", expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                               " (check sampling rate / duration / grid configuration)");
    }
  }
  return out;
}

Representation represent(const IQRecording& rec, RepresentationKind kind,
                         const PipelineConfig& cfg, bool enforce_standard_dims) {
  return represent(analyze(rec, cfg), rec, kind, cfg, enforce_standard_dims);
}

std::string to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::Phy: return "phy";
    case FeatureSet::B1: return "b1";
    case FeatureSet::B2: return "b2";
    case FeatureSet::R1: return "r1";
    case FeatureSet::R2: return "r2";
  }
  throw std::invalid_argument("unknown feature set");
}

FeatureSet feature_set_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(FeatureSet::R2); ++i) {
    const auto set = static_cast<FeatureSet>(i);
    if (s == to_string(set)) return set;
  }
  throw std::invalid_argument("unknown feature set: '" + s + "'");
}

std::vector<std::string> feature_names(FeatureSet set) {
  std::vector<std::string> names;
  switch (set) {
    case FeatureSet::Phy:
      names = {"f_mD", "fDmax", "cv", "beta", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5"};
      break;
    case FeatureSet::B1: {
      names = {"f1", "f2", "f3"};
      for (int p = 1; p <= 3; ++p) {
        for (int i = 0; i < 100; ++i) {
          names.push_back("b1_g" + std::to_string(p) + "_" + std::to_string(i));
        }
      }
      names.push_back("v0");
      break;
    }
    case FeatureSet::B2:
      names = {"f1", "f2", "f3", "abs_v0"};
      break;
    case FeatureSet::R1:
      names = {"f_mD", "fD_mD_min", "fD_mD_max"};
      break;
    case FeatureSet::R2:
      for (int i = 0; i < 101; ++i) names.push_back("r2_" + std::to_string(i));
      break;
  }
  return names;
}

std::vector<double> feature_vector(const Analysis& a, FeatureSet set) {
  switch (set) {
    case FeatureSet::Phy:
      return a.phy.as_vector();
    case FeatureSet::B1:
      return features::bjorklund_features(a.cvd_image, a.mcs, a.v0_mps).b1;
    case FeatureSet::B2:
      return features::bjorklund_features(a.cvd_image, a.mcs, a.v0_mps).b2;
    case FeatureSet::R1:
      return features::ricci_features(a.cvd_image, a.f_md_hz).r1;
    case FeatureSet::R2:
      return features::ricci_features(a.cvd_image, a.f_md_hz).r2;
  }
  throw std::invalid_argument("unknown feature set");
}

LabeledMatrix batch_features(const std::function<IQRecording(std::size_t)>& source,
                             std::size_t count, FeatureSet set, const PipelineConfig& cfg) {
  cfg.validate();
  LabeledMatrix m = make_sized(count);
  parallel_for(count, [&](std::size_t i) {
    const IQRecording rec = source(i);
    const Analysis a = analyze(rec, cfg);
    append_labeled_row(m, feature_vector(a, set), rec, i);
  });
  return m;
}

LabeledMatrix batch_representation(const std::function<IQRecording(std::size_t)>& source,
                                   std::size_t count, RepresentationKind kind,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  LabeledMatrix m = make_sized(count);
  parallel_for(count, [&](std::size_t i) {
    const IQRecording rec = source(i);
    Representation rep = represent(rec, kind, cfg);
    append_labeled_row(m, std::move(rep.values), rec, i);
  });
  return m;
}

BatchExtraction batch_all(const std::function<IQRecording(std::size_t)>& source,
                          std::size_t count, RepresentationKind representation_kind,
                          const PipelineConfig& cfg) {
  cfg.validate();
  BatchExtraction out;
  out.representation_kind = representation_kind;
  out.phy = make_sized(count);
  out.b1 = make_sized(count);
  out.b2 = make_sized(count);
  out.r1 = make_sized(count);
  out.r2 = make_sized(count);
  out.representation = make_sized(count);

  parallel_for(count, [&](std::size_t i) {
    const IQRecording rec = source(i);
    const Analysis a = analyze(rec, cfg);
    const auto bj = features::bjorklund_features(a.cvd_image, a.mcs, a.v0_mps);
    const auto ricci = features::ricci_features(a.cvd_image, a.f_md_hz);
    Representation rep = represent(a, rec, representation_kind, cfg);

    append_labeled_row(out.phy, a.phy.as_vector(), rec, i);
    append_labeled_row(out.b1, bj.b1, rec, i);
    append_labeled_row(out.b2, bj.b2, rec, i);
    append_labeled_row(out.r1, ricci.r1, rec, i);
    append_labeled_row(out.r2, ricci.r2, rec, i);
    append_labeled_row(out.representation, std::move(rep.values), rec, i);
  });
  return out;
}

}  // namespace mdgait::pipeline
