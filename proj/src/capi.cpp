#include "mdgait/mdgait.h"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <set>
#include <string>

#include "core/common.hpp"
#include "core/io.hpp"
#include "core/ml.hpp"
#include "core/pipeline.hpp"
#include "core/sim.hpp"
#include "core/subspace.hpp"

using nlohmann::json;

// Opaque handle definitions: thin ownership wrappers over core value types.
struct mdg_recording {
  mdgait::IQRecording rec;
};
struct mdg_matrix {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
};
struct mdg_analysis {
  mdgait::pipeline::Analysis analysis;
};
struct mdg_model {
  mdgait::io::StoredModel stored;
};

namespace {

thread_local std::string t_last_error;

mdg_status fail(mdg_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

template <typename Fn>
mdg_status guarded(Fn&& fn) {
  try {
    fn();
    return MDG_OK;
  } catch (const json::exception& e) {
    return fail(MDG_ERR_INVALID_ARGUMENT, std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(MDG_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MDG_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MDG_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(MDG_ERR_RUNTIME, "unknown failure");
  }
}

mdg_status require(const void* p, const char* what) {
  if (p == nullptr) return fail(MDG_ERR_NULL, std::string(what) + " must not be NULL");
  return MDG_OK;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

mdgait::RadarConfig parse_radar(const json& j, mdgait::RadarConfig base) {
  reject_unknown_keys(j,
                      {"carrier_frequency_hz", "sampling_frequency_hz", "duration_s",
                       "propagation_speed_mps", "aspect_angle_rad"},
                      "radar");
  if (j.contains("carrier_frequency_hz")) base.carrier_frequency_hz = j.at("carrier_frequency_hz");
  if (j.contains("sampling_frequency_hz")) base.sampling_frequency_hz = j.at("sampling_frequency_hz");
  if (j.contains("duration_s")) base.duration_s = j.at("duration_s");
  if (j.contains("propagation_speed_mps")) base.propagation_speed_mps = j.at("propagation_speed_mps");
  if (j.contains("aspect_angle_rad")) base.aspect_angle_rad = j.at("aspect_angle_rad");
  return base;
}

mdgait::pipeline::PipelineConfig parse_pipeline(const char* config_json) {
  mdgait::pipeline::PipelineConfig cfg;
  if (config_json == nullptr || *config_json == '\0') return cfg;
  const json j = json::parse(config_json);
  if (j.is_null()) return cfg;
  reject_unknown_keys(j,
                      {"radar", "stft", "denoise", "cadence", "soh", "envelope_energy_fraction",
                       "torso_guard_hz", "frames_per_pixel", "spectrogram_time_pixels"},
                      "pipeline config");
  if (j.contains("radar")) cfg.radar = parse_radar(j.at("radar"), cfg.radar);
  if (j.contains("stft")) {
    const json& s = j.at("stft");
    reject_unknown_keys(s, {"window_length", "hop", "fft_size"}, "stft");
    if (s.contains("window_length")) cfg.stft.window_length = s.at("window_length");
    if (s.contains("hop")) cfg.stft.hop = s.at("hop");
    if (s.contains("fft_size")) cfg.stft.fft_size = s.at("fft_size");
  }
  if (j.contains("denoise")) {
    const json& d = j.at("denoise");
    reject_unknown_keys(d, {"quantile", "margin_db"}, "denoise");
    if (d.contains("quantile")) cfg.denoise.quantile = d.at("quantile");
    if (d.contains("margin_db")) cfg.denoise.margin_db = d.at("margin_db");
  }
  if (j.contains("cadence")) {
    const json& c = j.at("cadence");
    reject_unknown_keys(c, {"step_hz", "bins", "doppler_max_hz", "doppler_group"}, "cadence");
    if (c.contains("step_hz")) cfg.cadence.cadence_step_hz = c.at("step_hz");
    if (c.contains("bins")) cfg.cadence.cadence_bins = c.at("bins");
    if (c.contains("doppler_max_hz")) cfg.cadence.doppler_max_hz = c.at("doppler_max_hz");
    if (c.contains("doppler_group")) cfg.cadence.doppler_group = c.at("doppler_group");
  }
  if (j.contains("soh")) {
    const json& s = j.at("soh");
    reject_unknown_keys(s, {"max_order", "refine_halfwidth_hz"}, "soh");
    if (s.contains("max_order")) cfg.soh.max_order = s.at("max_order");
    if (s.contains("refine_halfwidth_hz")) cfg.soh.refine_halfwidth_hz = s.at("refine_halfwidth_hz");
  }
  if (j.contains("envelope_energy_fraction")) {
    cfg.envelope_energy_fraction = j.at("envelope_energy_fraction");
  }
  if (j.contains("torso_guard_hz")) cfg.torso_guard_hz = j.at("torso_guard_hz");
  if (j.contains("frames_per_pixel")) cfg.frames_per_pixel = j.at("frames_per_pixel");
  if (j.contains("spectrogram_time_pixels")) {
    cfg.spectrogram_time_pixels = j.at("spectrogram_time_pixels");
  }
  cfg.validate();
  return cfg;
}

std::pair<mdgait::sim::GaitProfile, mdgait::RadarConfig> parse_profile(const char* profile_json) {
  if (profile_json == nullptr || *profile_json == '\0') {
    throw std::invalid_argument("profile JSON is required (at minimum {\"class\": ...})");
  }
  const json j = json::parse(profile_json);
  reject_unknown_keys(j,
                      {"class", "direction", "base_velocity_mps", "stride_rate_hz",
                       "peak_foot_velocity_mps", "limp_attenuation", "cane_peak_velocity_mps",
                       "torso_sway_mps", "burst_duty", "gait_phase", "noise_snr_db", "seed",
                       "radar"},
                      "profile");
  mdgait::sim::GaitProfile p;
  p.gait_class = mdgait::gait_class_from_string(j.at("class").get<std::string>());
  if (j.contains("direction")) {
    p.direction = mdgait::direction_from_string(j.at("direction").get<std::string>());
  }
  if (j.contains("base_velocity_mps")) p.base_velocity_mps = j.at("base_velocity_mps");
  if (j.contains("stride_rate_hz")) p.stride_rate_hz = j.at("stride_rate_hz");
  if (j.contains("peak_foot_velocity_mps")) p.peak_foot_velocity_mps = j.at("peak_foot_velocity_mps");
  if (j.contains("limp_attenuation")) p.limp_attenuation = j.at("limp_attenuation");
  if (j.contains("cane_peak_velocity_mps")) p.cane_peak_velocity_mps = j.at("cane_peak_velocity_mps");
  if (j.contains("torso_sway_mps")) p.torso_sway_mps = j.at("torso_sway_mps");
  if (j.contains("burst_duty")) p.burst_duty = j.at("burst_duty");
  if (j.contains("gait_phase")) p.gait_phase = j.at("gait_phase");
  if (j.contains("noise_snr_db") && !j.at("noise_snr_db").is_null()) {
    p.noise_snr_db = j.at("noise_snr_db").get<double>();
  }
  if (j.contains("seed")) p.rng_seed = j.at("seed").get<std::uint64_t>();
  mdgait::RadarConfig radar;
  if (j.contains("radar")) radar = parse_radar(j.at("radar"), radar);
  return {p, radar};
}

mdg_matrix* new_matrix(std::vector<double> values, std::size_t rows, std::size_t cols) {
  auto* m = new mdg_matrix;
  m->values = std::move(values);
  m->rows = rows;
  m->cols = cols;
  return m;
}

/// Recording loader bound to one manifest entry: attaches subject/label
/// metadata and cross-checks it against what the file itself carries.
mdgait::IQRecording load_entry(const mdgait::io::Manifest& manifest, std::size_t i) {
  const auto& e = manifest.entries[i];
  mdgait::IQRecording rec =
      mdgait::io::load_recording(mdgait::io::resolve_recording_path(manifest, e));
  if (rec.label.has_value() && *rec.label != e.label) {
    throw std::runtime_error(e.file + ": label in file disagrees with the manifest");
  }
  if (rec.direction != e.direction) {
    throw std::runtime_error(e.file + ": direction in file disagrees with the manifest");
  }
  rec.label = e.label;
  rec.subject_id = e.subject_id;
  return rec;
}

std::string config_hash_hex(const json& canonical) {
  const std::string dump = canonical.dump();
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(dump.data()), static_cast<uInt>(dump.size()));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

json metrics_to_json(const mdgait::ml::Metrics& m) {
  json counts = json::array();
  json percent = json::array();
  for (std::size_t t = 0; t < mdgait::kNumClasses; ++t) {
    json row = json::array();
    json prow = json::array();
    double total = 0.0;
    for (std::size_t p = 0; p < mdgait::kNumClasses; ++p) total += m.confusion[t][p];
    for (std::size_t p = 0; p < mdgait::kNumClasses; ++p) {
      row.push_back(m.confusion[t][p]);
      prow.push_back(total > 0.0 ? 100.0 * m.confusion[t][p] / total : 0.0);
    }
    counts.push_back(row);
    percent.push_back(prow);
  }
  json per_class = json::array();
  for (double v : m.per_class_accuracy) per_class.push_back(v);
  return json{{"accuracy", m.accuracy},
              {"fpr", m.false_positive_rate},
              {"fnr", m.false_negative_rate},
              {"tpr", m.true_positive_rate},
              {"per_class_accuracy", per_class},
              {"confusion_counts", counts},
              {"confusion_row_percent", percent},
              {"total", m.total}};
}

json cross_val_to_json(const mdgait::ml::CrossValResult& r) {
  json out = metrics_to_json(r.pooled);
  out["ci95_halfwidth"] = r.ci95_halfwidth;
  out["fold_accuracies"] = r.fold_accuracies;
  return out;
}

}  // namespace

extern "C" {

const char* mdg_version(void) { return "1.0.0"; }

const char* mdg_last_error(void) { return t_last_error.c_str(); }

const char* mdg_class_name(int gait_class) {
  switch (gait_class) {
    case 0: return "NW";
    case 1: return "L1";
    case 2: return "L2";
    case 3: return "CW";
    case 4: return "CW/oos";
    default: return nullptr;
  }
}

const char* mdg_representation_name(int representation_kind) {
  if (representation_kind < 0 || representation_kind >= mdgait::kNumRepresentations) {
    return nullptr;
  }
  // Static table so the C caller gets a stable address (order matches the enum).
  static const char* const names[] = {"spectrogram", "cvd",     "mcs",
                                      "cvd-pre",     "mcs-pre", "ft-filtered-time"};
  return names[representation_kind];
}

void mdg_string_free(char* s) { std::free(s); }

mdg_status mdg_recording_load(const char* path, mdg_recording** out) {
  if (auto s = require(path, "path"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    auto handle = std::make_unique<mdg_recording>();
    handle->rec = mdgait::io::load_recording(path);
    *out = handle.release();
  });
}

mdg_status mdg_recording_save(const mdg_recording* rec, const char* path) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (auto s = require(path, "path"); s != MDG_OK) return s;
  return guarded([&] { mdgait::io::save_recording(rec->rec, path); });
}

mdg_status mdg_recording_from_samples(const double* iq_interleaved, size_t n_samples,
                                      double sampling_frequency_hz, double carrier_frequency_hz,
                                      int direction, int label, mdg_recording** out) {
  if (auto s = require(iq_interleaved, "iq_interleaved"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    if (direction != 0 && direction != 1) throw std::invalid_argument("direction must be 0 or 1");
    if (label < -1 || label >= mdgait::kNumClasses) {
      throw std::invalid_argument("label must be -1 or a class index 0..4");
    }
    auto handle = std::make_unique<mdg_recording>();
    auto& r = handle->rec;
    r.sampling_frequency_hz = sampling_frequency_hz;
    r.carrier_frequency_hz = carrier_frequency_hz;
    r.direction = direction == 0 ? mdgait::Direction::Toward : mdgait::Direction::Away;
    if (label >= 0) r.label = static_cast<mdgait::GaitClass>(label);
    r.samples.resize(n_samples);
    for (size_t i = 0; i < n_samples; ++i) {
      r.samples[i] = {iq_interleaved[2 * i], iq_interleaved[2 * i + 1]};
    }
    *out = handle.release();
  });
}

mdg_status mdg_simulate(const char* profile_json, mdg_recording** out) {
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto [profile, radar] = parse_profile(profile_json);
    auto handle = std::make_unique<mdg_recording>();
    handle->rec = mdgait::sim::synthesize(profile, radar);
    *out = handle.release();
  });
}

mdg_status mdg_recording_info(const mdg_recording* rec, size_t* n_samples,
                              double* sampling_frequency_hz, double* carrier_frequency_hz,
                              int* direction, int* label) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (n_samples != nullptr) *n_samples = rec->rec.samples.size();
  if (sampling_frequency_hz != nullptr) *sampling_frequency_hz = rec->rec.sampling_frequency_hz;
  if (carrier_frequency_hz != nullptr) *carrier_frequency_hz = rec->rec.carrier_frequency_hz;
  if (direction != nullptr) *direction = rec->rec.direction == mdgait::Direction::Toward ? 0 : 1;
  if (label != nullptr) {
    *label = rec->rec.label.has_value() ? static_cast<int>(*rec->rec.label) : -1;
  }
  return MDG_OK;
}

mdg_status mdg_recording_samples(const mdg_recording* rec, double* iq_interleaved,
                                 size_t capacity_samples) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (auto s = require(iq_interleaved, "iq_interleaved"); s != MDG_OK) return s;
  if (capacity_samples < rec->rec.samples.size()) {
    return fail(MDG_ERR_INVALID_ARGUMENT, "buffer too small for the recording");
  }
  for (size_t i = 0; i < rec->rec.samples.size(); ++i) {
    iq_interleaved[2 * i] = rec->rec.samples[i].real();
    iq_interleaved[2 * i + 1] = rec->rec.samples[i].imag();
  }
  return MDG_OK;
}

void mdg_recording_free(mdg_recording* rec) { delete rec; }

size_t mdg_matrix_rows(const mdg_matrix* m) { return m != nullptr ? m->rows : 0; }
size_t mdg_matrix_cols(const mdg_matrix* m) { return m != nullptr ? m->cols : 0; }
const double* mdg_matrix_data(const mdg_matrix* m) {
  return m != nullptr ? m->values.data() : nullptr;
}
void mdg_matrix_free(mdg_matrix* m) { delete m; }

mdg_status mdg_analyze(const mdg_recording* rec, const char* config_json, mdg_analysis** out) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto cfg = parse_pipeline(config_json);
    auto handle = std::make_unique<mdg_analysis>();
    handle->analysis = mdgait::pipeline::analyze(rec->rec, cfg);
    *out = handle.release();
  });
}

mdg_status mdg_analysis_scalars(const mdg_analysis* a, char** json_out) {
  if (auto s = require(a, "analysis"); s != MDG_OK) return s;
  if (auto s = require(json_out, "json_out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto& an = a->analysis;
    json soh{{"f0_hz", an.soh.f0_hz},
             {"order", an.soh.order},
             {"amplitudes", an.soh.amplitudes},
             {"phases", an.soh.phases},
             {"residual", an.soh.residual}};
    json j{{"v0_mps", an.v0_mps},
           {"f_md_hz", an.f_md_hz},
           {"f_dmax_hz", an.f_dmax_hz},
           {"cv", an.cv},
           {"cv_flagged", an.cv_flagged},
           {"beta", an.phy.beta},
           {"beta_flagged", an.phy.beta_flagged},
           {"soh", soh}};
    *json_out = dup_string(j.dump(2));
  });
}

void mdg_analysis_free(mdg_analysis* a) { delete a; }

mdg_status mdg_represent(const mdg_recording* rec, const char* kind, const char* config_json,
                         mdg_matrix** out) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (auto s = require(kind, "kind"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto cfg = parse_pipeline(config_json);
    const auto k = mdgait::representation_from_string(kind);
    auto rep = mdgait::pipeline::represent(rec->rec, k, cfg);
    *out = new_matrix(std::move(rep.values), rep.rows, rep.cols);
  });
}

mdg_status mdg_represent_full(const mdg_recording* rec, const char* kind, const char* config_json,
                              mdg_matrix** out, char** meta_json_out) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (auto s = require(kind, "kind"); s != MDG_OK) return s;
  if (out == nullptr && meta_json_out == nullptr) {
    return fail(MDG_ERR_NULL, "mdg_represent_full: both outputs are null");
  }
  return guarded([&] {
    const auto cfg = parse_pipeline(config_json);
    const auto k = mdgait::representation_from_string(kind);
    auto rep = mdgait::pipeline::represent(rec->rec, k, cfg);
    if (meta_json_out != nullptr) {
      json meta{{"kind", mdgait::to_string(rep.kind)},
                {"rows", rep.rows},
                {"cols", rep.cols},
                {"row_label", rep.row_label},
                {"col_label", rep.col_label},
                {"row_axis", rep.row_axis},
                {"col_axis", rep.col_axis}};
      *meta_json_out = dup_string(meta.dump(2));
    }
    if (out != nullptr) *out = new_matrix(std::move(rep.values), rep.rows, rep.cols);
  });
}

mdg_status mdg_features(const mdg_recording* rec, const char* feature_set,
                        const char* config_json, mdg_matrix** out) {
  if (auto s = require(rec, "rec"); s != MDG_OK) return s;
  if (auto s = require(feature_set, "feature_set"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto cfg = parse_pipeline(config_json);
    const auto set = mdgait::pipeline::feature_set_from_string(feature_set);
    const auto analysis = mdgait::pipeline::analyze(rec->rec, cfg);
    auto vec = mdgait::pipeline::feature_vector(analysis, set);
    const std::size_t n = vec.size();
    *out = new_matrix(std::move(vec), 1, n);
  });
}

mdg_status mdg_feature_names(const char* feature_set, char** json_out) {
  if (auto s = require(feature_set, "feature_set"); s != MDG_OK) return s;
  if (auto s = require(json_out, "json_out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto set = mdgait::pipeline::feature_set_from_string(feature_set);
    *json_out = dup_string(json(mdgait::pipeline::feature_names(set)).dump());
  });
}

mdg_status mdg_config_hash(const char* config_json, char** hex_out) {
  if (auto s = require(hex_out, "hex_out"); s != MDG_OK) return s;
  return guarded([&] {
    const json j = (config_json == nullptr || *config_json == '\0')
                       ? json::object()
                       : json::parse(config_json);
    *hex_out = dup_string(config_hash_hex(j));
  });
}

mdg_status mdg_model_load(const char* path, mdg_model** out) {
  if (auto s = require(path, "path"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    auto handle = std::make_unique<mdg_model>();
    handle->stored = mdgait::io::load_model(path);
    *out = handle.release();
  });
}

mdg_status mdg_model_save(const mdg_model* model, const char* path) {
  if (auto s = require(model, "model"); s != MDG_OK) return s;
  if (auto s = require(path, "path"); s != MDG_OK) return s;
  return guarded([&] { mdgait::io::save_model(model->stored, path); });
}

mdg_status mdg_model_info(const mdg_model* model, size_t* dim, size_t* rank,
                          int* representation_kind) {
  if (auto s = require(model, "model"); s != MDG_OK) return s;
  if (dim != nullptr) *dim = model->stored.model.dim;
  if (rank != nullptr) *rank = model->stored.model.rank;
  if (representation_kind != nullptr) {
    *representation_kind = static_cast<int>(model->stored.kind);
  }
  return MDG_OK;
}

mdg_status mdg_model_project(const mdg_model* model, const double* x, size_t n, size_t k,
                             mdg_matrix** out) {
  if (auto s = require(model, "model"); s != MDG_OK) return s;
  if (auto s = require(x, "x"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    std::vector<double> input(x, x + n);
    auto z = mdgait::subspace::project(model->stored.model, input, k);
    const std::size_t cols = z.size();
    *out = new_matrix(std::move(z), 1, cols);
  });
}

mdg_status mdg_model_explained_variance(const mdg_model* model, mdg_matrix** out) {
  if (auto s = require(model, "model"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto& m = model->stored.model;
    std::vector<double> fractions(m.rank);
    for (std::size_t k = 1; k <= m.rank; ++k) {
      fractions[k - 1] = mdgait::subspace::explained_variance(m, k);
    }
    const std::size_t cols = fractions.size();
    *out = new_matrix(std::move(fractions), 1, cols);
  });
}

void mdg_model_free(mdg_model* model) { delete model; }

mdg_status mdg_simulate_dataset(const char* spec_json, const char* out_dir,
                                char** manifest_path_out) {
  if (auto s = require(out_dir, "out_dir"); s != MDG_OK) return s;
  return guarded([&] {
    mdgait::sim::DatasetSpec spec;
    mdgait::RadarConfig radar;
    if (spec_json != nullptr && *spec_json != '\0') {
      const json j = json::parse(spec_json);
      reject_unknown_keys(j,
                          {"subjects", "runs_per_class", "seed", "noise_snr_db", "radar",
                           "stride_rate_min_hz", "stride_rate_max_hz", "base_velocity_min_mps",
                           "base_velocity_max_mps", "peak_foot_velocity_min_mps",
                           "peak_foot_velocity_max_mps", "limp_attenuation_min",
                           "limp_attenuation_max", "cane_peak_velocity_min_mps",
                           "cane_peak_velocity_max_mps", "run_stride_rate_jitter_hz",
                           "run_base_velocity_jitter_mps", "run_peak_velocity_jitter_mps"},
                          "dataset spec");
      if (j.contains("subjects")) spec.subjects = j.at("subjects");
      if (j.contains("runs_per_class")) spec.runs_per_class = j.at("runs_per_class");
      if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("noise_snr_db")) {
        if (j.at("noise_snr_db").is_null()) {
          spec.noise_snr_db.reset();
        } else {
          spec.noise_snr_db = j.at("noise_snr_db").get<double>();
        }
      }
      if (j.contains("radar")) radar = parse_radar(j.at("radar"), radar);
      if (j.contains("stride_rate_min_hz")) spec.stride_rate_min_hz = j.at("stride_rate_min_hz");
      if (j.contains("stride_rate_max_hz")) spec.stride_rate_max_hz = j.at("stride_rate_max_hz");
      if (j.contains("base_velocity_min_mps")) spec.base_velocity_min_mps = j.at("base_velocity_min_mps");
      if (j.contains("base_velocity_max_mps")) spec.base_velocity_max_mps = j.at("base_velocity_max_mps");
      if (j.contains("peak_foot_velocity_min_mps")) spec.peak_foot_velocity_min_mps = j.at("peak_foot_velocity_min_mps");
      if (j.contains("peak_foot_velocity_max_mps")) spec.peak_foot_velocity_max_mps = j.at("peak_foot_velocity_max_mps");
      if (j.contains("limp_attenuation_min")) spec.limp_attenuation_min = j.at("limp_attenuation_min");
      if (j.contains("limp_attenuation_max")) spec.limp_attenuation_max = j.at("limp_attenuation_max");
      if (j.contains("cane_peak_velocity_min_mps")) spec.cane_peak_velocity_min_mps = j.at("cane_peak_velocity_min_mps");
      if (j.contains("cane_peak_velocity_max_mps")) spec.cane_peak_velocity_max_mps = j.at("cane_peak_velocity_max_mps");
      if (j.contains("run_stride_rate_jitter_hz")) spec.run_stride_rate_jitter_hz = j.at("run_stride_rate_jitter_hz");
      if (j.contains("run_base_velocity_jitter_mps")) spec.run_base_velocity_jitter_mps = j.at("run_base_velocity_jitter_mps");
      if (j.contains("run_peak_velocity_jitter_mps")) spec.run_peak_velocity_jitter_mps = j.at("run_peak_velocity_jitter_mps");
    }

    const auto plan = mdgait::sim::plan_dataset(spec);
    std::filesystem::create_directories(out_dir);

    mdgait::io::Manifest manifest;
    manifest.root = out_dir;
    manifest.entries.resize(plan.size());

    mdgait::parallel_for(plan.size(), [&](std::size_t i) {
      const auto& planned = plan[i];
      const mdgait::IQRecording rec = mdgait::sim::synthesize(planned.profile, radar);
      const std::string filename = planned.stem + ".iq";
      mdgait::io::save_recording(rec, (std::filesystem::path(out_dir) / filename).string());
      auto& e = manifest.entries[i];
      e.file = filename;
      e.subject_id = planned.subject_id;
      e.label = planned.profile.gait_class;
      e.direction = planned.profile.direction;
    });

    const std::string manifest_path =
        (std::filesystem::path(out_dir) / "manifest.csv").string();
    mdgait::io::save_manifest(manifest, manifest_path);
    if (manifest_path_out != nullptr) *manifest_path_out = dup_string(manifest_path);
  });
}

mdg_status mdg_fit_pca(const char* manifest_path, const char* representation_kind,
                       size_t max_components, const char* config_json, mdg_model** out) {
  if (auto s = require(manifest_path, "manifest_path"); s != MDG_OK) return s;
  if (auto s = require(representation_kind, "representation_kind"); s != MDG_OK) return s;
  if (auto s = require(out, "out"); s != MDG_OK) return s;
  return guarded([&] {
    const auto cfg = parse_pipeline(config_json);
    const auto kind = mdgait::representation_from_string(representation_kind);
    const auto manifest = mdgait::io::load_manifest(manifest_path);
    if (manifest.entries.empty()) throw std::invalid_argument("manifest has no entries");
    const auto matrix = mdgait::pipeline::batch_representation(
        [&](std::size_t i) { return load_entry(manifest, i); }, manifest.entries.size(), kind,
        cfg);
    auto handle = std::make_unique<mdg_model>();
    handle->stored.model = mdgait::subspace::fit_pca(matrix.rows, max_components);
    handle->stored.kind = kind;
    *out = handle.release();
  });
}

mdg_status mdg_experiment_run(const char* manifest_path, const char* run_config_json,
                              char** report_json_out) {
  if (auto s = require(manifest_path, "manifest_path"); s != MDG_OK) return s;
  if (auto s = require(run_config_json, "run_config_json"); s != MDG_OK) return s;
  if (auto s = require(report_json_out, "report_json_out"); s != MDG_OK) return s;
  return guarded([&] {
    const json j = json::parse(run_config_json);
    reject_unknown_keys(j,
                        {"feature", "representation", "lambda", "kappa", "cv", "direction",
                         "sweep_lambda", "sweep_kappa", "pipeline"},
                        "run config");
    const std::string feature = j.at("feature").get<std::string>();
    const bool use_pca = feature == "pca";
    const auto rep_kind = mdgait::representation_from_string(
        j.value("representation", std::string("cvd-pre")));
    const auto lambda = j.value("lambda", std::size_t{22});
    const auto kappa = j.value("kappa", std::size_t{1});
    const std::string direction_filter = j.value("direction", std::string("pooled"));
    if (direction_filter != "pooled" && direction_filter != "toward" &&
        direction_filter != "away") {
      throw std::invalid_argument("direction must be pooled|toward|away");
    }

    std::string cv_scheme = "kfold";
    std::size_t n_folds = 10;
    std::uint64_t cv_seed = 7;
    if (j.contains("cv")) {
      const json& cv = j.at("cv");
      reject_unknown_keys(cv, {"scheme", "folds", "seed"}, "cv");
      cv_scheme = cv.value("scheme", std::string("kfold"));
      if (cv_scheme != "kfold" && cv_scheme != "loso") {
        throw std::invalid_argument("cv scheme must be kfold|loso");
      }
      n_folds = cv.value("folds", std::size_t{10});
      cv_seed = cv.value("seed", std::uint64_t{7});
    }

    const std::string pipeline_json =
        j.contains("pipeline") ? j.at("pipeline").dump() : std::string();
    const auto cfg = parse_pipeline(pipeline_json.empty() ? nullptr : pipeline_json.c_str());

    // Direction filtering happens at the manifest level, before any feature
    // work, so toward/away experiments see only their half of the data.
    auto manifest = mdgait::io::load_manifest(manifest_path);
    if (direction_filter != "pooled") {
      const auto want = mdgait::direction_from_string(direction_filter);
      std::vector<mdgait::io::ManifestEntry> kept;
      for (auto& e : manifest.entries) {
        if (e.direction == want) kept.push_back(std::move(e));
      }
      manifest.entries = std::move(kept);
    }
    if (manifest.entries.empty()) throw std::invalid_argument("no recordings selected");
    const std::size_t n = manifest.entries.size();
    const auto source = [&](std::size_t i) { return load_entry(manifest, i); };

    mdgait::pipeline::LabeledMatrix matrix;
    if (use_pca) {
      matrix = mdgait::pipeline::batch_representation(source, n, rep_kind, cfg);
    } else {
      matrix = mdgait::pipeline::batch_features(
          source, n, mdgait::pipeline::feature_set_from_string(feature), cfg);
    }

    const auto folds = cv_scheme == "kfold"
                           ? mdgait::ml::stratified_folds(matrix.labels, n_folds, cv_seed)
                           : mdgait::ml::subject_folds(matrix.subjects);

    json report{{"feature", feature},
                {"kappa", kappa},
                {"direction", direction_filter},
                {"cv", {{"scheme", cv_scheme}, {"folds", folds.size()}, {"seed", cv_seed}}},
                {"n_samples", n},
                {"class_order", json::array({"NW", "L1", "L2", "CW", "CW/oos"})},
                {"config_hash", config_hash_hex(j)}};
    if (use_pca) {
      report["representation"] = mdgait::to_string(rep_kind);
      report["lambda"] = lambda;
    }

    if (use_pca) {
      std::vector<std::size_t> dims{lambda};
      if (j.contains("sweep_lambda")) {
        for (const auto& v : j.at("sweep_lambda")) dims.push_back(v.get<std::size_t>());
      }
      std::sort(dims.begin(), dims.end());
      dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
      const auto results =
          mdgait::ml::cross_validate_pca(matrix.rows, matrix.labels, folds, kappa, dims);
      json sweep = json::array();
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] == lambda) report["metrics"] = cross_val_to_json(results[i]);
        if (j.contains("sweep_lambda")) {
          json entry = cross_val_to_json(results[i]);
          entry["lambda"] = dims[i];
          sweep.push_back(std::move(entry));
        }
      }
      if (j.contains("sweep_lambda")) report["sweep_lambda"] = std::move(sweep);
    } else {
      report["metrics"] =
          cross_val_to_json(mdgait::ml::cross_validate(matrix.rows, matrix.labels, folds, kappa));
    }

    if (j.contains("sweep_kappa")) {
      json sweep = json::array();
      for (const auto& kv : j.at("sweep_kappa")) {
        const auto k = kv.get<std::size_t>();
        mdgait::ml::CrossValResult r;
        if (use_pca) {
          r = mdgait::ml::cross_validate_pca(matrix.rows, matrix.labels, folds, k, {lambda})[0];
        } else {
          r = mdgait::ml::cross_validate(matrix.rows, matrix.labels, folds, k);
        }
        json entry = cross_val_to_json(r);
        entry["kappa"] = k;
        sweep.push_back(std::move(entry));
      }
      report["sweep_kappa"] = std::move(sweep);
    }

    *report_json_out = dup_string(report.dump(2));
  });
}

} /* extern "C" */
