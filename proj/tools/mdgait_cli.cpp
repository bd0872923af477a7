// mdgait command-line tool.
//
// Orchestrates the shared library through its C interface only: simulate
// datasets, export representations, extract features, fit subspace models,
// run classification experiments, and render plots. Exit codes: 0 success
// (and, for `evaluate`, all configured thresholds met), 1 validation error,
// 2 runtime failure.

#include <mdgait/mdgait.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "render.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliError {
  int code;  // 1 validation, 2 runtime
  std::string message;
};

int code_for(mdg_status s) {
  switch (s) {
    case MDG_OK: return 0;
    case MDG_ERR_INVALID_ARGUMENT:
    case MDG_ERR_NULL: return 1;
    default: return 2;
  }
}

void check(mdg_status s, const std::string& context) {
  if (s == MDG_OK) return;
  std::string msg = mdg_last_error();
  if (msg.empty()) msg = "unspecified library error";
  throw CliError{code_for(s), context.empty() ? msg : context + ": " + msg};
}

struct StringFree {
  void operator()(char* s) const { mdg_string_free(s); }
};
struct MatrixFree {
  void operator()(mdg_matrix* m) const { mdg_matrix_free(m); }
};
struct RecordingFree {
  void operator()(mdg_recording* r) const { mdg_recording_free(r); }
};
struct ModelFree {
  void operator()(mdg_model* m) const { mdg_model_free(m); }
};
using CString = std::unique_ptr<char, StringFree>;
using MatrixPtr = std::unique_ptr<mdg_matrix, MatrixFree>;
using RecordingPtr = std::unique_ptr<mdg_recording, RecordingFree>;
using ModelPtr = std::unique_ptr<mdg_model, ModelFree>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{1, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{2, "cannot write " + tmp.string()};
    out << text;
    if (!out) throw CliError{2, "write failed: " + tmp.string()};
  }
  fs::rename(tmp, path);
}

std::string config_hash(const std::string& config_json) {
  char* hex = nullptr;
  check(mdg_config_hash(config_json.empty() ? nullptr : config_json.c_str(), &hex),
        "config hash");
  CString holder(hex);
  return holder.get();
}

// --------------------------------------------------------------- manifests

struct ManifestRow {
  std::string file, subject, cls, direction;
};

struct ManifestData {
  fs::path root;
  std::vector<ManifestRow> rows;
};

ManifestData read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{1, "cannot read manifest " + path};
  ManifestData m;
  m.root = fs::path(path).parent_path();
  std::string line;
  if (!std::getline(in, line)) throw CliError{1, "empty manifest " + path};
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  if (line != "file,subject_id,class,direction") {
    throw CliError{1, path + ": unexpected manifest header '" + line + "'"};
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    ManifestRow row;
    std::string* fields[] = {&row.file, &row.subject, &row.cls, &row.direction};
    std::size_t start = 0, field = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (field >= 4) throw CliError{1, path + ":" + std::to_string(lineno) + ": too many fields"};
        *fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != 4) throw CliError{1, path + ":" + std::to_string(lineno) + ": expected 4 fields"};
    m.rows.push_back(std::move(row));
  }
  if (m.rows.empty()) throw CliError{1, path + ": manifest has no entries"};
  return m;
}

RecordingPtr load_recording(const fs::path& path) {
  mdg_recording* rec = nullptr;
  check(mdg_recording_load(path.string().c_str(), &rec), path.filename().string());
  return RecordingPtr(rec);
}

// ------------------------------------------------------------- parallelism

unsigned thread_count(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MDOP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Propagate the worker-pool size to the library so its internal batch
// parallelism obeys the same cap.
void apply_thread_flag(unsigned flag) {
  if (flag > 0) setenv("MDOP_THREADS", std::to_string(flag).c_str(), 1);
}

template <typename Fn>
void parallel_rows(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, n == 0 ? 1 : static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::optional<CliError> first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.has_value()) return;
      }
      try {
        fn(i);
      } catch (const CliError& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error.has_value()) first_error = e;
        return;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error.has_value()) first_error = CliError{2, e.what()};
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error.has_value()) throw *first_error;
}

// ----------------------------------------------------------------- CSV I/O

std::string matrix_to_csv(const double* data, std::size_t rows, std::size_t cols) {
  std::string out;
  out.reserve(rows * cols * 20);
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", data[r * cols + c]);
      out += buf;
      out += (c + 1 == cols) ? '\n' : ',';
    }
  }
  return out;
}

struct CsvMatrix {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

CsvMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{1, "cannot read " + path};
  CsvMatrix m;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::size_t cols = 0;
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw CliError{1, path + ": not a numeric CSV matrix"};
      m.values.push_back(v);
      ++cols;
      p = end;
      while (*p == ' ') ++p;
      if (*p == ',') {
        ++p;
        continue;
      }
      if (*p == '\0') break;
      throw CliError{1, path + ": unexpected character '" + std::string(1, *p) + "'"};
    }
    if (m.cols == 0) {
      m.cols = cols;
    } else if (cols != m.cols) {
      throw CliError{1, path + ": ragged rows (" + std::to_string(cols) + " vs " +
                            std::to_string(m.cols) + " columns)"};
    }
    ++m.rows;
  }
  if (m.rows == 0) throw CliError{1, path + ": empty matrix"};
  return m;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      const std::string tok = text.substr(start, i - start);
      start = i + 1;
      if (tok.empty()) continue;
      char* end = nullptr;
      const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
      if (end == nullptr || *end != '\0' || v == 0) {
        throw CliError{1, what + ": '" + tok + "' is not a positive integer"};
      }
      out.push_back(static_cast<std::size_t>(v));
    }
  }
  if (out.empty()) throw CliError{1, what + ": empty list"};
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out;
  std::string config;
  unsigned subjects = 0;
  unsigned runs = 0;
  long long seed = -1;
  double snr = 0.0;
  bool has_snr = false;
  bool noiseless = false;
  double duration = 0.0, fs = 0.0, fc = 0.0;
  unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  apply_thread_flag(a.threads);
  json spec = a.config.empty() ? json::object() : json::parse(read_text(a.config));
  if (a.subjects > 0) spec["subjects"] = a.subjects;
  if (a.runs > 0) spec["runs_per_class"] = a.runs;
  if (a.seed >= 0) spec["seed"] = static_cast<std::uint64_t>(a.seed);
  if (a.noiseless) {
    spec["noise_snr_db"] = nullptr;
  } else if (a.has_snr) {
    spec["noise_snr_db"] = a.snr;
  }
  if (a.duration > 0.0) spec["radar"]["duration_s"] = a.duration;
  if (a.fs > 0.0) spec["radar"]["sampling_frequency_hz"] = a.fs;
  if (a.fc > 0.0) spec["radar"]["carrier_frequency_hz"] = a.fc;

  const std::string spec_text = spec.dump();
  char* manifest_path = nullptr;
  check(mdg_simulate_dataset(spec_text.c_str(), a.out.c_str(), &manifest_path), "simulate");
  CString manifest_holder(manifest_path);

  const ManifestData manifest = read_manifest(manifest_path);
  std::map<std::string, std::size_t> per_class;
  for (const auto& row : manifest.rows) per_class[row.cls]++;

  const std::string hash = config_hash(spec_text);
  json sidecar{{"command", "simulate"},
               {"config_hash", hash},
               {"spec", spec},
               {"recordings", manifest.rows.size()},
               {"per_class", per_class}};
  write_text_atomic(fs::path(a.out) / "dataset.json", sidecar.dump(2) + "\n");

  std::cout << "wrote " << manifest.rows.size() << " recordings to " << a.out << "\n";
  for (const auto& [cls, count] : per_class) std::cout << "  " << cls << ": " << count << "\n";
  std::cout << "manifest: " << manifest_path << " (config " << hash << ")\n";
  return 0;
}

// --------------------------------------------------------------- represent

struct RepresentArgs {
  std::string manifest;
  std::string kind = "spectrogram";
  std::string out;
  std::string config;
  unsigned threads = 0;
};

int cmd_represent(const RepresentArgs& a) {
  const ManifestData manifest = read_manifest(a.manifest);
  const std::string cfg = a.config.empty() ? std::string() : read_text(a.config);
  const char* cfg_c = cfg.empty() ? nullptr : cfg.c_str();
  const std::string hash = config_hash(cfg);
  fs::create_directories(a.out);

  parallel_rows(manifest.rows.size(), thread_count(a.threads), [&](std::size_t i) {
    const ManifestRow& row = manifest.rows[i];
    const RecordingPtr rec = load_recording(manifest.root / row.file);
    mdg_matrix* mat = nullptr;
    char* meta = nullptr;
    check(mdg_represent_full(rec.get(), a.kind.c_str(), cfg_c, &mat, &meta), row.file);
    const MatrixPtr mat_holder(mat);
    const CString meta_holder(meta);

    json sidecar = json::parse(meta);
    sidecar["source"] = row.file;
    sidecar["subject_id"] = row.subject;
    sidecar["class"] = row.cls;
    sidecar["direction"] = row.direction;
    sidecar["config_hash"] = hash;

    const std::string stem = fs::path(row.file).stem().string() + "." + a.kind;
    write_text_atomic(fs::path(a.out) / (stem + ".csv"),
                      matrix_to_csv(mdg_matrix_data(mat), mdg_matrix_rows(mat),
                                    mdg_matrix_cols(mat)));
    write_text_atomic(fs::path(a.out) / (stem + ".json"), sidecar.dump(2) + "\n");
  });

  std::cout << "wrote " << manifest.rows.size() << " " << a.kind << " matrices to " << a.out
            << " (config " << hash << ")\n";
  return 0;
}

// --------------------------------------------------------------- featurize

struct FeaturizeArgs {
  std::string manifest;
  std::string set = "phy";
  std::string model;
  std::string out = "features.csv";
  std::string config;
  unsigned lambda = 0;
  unsigned threads = 0;
};

int cmd_featurize(const FeaturizeArgs& a) {
  const ManifestData manifest = read_manifest(a.manifest);
  const std::string cfg = a.config.empty() ? std::string() : read_text(a.config);
  const char* cfg_c = cfg.empty() ? nullptr : cfg.c_str();
  const std::string hash = config_hash(cfg);

  const bool use_pca = a.set == "pca";
  ModelPtr model;
  std::string rep_kind;
  std::size_t model_dim = 0, project_k = 0;
  std::vector<std::string> names;

  if (use_pca) {
    if (a.model.empty()) {
      throw CliError{1, "featurize: the pca feature set needs a fitted model (--model)"};
    }
    mdg_model* raw = nullptr;
    check(mdg_model_load(a.model.c_str(), &raw), a.model);
    model.reset(raw);
    std::size_t rank = 0;
    int kind_int = -1;
    check(mdg_model_info(model.get(), &model_dim, &rank, &kind_int), a.model);
    const char* kind_name = mdg_representation_name(kind_int);
    if (kind_name == nullptr) throw CliError{2, a.model + ": unknown representation kind"};
    rep_kind = kind_name;
    project_k = a.lambda > 0 ? a.lambda : rank;
    if (project_k > rank) {
      throw CliError{1, "featurize: --lambda " + std::to_string(project_k) +
                            " exceeds the model rank " + std::to_string(rank)};
    }
    for (std::size_t j = 1; j <= project_k; ++j) names.push_back("pca_" + std::to_string(j));
  } else {
    char* names_json = nullptr;
    check(mdg_feature_names(a.set.c_str(), &names_json), "feature names");
    const CString holder(names_json);
    for (const auto& n : json::parse(names_json)) names.push_back(n.get<std::string>());
  }

  std::vector<std::vector<double>> results(manifest.rows.size());
  parallel_rows(manifest.rows.size(), thread_count(a.threads), [&](std::size_t i) {
    const ManifestRow& row = manifest.rows[i];
    const RecordingPtr rec = load_recording(manifest.root / row.file);
    mdg_matrix* mat = nullptr;
    if (use_pca) {
      mdg_matrix* rep = nullptr;
      check(mdg_represent(rec.get(), rep_kind.c_str(), cfg_c, &rep), row.file);
      const MatrixPtr rep_holder(rep);
      check(mdg_model_project(model.get(), mdg_matrix_data(rep),
                              mdg_matrix_rows(rep) * mdg_matrix_cols(rep), project_k, &mat),
            row.file);
    } else {
      check(mdg_features(rec.get(), a.set.c_str(), cfg_c, &mat), row.file);
    }
    const MatrixPtr holder(mat);
    const double* data = mdg_matrix_data(mat);
    results[i].assign(data, data + mdg_matrix_rows(mat) * mdg_matrix_cols(mat));
  });

  std::string csv = "file,subject_id,class,direction";
  for (const auto& n : names) csv += "," + n;
  csv += '\n';
  char buf[32];
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const ManifestRow& row = manifest.rows[i];
    if (results[i].size() != names.size()) {
      throw CliError{2, row.file + ": feature arity " + std::to_string(results[i].size()) +
                            " does not match header " + std::to_string(names.size())};
    }
    csv += row.file + "," + row.subject + "," + row.cls + "," + row.direction;
    for (double v : results[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      csv += ",";
      csv += buf;
    }
    csv += '\n';
  }
  write_text_atomic(a.out, csv);

  json sidecar{{"command", "featurize"}, {"feature_set", a.set},
               {"config_hash", hash},   {"manifest", a.manifest},
               {"rows", manifest.rows.size()}, {"columns", names.size()}};
  if (use_pca) sidecar["model"] = a.model;
  write_text_atomic(a.out + ".json", sidecar.dump(2) + "\n");

  std::cout << "wrote " << manifest.rows.size() << " x " << names.size() << " feature table ("
            << a.set << ") to " << a.out << "\n";
  return 0;
}

// ----------------------------------------------------------------- fit-pca

struct FitPcaArgs {
  std::string manifest;
  std::string kind = "cvd-pre";
  std::string out = "model.mdpc";
  std::string config;
  unsigned components = 0;
  unsigned threads = 0;
};

int cmd_fit_pca(const FitPcaArgs& a) {
  apply_thread_flag(a.threads);
  const std::string cfg = a.config.empty() ? std::string() : read_text(a.config);
  const char* cfg_c = cfg.empty() ? nullptr : cfg.c_str();
  const std::string hash = config_hash(cfg);

  mdg_model* raw = nullptr;
  check(mdg_fit_pca(a.manifest.c_str(), a.kind.c_str(), a.components, cfg_c, &raw), "fit-pca");
  const ModelPtr model(raw);
  check(mdg_model_save(model.get(), a.out.c_str()), a.out);

  std::size_t dim = 0, rank = 0;
  int kind_int = -1;
  check(mdg_model_info(model.get(), &dim, &rank, &kind_int), "model info");

  mdg_matrix* ev_raw = nullptr;
  check(mdg_model_explained_variance(model.get(), &ev_raw), "explained variance");
  const MatrixPtr ev(ev_raw);
  const double* fractions = mdg_matrix_data(ev_raw);
  const double at_rank = rank > 0 ? fractions[rank - 1] : 0.0;

  json sidecar{{"command", "fit-pca"}, {"representation", a.kind},
               {"config_hash", hash},  {"manifest", a.manifest},
               {"dim", dim},           {"rank", rank},
               {"explained_variance", at_rank}};
  write_text_atomic(a.out + ".json", sidecar.dump(2) + "\n");

  std::cout << "fitted " << rank << "-component model on " << dim << "-dimensional " << a.kind
            << " inputs -> " << a.out << "\n";
  std::cout << "explained variance at rank: " << at_rank * 100.0 << "%\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string manifest;
  std::string run;
  std::string out = "eval-out";
  std::string feature;
  std::string representation;
  std::string scheme;
  std::string direction;
  std::string sweep_lambda;
  std::string sweep_kappa;
  long long lambda = -1;
  long long kappa = -1;
  long long folds = -1;
  long long seed = -1;
  double min_accuracy = 0.0;
  bool has_min_accuracy = false;
  double max_fnr = 0.0;
  bool has_max_fnr = false;
  double max_fpr = 0.0;
  bool has_max_fpr = false;
  unsigned threads = 0;
};

std::string sweep_csv(const json& entries, const std::string& key) {
  std::string csv = key + ",accuracy,fpr,fnr,tpr,ci95_halfwidth\n";
  char buf[32];
  for (const auto& e : entries) {
    csv += std::to_string(e.at(key).get<std::size_t>());
    for (const char* field : {"accuracy", "fpr", "fnr", "tpr", "ci95_halfwidth"}) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.at(field).get<double>());
      csv += ",";
      csv += buf;
    }
    csv += '\n';
  }
  return csv;
}

int cmd_evaluate(const EvaluateArgs& a) {
  apply_thread_flag(a.threads);
  json run = a.run.empty() ? json::object() : json::parse(read_text(a.run));

  // "thresholds" belongs to the CLI, not to the library run config.
  json thresholds = json::object();
  if (run.contains("thresholds")) {
    thresholds = run.at("thresholds");
    run.erase("thresholds");
  }
  if (a.has_min_accuracy) thresholds["min_accuracy"] = a.min_accuracy;
  if (a.has_max_fnr) thresholds["max_fnr"] = a.max_fnr;
  if (a.has_max_fpr) thresholds["max_fpr"] = a.max_fpr;

  if (!a.feature.empty()) run["feature"] = a.feature;
  if (!run.contains("feature")) run["feature"] = "pca";
  if (!a.representation.empty()) run["representation"] = a.representation;
  if (a.lambda >= 0) run["lambda"] = static_cast<std::size_t>(a.lambda);
  if (a.kappa >= 0) run["kappa"] = static_cast<std::size_t>(a.kappa);
  if (!a.scheme.empty()) run["cv"]["scheme"] = a.scheme;
  if (a.folds >= 0) run["cv"]["folds"] = static_cast<std::size_t>(a.folds);
  if (a.seed >= 0) run["cv"]["seed"] = static_cast<std::uint64_t>(a.seed);
  if (!a.direction.empty()) run["direction"] = a.direction;
  if (!a.sweep_lambda.empty()) run["sweep_lambda"] = parse_size_list(a.sweep_lambda, "--sweep-lambda");
  if (!a.sweep_kappa.empty()) run["sweep_kappa"] = parse_size_list(a.sweep_kappa, "--sweep-kappa");

  char* report_raw = nullptr;
  check(mdg_experiment_run(a.manifest.c_str(), run.dump().c_str(), &report_raw), "evaluate");
  const CString report_holder(report_raw);
  json report = json::parse(report_raw);

  const json& metrics = report.at("metrics");
  const double accuracy = metrics.at("accuracy").get<double>();
  const double fpr = metrics.at("fpr").get<double>();
  const double fnr = metrics.at("fnr").get<double>();
  const double ci = metrics.at("ci95_halfwidth").get<double>();

  // Threshold verdicts ride along in the report for provenance.
  bool met = true;
  json verdicts = json::object();
  const auto check_threshold = [&](const char* name, double value, bool lower_is_pass) {
    if (!thresholds.contains(name)) return;
    const double bound = thresholds.at(name).get<double>();
    const bool pass = lower_is_pass ? value <= bound : value >= bound;
    verdicts[name] = json{{"bound", bound}, {"value", value}, {"pass", pass}};
    if (!pass) met = false;
  };
  check_threshold("min_accuracy", accuracy, false);
  check_threshold("max_fnr", fnr, true);
  check_threshold("max_fpr", fpr, true);
  if (!thresholds.empty()) report["thresholds"] = verdicts;

  fs::create_directories(a.out);
  write_text_atomic(fs::path(a.out) / "report.json", report.dump(2) + "\n");

  const json& order = report.at("class_order");
  std::string confusion = "truth";
  for (const auto& c : order) confusion += "," + c.get<std::string>();
  confusion += '\n';
  const json& counts = metrics.at("confusion_counts");
  char buf[32];
  for (std::size_t t = 0; t < order.size(); ++t) {
    confusion += order[t].get<std::string>();
    for (std::size_t p = 0; p < order.size(); ++p) {
      std::snprintf(buf, sizeof(buf), "%g", counts[t][p].get<double>());
      confusion += ",";
      confusion += buf;
    }
    confusion += '\n';
  }
  write_text_atomic(fs::path(a.out) / "confusion.csv", confusion);

  if (report.contains("sweep_lambda")) {
    write_text_atomic(fs::path(a.out) / "sweep_lambda.csv",
                      sweep_csv(report.at("sweep_lambda"), "lambda"));
  }
  if (report.contains("sweep_kappa")) {
    write_text_atomic(fs::path(a.out) / "sweep_kappa.csv",
                      sweep_csv(report.at("sweep_kappa"), "kappa"));
  }

  std::printf("feature=%s n=%zu cv=%s accuracy=%.2f%% (+/- %.2f) fpr=%.2f%% fnr=%.2f%%\n",
              report.at("feature").get<std::string>().c_str(),
              report.at("n_samples").get<std::size_t>(),
              report.at("cv").at("scheme").get<std::string>().c_str(), 100.0 * accuracy,
              100.0 * ci, 100.0 * fpr, 100.0 * fnr);
  const json& per_class = metrics.at("per_class_accuracy");
  std::printf("per-class accuracy:");
  for (std::size_t c = 0; c < order.size(); ++c) {
    std::printf(" %s=%.1f%%", order[c].get<std::string>().c_str(),
                100.0 * per_class[c].get<double>());
  }
  std::printf("\nreport: %s\n", (fs::path(a.out) / "report.json").string().c_str());

  for (auto it = verdicts.begin(); it != verdicts.end(); ++it) {
    const json& v = it.value();
    std::printf("threshold %s %.4g: %s (measured %.4g)\n", it.key().c_str(),
                v.at("bound").get<double>(), v.at("pass").get<bool>() ? "pass" : "FAIL",
                v.at("value").get<double>());
  }
  if (!met) {
    std::fprintf(stderr, "mdgait evaluate: thresholds not met\n");
    return 1;
  }
  return 0;
}

// -------------------------------------------------------------------- plot

struct PlotArgs {
  std::string input;
  std::string kind = "auto";
  std::string out;
  std::string title;
};

int cmd_plot(const PlotArgs& a) {
  const CsvMatrix mat = read_csv_matrix(a.input);

  // Sidecar (X.csv -> X.json) supplies axes and a default kind.
  json meta = json::object();
  fs::path sidecar_path(a.input);
  sidecar_path.replace_extension(".json");
  if (fs::exists(sidecar_path)) meta = json::parse(read_text(sidecar_path.string()));

  std::string kind = a.kind;
  if (kind == "auto") {
    kind = meta.value("kind", mat.rows == 1 ? std::string("line") : std::string("heatmap"));
  }

  std::vector<double> row_axis = meta.value("row_axis", std::vector<double>{});
  std::vector<double> col_axis = meta.value("col_axis", std::vector<double>{});
  if (row_axis.size() != mat.rows) {
    row_axis.resize(mat.rows);
    for (std::size_t i = 0; i < mat.rows; ++i) row_axis[i] = static_cast<double>(i);
  }
  if (col_axis.size() != mat.cols) {
    col_axis.resize(mat.cols);
    for (std::size_t i = 0; i < mat.cols; ++i) col_axis[i] = static_cast<double>(i);
  }
  const std::string row_label = meta.value("row_label", std::string("row"));
  const std::string col_label = meta.value("col_label", std::string("column"));

  std::string title = a.title;
  if (title.empty() && meta.contains("source")) {
    title = kind + "  " + meta.value("source", std::string());
  }

  render::Image img(1, 1);
  if (kind == "spectrogram") {
    render::HeatmapOptions opts;
    opts.db_scale = true;
    opts.db_floor = -60.0;
    opts.title = title;
    img = render::render_heatmap(mat.values, mat.rows, mat.cols, row_axis, col_axis, row_label,
                                 col_label, opts);
  } else if (kind == "cvd" || kind == "cvd-pre" || kind == "heatmap") {
    render::HeatmapOptions opts;
    opts.title = title;
    img = render::render_heatmap(mat.values, mat.rows, mat.cols, row_axis, col_axis, row_label,
                                 col_label, opts);
  } else if (kind == "mcs" || kind == "mcs-pre" || kind == "ft-filtered-time" || kind == "line") {
    if (mat.rows != 1) {
      throw CliError{1, "plot: kind '" + kind + "' needs a single-row matrix, got " +
                            std::to_string(mat.rows) + " rows"};
    }
    render::LineOptions opts;
    opts.title = title;
    img = render::render_line(mat.values, col_axis, col_label, opts);
  } else {
    throw CliError{1, "plot: unknown kind '" + kind + "'"};
  }

  std::string out = a.out;
  if (out.empty()) {
    fs::path p(a.input);
    p.replace_extension(".png");
    out = p.string();
  }
  render::write_png(img, out);
  std::cout << "wrote " << out << " (" << img.width << "x" << img.height << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"micro-Doppler gait analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Synthesize a labeled IQ dataset");
  c_sim->add_option("--out", sim.out, "Output directory")->required();
  c_sim->add_option("--config", sim.config, "Dataset spec JSON file");
  c_sim->add_option("--subjects", sim.subjects, "Number of subjects");
  c_sim->add_option("--runs", sim.runs, "Runs per subject per class");
  c_sim->add_option("--seed", sim.seed, "Master seed");
  CLI::Option* snr_opt = c_sim->add_option("--snr", sim.snr, "Additive noise SNR in dB");
  c_sim->add_flag("--noiseless", sim.noiseless, "Disable additive noise");
  c_sim->add_option("--duration", sim.duration, "Recording duration in seconds");
  c_sim->add_option("--fs", sim.fs, "Sampling frequency in Hz");
  c_sim->add_option("--fc", sim.fc, "Carrier frequency in Hz");
  c_sim->add_option("--threads", sim.threads, "Worker pool size (default MDOP_THREADS/all cores)");

  RepresentArgs rep;
  CLI::App* c_rep = app.add_subcommand("represent", "Export representation matrices per recording");
  c_rep->add_option("--manifest", rep.manifest, "Dataset manifest CSV")->required();
  c_rep->add_option("--kind", rep.kind,
                    "spectrogram|cvd|mcs|cvd-pre|mcs-pre|ft-filtered-time");
  c_rep->add_option("--out", rep.out, "Output directory")->required();
  c_rep->add_option("--config", rep.config, "Pipeline config JSON file");
  c_rep->add_option("--threads", rep.threads, "Worker pool size");

  FeaturizeArgs feat;
  CLI::App* c_feat = app.add_subcommand("featurize", "Extract a feature table from a manifest");
  c_feat->add_option("--manifest", feat.manifest, "Dataset manifest CSV")->required();
  c_feat->add_option("--set", feat.set, "phy|b1|b2|r1|r2|pca");
  c_feat->add_option("--model", feat.model, "Fitted model (.mdpc), required for pca");
  c_feat->add_option("--lambda", feat.lambda, "Number of pca components (default: model rank)");
  c_feat->add_option("--out", feat.out, "Output CSV path");
  c_feat->add_option("--config", feat.config, "Pipeline config JSON file");
  c_feat->add_option("--threads", feat.threads, "Worker pool size");

  FitPcaArgs fit;
  CLI::App* c_fit = app.add_subcommand("fit-pca", "Fit a PCA subspace model on a manifest");
  c_fit->add_option("--manifest", fit.manifest, "Dataset manifest CSV")->required();
  c_fit->add_option("--kind", fit.kind, "Representation to vectorize");
  c_fit->add_option("--components", fit.components, "Component cap (0 = full rank)");
  c_fit->add_option("--out", fit.out, "Model output path (.mdpc)");
  c_fit->add_option("--config", fit.config, "Pipeline config JSON file");
  c_fit->add_option("--threads", fit.threads, "Worker pool size");

  EvaluateArgs ev;
  CLI::App* c_ev = app.add_subcommand("evaluate", "Run a cross-validated classification experiment");
  c_ev->add_option("--manifest", ev.manifest, "Dataset manifest CSV")->required();
  c_ev->add_option("--run", ev.run, "Run config JSON (may include a \"thresholds\" object)");
  c_ev->add_option("--out", ev.out, "Output directory for report/confusion/sweeps");
  c_ev->add_option("--feature", ev.feature, "pca|phy|b1|b2|r1|r2");
  c_ev->add_option("--representation", ev.representation, "Representation for pca");
  c_ev->add_option("--lambda", ev.lambda, "Subspace dimension for pca");
  c_ev->add_option("--kappa", ev.kappa, "kNN neighborhood size");
  c_ev->add_option("--scheme", ev.scheme, "kfold|loso");
  c_ev->add_option("--folds", ev.folds, "Fold count for kfold");
  c_ev->add_option("--seed", ev.seed, "Fold shuffling seed");
  c_ev->add_option("--direction", ev.direction, "pooled|toward|away");
  c_ev->add_option("--sweep-lambda", ev.sweep_lambda, "Comma-separated lambda sweep");
  c_ev->add_option("--sweep-kappa", ev.sweep_kappa, "Comma-separated kappa sweep");
  CLI::Option* acc_opt =
      c_ev->add_option("--min-accuracy", ev.min_accuracy, "Pass threshold, fraction in [0,1]");
  CLI::Option* fnr_opt =
      c_ev->add_option("--max-fnr", ev.max_fnr, "Pass threshold, fraction in [0,1]");
  CLI::Option* fpr_opt =
      c_ev->add_option("--max-fpr", ev.max_fpr, "Pass threshold, fraction in [0,1]");
  c_ev->add_option("--threads", ev.threads, "Worker pool size");

  PlotArgs plot;
  CLI::App* c_plot = app.add_subcommand("plot", "Render an exported matrix to PNG");
  c_plot->add_option("--input", plot.input, "Matrix CSV (sidecar JSON picked up automatically)")
      ->required();
  c_plot->add_option("--kind", plot.kind,
                     "auto|spectrogram|cvd|cvd-pre|heatmap|mcs|mcs-pre|ft-filtered-time|line");
  c_plot->add_option("--out", plot.out, "Output PNG path (default: input with .png)");
  c_plot->add_option("--title", plot.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // help/version exit 0, any parse problem is a validation error
  }

  sim.has_snr = snr_opt->count() > 0;
  ev.has_min_accuracy = acc_opt->count() > 0;
  ev.has_max_fnr = fnr_opt->count() > 0;
  ev.has_max_fpr = fpr_opt->count() > 0;

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_rep->parsed()) return cmd_represent(rep);
    if (c_feat->parsed()) return cmd_featurize(feat);
    if (c_fit->parsed()) return cmd_fit_pca(fit);
    if (c_ev->parsed()) return cmd_evaluate(ev);
    if (c_plot->parsed()) return cmd_plot(plot);
  } catch (const CliError& e) {
    std::fprintf(stderr, "mdgait: %s\n", e.message.c_str());
    return e.code;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "mdgait: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mdgait: %s\n", e.what());
    return 2;
  }
  return 0;
}
