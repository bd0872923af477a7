/*
 * mdgait — micro-Doppler gait analysis library.
 *
 * C interface over the C++ core: opaque handles, integer status codes, and
 * JSON documents for structured configuration/results. Every function that
 * can fail returns mdg_status; on failure, mdg_last_error() yields a
 * human-readable message for the calling thread until the next failing call.
 *
 * Conventions:
 *   - gait classes: 0 NW, 1 L1, 2 L2, 3 CW, 4 CW/oos (use mdg_class_name)
 *   - directions:   0 toward, 1 away
 *   - matrices are row-major doubles
 *   - strings returned through char** are heap-allocated; release them with
 *     mdg_string_free
 */

#ifndef MDGAIT_MDGAIT_H
#define MDGAIT_MDGAIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MDG_API __declspec(dllexport)
#else
#define MDG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdg_status {
  MDG_OK = 0,
  MDG_ERR_INVALID_ARGUMENT = 1, /* bad parameters, malformed config, contract violation */
  MDG_ERR_RUNTIME = 2,          /* computation failed */
  MDG_ERR_IO = 3,               /* file missing/corrupt/unwritable */
  MDG_ERR_NULL = 4              /* required pointer was NULL */
} mdg_status;

MDG_API const char* mdg_version(void);
MDG_API const char* mdg_last_error(void);
MDG_API const char* mdg_class_name(int gait_class);
MDG_API const char* mdg_representation_name(int representation_kind);
MDG_API void mdg_string_free(char* s);

/* ---------------------------------------------------------------- handles */

typedef struct mdg_recording mdg_recording;
typedef struct mdg_matrix mdg_matrix;
typedef struct mdg_analysis mdg_analysis;
typedef struct mdg_model mdg_model;

/* ------------------------------------------------------------- recordings */

/* Load/save the binary IQ recording format. */
MDG_API mdg_status mdg_recording_load(const char* path, mdg_recording** out);
MDG_API mdg_status mdg_recording_save(const mdg_recording* rec, const char* path);

/* Wrap interleaved I/Q samples (2*n doubles). label -1 means unlabeled. */
MDG_API mdg_status mdg_recording_from_samples(const double* iq_interleaved, size_t n_samples,
                                              double sampling_frequency_hz,
                                              double carrier_frequency_hz, int direction,
                                              int label, mdg_recording** out);

/*
 * Synthesize one recording from a JSON gait profile. Recognized keys (all
 * optional except "class"): class, direction ("toward"/"away"),
 * base_velocity_mps, stride_rate_hz, peak_foot_velocity_mps,
 * limp_attenuation, cane_peak_velocity_mps, torso_sway_mps, burst_duty,
 * gait_phase, noise_snr_db (null/absent = noiseless), seed, and a "radar"
 * object (carrier_frequency_hz, sampling_frequency_hz, duration_s,
 * aspect_angle_rad).
 */
MDG_API mdg_status mdg_simulate(const char* profile_json, mdg_recording** out);

MDG_API mdg_status mdg_recording_info(const mdg_recording* rec, size_t* n_samples,
                                      double* sampling_frequency_hz,
                                      double* carrier_frequency_hz, int* direction, int* label);
MDG_API mdg_status mdg_recording_samples(const mdg_recording* rec, double* iq_interleaved,
                                         size_t capacity_samples);
MDG_API void mdg_recording_free(mdg_recording* rec);

/* --------------------------------------------------------------- matrices */

MDG_API size_t mdg_matrix_rows(const mdg_matrix* m);
MDG_API size_t mdg_matrix_cols(const mdg_matrix* m);
MDG_API const double* mdg_matrix_data(const mdg_matrix* m); /* row-major, rows*cols */
MDG_API void mdg_matrix_free(mdg_matrix* m);

/* ---------------------------------------------------------------- analysis */

/*
 * Full single-recording dataflow. config_json may be NULL for defaults;
 * recognized keys: stft {window_length, hop, fft_size}, denoise {quantile,
 * margin_db}, cadence {step_hz, bins, doppler_max_hz, doppler_group},
 * envelope_energy_fraction, torso_guard_hz, frames_per_pixel,
 * spectrogram_time_pixels, radar {...}.
 */
MDG_API mdg_status mdg_analyze(const mdg_recording* rec, const char* config_json,
                               mdg_analysis** out);

/* Scalar results as JSON: v0_mps, f_md_hz, f_dmax_hz, cv, cv_flagged, beta,
 * beta_flagged, soh {f0_hz, order, amplitudes, phases, residual}. */
MDG_API mdg_status mdg_analysis_scalars(const mdg_analysis* a, char** json_out);
MDG_API void mdg_analysis_free(mdg_analysis* a);

/* Representation kinds: "spectrogram", "cvd", "mcs", "cvd-pre", "mcs-pre",
 * "ft-filtered-time". Shapes follow the standard dimensional contract. */
MDG_API mdg_status mdg_represent(const mdg_recording* rec, const char* kind,
                                 const char* config_json, mdg_matrix** out);

/* Like mdg_represent, but also returns metadata JSON with the physical axes:
 * {kind, rows, cols, row_label, col_label, row_axis: [...], col_axis: [...]}.
 * Either output pointer may be NULL to skip it (not both). */
MDG_API mdg_status mdg_represent_full(const mdg_recording* rec, const char* kind,
                                      const char* config_json, mdg_matrix** out,
                                      char** meta_json_out);

/* Feature sets: "phy" (9), "b1" (304), "b2" (4), "r1" (3), "r2" (101).
 * Result is a 1 x arity matrix. */
MDG_API mdg_status mdg_features(const mdg_recording* rec, const char* feature_set,
                                const char* config_json, mdg_matrix** out);

/* Column names of a feature set as a JSON array of strings. */
MDG_API mdg_status mdg_feature_names(const char* feature_set, char** json_out);

/* Short hex digest of a canonicalized JSON configuration document; the same
 * digest appears as "config_hash" in experiment reports. NULL hashes the
 * empty/default config. */
MDG_API mdg_status mdg_config_hash(const char* config_json, char** hex_out);

/* ------------------------------------------------------------------ models */

MDG_API mdg_status mdg_model_load(const char* path, mdg_model** out);
MDG_API mdg_status mdg_model_save(const mdg_model* model, const char* path);
MDG_API mdg_status mdg_model_info(const mdg_model* model, size_t* dim, size_t* rank,
                                  int* representation_kind);
/* Projection onto the first k components (k=0 = full rank); 1 x k matrix. */
MDG_API mdg_status mdg_model_project(const mdg_model* model, const double* x, size_t n,
                                     size_t k, mdg_matrix** out);
/* Cumulative explained-variance fractions, 1 x rank. */
MDG_API mdg_status mdg_model_explained_variance(const mdg_model* model, mdg_matrix** out);
MDG_API void mdg_model_free(mdg_model* model);

/* ---------------------------------------------------------------- datasets */

/*
 * Simulate a labeled corpus. spec_json keys (all optional): subjects,
 * runs_per_class, seed, noise_snr_db (null = noiseless), radar {...}, plus
 * the jitter ranges (see documentation). Writes one IQ file per recording
 * plus manifest.csv into out_dir; *manifest_path_out receives the manifest
 * path.
 */
MDG_API mdg_status mdg_simulate_dataset(const char* spec_json, const char* out_dir,
                                        char** manifest_path_out);

/* Fit PCA on a manifest's recordings using the named representation. */
MDG_API mdg_status mdg_fit_pca(const char* manifest_path, const char* representation_kind,
                               size_t max_components, const char* config_json, mdg_model** out);

/*
 * Run a classification experiment described by run_config_json:
 *   {
 *     "feature": "pca" | "phy" | "b1" | "b2" | "r1" | "r2",
 *     "representation": "cvd-pre",        // pca only
 *     "lambda": 22,                        // pca only
 *     "kappa": 1,
 *     "cv": {"scheme": "kfold", "folds": 10, "seed": 7} | {"scheme": "loso"},
 *     "direction": "pooled" | "toward" | "away",
 *     "sweep_lambda": [2, 5, ...],         // optional, pca only
 *     "sweep_kappa": [1, 3, ...],          // optional
 *     "pipeline": { ... }                  // optional analyze() config
 *   }
 * The JSON report carries the confusion matrix (counts and row-normalized
 * percentages), accuracy/fpr/fnr/tpr, ci95_halfwidth, per-fold accuracies,
 * and any sweep tables.
 */
MDG_API mdg_status mdg_experiment_run(const char* manifest_path, const char* run_config_json,
                                      char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MDGAIT_MDGAIT_H */
