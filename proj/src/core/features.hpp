#pragma once

#include <array>

#include "core/common.hpp"
#include "core/cvd.hpp"
#include "core/dsp.hpp"

namespace mdgait::features {

// Base velocity from the mean Doppler spectrum: smooth with a moving average
// spanning roughly smoothing_span_hz, take the argmax (ties resolve to the
// lowest |Doppler|), and invert the Doppler relation at zero aspect angle.
// Bins below min_doppler_hz are not argmax candidates: planted feet and other
// stationary returns modulate slowly around 0 Hz, and no walker of interest
// is that slow, so the near-DC band is notched like any MTI front end would.
// Returns a signed range rate: negative for approaching walkers.
double estimate_base_velocity(const cvd::DopplerSpectrum& mds, const RadarConfig& cfg,
                              double smoothing_span_hz = 11.0, double min_doppler_hz = 25.0);

// Fundamental micro-Doppler frequency: argmax of the FT magnitude of the
// mean-removed envelope on the cadence grid, excluding the zero bin.
double estimate_fmd(const dsp::EnvelopeSignal& env, double cadence_step_hz = 0.04,
                    std::size_t cadence_bins = 129);

// Maximal Doppler shift: mean of the envelope magnitudes strictly above their
// 90th percentile (falling back to >= when the envelope is flat), with the
// sign of the direction's half-plane restored.
double estimate_fdmax(const dsp::EnvelopeSignal& env, Direction direction);

// Coefficient of variation (sigma/mu) of a natural cubic spline through the
// envelope magnitude peaks. Peaks closer than min_peak_separation_s keep only
// the higher one.
double coefficient_of_variation(const dsp::EnvelopeSignal& env,
                                double min_peak_separation_s = 0.2);

/// beta = f0 / f_mD snapped to the admissible grid {1, 1/2, 1/3}. Ratios
/// outside [1/4, 3/2] are flagged (and still snapped to the nearest value).
struct HarmonicRatio {
  double beta = 1.0;
  bool flagged = false;
};
HarmonicRatio gait_harmonic_ratio(double f0_hz, double fmd_hz);

/// Sum-of-harmonics model x(t) = sum_{i=1..q} alpha_i cos(2 pi i f0 t + phi_i).
struct SOHModel {
  double f0_hz = 0.0;
  std::size_t order = 0;
  std::vector<double> amplitudes;  // alpha_i >= 0
  std::vector<double> phases;      // radians
  double residual = 0.0;           // squared error at the optimum
};

struct SOHConfig {
  std::size_t max_order = 5;
  double refine_halfwidth_hz = 0.05;
};

// Nonlinear least squares over candidate fundamentals {f_mD, f_mD/2, f_mD/3},
// each refined by golden-section search; amplitudes and phases from linear
// least squares; the order q in {1..max_order} picked with a BIC penalty so
// adding harmonics must pay for itself.
SOHModel fit_soh(const std::vector<double>& energy, double frame_rate_hz, double fmd_hz,
                 const SOHConfig& cfg = {});

// Samples a model at n points spaced 1/frame_rate apart (for tests/plots).
std::vector<double> soh_evaluate(const SOHModel& m, std::size_t n, double frame_rate_hz);

/// Physical feature vector z = [f_mD, f_Dmax, c_v, beta, alpha_1..alpha_5].
struct PhysicalFeatures {
  double f_md_hz = 0.0;
  double f_dmax_hz = 0.0;
  double cv = 0.0;
  double beta = 1.0;
  std::array<double, 5> alphas{};  // zero beyond the fitted order
  bool beta_flagged = false;

  std::vector<double> as_vector() const;
};

PhysicalFeatures make_physical_features(double fmd_hz, double fdmax_hz, double cv,
                                        const SOHModel& soh);

/// Cadence-peak baseline: B1 = [f1 f2 f3, three 100-sample velocity profiles,
/// v0] (304 values), B2 = [f1 f2 f3 |v0|].
struct BaselineB {
  std::vector<double> b1;
  std::vector<double> b2;
  std::array<double, 3> peak_cadences_hz{};
};

BaselineB bjorklund_features(const cvd::CVDImage& cvd_img, const cvd::CadenceSpectrum& mcs,
                             double v0_mps, std::size_t profile_length = 100);

/// Micro-Doppler-signature baseline: the mean Doppler spectrum around the
/// fundamental cadence. R1 = [f_mD, fD_min, fD_max], R2 = the full profile.
struct BaselineR {
  std::vector<double> r1;
  std::vector<double> r2;
  bool support_flagged = false;  // no bin exceeded the threshold
};

BaselineR ricci_features(const cvd::CVDImage& cvd_img, double fmd_hz,
                         std::size_t delta_bins = 5, double gamma = 0.05);

}  // namespace mdgait::features
