#include "core/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "core/fft.hpp"

namespace mdgait::features {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> moving_average(const std::vector<double>& v, std::size_t span) {
  if (span <= 1 || v.size() <= 1) return v;
  const std::size_t half = span / 2;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(v.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += v[j];
    out[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || n != y_.size()) throw std::invalid_argument("spline: need >= 2 knots");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline: knots must increase");
    }
    m_.assign(n, 0.0);
    if (n == 2) return;  // linear segment, second derivatives stay zero

    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    const std::size_t m = n - 2;
    std::vector<double> diag(m), upper(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double h0 = x_[i + 1] - x_[i];
      const double h1 = x_[i + 2] - x_[i + 1];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 2] - y_[i + 1]) / h1 - (y_[i + 1] - y_[i]) / h0);
    }
    for (std::size_t i = 1; i < m; ++i) {
      const double lower = x_[i + 1] - x_[i];  // sub-diagonal of row i
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
      m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
    }
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    std::size_t k = 0;
    if (x >= x_[n - 2]) {
      k = n - 2;
    } else if (x > x_[0]) {
      k = static_cast<std::size_t>(
              std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) -
          1;
    }
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - x) / h;
    const double b = (x - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] +
           ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * (h * h) / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

/// Local maxima of v (plateaus keep the left edge), then greedy suppression:
/// within min_sep samples only the highest survives. Returns sorted indices.
std::vector<std::size_t> peak_indices(const std::vector<double>& v, std::size_t min_sep) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t idx : cand) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      const std::size_t d = idx > k ? idx - k : k - idx;
      if (d < min_sep) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Least-squares amplitudes/phases of q harmonics of f0 against the
/// mean-removed series y sampled at rate fr. Returns the squared residual.
double harmonic_ls(const std::vector<double>& y, double fr, double f0, std::size_t q,
                   std::vector<double>* amplitudes, std::vector<double>* phases) {
  const std::size_t n = y.size();
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * q));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fr;
    for (std::size_t h = 0; h < q; ++h) {
      const double w = 2.0 * kPi * f0 * static_cast<double>(h + 1) * t;
      phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * h)) = std::cos(w);
      phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * h + 1)) = std::sin(w);
    }
  }
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = y[i];
  const Eigen::VectorXd coef = phi.householderQr().solve(rhs);
  const double residual = (rhs - phi * coef).squaredNorm();
  if (amplitudes != nullptr) {
    amplitudes->resize(q);
    phases->resize(q);
    for (std::size_t h = 0; h < q; ++h) {
      const double u = coef(static_cast<Eigen::Index>(2 * h));
      const double v = coef(static_cast<Eigen::Index>(2 * h + 1));
      // u cos(wt) + v sin(wt) = alpha cos(wt + phi) with alpha >= 0.
      (*amplitudes)[h] = std::hypot(u, v);
      (*phases)[h] = std::atan2(-v, u);
    }
  }
  return residual;
}

/// Golden-section minimiser of fn over [lo, hi].
template <typename Fn>
double golden_min(Fn&& fn, double lo, double hi, int iters = 48) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double estimate_base_velocity(const cvd::DopplerSpectrum& mds, const RadarConfig& cfg,
                              double smoothing_span_hz, double min_doppler_hz) {
  const std::size_t n = mds.values.size();
  if (n == 0 || mds.doppler_axis_hz.size() != n) {
    throw std::invalid_argument("estimate_base_velocity: empty Doppler spectrum");
  }
  if (min_doppler_hz < 0.0) {
    throw std::invalid_argument("estimate_base_velocity: negative clutter notch");
  }
  double bin_width = 1.0;
  if (n > 1) bin_width = std::abs(std::abs(mds.doppler_axis_hz[1]) - std::abs(mds.doppler_axis_hz[0]));
  if (bin_width <= 0.0) bin_width = 1.0;
  std::size_t span = static_cast<std::size_t>(std::lround(smoothing_span_hz / bin_width));
  if (span % 2 == 0) ++span;
  const std::vector<double> smooth = moving_average(mds.values, span);
  // The axis is ordered outward from 0 Hz, so the first strict maximum is the
  // one at the lowest |Doppler| — ties resolve toward the slower hypothesis.
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(mds.doppler_axis_hz[i]) < min_doppler_hz) continue;
    if (best == n || smooth[i] > smooth[best]) best = i;
  }
  if (best == n) throw std::invalid_argument("estimate_base_velocity: notch covers the whole axis");
  if (!(smooth[best] > 0.0)) throw std::runtime_error("estimate_base_velocity: all-zero spectrum");
  return velocity_from_doppler(mds.doppler_axis_hz[best], cfg);
}

double estimate_fmd(const dsp::EnvelopeSignal& env, double cadence_step_hz,
                    std::size_t cadence_bins) {
  if (env.values_hz.size() < 4) throw std::invalid_argument("estimate_fmd: envelope too short");
  if (!(cadence_step_hz > 0.0)) throw std::invalid_argument("estimate_fmd: bad cadence step");
  std::vector<double> centred(env.values_hz.size());
  for (std::size_t i = 0; i < centred.size(); ++i) centred[i] = std::abs(env.values_hz[i]);
  const double mean = std::accumulate(centred.begin(), centred.end(), 0.0) /
                      static_cast<double>(centred.size());
  for (double& v : centred) v -= mean;

  const auto padded = static_cast<std::size_t>(std::llround(env.frame_rate_hz / cadence_step_hz));
  if (padded < centred.size()) {
    throw std::invalid_argument("estimate_fmd: cadence grid shorter than the envelope");
  }
  const auto spectrum = fft::forward_real_padded(centred, padded);
  const std::size_t usable = std::min(cadence_bins, spectrum.size());
  if (usable < 2) throw std::invalid_argument("estimate_fmd: cadence grid too small");

  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k < usable; ++k) {
    const double mag = std::abs(spectrum[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  if (!(best_mag > 0.0)) throw std::runtime_error("estimate_fmd: flat envelope");
  return static_cast<double>(best) * cadence_step_hz;
}

double estimate_fdmax(const dsp::EnvelopeSignal& env, Direction direction) {
  if (env.values_hz.empty()) throw std::invalid_argument("estimate_fdmax: empty envelope");
  std::vector<double> mags(env.values_hz.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(env.values_hz[i]);
  const double p90 = quantile_nearest_rank(mags, 0.9);
  double acc = 0.0;
  std::size_t count = 0;
  for (double m : mags) {
    if (m > p90) {
      acc += m;
      ++count;
    }
  }
  if (count == 0) {
    for (double m : mags) {
      if (m >= p90) {
        acc += m;
        ++count;
      }
    }
  }
  const double magnitude = acc / static_cast<double>(count);
  return direction == Direction::Toward ? magnitude : -magnitude;
}

double coefficient_of_variation(const dsp::EnvelopeSignal& env, double min_peak_separation_s) {
  const std::size_t n = env.values_hz.size();
  if (n < 5) throw std::invalid_argument("coefficient_of_variation: envelope too short");
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(env.values_hz[i]);

  const auto min_sep = static_cast<std::size_t>(
      std::max(1.0, std::round(min_peak_separation_s * env.frame_rate_hz)));
  const std::vector<std::size_t> peaks = peak_indices(mags, min_sep);
  if (peaks.size() < 2) {
    throw std::runtime_error("coefficient_of_variation: fewer than two envelope peaks");
  }

  std::vector<double> xs(peaks.size()), ys(peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    xs[i] = env.time_axis_s[peaks[i]];
    ys[i] = mags[peaks[i]];
  }
  const CubicSpline spline(xs, ys);

  // Evaluate on the envelope's own time grid between the outermost peaks so
  // the statistic reflects interpolation, not extrapolated tails.
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = peaks.front(); i <= peaks.back(); ++i) {
    const double v = spline(env.time_axis_s[i]);
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  const double mean = sum / static_cast<double>(count);
  if (!(std::abs(mean) > 0.0)) {
    throw std::runtime_error("coefficient_of_variation: zero-mean spline");
  }
  const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
  return std::sqrt(var) / std::abs(mean);
}

HarmonicRatio gait_harmonic_ratio(double f0_hz, double fmd_hz) {
  if (!(fmd_hz > 0.0)) throw std::invalid_argument("gait_harmonic_ratio: f_mD must be positive");
  const double raw = f0_hz / fmd_hz;
  static constexpr std::array<double, 3> kGrid = {1.0, 0.5, 1.0 / 3.0};
  double best = kGrid[0];
  for (double g : kGrid) {
    if (std::abs(raw - g) < std::abs(raw - best)) best = g;
  }
  HarmonicRatio out;
  out.beta = best;
  out.flagged = raw < 0.25 || raw > 1.5;
  return out;
}

SOHModel fit_soh(const std::vector<double>& energy, double frame_rate_hz, double fmd_hz,
                 const SOHConfig& cfg) {
  const std::size_t n = energy.size();
  if (n < 16) throw std::invalid_argument("fit_soh: series too short");
  if (!(frame_rate_hz > 0.0) || !(fmd_hz > 0.0)) {
    throw std::invalid_argument("fit_soh: rates must be positive");
  }
  if (cfg.max_order == 0) throw std::invalid_argument("fit_soh: max_order must be >= 1");

  std::vector<double> centred = energy;
  const double mean =
      std::accumulate(centred.begin(), centred.end(), 0.0) / static_cast<double>(n);
  for (double& v : centred) v -= mean;

  const double nyquist = 0.5 * frame_rate_hz;
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);

  SOHModel best;
  double best_bic = std::numeric_limits<double>::infinity();
  bool any = false;

  for (std::size_t m = 1; m <= 3; ++m) {
    const double candidate = fmd_hz / static_cast<double>(m);
    if (!(candidate > 0.0) || candidate >= nyquist) continue;
    const auto feasible_order = static_cast<std::size_t>(0.999 * nyquist / candidate);
    const std::size_t qmax = std::min(cfg.max_order, feasible_order);
    if (qmax < 1) continue;

    // Refine the fundamental with enough harmonics that the line at f_mD is
    // representable; otherwise a subharmonic candidate could never win.
    const std::size_t q_ref = std::min(m, qmax);
    const double lo = std::max(candidate - cfg.refine_halfwidth_hz, 1e-6);
    const double hi = std::min(candidate + cfg.refine_halfwidth_hz, nyquist * 0.999);
    const double refined = golden_min(
        [&](double f) { return harmonic_ls(centred, frame_rate_hz, f, q_ref, nullptr, nullptr); },
        lo, hi);

    for (std::size_t q = 1; q <= qmax; ++q) {
      std::vector<double> amps, phases;
      const double xi = harmonic_ls(centred, frame_rate_hz, refined, q, &amps, &phases);
      const double safe_xi = std::max(xi, nd * 1e-280);
      const double k_params = static_cast<double>(2 * q + 1);
      const double bic = nd * std::log(safe_xi / nd) + k_params * log_n;
      if (bic < best_bic) {
        best_bic = bic;
        best.f0_hz = refined;
        best.order = q;
        best.amplitudes = std::move(amps);
        best.phases = std::move(phases);
        best.residual = xi;
        any = true;
      }
    }
  }
  if (!any) throw std::runtime_error("fit_soh: no feasible fundamental below Nyquist");
  return best;
}

std::vector<double> soh_evaluate(const SOHModel& m, std::size_t n, double frame_rate_hz) {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / frame_rate_hz;
    double acc = 0.0;
    for (std::size_t h = 0; h < m.order; ++h) {
      acc += m.amplitudes[h] *
             std::cos(2.0 * kPi * m.f0_hz * static_cast<double>(h + 1) * t + m.phases[h]);
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> PhysicalFeatures::as_vector() const {
  std::vector<double> out;
  out.reserve(9);
  out.push_back(f_md_hz);
  out.push_back(f_dmax_hz);
  out.push_back(cv);
  out.push_back(beta);
  out.insert(out.end(), alphas.begin(), alphas.end());
  return out;
}

PhysicalFeatures make_physical_features(double fmd_hz, double fdmax_hz, double cv,
                                        const SOHModel& soh) {
  PhysicalFeatures out;
  out.f_md_hz = fmd_hz;
  out.f_dmax_hz = fdmax_hz;
  out.cv = cv;
  const HarmonicRatio ratio = gait_harmonic_ratio(soh.f0_hz, fmd_hz);
  out.beta = ratio.beta;
  out.beta_flagged = ratio.flagged;
  const std::size_t q = std::min<std::size_t>(soh.order, out.alphas.size());
  for (std::size_t i = 0; i < q; ++i) out.alphas[i] = soh.amplitudes[i];
  return out;
}

BaselineB bjorklund_features(const cvd::CVDImage& cvd_img, const cvd::CadenceSpectrum& mcs,
                             double v0_mps, std::size_t profile_length) {
  const std::size_t nd = cvd_img.n_doppler;
  const std::size_t nc = cvd_img.n_cadence;
  if (mcs.values.size() != nc) {
    throw std::invalid_argument("bjorklund_features: cadence spectrum/CVD size mismatch");
  }
  if (profile_length < 2 || nd < 2) {
    throw std::invalid_argument("bjorklund_features: profiles need >= 2 samples");
  }

  // Top three cadence peaks by height, DC excluded; missing peaks stay zero.
  const std::vector<std::size_t> peaks = peak_indices(mcs.values, 2);
  std::vector<std::size_t> ranked(peaks.begin(), peaks.end());
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    return mcs.values[a] > mcs.values[b];
  });

  BaselineB out;
  out.b1.reserve(3 + 3 * profile_length + 1);
  std::array<std::size_t, 3> bins{0, 0, 0};
  for (std::size_t i = 0; i < 3; ++i) {
    if (i < ranked.size() && ranked[i] > 0) {
      bins[i] = ranked[i];
      out.peak_cadences_hz[i] = mcs.cadence_axis_hz[ranked[i]];
    }
    out.b1.push_back(out.peak_cadences_hz[i]);
  }

  // Resample each peak's Doppler column (nd samples) to profile_length.
  const double scale =
      static_cast<double>(nd - 1) / static_cast<double>(profile_length - 1);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < profile_length; ++j) {
      if (bins[i] == 0) {
        out.b1.push_back(0.0);
        continue;
      }
      const double pos = static_cast<double>(j) * scale;
      const auto i0 = static_cast<std::size_t>(pos);
      const std::size_t i1 = std::min(i0 + 1, nd - 1);
      const double w = pos - static_cast<double>(i0);
      const double v =
          (1.0 - w) * cvd_img.at(i0, bins[i]) + w * cvd_img.at(i1, bins[i]);
      out.b1.push_back(v);
    }
  }
  out.b1.push_back(v0_mps);

  out.b2 = {out.peak_cadences_hz[0], out.peak_cadences_hz[1], out.peak_cadences_hz[2],
            std::abs(v0_mps)};
  return out;
}

BaselineR ricci_features(const cvd::CVDImage& cvd_img, double fmd_hz, std::size_t delta_bins,
                         double gamma) {
  const std::size_t nd = cvd_img.n_doppler;
  const std::size_t nc = cvd_img.n_cadence;
  if (nc < 3 || nd == 0) throw std::invalid_argument("ricci_features: CVD too small");
  if (delta_bins < 1 || delta_bins % 2 == 0) {
    throw std::invalid_argument("ricci_features: delta_bins must be odd and >= 1");
  }
  const double step = nc > 1 ? cvd_img.cadence_axis_hz[1] - cvd_img.cadence_axis_hz[0] : 1.0;
  if (!(fmd_hz > 0.0) || fmd_hz > cvd_img.cadence_axis_hz[nc - 1] + 0.5 * step) {
    throw std::invalid_argument("ricci_features: f_mD outside the cadence range");
  }
  auto centre = static_cast<std::size_t>(std::llround(fmd_hz / step));
  centre = std::clamp<std::size_t>(centre, 1, nc - 1);
  const std::size_t half = delta_bins / 2;
  const std::size_t lo = centre > half ? std::max<std::size_t>(centre - half, 1) : 1;
  const std::size_t hi = std::min(centre + half, nc - 1);

  // Mean Doppler profile over the cadence band around f_mD.
  std::vector<double> profile(nd, 0.0);
  for (std::size_t d = 0; d < nd; ++d) {
    double acc = 0.0;
    for (std::size_t c = lo; c <= hi; ++c) acc += cvd_img.at(d, c);
    profile[d] = acc / static_cast<double>(hi - lo + 1);
  }
  const double peak = *std::max_element(profile.begin(), profile.end());
  if (peak > 0.0) {
    for (double& v : profile) v /= peak;
  }

  BaselineR out;
  out.r2 = profile;
  double f_min = 0.0;
  double f_max = 0.0;
  bool found = false;
  for (std::size_t d = 0; d < nd; ++d) {
    if (profile[d] > gamma) {
      const double f = cvd_img.doppler_axis_hz[d];
      if (!found) {
        f_min = f;
        f_max = f;
        found = true;
      } else {
        f_min = std::min(f_min, f);
        f_max = std::max(f_max, f);
      }
    }
  }
  out.support_flagged = !found;
  out.r1 = {fmd_hz, f_min, f_max};
  return out;
}

}  // namespace mdgait::features
