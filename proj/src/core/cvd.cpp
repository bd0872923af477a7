#include "core/cvd.hpp"

#include <algorithm>
#include <numeric>

#include "core/fft.hpp"

namespace mdgait::cvd {

namespace {

// Raw half-plane bin indices from zero Doppler outward, capped at max_hz.
std::vector<std::size_t> outward_bins(const dsp::Spectrogram& spec, Direction d, double max_hz) {
  std::vector<std::size_t> bins;
  for (std::size_t b = 0; b < spec.n_bins; ++b) {
    const double f = spec.doppler_axis_hz[b];
    const bool side = d == Direction::Toward ? f >= 0.0 : f <= 0.0;
    if (side && std::abs(f) <= max_hz + 1e-9) bins.push_back(b);
  }
  std::sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t c) {
    return std::abs(spec.doppler_axis_hz[a]) < std::abs(spec.doppler_axis_hz[c]);
  });
  if (bins.empty()) throw std::invalid_argument("no Doppler bins inside the half-plane cap");
  return bins;
}

// Groups raw half-plane bins into condensed Doppler pixels (mean energy per
// group) and returns the pixel axis. The trailing group may be partial.
struct Condensed {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> axis_hz;
};

Condensed condense_doppler(const dsp::Spectrogram& spec, Direction d, const CvdConfig& cfg) {
  if (cfg.doppler_group == 0) throw std::invalid_argument("doppler group must be at least 1");
  const auto bins = outward_bins(spec, d, cfg.doppler_max_hz);
  Condensed out;
  for (std::size_t i = 0; i < bins.size(); i += cfg.doppler_group) {
    const std::size_t j = std::min(i + cfg.doppler_group, bins.size());
    std::vector<std::size_t> group(bins.begin() + i, bins.begin() + j);
    double axis = 0.0;
    for (std::size_t b : group) axis += spec.doppler_axis_hz[b];
    axis /= static_cast<double>(group.size());
    out.groups.push_back(std::move(group));
    out.axis_hz.push_back(axis);
  }
  return out;
}

void normalize_unit_max(std::vector<double>& v) {
  const double mx = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  if (mx > 0.0)
    for (auto& x : v) x /= mx;
}

}  // namespace

CVDImage compute_cvd(const dsp::Spectrogram& spec, Direction direction, const CvdConfig& cfg) {
  if (spec.n_frames < 2) throw std::invalid_argument("spectrogram has too few frames");
  if (cfg.cadence_bins < 2) throw std::invalid_argument("need at least two cadence bins");
  if (!(cfg.cadence_step_hz > 0.0)) throw std::invalid_argument("cadence step must be positive");

  const double max_cadence = cfg.cadence_step_hz * static_cast<double>(cfg.cadence_bins - 1);
  if (spec.frame_rate_hz < 2.0 * max_cadence)
    throw std::invalid_argument("spectrogram frame rate too low for the cadence grid");

  const std::size_t pad = static_cast<std::size_t>(std::llround(spec.frame_rate_hz / cfg.cadence_step_hz));
  if (pad < spec.n_frames)
    throw std::invalid_argument("cadence step too coarse: FT length below the frame count");
  if (cfg.cadence_bins > pad / 2 + 1)
    throw std::invalid_argument("cadence grid exceeds the FT output");

  const auto cond = condense_doppler(spec, direction, cfg);
  const std::size_t nd = cond.groups.size();
  const std::size_t nc = cfg.cadence_bins;

  CVDImage out;
  out.n_doppler = nd;
  out.n_cadence = nc;
  out.values.assign(nd * nc, 0.0);
  out.doppler_axis_hz = cond.axis_hz;
  out.cadence_axis_hz.resize(nc);
  for (std::size_t c = 0; c < nc; ++c)
    out.cadence_axis_hz[c] = cfg.cadence_step_hz * static_cast<double>(c);

  std::vector<double> pixel(spec.n_frames);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto& group = cond.groups[d];
    const double inv = 1.0 / static_cast<double>(group.size());
    for (std::size_t f = 0; f < spec.n_frames; ++f) {
      double acc = 0.0;
      for (std::size_t b : group) acc += spec.at(f, b);
      pixel[f] = acc * inv;
    }
    // Per-pixel temporal mean removal keeps the quasi-constant torso and any
    // residual floor from swamping the cadence harmonics at epsilon = 0.
    const double mean = std::accumulate(pixel.begin(), pixel.end(), 0.0) /
                        static_cast<double>(spec.n_frames);
    for (auto& v : pixel) v -= mean;
    const auto spectrum = fft::forward_real_padded(pixel, pad);
    for (std::size_t c = 0; c < nc; ++c) out.at(d, c) = std::abs(spectrum[c]);
  }

  normalize_unit_max(out.values);
  return out;
}

CadenceSpectrum mean_cadence_spectrum(const CVDImage& cvd) {
  if (cvd.n_doppler == 0) throw std::invalid_argument("empty CVD");
  CadenceSpectrum out;
  out.cadence_axis_hz = cvd.cadence_axis_hz;
  out.values.assign(cvd.n_cadence, 0.0);
  for (std::size_t d = 0; d < cvd.n_doppler; ++d)
    for (std::size_t c = 0; c < cvd.n_cadence; ++c) out.values[c] += cvd.at(d, c);
  const double inv = 1.0 / static_cast<double>(cvd.n_doppler);
  for (auto& v : out.values) v *= inv;
  return out;
}

DopplerSpectrum mean_doppler_spectrum(const CVDImage& cvd) {
  if (cvd.n_cadence == 0) throw std::invalid_argument("empty CVD");
  DopplerSpectrum out;
  out.doppler_axis_hz = cvd.doppler_axis_hz;
  out.values.assign(cvd.n_doppler, 0.0);
  for (std::size_t d = 0; d < cvd.n_doppler; ++d) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cvd.n_cadence; ++c) acc += cvd.at(d, c);
    out.values[d] = acc / static_cast<double>(cvd.n_cadence);
  }
  return out;
}

CVDImage preprocess_cvd(const CVDImage& cvd, double f_md_hz, double f_dmax_hz,
                        const CvdConfig& cfg) {
  if (!(std::isfinite(f_md_hz) && f_md_hz > 0.0))
    throw std::invalid_argument("fundamental micro-Doppler frequency must be positive and finite");
  if (!(std::isfinite(f_dmax_hz) && std::abs(f_dmax_hz) > 0.0))
    throw std::invalid_argument("maximal Doppler shift must be nonzero and finite");
  if (cvd.n_doppler == 0 || cvd.n_cadence == 0) throw std::invalid_argument("empty CVD");

  const double dmax = std::abs(f_dmax_hz);
  CVDImage out;
  out.n_doppler = cvd.n_doppler;
  out.n_cadence = cvd.n_cadence;
  out.doppler_axis_hz = cvd.doppler_axis_hz;
  out.cadence_axis_hz = cvd.cadence_axis_hz;
  out.values.assign(cvd.values.size(), 0.0);
  out.preprocessed = true;

  // Target cell (d, c) reads the source at the pre-warp coordinates: cadence
  // scaled by f_mD (so f_mD lands on 1 Hz) and Doppler scaled by
  // f_Dmax / doppler_max (so f_Dmax lands on the grid edge). Interpolation
  // indices per axis are precomputed; out-of-range sources read as zero.
  const std::size_t nd = cvd.n_doppler;
  const std::size_t nc = cvd.n_cadence;

  struct Lerp {
    std::size_t i0 = 0, i1 = 0;
    double w = 0.0;
    bool valid = false;
  };

  std::vector<Lerp> cad(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const double src = cvd.cadence_axis_hz[c] * f_md_hz;
    const double last = cvd.cadence_axis_hz[nc - 1];
    if (src < cvd.cadence_axis_hz[0] || src > last) continue;
    const double step = nc > 1 ? cvd.cadence_axis_hz[1] - cvd.cadence_axis_hz[0] : 1.0;
    std::size_t i0 = step > 0.0 ? std::min<std::size_t>(
                                      static_cast<std::size_t>((src - cvd.cadence_axis_hz[0]) / step),
                                      nc - 2)
                                : 0;
    cad[c] = {i0, i0 + 1,
              (src - cvd.cadence_axis_hz[i0]) /
                  (cvd.cadence_axis_hz[i0 + 1] - cvd.cadence_axis_hz[i0]),
              true};
  }

  const double dop_scale = dmax / cfg.doppler_max_hz;
  std::vector<Lerp> dop(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const double src = std::abs(cvd.doppler_axis_hz[d]) * dop_scale;
    if (src < std::abs(cvd.doppler_axis_hz[0]) || src > std::abs(cvd.doppler_axis_hz[nd - 1]))
      continue;
    std::size_t lo = 0;
    while (lo + 2 < nd && std::abs(cvd.doppler_axis_hz[lo + 1]) <= src) ++lo;
    const double a0 = std::abs(cvd.doppler_axis_hz[lo]);
    const double a1 = std::abs(cvd.doppler_axis_hz[lo + 1]);
    dop[d] = {lo, lo + 1, a1 == a0 ? 0.0 : (src - a0) / (a1 - a0), true};
  }

  for (std::size_t d = 0; d < nd; ++d) {
    if (!dop[d].valid) continue;
    const double* row0 = &cvd.values[dop[d].i0 * nc];
    const double* row1 = &cvd.values[dop[d].i1 * nc];
    const double wd = dop[d].w;
    for (std::size_t c = 0; c < nc; ++c) {
      if (!cad[c].valid) continue;
      const double wc = cad[c].w;
      const double v0 = row0[cad[c].i0] * (1.0 - wc) + row0[cad[c].i1] * wc;
      const double v1 = row1[cad[c].i0] * (1.0 - wc) + row1[cad[c].i1] * wc;
      out.at(d, c) = v0 * (1.0 - wd) + v1 * wd;
    }
  }

  normalize_unit_max(out.values);
  return out;
}

CadenceSpectrum ft_filtered_time(const IQRecording& rec, double cutoff_hz, const CvdConfig& cfg) {
  if (rec.samples.empty()) throw std::invalid_argument("empty recording");
  const double fs = rec.sampling_frequency_hz;
  if (!(fs > 0.0)) throw std::invalid_argument("recording lacks a sampling frequency");
  if (!(std::isfinite(cutoff_hz) && cutoff_hz >= 0.0))
    throw std::invalid_argument("cutoff must be non-negative and finite");
  if (cutoff_hz >= fs / 2.0)
    throw std::invalid_argument("cutoff at or above Nyquist removes everything");

  const IQRecording clean = dsp::remove_mean(rec);
  const std::size_t n = clean.samples.size();

  auto spectrum = fft::forward(clean.samples);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = k < (n + 1) / 2 ? static_cast<double>(k) * fs / static_cast<double>(n)
                                     : (static_cast<double>(k) - static_cast<double>(n)) * fs /
                                           static_cast<double>(n);
    if (std::abs(f) < cutoff_hz) spectrum[k] = {0.0, 0.0};
  }
  const auto filtered = fft::inverse(spectrum);

  // The line structure of the filtered signal lives at micro-Doppler
  // frequencies; its magnitude envelope is what repeats at the cadence.
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(filtered[i]);
  const double mean = std::accumulate(mag.begin(), mag.end(), 0.0) / static_cast<double>(n);
  for (auto& m : mag) m -= mean;

  const std::size_t pad = static_cast<std::size_t>(std::llround(fs / cfg.cadence_step_hz));
  if (pad < n) throw std::invalid_argument("cadence step too coarse for the record length");
  if (cfg.cadence_bins > pad / 2 + 1)
    throw std::invalid_argument("cadence grid exceeds the FT output");
  const auto cadence_ft = fft::forward_real_padded(mag, pad);

  CadenceSpectrum out;
  out.values.resize(cfg.cadence_bins);
  out.cadence_axis_hz.resize(cfg.cadence_bins);
  for (std::size_t c = 0; c < cfg.cadence_bins; ++c) {
    out.values[c] = std::abs(cadence_ft[c]);
    out.cadence_axis_hz[c] = cfg.cadence_step_hz * static_cast<double>(c);
  }
  normalize_unit_max(out.values);
  return out;
}

SpectrogramImage condense_spectrogram(const dsp::Spectrogram& spec, Direction direction,
                                      std::size_t frames_per_pixel, std::size_t n_time_pixels,
                                      const CvdConfig& cfg) {
  if (frames_per_pixel == 0) throw std::invalid_argument("frames per pixel must be at least 1");
  if (n_time_pixels == 0) throw std::invalid_argument("need at least one time pixel");

  const auto cond = condense_doppler(spec, direction, cfg);
  const std::size_t nd = cond.groups.size();

  SpectrogramImage out;
  out.n_doppler = nd;
  out.n_time = n_time_pixels;
  out.values.assign(nd * n_time_pixels, 0.0);
  out.doppler_axis_hz = cond.axis_hz;
  out.time_axis_s.resize(n_time_pixels);
  const double pixel_dt = static_cast<double>(frames_per_pixel) / spec.frame_rate_hz;
  for (std::size_t t = 0; t < n_time_pixels; ++t)
    out.time_axis_s[t] = pixel_dt * (static_cast<double>(t) + 0.5);

  const double inv_fpp = 1.0 / static_cast<double>(frames_per_pixel);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto& group = cond.groups[d];
    const double inv_g = 1.0 / static_cast<double>(group.size());
    for (std::size_t t = 0; t < n_time_pixels; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < frames_per_pixel; ++j) {
        const std::size_t f = t * frames_per_pixel + j;
        if (f >= spec.n_frames) break;  // trailing frames beyond the signal count as zero
        double cell = 0.0;
        for (std::size_t b : group) cell += spec.at(f, b);
        acc += cell * inv_g;
      }
      out.at(d, t) = acc * inv_fpp;
    }
  }

  normalize_unit_max(out.values);
  return out;
}

}  // namespace mdgait::cvd
