#include "core/dsp.hpp"

#include <algorithm>
#include <numeric>

#include "core/fft.hpp"

namespace mdgait::dsp {

std::size_t StftConfig::effective_window(double fs) const {
  if (window_length > 0) return window_length;
  return static_cast<std::size_t>(std::llround(0.1 * fs));
}

IQRecording remove_mean(const IQRecording& rec) {
  if (rec.samples.empty()) throw std::invalid_argument("empty recording");
  cplx mean{0.0, 0.0};
  for (const auto& s : rec.samples) mean += s;
  mean /= static_cast<double>(rec.samples.size());
  IQRecording out = rec;
  for (auto& s : out.samples) s -= mean;
  return out;
}

Spectrogram spectrogram(const IQRecording& rec, const StftConfig& cfg) {
  const std::size_t n = rec.samples.size();
  if (n == 0) throw std::invalid_argument("empty recording");
  if (!(rec.sampling_frequency_hz > 0.0))
    throw std::invalid_argument("recording lacks a sampling frequency");
  const std::size_t m = cfg.effective_window(rec.sampling_frequency_hz);
  const std::size_t k = cfg.fft_size;
  if (m < 2) throw std::invalid_argument("window too short");
  if (m > n) throw std::invalid_argument("window longer than the signal");
  if (k < m) throw std::invalid_argument("fft size below window length");
  if (cfg.hop == 0) throw std::invalid_argument("hop must be at least 1");

  std::vector<double> window(m);
  for (std::size_t i = 0; i < m; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                       static_cast<double>(m - 1));

  const std::size_t n_frames = (n - m) / cfg.hop + 1;
  const double fs = rec.sampling_frequency_hz;

  Spectrogram out;
  out.n_frames = n_frames;
  out.n_bins = k;
  out.values.assign(n_frames * k, 0.0);
  out.frame_rate_hz = fs / static_cast<double>(cfg.hop);
  out.time_axis_s.resize(n_frames);
  out.doppler_axis_hz.resize(k);
  const std::size_t half = k / 2;
  for (std::size_t i = 0; i < k; ++i)
    out.doppler_axis_hz[i] =
        (static_cast<double>(i) - static_cast<double>(half)) * fs / static_cast<double>(k);

  std::vector<cplx> frame(m);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * cfg.hop;
    out.time_axis_s[f] = static_cast<double>(start) / fs;
    for (std::size_t i = 0; i < m; ++i) frame[i] = window[i] * rec.samples[start + i];
    const auto spectrum = fft::forward_padded(frame, k);
    // fftshift while writing, so bin k/2 of the output is 0 Hz.
    double* row = &out.values[f * k];
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t shifted = (i + half) % k;
      row[shifted] = std::norm(spectrum[i]);
    }
  }
  return out;
}

std::vector<double> compute_noise_thresholds(const Spectrogram& spec, const DenoiseParams& p) {
  if (spec.n_frames == 0 || spec.n_bins == 0) throw std::invalid_argument("empty spectrogram");
  if (!(p.quantile >= 0.0 && p.quantile <= 1.0))
    throw std::invalid_argument("denoise quantile outside [0,1]");
  const double margin = std::pow(10.0, p.margin_db / 10.0);
  std::vector<double> thresholds(spec.n_bins);
  std::vector<double> column(spec.n_frames);
  for (std::size_t b = 0; b < spec.n_bins; ++b) {
    for (std::size_t f = 0; f < spec.n_frames; ++f) column[f] = spec.at(f, b);
    thresholds[b] = quantile_nearest_rank(column, p.quantile) * margin;
  }
  return thresholds;
}

Spectrogram apply_noise_thresholds(const Spectrogram& spec, const std::vector<double>& thresholds) {
  if (thresholds.size() != spec.n_bins)
    throw std::invalid_argument("threshold count does not match bin count");
  Spectrogram out = spec;
  for (std::size_t f = 0; f < out.n_frames; ++f)
    for (std::size_t b = 0; b < out.n_bins; ++b)
      if (out.at(f, b) < thresholds[b]) out.at(f, b) = 0.0;
  out.noise_reduced = true;
  return out;
}

Spectrogram denoise(const Spectrogram& spec, const DenoiseParams& p) {
  if (spec.noise_reduced)
    throw std::invalid_argument("spectrogram is already noise reduced");
  return apply_noise_thresholds(spec, compute_noise_thresholds(spec, p));
}

namespace {

// Bins of one Doppler half-plane ordered from zero Doppler outward. The zero
// bin itself is included in both half-planes.
std::vector<std::size_t> half_plane_bins(const Spectrogram& spec, Direction d) {
  std::vector<std::size_t> bins;
  bins.reserve(spec.n_bins / 2 + 1);
  if (d == Direction::Toward) {
    for (std::size_t b = 0; b < spec.n_bins; ++b)
      if (spec.doppler_axis_hz[b] >= 0.0) bins.push_back(b);
    std::sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t c) {
      return spec.doppler_axis_hz[a] < spec.doppler_axis_hz[c];
    });
  } else {
    for (std::size_t b = 0; b < spec.n_bins; ++b)
      if (spec.doppler_axis_hz[b] <= 0.0) bins.push_back(b);
    std::sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t c) {
      return spec.doppler_axis_hz[a] > spec.doppler_axis_hz[c];
    });
  }
  return bins;
}

}  // namespace

EnvelopeSignal envelope(const Spectrogram& spec, Direction direction, double energy_fraction) {
  if (spec.n_frames == 0) throw std::invalid_argument("empty spectrogram");
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
    throw std::invalid_argument("energy fraction outside (0, 1]");

  const auto bins = half_plane_bins(spec, direction);

  // A recording whose energy sits almost entirely in the opposite half-plane
  // was tagged with the wrong direction; report that instead of guessing.
  double chosen = 0.0, total = 0.0;
  for (std::size_t f = 0; f < spec.n_frames; ++f)
    for (std::size_t b = 0; b < spec.n_bins; ++b) total += spec.at(f, b);
  for (std::size_t f = 0; f < spec.n_frames; ++f)
    for (std::size_t b : bins) chosen += spec.at(f, b);
  const double opposite = total - chosen;
  if (opposite > 0.0 && chosen < 0.1 * opposite)
    throw std::runtime_error("direction mismatch: Doppler energy sits in the opposite half-plane");

  EnvelopeSignal env;
  env.values_hz.resize(spec.n_frames);
  env.time_axis_s = spec.time_axis_s;
  env.frame_rate_hz = spec.frame_rate_hz;

  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    double frame_total = 0.0;
    for (std::size_t b : bins) frame_total += spec.at(f, b);
    if (frame_total <= 0.0) {
      env.values_hz[f] = 0.0;
      continue;
    }
    const double target = energy_fraction * frame_total;
    double acc = 0.0;
    double freq = 0.0;
    for (std::size_t b : bins) {
      acc += spec.at(f, b);
      freq = spec.doppler_axis_hz[b];
      if (acc >= target) break;
    }
    env.values_hz[f] = freq;
  }
  return env;
}

EnergySignal energy_signal(const Spectrogram& spec, Direction direction, double torso_exclusion_hz) {
  if (spec.n_frames == 0) throw std::invalid_argument("empty spectrogram");
  if (!(torso_exclusion_hz >= 0.0))
    throw std::invalid_argument("torso exclusion must be non-negative");

  std::vector<std::size_t> bins;
  for (std::size_t b = 0; b < spec.n_bins; ++b) {
    const double f = spec.doppler_axis_hz[b];
    const bool side = direction == Direction::Toward ? f > 0.0 : f < 0.0;
    if (side && std::abs(f) > torso_exclusion_hz) bins.push_back(b);
  }
  if (bins.empty())
    throw std::invalid_argument("torso exclusion leaves no micro-Doppler bins");

  EnergySignal e;
  e.values.resize(spec.n_frames);
  e.time_axis_s = spec.time_axis_s;
  e.frame_rate_hz = spec.frame_rate_hz;
  const double inv = 1.0 / static_cast<double>(bins.size());
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    double acc = 0.0;
    for (std::size_t b : bins) acc += spec.at(f, b);
    e.values[f] = acc * inv;
  }
  return e;
}

}  // namespace mdgait::dsp
