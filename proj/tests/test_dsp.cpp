#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "core/common.hpp"
#include "core/dsp.hpp"

using namespace mdgait;
using dsp::Spectrogram;
using dsp::StftConfig;

namespace {

IQRecording make_recording(std::vector<cplx> samples, double fs = 2560.0) {
  IQRecording rec;
  rec.samples = std::move(samples);
  rec.sampling_frequency_hz = fs;
  rec.carrier_frequency_hz = 24.0e9;
  rec.direction = Direction::Toward;
  return rec;
}

IQRecording tone_recording(double freq_hz, std::size_t n, double fs = 2560.0) {
  std::vector<cplx> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * M_PI * freq_hz * static_cast<double>(i) / fs;
    s[i] = cplx{std::cos(phase), std::sin(phase)};
  }
  return make_recording(std::move(s), fs);
}

IQRecording noise_recording(std::size_t n, std::uint64_t seed, double fs = 2560.0) {
  Rng rng(seed);
  std::vector<cplx> s(n);
  for (auto& v : s) v = cplx{rng.normal(), rng.normal()};
  return make_recording(std::move(s), fs);
}

// A bare spectrogram with a handmade Doppler axis, for envelope/energy tests
// that want exact hand-checkable numbers.
Spectrogram toy_spectrogram(std::size_t frames, double fs, std::size_t bins) {
  Spectrogram s;
  s.n_frames = frames;
  s.n_bins = bins;
  s.values.assign(frames * bins, 0.0);
  s.doppler_axis_hz.resize(bins);
  const auto half = static_cast<double>(bins / 2);
  for (std::size_t i = 0; i < bins; ++i)
    s.doppler_axis_hz[i] = (static_cast<double>(i) - half) * fs / static_cast<double>(bins);
  s.time_axis_s.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) s.time_axis_s[f] = static_cast<double>(f);
  s.frame_rate_hz = 1.0;
  s.noise_reduced = true;
  return s;
}

}  // namespace

TEST_CASE("remove_mean zeroes a constant signal and centres a ramp") {
  auto rec = make_recording({cplx{2.5, -1.0}, cplx{2.5, -1.0}, cplx{2.5, -1.0}});
  auto out = dsp::remove_mean(rec);
  for (const auto& s : out.samples) {
    CHECK(std::abs(s.real()) < 1e-15);
    CHECK(std::abs(s.imag()) < 1e-15);
  }

  auto ramp = make_recording({cplx{1.0, 0.0}, cplx{2.0, 0.0}, cplx{3.0, 0.0}});
  auto centred = dsp::remove_mean(ramp);
  CHECK(centred.samples[0].real() == doctest::Approx(-1.0));
  CHECK(centred.samples[1].real() == doctest::Approx(0.0));
  CHECK(centred.samples[2].real() == doctest::Approx(1.0));
}

TEST_CASE("remove_mean leaves zero mean on arbitrary input") {
  auto rec = noise_recording(501, 42);
  auto out = dsp::remove_mean(rec);
  cplx mean{0.0, 0.0};
  double scale = 0.0;
  for (const auto& s : out.samples) {
    mean += s;
    scale = std::max(scale, std::abs(s));
  }
  mean /= static_cast<double>(out.samples.size());
  CHECK(std::abs(mean) <= 1e-12 * std::max(1.0, scale));
  CHECK_THROWS_AS(dsp::remove_mean(make_recording({})), std::invalid_argument);
}

TEST_CASE("spectrogram of silence is silent and has the documented shape") {
  auto rec = make_recording(std::vector<cplx>(2560, cplx{0.0, 0.0}));
  StftConfig cfg;
  cfg.hop = 20;
  auto spec = dsp::spectrogram(rec, cfg);
  // Default window is round(0.1 * fs) = 256 samples; frames that would read
  // past the final sample are dropped, so (2560 - 256) / 20 + 1 frames remain.
  CHECK(spec.n_frames == 116);
  CHECK(spec.n_bins == 2048);
  CHECK(spec.frame_rate_hz == doctest::Approx(128.0));
  for (double v : spec.values) CHECK(v == 0.0);

  // Zero-Doppler sits at bin K/2 and the axis is strictly monotone over
  // [-fs/2, fs/2).
  CHECK(spec.doppler_axis_hz[1024] == 0.0);
  CHECK(spec.doppler_axis_hz.front() == doctest::Approx(-1280.0));
  CHECK(spec.doppler_axis_hz.back() == doctest::Approx(1280.0 - 2560.0 / 2048.0));
  for (std::size_t i = 1; i < spec.n_bins; ++i)
    CHECK(spec.doppler_axis_hz[i] > spec.doppler_axis_hz[i - 1]);
  CHECK(spec.time_axis_s[1] - spec.time_axis_s[0] == doctest::Approx(20.0 / 2560.0));
}

TEST_CASE("spectrogram concentrates a pure exponential in the right bin") {
  // exp(-j 2 pi 160 t) at fs = 2560, K = 2048: -160 Hz falls exactly on bin
  // 1024 - 128 = 896.
  auto rec = tone_recording(-160.0, 2560);
  StftConfig cfg;
  cfg.hop = 20;
  auto spec = dsp::spectrogram(rec, cfg);
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < spec.n_bins; ++b)
      if (spec.at(f, b) > spec.at(f, best)) best = b;
    CHECK(std::llabs(static_cast<long long>(best) - 896) <= 1);
  }
}

TEST_CASE("per-frame energy obeys the DFT power identity") {
  // 9 frames of an 8-sample window zero-padded to 8 points: sum_k |X_k|^2
  // must equal K * sum_m |w(m) s(m)|^2 frame by frame.
  auto rec = noise_recording(32, 7, 8.0);
  StftConfig cfg;
  cfg.window_length = 8;
  cfg.fft_size = 8;
  cfg.hop = 3;
  auto spec = dsp::spectrogram(rec, cfg);
  CHECK(spec.n_frames == 9);

  std::vector<double> w(8);
  for (std::size_t i = 0; i < 8; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) / 7.0);
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    double lhs = 0.0;
    for (std::size_t b = 0; b < spec.n_bins; ++b) lhs += spec.at(f, b);
    double rhs = 0.0;
    for (std::size_t m = 0; m < 8; ++m) rhs += std::norm(w[m] * rec.samples[f * 3 + m]);
    rhs *= 8.0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("spectrogram rejects malformed inputs") {
  CHECK_THROWS_AS(dsp::spectrogram(make_recording({}), StftConfig{}), std::invalid_argument);

  auto shorty = noise_recording(100, 1);
  StftConfig too_long;
  too_long.window_length = 101;
  too_long.fft_size = 128;
  CHECK_THROWS_AS(dsp::spectrogram(shorty, too_long), std::invalid_argument);

  StftConfig tiny_fft;
  tiny_fft.window_length = 64;
  tiny_fft.fft_size = 32;
  CHECK_THROWS_AS(dsp::spectrogram(shorty, tiny_fft), std::invalid_argument);

  StftConfig no_hop;
  no_hop.window_length = 16;
  no_hop.fft_size = 16;
  no_hop.hop = 0;
  CHECK_THROWS_AS(dsp::spectrogram(shorty, no_hop), std::invalid_argument);
}

TEST_CASE("spectrogram is exactly invariant to a global phase rotation") {
  auto rec = noise_recording(600, 11);
  StftConfig cfg;
  cfg.window_length = 64;
  cfg.fft_size = 128;
  cfg.hop = 16;
  auto base = dsp::spectrogram(rec, cfg);

  // Multiplying by j permutes real and imaginary parts, so the squared
  // magnitudes agree bit for bit.
  auto rotated = rec;
  for (auto& s : rotated.samples) s *= cplx{0.0, 1.0};
  auto spec_j = dsp::spectrogram(rotated, cfg);
  REQUIRE(spec_j.values.size() == base.values.size());
  for (std::size_t i = 0; i < base.values.size(); ++i) CHECK(spec_j.values[i] == base.values[i]);

  // An arbitrary unit phasor only stirs rounding noise.
  auto turned = rec;
  const cplx phasor = std::polar(1.0, 0.8371);
  for (auto& s : turned.samples) s *= phasor;
  auto spec_phi = dsp::spectrogram(turned, cfg);
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(spec_phi.values[i] == doctest::Approx(base.values[i]).epsilon(1e-10));
}

TEST_CASE("shifting the input by one hop shifts the frames by one index") {
  auto rec = noise_recording(400, 23);
  StftConfig cfg;
  cfg.window_length = 64;
  cfg.fft_size = 64;
  cfg.hop = 16;
  auto full = dsp::spectrogram(rec, cfg);

  auto shifted = rec;
  shifted.samples.erase(shifted.samples.begin(), shifted.samples.begin() + 16);
  auto late = dsp::spectrogram(shifted, cfg);
  REQUIRE(late.n_frames + 1 == full.n_frames);
  // Identical sample windows go through the identical transform, so interior
  // frames match bit for bit.
  for (std::size_t f = 0; f < late.n_frames; ++f)
    for (std::size_t b = 0; b < late.n_bins; ++b) CHECK(late.at(f, b) == full.at(f + 1, b));
}

TEST_CASE("noise thresholds follow the quantile-times-margin rule per bin") {
  auto rec = noise_recording(500, 99);
  StftConfig cfg;
  cfg.window_length = 32;
  cfg.fft_size = 32;
  cfg.hop = 11;
  auto spec = dsp::spectrogram(rec, cfg);

  dsp::DenoiseParams params;
  auto thresholds = dsp::compute_noise_thresholds(spec, params);
  REQUIRE(thresholds.size() == spec.n_bins);
  const double margin = std::pow(10.0, 6.0 / 10.0);
  for (std::size_t b = 0; b < spec.n_bins; ++b) {
    std::vector<double> column(spec.n_frames);
    for (std::size_t f = 0; f < spec.n_frames; ++f) column[f] = spec.at(f, b);
    std::sort(column.begin(), column.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.6 * static_cast<double>(column.size())));
    CHECK(thresholds[b] == doctest::Approx(column[rank - 1] * margin).epsilon(1e-12));
  }
}

TEST_CASE("denoise zeroes at least the quantile share of a pure-noise map") {
  auto spec = dsp::spectrogram(noise_recording(800, 5), [] {
    StftConfig c;
    c.window_length = 64;
    c.fft_size = 64;
    c.hop = 8;
    return c;
  }());
  auto quiet = dsp::denoise(spec, {});
  CHECK(quiet.noise_reduced);

  std::size_t zeros = 0;
  for (std::size_t i = 0; i < quiet.values.size(); ++i) {
    CHECK(quiet.values[i] <= spec.values[i]);  // never increases an entry
    if (quiet.values[i] == 0.0) ++zeros;
  }
  CHECK(static_cast<double>(zeros) >= 0.6 * static_cast<double>(quiet.values.size()));
}

TEST_CASE("a tone ridge with bounded dwell survives denoising") {
  // Tone on for the first 870 samples, silence after: 72 of the 116 frames
  // see no tone at all, so the 60 % quantile of the tone bin is zero and the
  // ridge keeps its full strength.
  const double freq = 320.0;
  auto rec = tone_recording(freq, 2560);
  for (std::size_t i = 870; i < rec.samples.size(); ++i) rec.samples[i] = cplx{0.0, 0.0};
  StftConfig cfg;
  cfg.hop = 20;
  auto spec = dsp::spectrogram(rec, cfg);
  auto quiet = dsp::denoise(spec, {});

  // Frames wholly inside the tone segment start at sample <= 870 - 256.
  for (std::size_t f = 0; f * 20 + 256 <= 870; ++f) {
    std::size_t before = 0, after = 0;
    for (std::size_t b = 1; b < spec.n_bins; ++b) {
      if (spec.at(f, b) > spec.at(f, before)) before = b;
      if (quiet.at(f, b) > quiet.at(f, after)) after = b;
    }
    CHECK(after == before);
    CHECK(quiet.at(f, after) == spec.at(f, before));
    CHECK(spec.doppler_axis_hz[after] == doctest::Approx(freq));
  }
}

TEST_CASE("a bin occupied every frame is treated as stationary clutter") {
  // The threshold of a bin is a quantile of its own history, so a return
  // present in every frame raises its own bar above itself and is removed.
  // That is the intended behaviour: only returns that come and go within a
  // bin survive, constant ones read as furniture.
  auto spec = toy_spectrogram(10, 16.0, 16);
  for (std::size_t f = 0; f < 10; ++f) spec.at(f, 12) = 7.0;
  spec.noise_reduced = false;
  auto quiet = dsp::denoise(spec, {});
  for (std::size_t f = 0; f < 10; ++f) CHECK(quiet.at(f, 12) == 0.0);
}

TEST_CASE("denoise is idempotent under frozen thresholds and refuses reruns") {
  auto rec = noise_recording(700, 31);
  StftConfig cfg;
  cfg.window_length = 64;
  cfg.fft_size = 64;
  cfg.hop = 16;
  auto spec = dsp::spectrogram(rec, cfg);
  auto thresholds = dsp::compute_noise_thresholds(spec, {});
  auto once = dsp::apply_noise_thresholds(spec, thresholds);
  auto twice = dsp::apply_noise_thresholds(once, thresholds);
  for (std::size_t i = 0; i < once.values.size(); ++i) CHECK(twice.values[i] == once.values[i]);

  CHECK_THROWS_AS(dsp::denoise(once, {}), std::invalid_argument);
}

TEST_CASE("an all-zero spectrogram passes through denoising unchanged") {
  auto spec = toy_spectrogram(6, 16.0, 16);
  spec.noise_reduced = false;
  auto quiet = dsp::denoise(spec, {});
  CHECK(quiet.noise_reduced);
  for (double v : quiet.values) CHECK(v == 0.0);
}

TEST_CASE("envelope walks outward until the energy fraction is reached") {
  // Axis bins are -4..3 Hz. Toward scans 0, +1, +2, +3.
  auto spec = toy_spectrogram(4, 8.0, 8);
  auto bin = [&](double hz) {
    for (std::size_t b = 0; b < spec.n_bins; ++b)
      if (spec.doppler_axis_hz[b] == hz) return b;
    REQUIRE(false);
    return std::size_t{0};
  };

  // Frame 0: cumulative 0.5 / 0.95 / 1.0 -> stops exactly at +2 Hz.
  spec.at(0, bin(1.0)) = 0.5;
  spec.at(0, bin(2.0)) = 0.45;
  spec.at(0, bin(3.0)) = 0.05;
  // Frame 1: needs the outermost bin.
  spec.at(1, bin(1.0)) = 0.5;
  spec.at(1, bin(2.0)) = 0.3;
  spec.at(1, bin(3.0)) = 0.2;
  // Frame 2 stays empty. Frame 3: all energy at zero Doppler.
  spec.at(3, bin(0.0)) = 1.0;

  auto env = dsp::envelope(spec, Direction::Toward, 0.95);
  REQUIRE(env.values_hz.size() == 4);
  CHECK(env.values_hz[0] == 2.0);
  CHECK(env.values_hz[1] == 3.0);
  CHECK(env.values_hz[2] == 0.0);
  CHECK(env.values_hz[3] == 0.0);
}

TEST_CASE("envelope respects the receding half-plane") {
  auto spec = toy_spectrogram(2, 8.0, 8);
  auto bin = [&](double hz) {
    for (std::size_t b = 0; b < spec.n_bins; ++b)
      if (spec.doppler_axis_hz[b] == hz) return b;
    REQUIRE(false);
    return std::size_t{0};
  };
  spec.at(0, bin(-1.0)) = 0.6;
  spec.at(0, bin(-3.0)) = 0.4;
  spec.at(1, bin(-2.0)) = 1.0;
  auto env = dsp::envelope(spec, Direction::Away, 0.95);
  CHECK(env.values_hz[0] == -3.0);
  CHECK(env.values_hz[1] == -2.0);

  // All the energy sits on the negative side, so asking for the approaching
  // envelope is a contradiction the call must report.
  CHECK_THROWS_AS(dsp::envelope(spec, Direction::Toward, 0.95), std::runtime_error);
}

TEST_CASE("envelope magnitude never exceeds the Doppler axis bound") {
  auto rec = noise_recording(900, 77);
  StftConfig cfg;
  cfg.window_length = 64;
  cfg.fft_size = 128;
  cfg.hop = 16;
  auto quiet = dsp::denoise(dsp::spectrogram(rec, cfg), {});
  double bound = 0.0;
  for (double f : quiet.doppler_axis_hz) bound = std::max(bound, std::abs(f));
  auto env = dsp::envelope(quiet, Direction::Toward, 0.95);
  for (double v : env.values_hz) CHECK(std::abs(v) <= bound);

  CHECK_THROWS_AS(dsp::envelope(quiet, Direction::Toward, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dsp::envelope(quiet, Direction::Toward, 1.5), std::invalid_argument);
}

TEST_CASE("energy signal averages the out-of-band bins it claims to") {
  // Axis bins are -4..3 Hz. Toward with a 1.5 Hz guard keeps +2 and +3 only.
  auto spec = toy_spectrogram(2, 8.0, 8);
  auto bin = [&](double hz) {
    for (std::size_t b = 0; b < spec.n_bins; ++b)
      if (spec.doppler_axis_hz[b] == hz) return b;
    REQUIRE(false);
    return std::size_t{0};
  };
  spec.at(0, bin(1.0)) = 9.0;  // inside the guard band: must not count
  spec.at(0, bin(2.0)) = 4.0;
  spec.at(0, bin(3.0)) = 2.0;
  spec.at(1, bin(-2.0)) = 8.0;  // wrong sign for Toward: must not count

  auto e = dsp::energy_signal(spec, Direction::Toward, 1.5);
  REQUIRE(e.values.size() == 2);
  CHECK(e.values[0] == doctest::Approx(3.0));
  CHECK(e.values[1] == 0.0);

  auto away = dsp::energy_signal(spec, Direction::Away, 1.5);
  CHECK(away.values[1] == doctest::Approx(8.0 / 3.0));

  CHECK_THROWS_AS(dsp::energy_signal(spec, Direction::Toward, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(dsp::energy_signal(spec, Direction::Toward, -1.0), std::invalid_argument);
}

TEST_CASE("energy signal is exactly linear in the spectrogram") {
  auto rec = noise_recording(600, 13);
  StftConfig cfg;
  cfg.window_length = 64;
  cfg.fft_size = 128;
  cfg.hop = 16;
  auto quiet = dsp::denoise(dsp::spectrogram(rec, cfg), {});
  auto base = dsp::energy_signal(quiet, Direction::Toward, 100.0);

  // Doubling is a pure exponent shift, so the outputs agree bit for bit.
  auto doubled = quiet;
  for (auto& v : doubled.values) v *= 2.0;
  auto e2 = dsp::energy_signal(doubled, Direction::Toward, 100.0);
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(e2.values[i] == 2.0 * base.values[i]);

  auto scaled = quiet;
  for (auto& v : scaled.values) v *= 3.7;
  auto e37 = dsp::energy_signal(scaled, Direction::Toward, 100.0);
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(e37.values[i] == doctest::Approx(3.7 * base.values[i]).epsilon(1e-12));
}
