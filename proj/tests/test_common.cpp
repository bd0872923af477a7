#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "core/common.hpp"

using namespace mdgait;

TEST_CASE("doppler shift matches the hand-evaluated CW relation") {
  RadarConfig cfg;
  // f_D = -f_c * (2 v / c) * cos(theta); 24 GHz, c = 2.998e8 -> 160.107 Hz
  // per m/s, negative for receding motion.
  const double per_mps = 2.0 * cfg.carrier_frequency_hz / cfg.propagation_speed_mps;
  CHECK(per_mps == doctest::Approx(160.107).epsilon(1e-4));
  CHECK(doppler_shift(1.0, 0.0, cfg) == doctest::Approx(-per_mps));
  CHECK(doppler_shift(-1.0, 0.0, cfg) == doctest::Approx(per_mps));
  CHECK(doppler_shift(0.0, 0.0, cfg) == 0.0);
  // Aspect angle scales by cos(theta).
  CHECK(doppler_shift(1.0, M_PI / 3.0, cfg) ==
        doctest::Approx(-per_mps * 0.5).epsilon(1e-12));
}

TEST_CASE("velocity_from_doppler inverts doppler_shift at zero aspect") {
  RadarConfig cfg;
  for (double v : {-2.3, -1.0, -0.01, 0.0, 0.4, 1.2, 3.7}) {
    CHECK(velocity_from_doppler(doppler_shift(v, 0.0, cfg), cfg) ==
          doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("radar config validation") {
  RadarConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.num_samples() == 15360);  // 6 s at 2560 Hz

  RadarConfig bad = cfg;
  bad.sampling_frequency_hz = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.carrier_frequency_hz = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.duration_s = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("enum string round trips") {
  for (int i = 0; i < kNumClasses; ++i) {
    auto c = static_cast<GaitClass>(i);
    CHECK(gait_class_from_string(to_string(c)) == c);
  }
  CHECK(direction_from_string(to_string(Direction::Toward)) == Direction::Toward);
  CHECK(direction_from_string(to_string(Direction::Away)) == Direction::Away);
  for (int i = 0; i < kNumRepresentations; ++i) {
    auto k = static_cast<RepresentationKind>(i);
    CHECK(representation_from_string(to_string(k)) == k);
  }
  CHECK_THROWS(gait_class_from_string("no-such-class"));
  CHECK_THROWS(representation_from_string(""));
}

TEST_CASE("rng streams are deterministic and seed-sensitive") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && x == y;
    any_diff = any_diff || x != z;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng uniform respects bounds, normal has sane moments") {
  Rng r(7);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(2.0, 5.0);
    CHECK(u >= 2.0);
    CHECK(u < 5.0);
    const double g = r.normal();
    sum += g;
    sum2 += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("derive_seed separates keyed streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 64; ++i)
    for (std::uint64_t j = 0; j < 4; ++j) seen.insert(Rng::derive_seed(9, i, j));
  CHECK(seen.size() == 64 * 4);
  CHECK(Rng::derive_seed(9, 1, 2) == Rng::derive_seed(9, 1, 2));
  CHECK(Rng::derive_seed(9, 1, 2) != Rng::derive_seed(10, 1, 2));
}

TEST_CASE("nearest-rank quantile on hand cases") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};  // unsorted on purpose
  CHECK(quantile_nearest_rank(v, 1.0) == 4.0);
  CHECK(quantile_nearest_rank(v, 0.5) == 2.0);   // ceil(0.5*4) = 2nd smallest
  CHECK(quantile_nearest_rank(v, 0.6) == 3.0);   // ceil(2.4) = 3rd smallest
  CHECK(quantile_nearest_rank(v, 0.26) == 2.0);  // ceil(1.04) = 2nd smallest
  CHECK(quantile_nearest_rank({5.0}, 0.6) == 5.0);
  CHECK_THROWS(quantile_nearest_rank({}, 0.5));
  CHECK_THROWS(quantile_nearest_rank(v, 1.5));
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK(effective_thread_count() >= 1);
}
