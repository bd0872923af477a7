#include "core/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace mdgait {

std::string to_string(GaitClass c) {
  switch (c) {
    case GaitClass::NW: return "NW";
    case GaitClass::L1: return "L1";
    case GaitClass::L2: return "L2";
    case GaitClass::CW: return "CW";
    case GaitClass::CWOOS: return "CW/oos";
  }
  throw std::invalid_argument("unknown gait class value");
}

std::string to_string(Direction d) {
  return d == Direction::Toward ? "toward" : "away";
}

GaitClass gait_class_from_string(const std::string& s) {
  if (s == "NW") return GaitClass::NW;
  if (s == "L1") return GaitClass::L1;
  if (s == "L2") return GaitClass::L2;
  if (s == "CW") return GaitClass::CW;
  if (s == "CW/oos" || s == "CWOOS" || s == "CWoos") return GaitClass::CWOOS;
  throw std::invalid_argument("unknown gait class: '" + s + "'");
}

Direction direction_from_string(const std::string& s) {
  if (s == "toward") return Direction::Toward;
  if (s == "away") return Direction::Away;
  throw std::invalid_argument("unknown direction: '" + s + "'");
}

std::string to_string(RepresentationKind k) {
  switch (k) {
    case RepresentationKind::Spectrogram: return "spectrogram";
    case RepresentationKind::Cvd: return "cvd";
    case RepresentationKind::Mcs: return "mcs";
    case RepresentationKind::CvdPre: return "cvd-pre";
    case RepresentationKind::McsPre: return "mcs-pre";
    case RepresentationKind::FtFilteredTime: return "ft-filtered-time";
  }
  throw std::invalid_argument("unknown representation value");
}

RepresentationKind representation_from_string(const std::string& s) {
  for (int i = 0; i < kNumRepresentations; ++i) {
    const auto k = static_cast<RepresentationKind>(i);
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown representation: '" + s + "'");
}

void RadarConfig::validate() const {
  if (!(carrier_frequency_hz > 0.0))
    throw std::invalid_argument("carrier frequency must be positive");
  if (!(sampling_frequency_hz > 0.0))
    throw std::invalid_argument("sampling frequency must be positive");
  if (!(duration_s > 0.0))
    throw std::invalid_argument("duration must be positive");
  if (!(propagation_speed_mps > 0.0))
    throw std::invalid_argument("propagation speed must be positive");
}

double doppler_shift(double radial_velocity_mps, double aspect_angle_rad,
                     const RadarConfig& cfg) {
  return -cfg.carrier_frequency_hz * (2.0 * radial_velocity_mps / cfg.propagation_speed_mps) *
         std::cos(aspect_angle_rad);
}

double velocity_from_doppler(double doppler_hz, const RadarConfig& cfg) {
  return -doppler_hz * cfg.propagation_speed_mps / (2.0 * cfg.carrier_frequency_hz);
}

std::uint64_t Rng::next_u64() {
  // splitmix64; small state, passes the usual batteries, reproducible forever.
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  have_spare_ = true;
  return u * m;
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::uint64_t Rng::derive_seed(std::uint64_t base, std::uint64_t a,
                               std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = base ^ 0x2545f4914f6cdd1dull;
  for (std::uint64_t x : {a, b, c}) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
  }
  return h ? h : 1;
}

double quantile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0,1]");
  const std::size_t n = values.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

std::size_t effective_thread_count() {
  if (const char* env = std::getenv("MDOP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(effective_thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mdgait
