#pragma once

#include <cstdint>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdgait {

using cplx = std::complex<double>;

// Walking styles, in the canonical reporting order used by every confusion
// matrix and serialized table.
enum class GaitClass : int {
  NW = 0,     // normal walk
  L1 = 1,     // limping with one leg
  L2 = 2,     // limping with both legs
  CW = 3,     // walking with a cane, in sync with a leg
  CWOOS = 4,  // walking with a cane, out of sync
};

inline constexpr int kNumClasses = 5;

enum class Direction : int {
  Toward = 0,
  Away = 1,
};

std::string to_string(GaitClass c);
std::string to_string(Direction d);
GaitClass gait_class_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

/// The exportable radar data representations and their standard image shapes.
enum class RepresentationKind : int {
  Spectrogram = 0,     // 101 x 192
  Cvd = 1,             // 101 x 129
  Mcs = 2,             // 1 x 129
  CvdPre = 3,          // 101 x 129, cadence/Doppler warped
  McsPre = 4,          // 1 x 129
  FtFilteredTime = 5,  // 1 x 129
};

inline constexpr int kNumRepresentations = 6;

std::string to_string(RepresentationKind k);
RepresentationKind representation_from_string(const std::string& s);

/// Continuous-wave radar front-end description.
struct RadarConfig {
  double carrier_frequency_hz = 24.0e9;
  double sampling_frequency_hz = 2560.0;
  double duration_s = 6.0;
  double propagation_speed_mps = 2.998e8;
  double aspect_angle_rad = 0.0;

  std::size_t num_samples() const {
    return static_cast<std::size_t>(std::llround(sampling_frequency_hz * duration_s));
  }
  void validate() const;
};

/// One complex baseband recording plus the acquisition parameters needed to
/// interpret it.
struct IQRecording {
  std::vector<cplx> samples;
  double sampling_frequency_hz = 0.0;
  double carrier_frequency_hz = 0.0;
  Direction direction = Direction::Toward;
  std::optional<GaitClass> label;
  std::string subject_id;
};

// Spectral Doppler shift of a scatterer with radial (range-rate) velocity v,
// positive v receding. Approaching motion therefore lands on the positive
// Doppler side, which is the half-plane convention used for "toward" data.
double doppler_shift(double radial_velocity_mps, double aspect_angle_rad,
                     const RadarConfig& cfg);

// Inverse mapping at zero aspect angle: spectral frequency -> radial velocity.
double velocity_from_doppler(double doppler_hz, const RadarConfig& cfg);

/// Deterministic RNG used everywhere randomness is needed. Wraps a fixed
/// 64-bit generator and owns its distribution code so that streams are stable
/// across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64();
  double uniform();                         // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double normal();                          // standard normal, Marsaglia polar
  double normal(double mean, double stddev);

  // Derive an independent stream for a keyed sub-task (per recording, per
  // subject, ...) so parallel generation order cannot change results.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Nearest-rank quantile: smallest element x such that at least ceil(q*n)
// elements are <= x. q in [0, 1], data need not be sorted.
double quantile_nearest_rank(std::vector<double> values, double q);

// Runs fn(i) for i in [0, n). Honors the MDOP_THREADS environment variable
// (0 or unset = hardware concurrency). Falls back to a plain loop when only
// one worker is available.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

std::size_t effective_thread_count();

}  // namespace mdgait
