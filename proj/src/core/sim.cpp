#include "core/sim.hpp"

#include <algorithm>
#include <cstdio>

namespace mdgait::sim {

namespace {

// Scatterer reflectivities. The torso return is narrowband, so even a modest
// amplitude keeps it the brightest spectrogram line by far; keeping it modest
// also stops its spectral skirts from leaking into the limb-band energy
// signal. The cane (a rigid, often metallic rod) gives a sustained specular
// line while it is carried forward; that long dwell is what makes the cane
// classes' energy signal deviate from a plain alternating-leg pattern.
constexpr double kTorsoReflectivity = 2.0;
constexpr double kCaneReflectivity = 1.6;

// A swinging leg is an extended target, not a point: echoes arrive from the
// whole foot-to-hip chain, every segment moving with the same timing but a
// smaller excursion the closer it rides to the hip. Each segment loiters
// near its own peak Doppler (the half-sine velocity profile flattens there),
// so the chain paints a ladder of persistent ridges across the micro-Doppler
// band instead of one fleeting transit. Swinging limbs present a large cross
// section toward the radar (shin and shoe face it squarely), so the fast
// segments reflect on par with the trunk.
struct LegSegment {
  const char* name;
  double velocity_ratio;  // segment peak speed relative to the foot
  double reflectivity;
};
constexpr LegSegment kLegSegments[] = {
    {"foot", 1.00, 1.40}, {"shank", 0.78, 1.10}, {"knee", 0.58, 0.90},
    {"thigh", 0.45, 0.60}, {"hip", 0.28, 0.30},
};
constexpr std::size_t kSegmentsPerLeg = std::size(kLegSegments);

struct Burst {
  double start_s;
  double width_s;
  double peak_mps;
};

// Adds a half-sine speed bump: v(t) = peak * sin(pi (t - start) / width).
void add_burst(std::vector<double>& v, const Burst& b, double fs) {
  const long n = static_cast<long>(v.size());
  long i0 = static_cast<long>(std::ceil(b.start_s * fs));
  long i1 = static_cast<long>(std::floor((b.start_s + b.width_s) * fs));
  i0 = std::max(i0, 0L);
  i1 = std::min(i1, n - 1);
  for (long i = i0; i <= i1; ++i) {
    const double t = static_cast<double>(i) / fs;
    v[static_cast<std::size_t>(i)] += b.peak_mps * std::sin(M_PI * (t - b.start_s) / b.width_s);
  }
}

}  // namespace

void GaitProfile::validate(const RadarConfig& cfg) const {
  cfg.validate();
  if (!(stride_rate_hz >= 0.5 && stride_rate_hz <= 2.0))
    throw std::invalid_argument("stride rate outside [0.5, 2.0] Hz");
  if (!(base_velocity_mps > 0.0))
    throw std::invalid_argument("base velocity must be positive");
  if (!(base_velocity_mps < peak_foot_velocity_mps))
    throw std::invalid_argument("base velocity must be below peak foot velocity");
  if (!(limp_attenuation > 0.0 && limp_attenuation <= 1.0))
    throw std::invalid_argument("limp attenuation outside (0, 1]");
  if (!(burst_duty > 0.0 && burst_duty < 0.65))
    throw std::invalid_argument("burst duty outside (0, 0.65)");
  const bool cane = gait_class == GaitClass::CW || gait_class == GaitClass::CWOOS;
  if (cane && !(cane_peak_velocity_mps > 0.0))
    throw std::invalid_argument("cane classes need a positive cane peak velocity");
  if (noise_snr_db && !std::isfinite(*noise_snr_db))
    throw std::invalid_argument("noise SNR must be finite when given");
}

std::vector<ScattererTrack> build_tracks(const GaitProfile& p, const RadarConfig& cfg) {
  p.validate(cfg);

  const std::size_t n = cfg.num_samples();
  const double fs = cfg.sampling_frequency_hz;
  const double duration = cfg.duration_s;
  const double event_period = 1.0 / p.stride_rate_hz;
  const double burst_width = p.burst_duty * event_period;
  const bool has_cane = p.gait_class == GaitClass::CW || p.gait_class == GaitClass::CWOOS;

  std::vector<ScattererTrack> tracks;
  tracks.push_back({"torso", kTorsoReflectivity, std::vector<double>(n, 0.0)});
  for (const char* leg : {"a", "b"})
    for (const auto& seg : kLegSegments)
      tracks.push_back({std::string(seg.name) + "_" + leg, seg.reflectivity,
                        std::vector<double>(n, 0.0)});
  if (has_cane) tracks.push_back({"cane", kCaneReflectivity, std::vector<double>(n, 0.0)});

  auto& torso = tracks[0].radial_velocity_mps;
  const std::size_t leg_a_base = 1;
  const std::size_t leg_b_base = 1 + kSegmentsPerLeg;
  const std::size_t cane_index = 1 + 2 * kSegmentsPerLeg;

  // Torso: a long cruise at the base speed, broken once per step by a brief
  // push-off surge. The trunk coasts through double support and most of
  // stance, then the driving leg kicks it briefly off its cruise; left and
  // right push-offs never match, so successive surges deflect the speed to
  // opposite sides of the mean. The torso line in the spectrogram therefore
  // blinks at the step rate between the base-velocity bin and a short
  // excursion band around it.
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double cycles = p.stride_rate_hz * (t - p.gait_phase * event_period);
    const double k = std::floor(cycles);
    const double x = cycles - k;
    const double side = (static_cast<long long>(k) % 2 == 0) ? 1.0 : -1.0;
    const double surge = (x < 0.45) ? std::sin(M_PI * x / 0.45) : 0.0;
    torso[i] = p.base_velocity_mps + p.torso_sway_mps * side * surge;
  }

  auto add_leg_event = [&](std::size_t leg_base, double start, double scale) {
    for (std::size_t s = 0; s < kSegmentsPerLeg; ++s)
      add_burst(tracks[leg_base + s].radial_velocity_mps,
                {start, burst_width,
                 scale * kLegSegments[s].velocity_ratio * p.peak_foot_velocity_mps},
                fs);
  };

  if (p.gait_class == GaitClass::CWOOS) {
    // Out-of-sync cane: two leg swings and one cane swing form one gait
    // period, spread evenly, so micro-Doppler events arrive at 1.5x the leg
    // event rate while the energy pattern repeats at half the leg rate.
    auto& cane = tracks[cane_index].radial_velocity_mps;
    // The cane is carried through most of its third of the gait period — it
    // lifts just after one foot lands and plants just before the other rises —
    // but it stays clear of the leg swings on either side, so the energy
    // signal keeps three distinct bumps per period.
    const double cane_width = 0.9 * burst_width;
    const double period = 2.0 * event_period;
    const double sub = period / 3.0;
    const long first = static_cast<long>(std::floor((-burst_width) / period)) - 1;
    const long last = static_cast<long>(std::ceil((duration + burst_width) / period)) + 1;
    for (long m = first; m <= last; ++m) {
      const double t0 = (static_cast<double>(m) + p.gait_phase) * period;
      add_leg_event(leg_a_base, t0, 1.0);
      add_plateau_burst(cane, {t0 + sub, cane_width, p.cane_peak_velocity_mps}, fs);
      add_leg_event(leg_b_base, t0 + 2.0 * sub, 1.0);
    }
  } else {
    const long first = static_cast<long>(std::floor((-burst_width) / event_period)) - 1;
    const long last = static_cast<long>(std::ceil((duration + burst_width) / event_period)) + 1;
    for (long k = first; k <= last; ++k) {
      const double t0 = (static_cast<double>(k) + p.gait_phase) * event_period;
      const bool leg_a = (k % 2) == 0;
      double scale = 1.0;
      if (p.gait_class == GaitClass::L1 && !leg_a) scale = p.limp_attenuation;
      if (p.gait_class == GaitClass::L2) scale = p.limp_attenuation;
      if (leg_a) {
        add_leg_event(leg_a_base, t0, scale);
        if (p.gait_class == GaitClass::CW) {
          // In-sync cane: planted and lifted with the same-side foot, carried
          // a little longer than the swing itself lasts.
          auto& cane = tracks[cane_index].radial_velocity_mps;
          add_plateau_burst(cane, {t0, 1.2 * burst_width, p.cane_peak_velocity_mps}, fs);
        }
      } else {
        add_leg_event(leg_b_base, t0, scale);
      }
    }
  }

  // Feet and thighs ride on the body: swings add to the translation while the
  // burst is active; between swings the limb is in stance and nearly static,
  // contributing only a DC term that mean removal cancels.
  // Sign: approaching motion has a negative range rate, which doppler_shift()
  // maps to the positive Doppler half-plane used for "toward" recordings.
  const double dir_sign = p.direction == Direction::Toward ? -1.0 : 1.0;
  for (auto& track : tracks)
    for (auto& v : track.radial_velocity_mps) v *= dir_sign;

  return tracks;
}

IQRecording synthesize_from_tracks(const std::vector<ScattererTrack>& tracks,
                                   const RadarConfig& cfg,
                                   std::optional<double> noise_snr_db,
                                   std::uint64_t seed) {
  cfg.validate();
  if (tracks.empty()) throw std::invalid_argument("no scatterer tracks");
  const std::size_t n = cfg.num_samples();
  for (const auto& t : tracks)
    if (t.radial_velocity_mps.size() != n)
      throw std::invalid_argument("track length does not match the radar config");

  Rng rng(seed);
  IQRecording rec;
  rec.samples.assign(n, cplx{0.0, 0.0});
  rec.sampling_frequency_hz = cfg.sampling_frequency_hz;
  rec.carrier_frequency_hz = cfg.carrier_frequency_hz;

  // Each scatterer accumulates phase from its instantaneous Doppler, so a
  // constant range rate v produces a clean spectral line at doppler_shift(v).
  for (const auto& track : tracks) {
    double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = track.reflectivity / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      phase += 2.0 * M_PI *
               doppler_shift(track.radial_velocity_mps[i], cfg.aspect_angle_rad, cfg) /
               cfg.sampling_frequency_hz;
      rec.samples[i] += amp * cplx{std::cos(phase), std::sin(phase)};
    }
  }

  // AC-coupled receiver: static returns (planted feet, and in a real room the
  // walls and furniture) sit at exactly 0 Hz and never reach the ADC. Each
  // such return is a complex constant, so removing the sample mean models the
  // coupling while leaving moving scatterers essentially untouched.
  cplx mean{0.0, 0.0};
  for (const auto& s : rec.samples) mean += s;
  mean /= static_cast<double>(n);
  for (auto& s : rec.samples) s -= mean;

  if (noise_snr_db) {
    double power = 0.0;
    for (const auto& s : rec.samples) power += std::norm(s);
    power /= static_cast<double>(n);
    const double noise_power = power * std::pow(10.0, -*noise_snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);
    for (auto& s : rec.samples) s += cplx{rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
  }

  return rec;
}

IQRecording synthesize(const GaitProfile& profile, const RadarConfig& cfg) {
  auto tracks = build_tracks(profile, cfg);
  IQRecording rec = synthesize_from_tracks(tracks, cfg, profile.noise_snr_db, profile.rng_seed);
  rec.direction = profile.direction;
  rec.label = profile.gait_class;
  return rec;
}

std::vector<PlannedRecording> plan_dataset(const DatasetSpec& spec) {
  if (spec.subjects == 0 || spec.runs_per_class == 0)
    throw std::invalid_argument("dataset needs at least one subject and one run per class");

  std::vector<PlannedRecording> plan;
  plan.reserve(spec.subjects * spec.runs_per_class * static_cast<std::size_t>(kNumClasses));

  for (std::size_t subj = 0; subj < spec.subjects; ++subj) {
    Rng subject_rng(Rng::derive_seed(spec.seed, 0x5b1ull, subj));
    const double stride = subject_rng.uniform(spec.stride_rate_min_hz, spec.stride_rate_max_hz);
    const double base_v = subject_rng.uniform(spec.base_velocity_min_mps, spec.base_velocity_max_mps);
    const double peak_v = subject_rng.uniform(spec.peak_foot_velocity_min_mps, spec.peak_foot_velocity_max_mps);
    const double att = subject_rng.uniform(spec.limp_attenuation_min, spec.limp_attenuation_max);
    const double cane_v = subject_rng.uniform(spec.cane_peak_velocity_min_mps, spec.cane_peak_velocity_max_mps);

    char sid[16];
    std::snprintf(sid, sizeof sid, "S%02zu", subj);

    for (int cls = 0; cls < kNumClasses; ++cls) {
      for (std::size_t run = 0; run < spec.runs_per_class; ++run) {
        Rng run_rng(Rng::derive_seed(spec.seed, subj + 1, static_cast<std::uint64_t>(cls) + 1, run + 1));
        GaitProfile p;
        p.gait_class = static_cast<GaitClass>(cls);
        p.direction = (run % 2 == 0) ? Direction::Toward : Direction::Away;
        p.stride_rate_hz = stride + run_rng.uniform(-spec.run_stride_rate_jitter_hz, spec.run_stride_rate_jitter_hz);
        p.base_velocity_mps = base_v + run_rng.uniform(-spec.run_base_velocity_jitter_mps, spec.run_base_velocity_jitter_mps);
        p.peak_foot_velocity_mps = peak_v + run_rng.uniform(-spec.run_peak_velocity_jitter_mps, spec.run_peak_velocity_jitter_mps);
        p.limp_attenuation = att;
        p.cane_peak_velocity_mps = cane_v;
        p.gait_phase = run_rng.uniform();
        p.noise_snr_db = spec.noise_snr_db;
        p.rng_seed = Rng::derive_seed(spec.seed, subj + 101, static_cast<std::uint64_t>(cls) + 11, run + 1);

        char stem[64];
        std::snprintf(stem, sizeof stem, "%s_%s_%s_r%02zu", sid,
                      to_string(p.gait_class).c_str(),
                      to_string(p.direction).c_str(), run);
        // The class name "CW/oos" is not filesystem-friendly; patch the stem.
        for (char* c = stem; *c; ++c)
          if (*c == '/') *c = '-';

        plan.push_back({p, sid, stem});
      }
    }
  }
  return plan;
}

}  // namespace mdgait::sim
