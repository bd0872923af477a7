#pragma once

#include "core/common.hpp"

namespace mdgait::sim {

/// Kinematic description of one synthetic walker. Velocities are magnitudes;
/// the direction field decides the sign of every range rate.
struct GaitProfile {
  GaitClass gait_class = GaitClass::NW;
  Direction direction = Direction::Toward;
  double base_velocity_mps = 1.0;       // torso translation speed
  double stride_rate_hz = 0.9;          // leg-swing (micro-Doppler event) rate
  double peak_foot_velocity_mps = 2.8;  // foot swing peak speed
  double limp_attenuation = 0.55;       // velocity scale of attenuated swings, (0, 1]
  double cane_peak_velocity_mps = 1.8;  // cane swing peak speed (CW, CW/oos)
  double torso_sway_mps = 0.12;         // torso speed oscillation amplitude
  double burst_duty = 0.45;             // swing duration as fraction of the event period
  double gait_phase = 0.15;             // offset of the first event, fraction of a period
  std::optional<double> noise_snr_db;   // nullopt = noiseless
  std::uint64_t rng_seed = 1;

  void validate(const RadarConfig& cfg) const;
};

/// Per-sample range rate of one point scatterer, positive receding.
struct ScattererTrack {
  std::string name;
  double reflectivity = 1.0;
  std::vector<double> radial_velocity_mps;
};

// Builds the scatterer set for a profile: torso, two feet, two thighs, plus a
// cane track for the cane classes. Tracks cover cfg.num_samples() samples.
std::vector<ScattererTrack> build_tracks(const GaitProfile& profile, const RadarConfig& cfg);

// Sums the tracks into complex baseband by phase accumulation and adds complex
// white Gaussian noise at the requested SNR (relative to total signal power).
IQRecording synthesize_from_tracks(const std::vector<ScattererTrack>& tracks,
                                   const RadarConfig& cfg,
                                   std::optional<double> noise_snr_db,
                                   std::uint64_t seed);

// build_tracks + synthesize_from_tracks, with label/direction metadata filled in.
IQRecording synthesize(const GaitProfile& profile, const RadarConfig& cfg);

/// Batch plan for a balanced synthetic dataset: subjects x classes x runs,
/// directions alternating per run, per-subject and per-run parameter jitter.
struct DatasetSpec {
  std::size_t subjects = 10;
  std::size_t runs_per_class = 20;
  std::uint64_t seed = 7;
  std::optional<double> noise_snr_db = 10.0;

  // Per-subject jitter ranges (uniform draws).
  double stride_rate_min_hz = 0.75, stride_rate_max_hz = 1.05;
  double base_velocity_min_mps = 0.85, base_velocity_max_mps = 1.25;
  double peak_foot_velocity_min_mps = 2.5, peak_foot_velocity_max_mps = 3.0;
  double limp_attenuation_min = 0.45, limp_attenuation_max = 0.65;
  double cane_peak_velocity_min_mps = 1.6, cane_peak_velocity_max_mps = 2.0;

  // Per-run jitter half-widths around the subject draw.
  double run_stride_rate_jitter_hz = 0.03;
  double run_base_velocity_jitter_mps = 0.05;
  double run_peak_velocity_jitter_mps = 0.08;
};

struct PlannedRecording {
  GaitProfile profile;
  std::string subject_id;
  std::string stem;  // filename stem, e.g. "S03_CW_away_r07"
};

// Deterministic: the same spec yields the same plan, and each entry carries its
// own derived rng_seed, so recordings may be synthesized in any order.
std::vector<PlannedRecording> plan_dataset(const DatasetSpec& spec);

}  // namespace mdgait::sim
