#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "vrconflict/rng.hpp"
#include "vrconflict/signal.hpp"

namespace vrconflict {

enum class ProtocolMode { BlockedRadius, Oddball };
enum class TargetSide { Pos1, Pos2 };

const char* to_string(TargetSide s);
TargetSide parse_target_side(std::string_view s);

struct ProtocolConfig {
  ProtocolMode mode = ProtocolMode::BlockedRadius;
  int trials_total = 300;
  int block_len = 10;
  // selection-radius multipliers of the actual target radius, indexed by DLevel
  std::array<double, 3> d_multipliers{0.2, 1.0, 1.5};
  int rest_every_blocks = 3;     // blocked mode: rest after every 3rd block
  double rest_duration_s = 30.0;
  double inter_trial_s = 1.0;    // blocked mode: unmarked gap between trials
  double dwell_s = 0.3;          // time the hand must stay inside D
  double trial_timeout_s = 5.0;  // oddball mode
  double inter_trial_rest_s = 5.0;  // oddball mode: marked rest after each trial
  std::array<HandStyle, 3> hand_styles{HandStyle::S1, HandStyle::S2, HandStyle::S3};
  int sessions = 3;

  static ProtocolConfig blocked_default();
  static ProtocolConfig oddball_default();

  double d_multiplier(DLevel d) const { return d_multipliers[static_cast<int>(d)]; }
  void validate() const;
};

struct TrialPlanEntry {
  int trial_id = 0;  // 0-based within the run
  int block_id = 0;
  DLevel d_level = DLevel::D1;
  std::optional<HandStyle> style;  // oddball only
  TargetSide target_side = TargetSide::Pos1;
};

using TrialPlan = std::vector<TrialPlanEntry>;

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

// Minimum-jerk point-to-point reach: straight path from start to target with
// the quintic speed profile s(u) = 10u^3 - 15u^4 + 6u^5, u = t / movement_time.
struct ReachModel {
  Vec3 start{0.0, 0.0, 0.0};
  Vec3 target{0.35, 0.0, 0.25};
  double actual_radius_m = 0.05;   // physical radius of the target cube's bounding sphere
  double movement_time_s = 0.8;

  double path_length() const;
  Vec3 position(double t) const;
  double distance_at(double t) const;  // distance to target center
  void validate() const;
};

// First time the hand enters the selection radius d_abs, scanned on a 1 ms
// grid; nullopt if the full movement never gets that close.
std::optional<double> crossing_time(const ReachModel& reach, double d_abs);

// Completion-time model: crossing + dwell + penalties that decay within a
// block + Gaussian noise (clamped so completion >= crossing + dwell).
struct ConflictRtModel {
  double block_change_penalty_s = 0.4;  // extra cost right after D changes
  double conflict_penalty_s = 0.3;      // extra cost when D != D2 (expectation conflict)
  double decay = 0.5;                   // per-trial multiplicative decay within a block
  double congruency_modulation = 0.3;   // penalty reduction after an incongruent trial
  double noise_sd_s = 0.05;
  void validate() const;
};

struct TrialRecord {
  TrialPlanEntry plan;
  double crossing_time_s = 0;
  double completion_time_s = 0;
  std::optional<bool> prev_trial_congruent;  // absent on the first trial
  std::optional<std::size_t> feedback_onset_sample;  // set by emit_markers
};

// Feedback latency after selection, drawn uniformly per trial.
struct LatencySpec {
  double lo_ms = 100.0;
  double hi_ms = 150.0;
  static LatencySpec zero() { return {0.0, 0.0}; }
};

// Blocked-radius schedule: uniformly random permutation of 10 blocks per
// level, block_len trials each, strictly alternating target side.
TrialPlan build_blocked_schedule(const ProtocolConfig& cfg, std::uint64_t seed);

// Oddball schedule for one participant: one plan per session, pattern
// [D1,D1,D1,D2], hand style per session by Latin-square rotation.
std::vector<TrialPlan> build_oddball_schedule(const ProtocolConfig& cfg, int participant_index);

TrialRecord simulate_trial(const TrialPlanEntry& entry, const TrialPlanEntry* prev,
                           const ConflictRtModel& model, const ReachModel& reach,
                           const ProtocolConfig& cfg, Rng& rng);

std::vector<TrialRecord> simulate_trials(const TrialPlan& plan, const ConflictRtModel& model,
                                         const ReachModel& reach, const ProtocolConfig& cfg,
                                         Rng& rng);

// Lays the trials on a sample clock and emits markers (TrialStart,
// FeedbackOnset, rest bounds per protocol).  Fills feedback_onset_sample on
// the records.  Throws if the timeline is not strictly increasing.
std::vector<EventMarker> emit_markers(std::vector<TrialRecord>& records,
                                      const ProtocolConfig& cfg, const LatencySpec& latency,
                                      double sample_rate_hz, std::uint64_t seed);

}  // namespace vrconflict
