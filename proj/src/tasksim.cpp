#include "vrconflict/tasksim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vrconflict {

const char* to_string(TargetSide s) {
  return s == TargetSide::Pos1 ? "pos1" : "pos2";
}

TargetSide parse_target_side(std::string_view s) {
  if (s == "pos1") return TargetSide::Pos1;
  if (s == "pos2") return TargetSide::Pos2;
  throw std::invalid_argument("unknown target side: " + std::string(s));
}

ProtocolConfig ProtocolConfig::blocked_default() { return {}; }

ProtocolConfig ProtocolConfig::oddball_default() {
  ProtocolConfig cfg;
  cfg.mode = ProtocolMode::Oddball;
  cfg.trials_total = 120;
  cfg.block_len = 4;  // one [D1,D1,D1,D2] group
  // D1 is the expected size, the deviant feedback sphere doubles it;
  // D3 is unused in this mode
  cfg.d_multipliers = {1.0, 2.0, 2.0};
  cfg.trial_timeout_s = 5.0;
  cfg.inter_trial_rest_s = 5.0;
  return cfg;
}

void ProtocolConfig::validate() const {
  if (trials_total <= 0) throw std::invalid_argument("trials_total must be positive");
  if (block_len <= 0) throw std::invalid_argument("block_len must be positive");
  if (trials_total % block_len != 0)
    throw std::invalid_argument("trials_total must be a multiple of block_len");
  for (double m : d_multipliers)
    if (!(m > 0.0)) throw std::invalid_argument("d_multipliers must be positive");
  if (rest_every_blocks <= 0) throw std::invalid_argument("rest_every_blocks must be positive");
  if (rest_duration_s < 0 || inter_trial_s < 0 || inter_trial_rest_s < 0)
    throw std::invalid_argument("rest/gap durations must be non-negative");
  if (dwell_s < 0) throw std::invalid_argument("dwell_s must be non-negative");
  if (trial_timeout_s <= 0) throw std::invalid_argument("trial_timeout_s must be positive");
  if (sessions <= 0) throw std::invalid_argument("sessions must be positive");
}

double ReachModel::path_length() const {
  const double dx = target.x - start.x, dy = target.y - start.y, dz = target.z - start.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Vec3 ReachModel::position(double t) const {
  double u = t / movement_time_s;
  u = std::clamp(u, 0.0, 1.0);
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  return {start.x + s * (target.x - start.x), start.y + s * (target.y - start.y),
          start.z + s * (target.z - start.z)};
}

double ReachModel::distance_at(double t) const {
  const Vec3 p = position(t);
  const double dx = target.x - p.x, dy = target.y - p.y, dz = target.z - p.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void ReachModel::validate() const {
  if (!(actual_radius_m > 0)) throw std::invalid_argument("actual_radius_m must be positive");
  if (!(movement_time_s > 0)) throw std::invalid_argument("movement_time_s must be positive");
  if (!(path_length() > 0)) throw std::invalid_argument("reach start and target coincide");
}

void ConflictRtModel::validate() const {
  if (block_change_penalty_s < 0 || conflict_penalty_s < 0)
    throw std::invalid_argument("penalties must be non-negative");
  if (decay < 0 || decay > 1) throw std::invalid_argument("decay must lie in [0, 1]");
  if (congruency_modulation < 0 || congruency_modulation > 1)
    throw std::invalid_argument("congruency_modulation must lie in [0, 1]");
  if (noise_sd_s < 0) throw std::invalid_argument("noise_sd_s must be non-negative");
}

std::optional<double> crossing_time(const ReachModel& reach, double d_abs) {
  if (d_abs < 0) return std::nullopt;
  // 1 ms grid over the movement, then the exact endpoint
  const double T = reach.movement_time_s;
  const long n_steps = static_cast<long>(std::floor(T * 1000.0 + 1e-9));
  for (long k = 0; k <= n_steps; ++k) {
    const double t = std::min(static_cast<double>(k) / 1000.0, T);
    if (reach.distance_at(t) <= d_abs) return t;
  }
  if (reach.distance_at(T) <= d_abs) return T;
  return std::nullopt;
}

TrialPlan build_blocked_schedule(const ProtocolConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int n_blocks = cfg.trials_total / cfg.block_len;
  if (n_blocks % 3 != 0)
    throw std::invalid_argument("blocked schedule needs a block count divisible by 3");
  std::vector<DLevel> blocks;
  blocks.reserve(n_blocks);
  for (int i = 0; i < n_blocks; ++i)
    blocks.push_back(static_cast<DLevel>(i / (n_blocks / 3)));
  Rng rng(seed);
  rng.shuffle(blocks);

  TrialPlan plan;
  plan.reserve(cfg.trials_total);
  for (int b = 0; b < n_blocks; ++b) {
    for (int i = 0; i < cfg.block_len; ++i) {
      TrialPlanEntry e;
      e.trial_id = b * cfg.block_len + i;
      e.block_id = b;
      e.d_level = blocks[b];
      e.target_side = (e.trial_id % 2 == 0) ? TargetSide::Pos1 : TargetSide::Pos2;
      plan.push_back(e);
    }
  }
  return plan;
}

std::vector<TrialPlan> build_oddball_schedule(const ProtocolConfig& cfg, int participant_index) {
  cfg.validate();
  if (participant_index < 0) throw std::invalid_argument("participant_index must be >= 0");
  if (cfg.block_len != 4)
    throw std::invalid_argument("oddball schedule uses blocks of 4 (three standards, one deviant)");
  std::vector<TrialPlan> sessions;
  sessions.reserve(cfg.sessions);
  const int n_styles = static_cast<int>(cfg.hand_styles.size());
  for (int s = 0; s < cfg.sessions; ++s) {
    // Latin-square rotation of hand style over sessions
    const HandStyle style = cfg.hand_styles[(participant_index + s) % n_styles];
    TrialPlan plan;
    plan.reserve(cfg.trials_total);
    for (int i = 0; i < cfg.trials_total; ++i) {
      TrialPlanEntry e;
      e.trial_id = i;
      e.block_id = i / cfg.block_len;
      e.d_level = (i % cfg.block_len == cfg.block_len - 1) ? DLevel::D2 : DLevel::D1;
      e.style = style;
      e.target_side = (i % 2 == 0) ? TargetSide::Pos1 : TargetSide::Pos2;
      plan.push_back(e);
    }
    sessions.push_back(std::move(plan));
  }
  return sessions;
}

TrialRecord simulate_trial(const TrialPlanEntry& entry, const TrialPlanEntry* prev,
                           const ConflictRtModel& model, const ReachModel& reach,
                           const ProtocolConfig& cfg, Rng& rng) {
  const double d_abs = cfg.d_multiplier(entry.d_level) * reach.actual_radius_m;
  const auto crossing = crossing_time(reach, d_abs);
  if (!crossing)
    throw std::logic_error("selection radius unreachable for d_level " +
                           std::string(to_string(entry.d_level)));

  const int pos = entry.trial_id % cfg.block_len;
  double penalty = 0.0;
  if (pos == 0 && entry.block_id > 0) penalty += model.block_change_penalty_s;
  if (entry.d_level != DLevel::D2) {
    // expectation conflict; adapted (reduced) right after an incongruent trial
    double conflict = model.conflict_penalty_s;
    if (prev != nullptr && prev->d_level != DLevel::D2)
      conflict *= 1.0 - model.congruency_modulation;
    penalty += conflict;
  }
  penalty *= std::pow(model.decay, pos);

  const double noise = model.noise_sd_s > 0 ? rng.normal(0.0, model.noise_sd_s) : 0.0;

  TrialRecord rec;
  rec.plan = entry;
  rec.crossing_time_s = *crossing;
  rec.completion_time_s = *crossing + cfg.dwell_s + std::max(0.0, penalty + noise);
  if (prev != nullptr) rec.prev_trial_congruent = (prev->d_level == DLevel::D2);
  return rec;
}

std::vector<TrialRecord> simulate_trials(const TrialPlan& plan, const ConflictRtModel& model,
                                         const ReachModel& reach, const ProtocolConfig& cfg,
                                         Rng& rng) {
  model.validate();
  reach.validate();
  std::vector<TrialRecord> out;
  out.reserve(plan.size());
  const TrialPlanEntry* prev = nullptr;
  for (const auto& entry : plan) {
    out.push_back(simulate_trial(entry, prev, model, reach, cfg, rng));
    prev = &entry;
  }
  return out;
}

namespace {
// timeline plumbing around the modelled intervals: a short hold on the
// feedback before a rest or the next trial, and a short preparation gap after
// a marked rest
constexpr double kFeedbackHoldS = 0.3;
constexpr double kPrepS = 0.2;

std::size_t to_sample(double t_s, double fs) {
  return static_cast<std::size_t>(std::llround(t_s * fs));
}
}  // namespace

std::vector<EventMarker> emit_markers(std::vector<TrialRecord>& records,
                                      const ProtocolConfig& cfg, const LatencySpec& latency,
                                      double sample_rate_hz, std::uint64_t seed) {
  cfg.validate();
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  if (latency.lo_ms < 0 || latency.hi_ms < latency.lo_ms)
    throw std::invalid_argument("bad latency range");

  Rng rng(seed);
  std::vector<EventMarker> markers;
  markers.reserve(records.size() * 4);
  const int n_blocks = cfg.trials_total / cfg.block_len;

  double t = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    TrialRecord& rec = records[i];
    Condition cond;
    cond.d_level = rec.plan.d_level;
    cond.style = rec.plan.style;
    cond.block_id = rec.plan.block_id;
    cond.trial_id = rec.plan.trial_id;

    markers.push_back({to_sample(t, sample_rate_hz), MarkerCode::TrialStart, cond});

    const double selection = t + rec.completion_time_s;
    const double jitter_ms =
        (latency.hi_ms > latency.lo_ms) ? rng.uniform(latency.lo_ms, latency.hi_ms)
                                        : latency.lo_ms;
    const double feedback = selection + jitter_ms / 1000.0;
    const std::size_t fb_sample = to_sample(feedback, sample_rate_hz);
    markers.push_back({fb_sample, MarkerCode::FeedbackOnset, cond});
    rec.feedback_onset_sample = fb_sample;

    const double after = feedback + kFeedbackHoldS;
    if (cfg.mode == ProtocolMode::Oddball) {
      // marked rest after every trial
      markers.push_back({to_sample(after, sample_rate_hz), MarkerCode::RestStart, {}});
      markers.push_back(
          {to_sample(after + cfg.inter_trial_rest_s, sample_rate_hz), MarkerCode::RestEnd, {}});
      t = after + cfg.inter_trial_rest_s + kPrepS;
    } else {
      const bool block_done = (rec.plan.trial_id % cfg.block_len) == cfg.block_len - 1;
      const int block = rec.plan.block_id;
      const bool rest_due = block_done && (block + 1) % cfg.rest_every_blocks == 0 &&
                            block + 1 < n_blocks;
      if (rest_due) {
        markers.push_back({to_sample(after, sample_rate_hz), MarkerCode::RestStart, {}});
        markers.push_back(
            {to_sample(after + cfg.rest_duration_s, sample_rate_hz), MarkerCode::RestEnd, {}});
        t = after + cfg.rest_duration_s + kPrepS;
      } else {
        t = after + cfg.inter_trial_s;
      }
    }
  }

  for (std::size_t i = 1; i < markers.size(); ++i)
    if (markers[i].sample_index <= markers[i - 1].sample_index)
      throw std::logic_error("marker timeline not strictly increasing (overlapping trials)");
  return markers;
}

}  // namespace vrconflict
