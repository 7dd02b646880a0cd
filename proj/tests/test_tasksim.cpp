#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "vrconflict/tasksim.hpp"

using namespace vrconflict;

namespace {

// continuous crossing time by bisection on |path|*(1 - s(u)) = d_abs,
// independent of the 1 ms grid scan under test
double crossing_oracle(const ReachModel& reach, double d_abs) {
  const double L = reach.path_length();
  if (L <= d_abs) return 0.0;
  double lo = 0.0, hi = reach.movement_time_s;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (reach.distance_at(mid) > d_abs) lo = mid;
    else hi = mid;
  }
  return hi;
}

ConflictRtModel quiet_model() {
  ConflictRtModel m;
  m.noise_sd_s = 0.0;
  return m;
}

}  // namespace

TEST_CASE("minimum-jerk path endpoints and monotone distance") {
  ReachModel reach;
  reach.validate();
  const Vec3 p0 = reach.position(0.0);
  CHECK(p0.x == doctest::Approx(reach.start.x));
  const Vec3 p1 = reach.position(reach.movement_time_s);
  CHECK(p1.x == doctest::Approx(reach.target.x).epsilon(1e-12));
  CHECK(p1.z == doctest::Approx(reach.target.z).epsilon(1e-12));
  CHECK(reach.distance_at(reach.movement_time_s) == doctest::Approx(0.0).epsilon(1e-12));

  double prev = reach.distance_at(0.0);
  for (int k = 1; k <= 800; ++k) {
    const double d = reach.distance_at(k / 1000.0);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
}

TEST_CASE("crossing_time agrees with the continuous root to grid resolution") {
  ReachModel reach;
  for (double mult : {0.2, 1.0, 1.5, 2.0}) {
    CAPTURE(mult);
    const double d_abs = mult * reach.actual_radius_m;
    const auto t = crossing_time(reach, d_abs);
    REQUIRE(t.has_value());
    const double exact = crossing_oracle(reach, d_abs);
    CHECK(*t >= exact - 1e-9);         // never crosses before the true root
    CHECK(*t <= exact + 1e-3 + 1e-9);  // and lands within one grid step
    // first-crossing property on the grid itself
    CHECK(reach.distance_at(*t) <= d_abs);
    if (*t > 0) CHECK(reach.distance_at(*t - 1e-3) > d_abs);
  }
}

TEST_CASE("crossing_time edge cases") {
  ReachModel reach;
  const auto whole = crossing_time(reach, reach.path_length() + 1.0);
  REQUIRE(whole.has_value());
  CHECK(*whole == 0.0);
  CHECK_FALSE(crossing_time(reach, -0.1).has_value());

  // wider selection radius can never cross later
  double prev = 1e9;
  for (double d : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const auto t = crossing_time(reach, d);
    REQUIRE(t.has_value());
    CHECK(*t <= prev + 1e-12);
    prev = *t;
  }
}

TEST_CASE("blocked schedule structure") {
  const auto cfg = ProtocolConfig::blocked_default();
  const auto plan = build_blocked_schedule(cfg, 99);
  REQUIRE(plan.size() == 300);

  std::map<DLevel, int> block_counts;
  std::map<int, std::set<DLevel>> levels_in_block;
  for (const auto& e : plan) {
    CHECK(e.trial_id == &e - plan.data());
    CHECK(e.block_id == e.trial_id / 10);
    CHECK_FALSE(e.style.has_value());
    CHECK(e.target_side == (e.trial_id % 2 == 0 ? TargetSide::Pos1 : TargetSide::Pos2));
    levels_in_block[e.block_id].insert(e.d_level);
  }
  REQUIRE(levels_in_block.size() == 30);
  for (const auto& [b, levels] : levels_in_block) {
    CHECK(levels.size() == 1);  // one level per block
    ++block_counts[*levels.begin()];
  }
  CHECK(block_counts[DLevel::D1] == 10);
  CHECK(block_counts[DLevel::D2] == 10);
  CHECK(block_counts[DLevel::D3] == 10);
}

TEST_CASE("blocked schedule is seeded and varies across seeds") {
  const auto cfg = ProtocolConfig::blocked_default();
  const auto a = build_blocked_schedule(cfg, 7);
  const auto b = build_blocked_schedule(cfg, 7);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].d_level == b[i].d_level);

  // the level of the first block should spread over seeds if the permutation
  // is anywhere near uniform
  std::map<DLevel, int> first_level;
  for (std::uint64_t s = 0; s < 60; ++s)
    ++first_level[build_blocked_schedule(cfg, s).front().d_level];
  CHECK(first_level.size() == 3);
  for (const auto& [lvl, n] : first_level) CHECK(n > 5);
}

TEST_CASE("oddball schedule: pattern, Latin square, sides") {
  const auto cfg = ProtocolConfig::oddball_default();
  for (int p = 0; p < 4; ++p) {
    const auto sessions = build_oddball_schedule(cfg, p);
    REQUIRE(sessions.size() == 3);
    for (int s = 0; s < 3; ++s) {
      const auto& plan = sessions[s];
      REQUIRE(plan.size() == 120);
      const HandStyle expect = cfg.hand_styles[(p + s) % 3];
      for (const auto& e : plan) {
        REQUIRE(e.style.has_value());
        CHECK(*e.style == expect);
        CHECK(e.d_level == (e.trial_id % 4 == 3 ? DLevel::D2 : DLevel::D1));
        CHECK(e.block_id == e.trial_id / 4);
      }
    }
  }
  // within any participant the three sessions cover all three styles
  const auto sessions = build_oddball_schedule(cfg, 2);
  std::set<HandStyle> styles;
  for (const auto& plan : sessions) styles.insert(*plan.front().style);
  CHECK(styles.size() == 3);
}

TEST_CASE("simulate_trial without noise reproduces the penalty ladder") {
  const auto cfg = ProtocolConfig::blocked_default();
  const ReachModel reach;
  const auto model = quiet_model();
  Rng rng(1);

  const double cross_d2 = *crossing_time(reach, 1.0 * reach.actual_radius_m);
  const double cross_d1 = *crossing_time(reach, 0.2 * reach.actual_radius_m);

  // mid-block congruent trial: exactly crossing + dwell
  TrialPlanEntry mid{14, 1, DLevel::D2, {}, TargetSide::Pos1};
  TrialPlanEntry prev_same{13, 1, DLevel::D2, {}, TargetSide::Pos2};
  auto r = simulate_trial(mid, &prev_same, model, reach, cfg, rng);
  CHECK(r.completion_time_s == doctest::Approx(cross_d2 + 0.3).epsilon(1e-12));
  CHECK(r.crossing_time_s == cross_d2);
  REQUIRE(r.prev_trial_congruent.has_value());
  CHECK(*r.prev_trial_congruent);

  // block start, congruent level: block-change penalty only
  TrialPlanEntry start_d2{20, 2, DLevel::D2, {}, TargetSide::Pos1};
  TrialPlanEntry prev_d1{19, 1, DLevel::D1, {}, TargetSide::Pos2};
  r = simulate_trial(start_d2, &prev_d1, model, reach, cfg, rng);
  CHECK(r.completion_time_s == doctest::Approx(cross_d2 + 0.3 + 0.4).epsilon(1e-12));

  // block start, conflicting level after a congruent trial: full conflict cost
  TrialPlanEntry start_d1{20, 2, DLevel::D1, {}, TargetSide::Pos1};
  TrialPlanEntry prev_d2{19, 1, DLevel::D2, {}, TargetSide::Pos2};
  r = simulate_trial(start_d1, &prev_d2, model, reach, cfg, rng);
  CHECK(r.completion_time_s == doctest::Approx(cross_d1 + 0.3 + 0.4 + 0.3).epsilon(1e-12));
  REQUIRE(r.prev_trial_congruent.has_value());
  CHECK(*r.prev_trial_congruent);  // the previous trial was the veridical D2

  // same but after an incongruent trial: conflict reduced by gamma
  TrialPlanEntry prev_d3{19, 1, DLevel::D3, {}, TargetSide::Pos2};
  r = simulate_trial(start_d1, &prev_d3, model, reach, cfg, rng);
  CHECK(r.completion_time_s ==
        doctest::Approx(cross_d1 + 0.3 + 0.4 + 0.3 * 0.7).epsilon(1e-12));

  // within-block decay halves the whole penalty each trial
  TrialPlanEntry pos2_d1{22, 2, DLevel::D1, {}, TargetSide::Pos1};
  TrialPlanEntry prev_d1b{21, 2, DLevel::D1, {}, TargetSide::Pos2};
  r = simulate_trial(pos2_d1, &prev_d1b, model, reach, cfg, rng);
  CHECK(r.completion_time_s ==
        doctest::Approx(cross_d1 + 0.3 + (0.3 * 0.7) * 0.25).epsilon(1e-12));

  // very first trial: no block-change penalty, no congruency tag
  TrialPlanEntry first{0, 0, DLevel::D2, {}, TargetSide::Pos1};
  r = simulate_trial(first, nullptr, model, reach, cfg, rng);
  CHECK(r.completion_time_s == doctest::Approx(cross_d2 + 0.3).epsilon(1e-12));
  CHECK_FALSE(r.prev_trial_congruent.has_value());
}

TEST_CASE("completion never undershoots crossing + dwell") {
  const auto cfg = ProtocolConfig::blocked_default();
  const ReachModel reach;
  ConflictRtModel model;  // default noise on
  Rng rng(555);
  const auto plan = build_blocked_schedule(cfg, 555);
  const auto records = simulate_trials(plan, model, reach, cfg, rng);
  REQUIRE(records.size() == plan.size());
  for (const auto& r : records)
    CHECK(r.completion_time_s >= r.crossing_time_s + cfg.dwell_s - 1e-12);
}

TEST_CASE("gamma = 0 makes completion a function of level and block position only") {
  const auto cfg = ProtocolConfig::blocked_default();
  const ReachModel reach;
  auto model = quiet_model();
  model.congruency_modulation = 0.0;

  // two very different block orders
  std::map<std::tuple<DLevel, int, bool>, double> seen;
  for (std::uint64_t seed : {11u, 23u}) {
    Rng rng(seed);
    const auto plan = build_blocked_schedule(cfg, seed);
    const auto records = simulate_trials(plan, model, reach, cfg, rng);
    for (const auto& r : records) {
      const auto key = std::make_tuple(r.plan.d_level, r.plan.trial_id % cfg.block_len,
                                       r.plan.block_id == 0);
      const auto it = seen.find(key);
      if (it == seen.end()) seen[key] = r.completion_time_s;
      else CHECK(it->second == doctest::Approx(r.completion_time_s).epsilon(1e-12));
    }
  }
}

TEST_CASE("emit_markers: blocked timeline") {
  auto cfg = ProtocolConfig::blocked_default();
  const ReachModel reach;
  Rng rng(4);
  const auto plan = build_blocked_schedule(cfg, 4);
  auto records = simulate_trials(plan, quiet_model(), reach, cfg, rng);
  const auto markers = emit_markers(records, cfg, LatencySpec::zero(), 1000.0, 4);

  // 300 starts, 300 feedbacks, and a rest after blocks 3,6,...,27 (not 30)
  std::map<MarkerCode, int> counts;
  for (const auto& m : markers) ++counts[m.code];
  CHECK(counts[MarkerCode::TrialStart] == 300);
  CHECK(counts[MarkerCode::FeedbackOnset] == 300);
  CHECK(counts[MarkerCode::RestStart] == 9);
  CHECK(counts[MarkerCode::RestEnd] == 9);

  for (std::size_t i = 1; i < markers.size(); ++i)
    CHECK(markers[i].sample_index > markers[i - 1].sample_index);

  // zero latency: feedback lands at start + completion, up to the rounding of
  // the two timestamps onto the sample clock
  std::size_t seen = 0;
  std::size_t start_sample = 0;
  std::size_t idx = 0;
  for (const auto& m : markers) {
    if (m.code == MarkerCode::TrialStart) start_sample = m.sample_index;
    if (m.code == MarkerCode::FeedbackOnset) {
      const auto& r = records[idx++];
      REQUIRE(r.feedback_onset_sample.has_value());
      CHECK(*r.feedback_onset_sample == m.sample_index);
      const double gap =
          static_cast<double>(m.sample_index) - static_cast<double>(start_sample);
      CHECK(std::abs(gap - r.completion_time_s * 1000.0) <= 1.0001);
      ++seen;
    }
    CHECK((m.code == MarkerCode::RestStart || m.code == MarkerCode::RestEnd
               ? !m.condition.d_level.has_value()
               : m.condition.d_level.has_value()));
  }
  CHECK(seen == 300);

  // rest duration is honored on the sample clock
  for (std::size_t i = 0; i + 1 < markers.size(); ++i) {
    if (markers[i].code == MarkerCode::RestStart) {
      REQUIRE(markers[i + 1].code == MarkerCode::RestEnd);
      CHECK(markers[i + 1].sample_index - markers[i].sample_index == 30000);
    }
  }
}

TEST_CASE("emit_markers: oddball timeline rests after every trial") {
  auto cfg = ProtocolConfig::oddball_default();
  const ReachModel reach;
  Rng rng(5);
  const auto plans = build_oddball_schedule(cfg, 0);
  auto records = simulate_trials(plans[0], quiet_model(), reach, cfg, rng);
  const auto markers = emit_markers(records, cfg, {100.0, 150.0}, 1000.0, 77);

  std::map<MarkerCode, int> counts;
  for (const auto& m : markers) ++counts[m.code];
  CHECK(counts[MarkerCode::TrialStart] == 120);
  CHECK(counts[MarkerCode::FeedbackOnset] == 120);
  CHECK(counts[MarkerCode::RestStart] == 120);
  CHECK(counts[MarkerCode::RestEnd] == 120);

  // jitter bounds: feedback trails the modelled selection by 100..150 ms
  std::size_t start_sample = 0;
  std::size_t idx = 0;
  for (const auto& m : markers) {
    if (m.code == MarkerCode::TrialStart) start_sample = m.sample_index;
    if (m.code == MarkerCode::FeedbackOnset) {
      const auto& r = records[idx++];
      const double sel_ms =
          static_cast<double>(start_sample) + r.completion_time_s * 1000.0;
      const double gap = static_cast<double>(m.sample_index) - sel_ms;
      CHECK(gap >= 100.0 - 1.0001);
      CHECK(gap <= 150.0 + 1.0001);
      CHECK(m.condition.style.has_value());
    }
  }

  // identical seeds reproduce the timeline
  auto records2 = records;
  for (auto& r : records2) r.feedback_onset_sample.reset();
  const auto markers2 = emit_markers(records2, cfg, {100.0, 150.0}, 1000.0, 77);
  REQUIRE(markers2.size() == markers.size());
  for (std::size_t i = 0; i < markers.size(); ++i)
    CHECK(markers[i].sample_index == markers2[i].sample_index);
}

TEST_CASE("config validation") {
  auto cfg = ProtocolConfig::blocked_default();
  cfg.trials_total = 301;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ProtocolConfig::blocked_default();
  cfg.d_multipliers[1] = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ProtocolConfig::oddball_default();
  cfg.block_len = 5;
  cfg.trials_total = 120;
  CHECK_THROWS_AS((void)build_oddball_schedule(cfg, 0), std::invalid_argument);
  ConflictRtModel m;
  m.decay = 1.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  ReachModel r;
  r.target = r.start;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}
