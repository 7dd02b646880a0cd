#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "vrconflict/stats.hpp"
#include "vrconflict/tasksim.hpp"

namespace vrconflict {

struct CurveCell {
  double mean_s = 0.0;
  double sd_s = 0.0;
  std::size_t n = 0;
};

// Completion time by within-block position (0-based), per D level, pooled
// over every trial handed in.
struct BlockPositionCurve {
  int block_len = 10;
  std::map<DLevel, std::vector<CurveCell>> by_level;
};

BlockPositionCurve block_position_curve(std::span<const TrialRecord> trials);

// Block transition "prev/cur", e.g. D2/D1 = a D1 block that followed a D2
// block.  Classifies the first trials of each block after the first.
struct Transition {
  DLevel prev;
  DLevel cur;
  auto operator<=>(const Transition&) const = default;
  std::string label() const;  // "D2/D1"
};

struct CongruencySequenceResult {
  int lead_trials = 3;  // how many trials at the start of a block are averaged
  // headline pairs: D2/D1, D3/D1, D2/D3, D1/D3
  std::map<Transition, double> group_mean_s;
  std::map<Transition, std::vector<double>> per_participant_s;
  // everything else observed (e.g. D1/D2), reported but not tested
  std::map<Transition, double> supplementary_mean_s;
  ComparisonResult into_d1;  // D2/D1 vs D3/D1
  ComparisonResult into_d3;  // D2/D3 vs D1/D3
  struct Dropped {
    int participant;
    std::string comparison;
  };
  std::vector<Dropped> dropped;  // participants missing a transition
};

// One entry per participant, trials in run order.  Throws if fewer than two
// participants survive either comparison.
CongruencySequenceResult congruency_sequence_effect(
    const std::vector<std::vector<TrialRecord>>& per_participant);

}  // namespace vrconflict
