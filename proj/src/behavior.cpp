#include "vrconflict/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vrconflict {

namespace {

int infer_block_len(std::span<const TrialRecord> trials) {
  int len = 0;
  for (const auto& t : trials)
    if (t.plan.block_id == 0) len = std::max(len, t.plan.trial_id + 1);
  if (len == 0) throw std::invalid_argument("no trials in block 0; cannot infer block length");
  return len;
}

}  // namespace

BlockPositionCurve block_position_curve(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw std::invalid_argument("block_position_curve: no trials");
  BlockPositionCurve curve;
  curve.block_len = infer_block_len(trials);

  std::map<DLevel, std::vector<std::vector<double>>> samples;
  for (const auto& t : trials) {
    auto& per_pos = samples[t.plan.d_level];
    if (per_pos.empty()) per_pos.resize(curve.block_len);
    const int pos = t.plan.trial_id % curve.block_len;
    per_pos[pos].push_back(t.completion_time_s);
  }

  for (auto& [level, per_pos] : samples) {
    auto& cells = curve.by_level[level];
    cells.resize(curve.block_len);
    for (int p = 0; p < curve.block_len; ++p) {
      const auto& xs = per_pos[p];
      CurveCell& cell = cells[p];
      cell.n = xs.size();
      if (!xs.empty()) {
        cell.mean_s = mean_of(xs);
        cell.sd_s = sample_sd(xs);
      }
    }
  }
  return curve;
}

std::string Transition::label() const {
  return std::string(to_string(prev)) + "/" + to_string(cur);
}

CongruencySequenceResult congruency_sequence_effect(
    const std::vector<std::vector<TrialRecord>>& per_participant) {
  if (per_participant.size() < 2)
    throw std::invalid_argument("congruency analysis needs at least 2 participants");

  CongruencySequenceResult res;
  const int lead = res.lead_trials;
  const std::vector<Transition> headline{{DLevel::D2, DLevel::D1},
                                         {DLevel::D3, DLevel::D1},
                                         {DLevel::D2, DLevel::D3},
                                         {DLevel::D1, DLevel::D3}};

  // per participant: mean of the first `lead` trials of every block, bucketed
  // by (previous block level / current block level)
  std::vector<std::map<Transition, double>> per_part_means(per_participant.size());
  for (std::size_t p = 0; p < per_participant.size(); ++p) {
    std::vector<TrialRecord> trials = per_participant[p];
    if (trials.empty()) throw std::invalid_argument("participant with no trials");
    std::sort(trials.begin(), trials.end(), [](const auto& a, const auto& b) {
      return a.plan.trial_id < b.plan.trial_id;
    });
    const int block_len = infer_block_len(trials);

    std::map<Transition, std::vector<double>> lead_means;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto& t = trials[i];
      if (t.plan.trial_id % block_len != 0 || t.plan.block_id == 0) continue;
      if (i == 0) continue;
      const Transition tr{trials[i - 1].plan.d_level, t.plan.d_level};
      double s = 0.0;
      int n = 0;
      for (int k = 0; k < lead && i + k < trials.size(); ++k) {
        if (trials[i + k].plan.block_id != t.plan.block_id) break;
        s += trials[i + k].completion_time_s;
        ++n;
      }
      if (n > 0) lead_means[tr].push_back(s / n);
    }
    for (const auto& [tr, xs] : lead_means) per_part_means[p][tr] = mean_of(xs);
  }

  // group means; headline transitions also keep the per-participant values
  std::map<Transition, std::vector<double>> pooled;
  for (const auto& pm : per_part_means)
    for (const auto& [tr, m] : pm) pooled[tr].push_back(m);
  for (const auto& [tr, xs] : pooled) {
    const bool is_headline = std::find(headline.begin(), headline.end(), tr) != headline.end();
    if (is_headline) {
      res.group_mean_s[tr] = mean_of(xs);
      res.per_participant_s[tr] = xs;
    } else {
      res.supplementary_mean_s[tr] = mean_of(xs);
    }
  }

  // paired comparisons over participants that show both transition types
  auto compare = [&](const Transition& a, const Transition& b) {
    std::vector<double> xs, ys;
    for (std::size_t p = 0; p < per_part_means.size(); ++p) {
      const auto& pm = per_part_means[p];
      const auto ia = pm.find(a);
      const auto ib = pm.find(b);
      if (ia == pm.end() || ib == pm.end()) {
        res.dropped.push_back({static_cast<int>(p), a.label() + " vs " + b.label()});
        continue;
      }
      xs.push_back(ia->second);
      ys.push_back(ib->second);
    }
    if (xs.size() < 2)
      throw std::runtime_error("too few participants with both " + a.label() + " and " +
                               b.label() + " transitions");
    return paired_ttest(xs, ys, a.label() + " vs " + b.label());
  };
  res.into_d1 = compare({DLevel::D2, DLevel::D1}, {DLevel::D3, DLevel::D1});
  res.into_d3 = compare({DLevel::D2, DLevel::D3}, {DLevel::D1, DLevel::D3});
  return res;
}

}  // namespace vrconflict
