#include "vrconflict/erp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vrconflict/kernels.hpp"
#include "vrconflict/rng.hpp"

namespace vrconflict {

namespace {

void require_uniform(const EpochSet& set) {
  for (const auto& e : set.epochs) {
    if (e.n_channels != set.layout.size() ||
        e.n_samples != set.window.length(set.sample_rate_hz) ||
        e.sample_rate_hz != set.sample_rate_hz)
      throw std::invalid_argument("epoch set is not shape-uniform");
  }
}

// waveform sample range [lo_ms, hi_ms], inclusive on both ends
std::pair<std::size_t, std::size_t> window_range(const ErpWaveform& w, double lo_ms,
                                                 double hi_ms) {
  if (!(lo_ms <= hi_ms)) throw std::invalid_argument("window bounds reversed");
  std::size_t lo = w.time_ms.size(), hi = 0;
  for (std::size_t i = 0; i < w.time_ms.size(); ++i) {
    if (w.time_ms[i] >= lo_ms && lo == w.time_ms.size()) lo = i;
    if (w.time_ms[i] <= hi_ms) hi = i;
  }
  if (lo >= w.time_ms.size() || hi < lo)
    throw std::out_of_range("analysis window outside the waveform");
  return {lo, hi};
}

}  // namespace

std::pair<EpochSet, EpochSet> match_trial_counts(const EpochSet& a, const EpochSet& b,
                                                 std::uint64_t seed) {
  const EpochSet& larger = a.epochs.size() >= b.epochs.size() ? a : b;
  const EpochSet& smaller = a.epochs.size() >= b.epochs.size() ? b : a;
  const std::size_t keep = smaller.epochs.size();

  // draw `keep` distinct indices, then restore original order
  std::vector<std::size_t> idx(larger.epochs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());

  EpochSet sub;
  sub.layout = larger.layout;
  sub.sample_rate_hz = larger.sample_rate_hz;
  sub.window = larger.window;
  sub.rejection_log = larger.rejection_log;
  sub.epochs.reserve(keep);
  for (std::size_t i : idx) sub.epochs.push_back(larger.epochs[i]);

  if (a.epochs.size() >= b.epochs.size()) return {std::move(sub), b};
  return {a, std::move(sub)};
}

ErpWaveform average_erp(const EpochSet& set, const std::vector<std::string>& roi) {
  if (set.epochs.empty()) throw std::invalid_argument("average_erp: no epochs");
  if (roi.empty()) throw std::invalid_argument("average_erp: empty ROI");
  require_uniform(set);

  std::vector<std::size_t> roi_idx;
  roi_idx.reserve(roi.size());
  for (const auto& label : roi) roi_idx.push_back(set.layout.index_of(label));

  const std::size_t n = set.epochs.front().n_samples;
  ErpWaveform w;
  w.channels = roi;
  w.n_epochs = set.epochs.size();
  w.mean_uv.assign(n, 0.0);
  for (const auto& e : set.epochs) {
    std::vector<double> roi_mean(n, 0.0);
    for (std::size_t c : roi_idx) kernels::add(roi_mean, e.channel(c));
    kernels::scale(roi_mean, 1.0 / static_cast<double>(roi_idx.size()));
    kernels::add(w.mean_uv, roi_mean);
  }
  kernels::scale(w.mean_uv, 1.0 / static_cast<double>(w.n_epochs));

  const Epoch& first = set.epochs.front();
  w.time_ms.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.time_ms[i] = first.time_ms(i);
  return w;
}

ErpWaveform grand_average(std::span<const ErpWaveform> waves) {
  if (waves.empty()) throw std::invalid_argument("grand_average: no waveforms");
  const auto& first = waves.front();
  ErpWaveform g;
  g.channels = first.channels;
  g.time_ms = first.time_ms;
  g.mean_uv.assign(first.mean_uv.size(), 0.0);
  for (const auto& w : waves) {
    if (w.time_ms != first.time_ms)
      throw std::invalid_argument("grand_average: time axes differ");
    kernels::add(g.mean_uv, w.mean_uv);
    g.n_epochs += w.n_epochs;
  }
  kernels::scale(g.mean_uv, 1.0 / static_cast<double>(waves.size()));
  return g;
}

FrnMeasure frn_peak(const ErpWaveform& wave, double window_lo_ms, double window_hi_ms) {
  const auto [lo, hi] = window_range(wave, window_lo_ms, window_hi_ms);
  FrnMeasure m;
  m.window_lo_ms = window_lo_ms;
  m.window_hi_ms = window_hi_ms;
  std::size_t arg = lo;
  for (std::size_t i = lo; i <= hi; ++i)
    if (wave.mean_uv[i] < wave.mean_uv[arg]) arg = i;
  m.peak_amplitude_uv = wave.mean_uv[arg];
  m.peak_latency_ms = wave.time_ms[arg];

  // trapezoidal area, microvolt-milliseconds
  double area = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double dt = wave.time_ms[i + 1] - wave.time_ms[i];
    area += 0.5 * (wave.mean_uv[i] + wave.mean_uv[i + 1]) * dt;
  }
  m.area_uv_ms = area;
  return m;
}

double area_difference(const ErpWaveform& a, const ErpWaveform& b, double window_lo_ms,
                       double window_hi_ms) {
  if (a.time_ms != b.time_ms)
    throw std::invalid_argument("area_difference: time axes differ");
  const FrnMeasure ma = frn_peak(a, window_lo_ms, window_hi_ms);
  const FrnMeasure mb = frn_peak(b, window_lo_ms, window_hi_ms);
  return ma.area_uv_ms - mb.area_uv_ms;
}

double window_mean_amplitude(const EpochSet& set, const std::vector<std::string>& roi,
                             double window_lo_ms, double window_hi_ms) {
  const ErpWaveform w = average_erp(set, roi);
  const auto [lo, hi] = window_range(w, window_lo_ms, window_hi_ms);
  double s = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) s += w.mean_uv[i];
  return s / static_cast<double>(hi - lo + 1);
}

std::vector<ChannelComparison> channel_significance_map(std::span<const EpochSet> cond_a,
                                                        std::span<const EpochSet> cond_b,
                                                        double window_lo_ms,
                                                        double window_hi_ms) {
  if (cond_a.size() != cond_b.size())
    throw std::invalid_argument("channel map: participant counts differ");
  if (cond_a.size() < 2)
    throw std::invalid_argument("channel map: need at least 2 participants");
  const ChannelLayout& layout = cond_a.front().layout;
  for (const auto& s : cond_a)
    if (!(s.layout == layout)) throw std::invalid_argument("channel map: layouts differ");
  for (const auto& s : cond_b)
    if (!(s.layout == layout)) throw std::invalid_argument("channel map: layouts differ");

  const std::size_t np = cond_a.size();
  std::vector<ChannelComparison> out;
  out.reserve(layout.size());
  std::vector<double> xs(np), ys(np);
  for (std::size_t c = 0; c < layout.size(); ++c) {
    const std::vector<std::string> single{layout.names[c]};
    for (std::size_t p = 0; p < np; ++p) {
      xs[p] = window_mean_amplitude(cond_a[p], single, window_lo_ms, window_hi_ms);
      ys[p] = window_mean_amplitude(cond_b[p], single, window_lo_ms, window_hi_ms);
    }
    ChannelComparison cc;
    cc.channel = layout.names[c];
    try {
      cc.result = paired_ttest(xs, ys, layout.names[c]);
    } catch (const std::domain_error&) {
      // constant nonzero offset in every participant: report as untestable
      cc.result.label = layout.names[c];
      cc.result.t_statistic = 0.0;
      cc.result.p_value = 1.0;
      cc.result.n_pairs = np;
      cc.result.significant = false;
    }
    out.push_back(std::move(cc));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
    return l.result.p_value < r.result.p_value;
  });
  return out;
}

}  // namespace vrconflict
