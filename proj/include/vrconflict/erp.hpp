#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vrconflict/preprocess.hpp"
#include "vrconflict/stats.hpp"

namespace vrconflict {

struct ErpWaveform {
  std::vector<std::string> channels;  // ROI averaged into this trace
  std::vector<double> time_ms;        // relative to the marker
  std::vector<double> mean_uv;
  std::size_t n_epochs = 0;
};

struct FrnMeasure {
  double window_lo_ms = 120.0;
  double window_hi_ms = 220.0;
  double peak_amplitude_uv = 0.0;  // most negative value in the window
  double peak_latency_ms = 0.0;
  double area_uv_ms = 0.0;         // trapezoidal integral over the window
};

// Random subsample of the larger set so both conditions carry equally many
// epochs; the smaller set passes through untouched.  Selection order is
// preserved.
std::pair<EpochSet, EpochSet> match_trial_counts(const EpochSet& a, const EpochSet& b,
                                                 std::uint64_t seed);

// Mean over epochs of the mean over the ROI channels.
ErpWaveform average_erp(const EpochSet& set, const std::vector<std::string>& roi);

// Equal-weight mean of per-participant waveforms (time axes must agree).
ErpWaveform grand_average(std::span<const ErpWaveform> waves);

FrnMeasure frn_peak(const ErpWaveform& wave, double window_lo_ms = 120.0,
                    double window_hi_ms = 220.0);

// Integral of (a - b) over the window, microvolt-milliseconds.
double area_difference(const ErpWaveform& a, const ErpWaveform& b,
                       double window_lo_ms, double window_hi_ms);

// Mean amplitude in the window, averaged over the ROI channels, one value
// per epoch set; the per-participant scalar behind the group comparisons.
double window_mean_amplitude(const EpochSet& set, const std::vector<std::string>& roi,
                             double window_lo_ms, double window_hi_ms);

struct ChannelComparison {
  std::string channel;
  ComparisonResult result;
};

// Per-channel paired test across participants (window-mean amplitude,
// condition a vs b), sorted by ascending p.  Channels with no variance in
// the differences come back with p = 1, not significant.
std::vector<ChannelComparison> channel_significance_map(
    std::span<const EpochSet> cond_a, std::span<const EpochSet> cond_b,
    double window_lo_ms, double window_hi_ms);

}  // namespace vrconflict
