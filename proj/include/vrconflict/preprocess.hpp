#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "vrconflict/kernels.hpp"
#include "vrconflict/signal.hpp"

namespace vrconflict {

// Band-pass: Butterworth of the given prototype order on each edge, applied
// forward-backward (zero phase) when zero_phase is set.
struct FilterSpec {
  double high_pass_hz = 1.0;
  double low_pass_hz = 40.0;
  int order = 4;
  bool zero_phase = true;

  void validate(double sample_rate_hz) const;
};

// Cascade of `order` second-order sections (the band-pass transform doubles
// the pole count).  Exposed for the response tests.
std::vector<kernels::Biquad> design_bandpass(const FilterSpec& spec, double sample_rate_hz);

// Zero-phase band-pass with 1 s odd-reflection padding at both ends.
// Recordings shorter than twice the pad length are rejected.
EegRecording bandpass_filter(const EegRecording& rec, const FilterSpec& spec);

struct EpochWindow {
  double pre_ms = 200.0;   // before the marker
  double post_ms = 500.0;  // after (marker sample is the first post sample)

  std::size_t pre_samples(double fs) const;
  std::size_t post_samples(double fs) const;
  std::size_t length(double fs) const;
};

// One feedback-locked segment, channel-major like EegRecording.
// Sample i sits at (i - pre_samples) / fs relative to the marker.
struct Epoch {
  Condition condition;
  std::size_t marker_sample = 0;  // position in the source recording
  std::size_t n_channels = 0;
  std::size_t n_samples = 0;
  std::size_t pre_samples = 0;
  double sample_rate_hz = 1000.0;
  std::vector<double> data;

  std::span<double> channel(std::size_t c);
  std::span<const double> channel(std::size_t c) const;
  double time_ms(std::size_t i) const;
};

struct RejectionEntry {
  EventMarker marker;
  std::string reason;   // "pre-boundary", "post-boundary", "amplitude"
  double peak_uv = 0.0; // filled for amplitude rejections
};

struct EpochSet {
  ChannelLayout layout;
  double sample_rate_hz = 1000.0;
  EpochWindow window;
  std::vector<Epoch> epochs;
  std::vector<RejectionEntry> rejection_log;
};

// Cuts [-pre, +post) around every marker whose code is in `codes`.  Markers
// too close to either edge are skipped and logged, never zero-padded.
EpochSet extract_epochs(const EegRecording& rec, std::span<const EventMarker> markers,
                        const EpochWindow& window,
                        const std::set<MarkerCode>& codes = {MarkerCode::FeedbackOnset});

// Subtracts the per-channel mean of [baseline_lo_ms, baseline_hi_ms), times
// relative to the marker.  The default window is the full pre-stimulus span.
Epoch baseline_correct(const Epoch& epoch, double baseline_lo_ms, double baseline_hi_ms);
EpochSet baseline_correct(const EpochSet& set);

// Drops epochs whose absolute peak on any channel exceeds threshold_uv,
// appending to the rejection log.
EpochSet reject_artifacts(const EpochSet& set, double threshold_uv = 100.0);

}  // namespace vrconflict
