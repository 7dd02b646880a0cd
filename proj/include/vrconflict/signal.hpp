#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vrconflict {

enum class DLevel { D1, D2, D3 };
enum class HandStyle { S1, S2, S3 };
enum class MarkerCode { TrialStart, FeedbackOnset, RestStart, RestEnd };

const char* to_string(DLevel d);
const char* to_string(HandStyle s);
const char* to_string(MarkerCode c);
DLevel parse_d_level(std::string_view s);
HandStyle parse_style(std::string_view s);
MarkerCode parse_marker_code(std::string_view s);

struct ChannelLayout {
  std::vector<std::string> names;             // unique, montage order
  std::vector<std::string> reference_labels;  // subset of names

  // 32-channel montage with mastoid references M1/M2
  static ChannelLayout standard_32();

  std::size_t size() const { return names.size(); }
  bool has(std::string_view label) const;
  std::size_t index_of(std::string_view label) const;  // throws if unknown
  bool is_reference(std::string_view label) const;
  void validate() const;

  bool operator==(const ChannelLayout&) const = default;
};

// Multichannel recording, channel-major, microvolts.
struct EegRecording {
  double sample_rate_hz = 1000.0;
  ChannelLayout layout;
  std::size_t n_samples = 0;
  std::vector<double> samples;  // layout.size() * n_samples

  static EegRecording zeros(ChannelLayout layout, std::size_t n_samples,
                            double sample_rate_hz = 1000.0);

  std::size_t n_channels() const { return layout.size(); }
  std::span<double> channel(std::size_t c);
  std::span<const double> channel(std::size_t c) const;
  std::span<double> channel(std::string_view label);
  std::span<const double> channel(std::string_view label) const;
  double& at(std::size_t c, std::size_t i) { return samples[c * n_samples + i]; }
  double at(std::size_t c, std::size_t i) const { return samples[c * n_samples + i]; }
  void validate() const;  // shape consistent, all samples finite
};

// Condition tags carried on markers and epochs; any field may be absent
// (rest markers carry none).
struct Condition {
  std::optional<DLevel> d_level;
  std::optional<HandStyle> style;
  std::optional<int> block_id;
  std::optional<int> trial_id;

  bool operator==(const Condition&) const = default;
};

struct EventMarker {
  std::size_t sample_index = 0;
  MarkerCode code = MarkerCode::TrialStart;
  Condition condition;

  bool operator==(const EventMarker&) const = default;
};

// Subtracts the mean of the named reference channels from every channel
// (references included).  Labels must exist; empty ref list is an error.
EegRecording rereference(const EegRecording& rec, const std::vector<std::string>& refs);

// New recording containing the named channels in the given order.
EegRecording select_channels(const EegRecording& rec, const std::vector<std::string>& labels);

// Half-open sample range [start, stop).
EegRecording slice_time(const EegRecording& rec, std::size_t start, std::size_t stop);

// Markers must be in range and sorted by sample index.
void validate_markers(const EegRecording& rec, std::span<const EventMarker> markers);

}  // namespace vrconflict
