#include "vrconflict/signal.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "vrconflict/kernels.hpp"

namespace vrconflict {

const char* to_string(DLevel d) {
  switch (d) {
    case DLevel::D1: return "D1";
    case DLevel::D2: return "D2";
    case DLevel::D3: return "D3";
  }
  throw std::logic_error("bad DLevel");
}

const char* to_string(HandStyle s) {
  switch (s) {
    case HandStyle::S1: return "S1";
    case HandStyle::S2: return "S2";
    case HandStyle::S3: return "S3";
  }
  throw std::logic_error("bad HandStyle");
}

const char* to_string(MarkerCode c) {
  switch (c) {
    case MarkerCode::TrialStart: return "TrialStart";
    case MarkerCode::FeedbackOnset: return "FeedbackOnset";
    case MarkerCode::RestStart: return "RestStart";
    case MarkerCode::RestEnd: return "RestEnd";
  }
  throw std::logic_error("bad MarkerCode");
}

DLevel parse_d_level(std::string_view s) {
  if (s == "D1") return DLevel::D1;
  if (s == "D2") return DLevel::D2;
  if (s == "D3") return DLevel::D3;
  throw std::invalid_argument("unknown d_level: " + std::string(s));
}

HandStyle parse_style(std::string_view s) {
  if (s == "S1") return HandStyle::S1;
  if (s == "S2") return HandStyle::S2;
  if (s == "S3") return HandStyle::S3;
  throw std::invalid_argument("unknown style: " + std::string(s));
}

MarkerCode parse_marker_code(std::string_view s) {
  if (s == "TrialStart") return MarkerCode::TrialStart;
  if (s == "FeedbackOnset") return MarkerCode::FeedbackOnset;
  if (s == "RestStart") return MarkerCode::RestStart;
  if (s == "RestEnd") return MarkerCode::RestEnd;
  throw std::invalid_argument("unknown marker code: " + std::string(s));
}

ChannelLayout ChannelLayout::standard_32() {
  ChannelLayout l;
  l.names = {"Fp1", "Fp2", "F7",  "F3",  "Fz",  "F4",  "F8",  "FT7",
             "FC3", "FCz", "FC4", "FT8", "T7",  "C3",  "Cz",  "C4",
             "T8",  "M1",  "TP7", "CP3", "CPz", "CP4", "TP8", "M2",
             "P7",  "P3",  "Pz",  "P4",  "P8",  "O1",  "Oz",  "O2"};
  l.reference_labels = {"M1", "M2"};
  return l;
}

bool ChannelLayout::has(std::string_view label) const {
  return std::find(names.begin(), names.end(), label) != names.end();
}

std::size_t ChannelLayout::index_of(std::string_view label) const {
  auto it = std::find(names.begin(), names.end(), label);
  if (it == names.end())
    throw std::out_of_range("channel not in layout: " + std::string(label));
  return static_cast<std::size_t>(it - names.begin());
}

bool ChannelLayout::is_reference(std::string_view label) const {
  return std::find(reference_labels.begin(), reference_labels.end(), label) !=
         reference_labels.end();
}

void ChannelLayout::validate() const {
  if (names.empty()) throw std::invalid_argument("layout has no channels");
  std::set<std::string_view> seen;
  for (const auto& n : names) {
    if (n.empty()) throw std::invalid_argument("empty channel label");
    if (!seen.insert(n).second)
      throw std::invalid_argument("duplicate channel label: " + n);
  }
  for (const auto& r : reference_labels)
    if (!has(r))
      throw std::invalid_argument("reference label not in layout: " + r);
}

EegRecording EegRecording::zeros(ChannelLayout layout, std::size_t n_samples,
                                 double sample_rate_hz) {
  layout.validate();
  EegRecording rec;
  rec.sample_rate_hz = sample_rate_hz;
  rec.layout = std::move(layout);
  rec.n_samples = n_samples;
  rec.samples.assign(rec.layout.size() * n_samples, 0.0);
  return rec;
}

std::span<double> EegRecording::channel(std::size_t c) {
  return {samples.data() + c * n_samples, n_samples};
}

std::span<const double> EegRecording::channel(std::size_t c) const {
  return {samples.data() + c * n_samples, n_samples};
}

std::span<double> EegRecording::channel(std::string_view label) {
  return channel(layout.index_of(label));
}

std::span<const double> EegRecording::channel(std::string_view label) const {
  return channel(layout.index_of(label));
}

void EegRecording::validate() const {
  layout.validate();
  if (sample_rate_hz <= 0.0) throw std::invalid_argument("sample rate must be positive");
  if (samples.size() != layout.size() * n_samples)
    throw std::invalid_argument("sample buffer does not match layout/sample count");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample value");
}

EegRecording rereference(const EegRecording& rec, const std::vector<std::string>& refs) {
  if (refs.empty()) throw std::invalid_argument("rereference: empty reference list");
  std::vector<std::size_t> ref_idx;
  ref_idx.reserve(refs.size());
  for (const auto& r : refs) ref_idx.push_back(rec.layout.index_of(r));

  // mean of the reference channels, per sample
  std::vector<double> ref_mean(rec.n_samples, 0.0);
  for (std::size_t idx : ref_idx) kernels::add(ref_mean, rec.channel(idx));
  kernels::scale(ref_mean, 1.0 / static_cast<double>(ref_idx.size()));

  EegRecording out = rec;
  for (std::size_t c = 0; c < out.n_channels(); ++c)
    kernels::subtract(out.channel(c), rec.channel(c), ref_mean);
  return out;
}

EegRecording select_channels(const EegRecording& rec, const std::vector<std::string>& labels) {
  if (labels.empty()) throw std::invalid_argument("select_channels: empty selection");
  std::vector<std::size_t> idx;
  idx.reserve(labels.size());
  for (const auto& l : labels) idx.push_back(rec.layout.index_of(l));

  EegRecording out;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.layout.names = labels;
  for (const auto& r : rec.layout.reference_labels)
    if (std::find(labels.begin(), labels.end(), r) != labels.end())
      out.layout.reference_labels.push_back(r);
  out.layout.validate();
  out.n_samples = rec.n_samples;
  out.samples.resize(labels.size() * rec.n_samples);
  for (std::size_t c = 0; c < idx.size(); ++c) {
    auto src = rec.channel(idx[c]);
    std::copy(src.begin(), src.end(), out.samples.begin() + c * rec.n_samples);
  }
  return out;
}

EegRecording slice_time(const EegRecording& rec, std::size_t start, std::size_t stop) {
  if (start > stop || stop > rec.n_samples)
    throw std::out_of_range("slice_time: bad range [" + std::to_string(start) + ", " +
                            std::to_string(stop) + ") for " + std::to_string(rec.n_samples) +
                            " samples");
  EegRecording out;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.layout = rec.layout;
  out.n_samples = stop - start;
  out.samples.resize(out.layout.size() * out.n_samples);
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    auto src = rec.channel(c).subspan(start, out.n_samples);
    std::copy(src.begin(), src.end(), out.samples.begin() + c * out.n_samples);
  }
  return out;
}

void validate_markers(const EegRecording& rec, std::span<const EventMarker> markers) {
  std::size_t prev = 0;
  bool first = true;
  for (const auto& m : markers) {
    if (m.sample_index >= rec.n_samples)
      throw std::out_of_range("marker at sample " + std::to_string(m.sample_index) +
                              " beyond recording of " + std::to_string(rec.n_samples));
    if (!first && m.sample_index < prev)
      throw std::invalid_argument("markers not sorted by sample index");
    prev = m.sample_index;
    first = false;
  }
}

}  // namespace vrconflict
