#include "vrconflict/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vrconflict::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEventsHeader = "sample_index,code,d_level,style,block_id,trial_id";
constexpr const char* kTrialHeader =
    "participant,session,trial_id,block_id,d_level,style,target_side,"
    "crossing_s,completion_s,prev_congruent";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::uint32_t to_le32(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

json condition_to_json(const Condition& c) {
  json j = json::object();
  if (c.d_level) j["d_level"] = to_string(*c.d_level);
  if (c.style) j["style"] = to_string(*c.style);
  if (c.block_id) j["block_id"] = *c.block_id;
  if (c.trial_id) j["trial_id"] = *c.trial_id;
  return j;
}

Condition condition_from_json(const json& j) {
  Condition c;
  if (j.contains("d_level")) c.d_level = parse_d_level(j.at("d_level").get<std::string>());
  if (j.contains("style")) c.style = parse_style(j.at("style").get<std::string>());
  if (j.contains("block_id")) c.block_id = j.at("block_id").get<int>();
  if (j.contains("trial_id")) c.trial_id = j.at("trial_id").get<int>();
  return c;
}

void marker_row(std::ostream& os, const EventMarker& m) {
  os << m.sample_index << ',' << to_string(m.code) << ','
     << (m.condition.d_level ? to_string(*m.condition.d_level) : "") << ','
     << (m.condition.style ? to_string(*m.condition.style) : "") << ',';
  if (m.condition.block_id) os << *m.condition.block_id;
  os << ',';
  if (m.condition.trial_id) os << *m.condition.trial_id;
  os << '\n';
}

}  // namespace

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& file, std::string_view text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("short write to " + file.string());
}

void write_markers_csv(const fs::path& file, std::span<const EventMarker> markers) {
  std::ostringstream ss;
  ss << kEventsHeader << '\n';
  for (const auto& m : markers) marker_row(ss, m);
  write_text_file(file, ss.str());
}

std::vector<EventMarker> read_markers_csv(const fs::path& file) {
  std::istringstream in(read_text_file(file));
  std::string line;
  if (!std::getline(in, line) || line != kEventsHeader)
    throw std::runtime_error(file.string() + ": bad events header");

  std::vector<EventMarker> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6)
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                               ": expected 6 fields, got " + std::to_string(f.size()));
    EventMarker m;
    m.sample_index = std::stoull(f[0]);
    m.code = parse_marker_code(f[1]);
    if (!f[2].empty()) m.condition.d_level = parse_d_level(f[2]);
    if (!f[3].empty()) m.condition.style = parse_style(f[3]);
    if (!f[4].empty()) m.condition.block_id = std::stoi(f[4]);
    if (!f[5].empty()) m.condition.trial_id = std::stoi(f[5]);
    if (!out.empty() && m.sample_index < out.back().sample_index)
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                               ": events not sorted by sample_index");
    out.push_back(std::move(m));
  }
  return out;
}

void write_bundle(const fs::path& dir, const EegRecording& rec,
                  std::span<const EventMarker> markers, const json& extra_meta) {
  rec.validate();
  validate_markers(rec, markers);
  fs::create_directories(dir);

  json meta = extra_meta.is_null() ? json::object() : extra_meta;
  meta["sample_rate_hz"] = rec.sample_rate_hz;
  meta["channels"] = rec.layout.names;
  meta["reference_labels"] = rec.layout.reference_labels;
  meta["n_channels"] = rec.n_channels();
  meta["n_samples"] = rec.n_samples;
  meta["sample_format"] = "f32le";
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");

  // channel-major float32, little endian
  std::vector<std::uint32_t> bits(rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const float f = static_cast<float>(rec.samples[i]);
    bits[i] = to_le32(std::bit_cast<std::uint32_t>(f));
  }
  std::ofstream out(dir / "samples.bin", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "samples.bin").string());
  out.write(reinterpret_cast<const char*>(bits.data()),
            static_cast<std::streamsize>(bits.size() * sizeof(std::uint32_t)));
  if (!out) throw std::runtime_error("short write to " + (dir / "samples.bin").string());

  write_markers_csv(dir / "events.csv", markers);
}

Bundle read_bundle(const fs::path& dir) {
  Bundle b;
  b.meta = json::parse(read_text_file(dir / "meta.json"));

  EegRecording& rec = b.recording;
  rec.sample_rate_hz = b.meta.at("sample_rate_hz").get<double>();
  rec.layout.names = b.meta.at("channels").get<std::vector<std::string>>();
  rec.layout.reference_labels =
      b.meta.at("reference_labels").get<std::vector<std::string>>();
  rec.layout.validate();
  rec.n_samples = b.meta.at("n_samples").get<std::size_t>();

  const fs::path bin = dir / "samples.bin";
  const std::size_t expected = rec.layout.size() * rec.n_samples * 4;
  const std::size_t actual = fs::exists(bin) ? fs::file_size(bin) : 0;
  if (actual != expected)
    throw std::runtime_error(bin.string() + ": expected " + std::to_string(expected) +
                             " bytes, found " + std::to_string(actual));

  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + bin.string());
  std::vector<std::uint32_t> bits(rec.layout.size() * rec.n_samples);
  in.read(reinterpret_cast<char*>(bits.data()),
          static_cast<std::streamsize>(bits.size() * sizeof(std::uint32_t)));
  if (in.gcount() != static_cast<std::streamsize>(bits.size() * sizeof(std::uint32_t)))
    throw std::runtime_error("short read from " + bin.string());
  rec.samples.resize(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    rec.samples[i] = static_cast<double>(std::bit_cast<float>(to_le32(bits[i])));

  b.markers = read_markers_csv(dir / "events.csv");
  validate_markers(rec, b.markers);
  return b;
}

void write_trial_log(const fs::path& file, std::span<const TrialLogRow> rows) {
  std::ostringstream ss;
  ss << kTrialHeader << '\n';
  for (const auto& row : rows) {
    const TrialRecord& r = row.record;
    ss << row.participant << ',' << row.session << ',' << r.plan.trial_id << ','
       << r.plan.block_id << ',' << to_string(r.plan.d_level) << ','
       << (r.plan.style ? to_string(*r.plan.style) : "") << ','
       << to_string(r.plan.target_side) << ',' << fmt_double(r.crossing_time_s) << ','
       << fmt_double(r.completion_time_s) << ',';
    if (r.prev_trial_congruent) ss << (*r.prev_trial_congruent ? '1' : '0');
    ss << '\n';
  }
  write_text_file(file, ss.str());
}

std::vector<TrialLogRow> read_trial_log(const fs::path& file) {
  std::istringstream in(read_text_file(file));
  std::string line;
  if (!std::getline(in, line) || line != kTrialHeader)
    throw std::runtime_error(file.string() + ": bad trial log header");

  std::vector<TrialLogRow> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10)
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                               ": expected 10 fields, got " + std::to_string(f.size()));
    TrialLogRow row;
    row.participant = std::stoi(f[0]);
    row.session = std::stoi(f[1]);
    row.record.plan.trial_id = std::stoi(f[2]);
    row.record.plan.block_id = std::stoi(f[3]);
    row.record.plan.d_level = parse_d_level(f[4]);
    if (!f[5].empty()) row.record.plan.style = parse_style(f[5]);
    row.record.plan.target_side = parse_target_side(f[6]);
    row.record.crossing_time_s = std::stod(f[7]);
    row.record.completion_time_s = std::stod(f[8]);
    if (!f[9].empty()) row.record.prev_trial_congruent = (f[9] == "1");
    out.push_back(std::move(row));
  }
  return out;
}

void write_epoch_store(const fs::path& stem, const EpochSet& set, const json& extra_meta) {
  json meta = extra_meta.is_null() ? json::object() : extra_meta;
  meta["layout"] = {{"names", set.layout.names},
                    {"reference_labels", set.layout.reference_labels}};
  meta["sample_rate_hz"] = set.sample_rate_hz;
  meta["window"] = {{"pre_ms", set.window.pre_ms}, {"post_ms", set.window.post_ms}};
  meta["sample_format"] = "f64 native, epoch-major then channel-major";

  json epochs = json::array();
  for (const auto& e : set.epochs) {
    epochs.push_back({{"marker_sample", e.marker_sample},
                      {"n_channels", e.n_channels},
                      {"n_samples", e.n_samples},
                      {"pre_samples", e.pre_samples},
                      {"condition", condition_to_json(e.condition)}});
  }
  meta["epochs"] = std::move(epochs);

  json rejections = json::array();
  for (const auto& r : set.rejection_log) {
    rejections.push_back({{"sample_index", r.marker.sample_index},
                          {"code", to_string(r.marker.code)},
                          {"condition", condition_to_json(r.marker.condition)},
                          {"reason", r.reason},
                          {"peak_uv", r.peak_uv}});
  }
  meta["rejections"] = std::move(rejections);

  fs::path json_path = stem;
  json_path += ".json";
  write_text_file(json_path, meta.dump(2) + "\n");

  fs::path bin_path = stem;
  bin_path += ".bin";
  std::ofstream out(bin_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + bin_path.string());
  for (const auto& e : set.epochs)
    out.write(reinterpret_cast<const char*>(e.data.data()),
              static_cast<std::streamsize>(e.data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + bin_path.string());
}

EpochStore read_epoch_store(const fs::path& stem) {
  fs::path json_path = stem;
  json_path += ".json";
  fs::path bin_path = stem;
  bin_path += ".bin";

  EpochStore store;
  store.meta = json::parse(read_text_file(json_path));
  EpochSet& set = store.set;
  set.layout.names = store.meta.at("layout").at("names").get<std::vector<std::string>>();
  set.layout.reference_labels =
      store.meta.at("layout").at("reference_labels").get<std::vector<std::string>>();
  set.layout.validate();
  set.sample_rate_hz = store.meta.at("sample_rate_hz").get<double>();
  set.window.pre_ms = store.meta.at("window").at("pre_ms").get<double>();
  set.window.post_ms = store.meta.at("window").at("post_ms").get<double>();

  std::size_t total_doubles = 0;
  for (const auto& je : store.meta.at("epochs")) {
    Epoch e;
    e.marker_sample = je.at("marker_sample").get<std::size_t>();
    e.n_channels = je.at("n_channels").get<std::size_t>();
    e.n_samples = je.at("n_samples").get<std::size_t>();
    e.pre_samples = je.at("pre_samples").get<std::size_t>();
    e.sample_rate_hz = set.sample_rate_hz;
    e.condition = condition_from_json(je.at("condition"));
    total_doubles += e.n_channels * e.n_samples;
    set.epochs.push_back(std::move(e));
  }

  for (const auto& jr : store.meta.at("rejections")) {
    RejectionEntry r;
    r.marker.sample_index = jr.at("sample_index").get<std::size_t>();
    r.marker.code = parse_marker_code(jr.at("code").get<std::string>());
    r.marker.condition = condition_from_json(jr.at("condition"));
    r.reason = jr.at("reason").get<std::string>();
    r.peak_uv = jr.at("peak_uv").get<double>();
    set.rejection_log.push_back(std::move(r));
  }

  const std::size_t expected = total_doubles * sizeof(double);
  const std::size_t actual = fs::exists(bin_path) ? fs::file_size(bin_path) : 0;
  if (actual != expected)
    throw std::runtime_error(bin_path.string() + ": expected " + std::to_string(expected) +
                             " bytes, found " + std::to_string(actual));

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + bin_path.string());
  for (auto& e : set.epochs) {
    e.data.resize(e.n_channels * e.n_samples);
    in.read(reinterpret_cast<char*>(e.data.data()),
            static_cast<std::streamsize>(e.data.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(e.data.size() * sizeof(double)))
      throw std::runtime_error("short read from " + bin_path.string());
  }
  return store;
}

}  // namespace vrconflict::io
