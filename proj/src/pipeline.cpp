#include "vrconflict/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "vrconflict/io.hpp"
#include "vrconflict/rng.hpp"
#include "vrconflict/svg.hpp"

namespace vrconflict {

namespace fs = std::filesystem;
using nlohmann::json;

void Config::validate() const {
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample_rate_hz must be positive");
  reach.validate();
  conflict.validate();
  if (latency.lo_ms < 0 || latency.hi_ms < latency.lo_ms)
    throw std::invalid_argument("latency_ms range reversed");
  if (behavior.participants < 1) throw std::invalid_argument("behavior.participants < 1");
  if (erp.participants < 1) throw std::invalid_argument("erp.participants < 1");
  behavior.protocol.validate();
  erp.protocol.validate();
  erp.waveform.validate();
  erp.filter.validate(sample_rate_hz);
  if (analysis.roi.empty()) throw std::invalid_argument("analysis.roi is empty");
  if (!(analysis.frn_lo_ms < analysis.frn_hi_ms))
    throw std::invalid_argument("frn window reversed");
  if (!(analysis.artifact_threshold_uv > 0))
    throw std::invalid_argument("artifact_threshold_uv must be positive");
}

// ---------------------------------------------------------------------------
// config <-> json

namespace {

void check_keys(const json& j, const char* ctx,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object())
    throw std::invalid_argument(std::string("config: ") + ctx + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw std::invalid_argument(std::string("config: unknown key ") + ctx + "." + it.key());
}

template <class T>
void opt_get(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("config: expected [x, y, z] triple");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json protocol_to_json(const ProtocolConfig& p) {
  return {{"mode", p.mode == ProtocolMode::BlockedRadius ? "blocked" : "oddball"},
          {"trials_total", p.trials_total},
          {"block_len", p.block_len},
          {"d_multipliers", p.d_multipliers},
          {"rest_every_blocks", p.rest_every_blocks},
          {"rest_duration_s", p.rest_duration_s},
          {"inter_trial_s", p.inter_trial_s},
          {"dwell_s", p.dwell_s},
          {"trial_timeout_s", p.trial_timeout_s},
          {"inter_trial_rest_s", p.inter_trial_rest_s},
          {"sessions", p.sessions}};
}

void protocol_overlay(const json& j, const char* ctx, ProtocolConfig& p) {
  check_keys(j, ctx,
             {"mode", "trials_total", "block_len", "d_multipliers", "rest_every_blocks",
              "rest_duration_s", "inter_trial_s", "dwell_s", "trial_timeout_s",
              "inter_trial_rest_s", "sessions"});
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "blocked") p.mode = ProtocolMode::BlockedRadius;
    else if (m == "oddball") p.mode = ProtocolMode::Oddball;
    else throw std::invalid_argument("config: unknown protocol mode " + m);
  }
  opt_get(j, "trials_total", p.trials_total);
  opt_get(j, "block_len", p.block_len);
  if (j.contains("d_multipliers")) {
    const auto& a = j.at("d_multipliers");
    if (!a.is_array() || a.size() != 3)
      throw std::invalid_argument("config: d_multipliers needs 3 entries");
    for (int i = 0; i < 3; ++i) p.d_multipliers[i] = a[i].get<double>();
  }
  opt_get(j, "rest_every_blocks", p.rest_every_blocks);
  opt_get(j, "rest_duration_s", p.rest_duration_s);
  opt_get(j, "inter_trial_s", p.inter_trial_s);
  opt_get(j, "dwell_s", p.dwell_s);
  opt_get(j, "trial_timeout_s", p.trial_timeout_s);
  opt_get(j, "inter_trial_rest_s", p.inter_trial_rest_s);
  opt_get(j, "sessions", p.sessions);
}

std::string scenario_key(HandStyle s, DLevel d) {
  return std::string(to_string(s)) + ":" + to_string(d);
}

json scenario_to_json(const ScenarioSpec& s) {
  json j = json::object();
  for (const auto& [key, v] : s.scales) j[scenario_key(key.style, key.d_level)] = v;
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto colon = key.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config: scenario key must look like S1:D2, got " + key);
    ScenarioSpec::Key k{parse_style(key.substr(0, colon)), parse_d_level(key.substr(colon + 1))};
    s.scales[k] = it.value().get<double>();
  }
  return s;
}

}  // namespace

json to_json(const Config& c) {
  json j;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["reach"] = {{"start", vec3_to_json(c.reach.start)},
                {"target", vec3_to_json(c.reach.target)},
                {"actual_radius_m", c.reach.actual_radius_m},
                {"movement_time_s", c.reach.movement_time_s}};
  j["conflict"] = {{"block_change_penalty_s", c.conflict.block_change_penalty_s},
                   {"conflict_penalty_s", c.conflict.conflict_penalty_s},
                   {"decay", c.conflict.decay},
                   {"congruency_modulation", c.conflict.congruency_modulation},
                   {"noise_sd_s", c.conflict.noise_sd_s}};
  j["latency_ms"] = json::array({c.latency.lo_ms, c.latency.hi_ms});
  j["behavior"] = {{"participants", c.behavior.participants},
                   {"protocol", protocol_to_json(c.behavior.protocol)}};
  j["erp"] = {{"participants", c.erp.participants},
              {"protocol", protocol_to_json(c.erp.protocol)},
              {"noise",
               {{"kind", c.erp.noise.kind == NoiseKind::Pink ? "pink" : "white"},
                {"sd_uv", c.erp.noise.sd_uv}}},
              {"waveform",
               {{"peak_amplitude_uv", c.erp.waveform.peak_amplitude_uv},
                {"peak_latency_ms", c.erp.waveform.peak_latency_ms},
                {"width_ms", c.erp.waveform.width_ms},
                {"channel_weights", c.erp.waveform.channel_weights}}},
              {"scenario", scenario_to_json(c.erp.scenario)},
              {"filter",
               {{"high_pass_hz", c.erp.filter.high_pass_hz},
                {"low_pass_hz", c.erp.filter.low_pass_hz},
                {"order", c.erp.filter.order},
                {"zero_phase", c.erp.filter.zero_phase}}},
              {"window", {{"pre_ms", c.erp.window.pre_ms}, {"post_ms", c.erp.window.post_ms}}}};
  j["analysis"] = {{"roi", c.analysis.roi},
                   {"frn_window_ms", json::array({c.analysis.frn_lo_ms, c.analysis.frn_hi_ms})},
                   {"artifact_threshold_uv", c.analysis.artifact_threshold_uv}};
  return j;
}

Config config_from_json(const json& j) {
  Config c = Config::defaults();
  check_keys(j, "root",
             {"sample_rate_hz", "reach", "conflict", "latency_ms", "behavior", "erp",
              "analysis"});
  opt_get(j, "sample_rate_hz", c.sample_rate_hz);

  if (j.contains("reach")) {
    const json& r = j.at("reach");
    check_keys(r, "reach", {"start", "target", "actual_radius_m", "movement_time_s"});
    if (r.contains("start")) c.reach.start = vec3_from_json(r.at("start"));
    if (r.contains("target")) c.reach.target = vec3_from_json(r.at("target"));
    opt_get(r, "actual_radius_m", c.reach.actual_radius_m);
    opt_get(r, "movement_time_s", c.reach.movement_time_s);
  }
  if (j.contains("conflict")) {
    const json& f = j.at("conflict");
    check_keys(f, "conflict",
               {"block_change_penalty_s", "conflict_penalty_s", "decay",
                "congruency_modulation", "noise_sd_s"});
    opt_get(f, "block_change_penalty_s", c.conflict.block_change_penalty_s);
    opt_get(f, "conflict_penalty_s", c.conflict.conflict_penalty_s);
    opt_get(f, "decay", c.conflict.decay);
    opt_get(f, "congruency_modulation", c.conflict.congruency_modulation);
    opt_get(f, "noise_sd_s", c.conflict.noise_sd_s);
  }
  if (j.contains("latency_ms")) {
    const json& l = j.at("latency_ms");
    if (!l.is_array() || l.size() != 2)
      throw std::invalid_argument("config: latency_ms needs [lo, hi]");
    c.latency.lo_ms = l[0].get<double>();
    c.latency.hi_ms = l[1].get<double>();
  }
  if (j.contains("behavior")) {
    const json& b = j.at("behavior");
    check_keys(b, "behavior", {"participants", "protocol"});
    opt_get(b, "participants", c.behavior.participants);
    if (b.contains("protocol"))
      protocol_overlay(b.at("protocol"), "behavior.protocol", c.behavior.protocol);
  }
  if (j.contains("erp")) {
    const json& e = j.at("erp");
    check_keys(e, "erp",
               {"participants", "protocol", "noise", "waveform", "scenario", "filter",
                "window"});
    opt_get(e, "participants", c.erp.participants);
    if (e.contains("protocol"))
      protocol_overlay(e.at("protocol"), "erp.protocol", c.erp.protocol);
    if (e.contains("noise")) {
      const json& n = e.at("noise");
      check_keys(n, "erp.noise", {"kind", "sd_uv"});
      if (n.contains("kind")) {
        const auto k = n.at("kind").get<std::string>();
        if (k == "pink") c.erp.noise.kind = NoiseKind::Pink;
        else if (k == "white") c.erp.noise.kind = NoiseKind::White;
        else throw std::invalid_argument("config: unknown noise kind " + k);
      }
      opt_get(n, "sd_uv", c.erp.noise.sd_uv);
    }
    if (e.contains("waveform")) {
      const json& w = e.at("waveform");
      check_keys(w, "erp.waveform",
                 {"peak_amplitude_uv", "peak_latency_ms", "width_ms", "channel_weights"});
      opt_get(w, "peak_amplitude_uv", c.erp.waveform.peak_amplitude_uv);
      opt_get(w, "peak_latency_ms", c.erp.waveform.peak_latency_ms);
      opt_get(w, "width_ms", c.erp.waveform.width_ms);
      if (w.contains("channel_weights"))
        c.erp.waveform.channel_weights =
            w.at("channel_weights").get<std::map<std::string, double>>();
    }
    if (e.contains("scenario")) c.erp.scenario = scenario_from_json(e.at("scenario"));
    if (e.contains("filter")) {
      const json& f = e.at("filter");
      check_keys(f, "erp.filter", {"high_pass_hz", "low_pass_hz", "order", "zero_phase"});
      opt_get(f, "high_pass_hz", c.erp.filter.high_pass_hz);
      opt_get(f, "low_pass_hz", c.erp.filter.low_pass_hz);
      opt_get(f, "order", c.erp.filter.order);
      opt_get(f, "zero_phase", c.erp.filter.zero_phase);
    }
    if (e.contains("window")) {
      const json& w = e.at("window");
      check_keys(w, "erp.window", {"pre_ms", "post_ms"});
      opt_get(w, "pre_ms", c.erp.window.pre_ms);
      opt_get(w, "post_ms", c.erp.window.post_ms);
    }
  }
  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    check_keys(a, "analysis", {"roi", "frn_window_ms", "artifact_threshold_uv"});
    if (a.contains("roi")) c.analysis.roi = a.at("roi").get<std::vector<std::string>>();
    if (a.contains("frn_window_ms")) {
      const json& w = a.at("frn_window_ms");
      if (!w.is_array() || w.size() != 2)
        throw std::invalid_argument("config: frn_window_ms needs [lo, hi]");
      c.analysis.frn_lo_ms = w[0].get<double>();
      c.analysis.frn_hi_ms = w[1].get<double>();
    }
    opt_get(a, "artifact_threshold_uv", c.analysis.artifact_threshold_uv);
  }
  c.validate();
  return c;
}

Config load_config(const fs::path& file) {
  if (file.empty()) return Config::defaults();
  return config_from_json(json::parse(io::read_text_file(file)));
}

std::string config_hash_hex(const Config& cfg) {
  const std::string dump = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// results <-> json

namespace {

json waveform_to_json(const ErpWaveform& w) {
  return {{"channels", w.channels},
          {"time_ms", w.time_ms},
          {"mean_uv", w.mean_uv},
          {"n_epochs", w.n_epochs}};
}

ErpWaveform waveform_from_json(const json& j) {
  ErpWaveform w;
  j.at("channels").get_to(w.channels);
  j.at("time_ms").get_to(w.time_ms);
  j.at("mean_uv").get_to(w.mean_uv);
  j.at("n_epochs").get_to(w.n_epochs);
  return w;
}

json frn_to_json(const FrnMeasure& m) {
  return {{"window_ms", json::array({m.window_lo_ms, m.window_hi_ms})},
          {"peak_amplitude_uv", m.peak_amplitude_uv},
          {"peak_latency_ms", m.peak_latency_ms},
          {"area_uv_ms", m.area_uv_ms}};
}

FrnMeasure frn_from_json(const json& j) {
  FrnMeasure m;
  m.window_lo_ms = j.at("window_ms")[0].get<double>();
  m.window_hi_ms = j.at("window_ms")[1].get<double>();
  j.at("peak_amplitude_uv").get_to(m.peak_amplitude_uv);
  j.at("peak_latency_ms").get_to(m.peak_latency_ms);
  j.at("area_uv_ms").get_to(m.area_uv_ms);
  return m;
}

json comparison_to_json(const ComparisonResult& c) {
  return {{"label", c.label},
          {"t", c.t_statistic},
          {"p", c.p_value},
          {"n_pairs", c.n_pairs},
          {"significant", c.significant}};
}

ComparisonResult comparison_from_json(const json& j) {
  ComparisonResult c;
  j.at("label").get_to(c.label);
  j.at("t").get_to(c.t_statistic);
  j.at("p").get_to(c.p_value);
  j.at("n_pairs").get_to(c.n_pairs);
  j.at("significant").get_to(c.significant);
  return c;
}

json style_to_json(const StyleErpResults& s) {
  json channels = json::array();
  for (const auto& cc : s.channels) {
    json e = comparison_to_json(cc.result);
    e["channel"] = cc.channel;
    e.erase("label");
    channels.push_back(std::move(e));
  }
  return {{"style", to_string(s.style)},
          {"grand", {{"D1", waveform_to_json(s.grand_d1)}, {"D2", waveform_to_json(s.grand_d2)}}},
          {"frn", {{"D1", frn_to_json(s.frn_d1)}, {"D2", frn_to_json(s.frn_d2)}}},
          {"area_difference_uv_ms", s.area_difference_uv_ms},
          {"comparison", comparison_to_json(s.d2_vs_d1)},
          {"channels", std::move(channels)},
          {"participant_mean_d1_uv", s.participant_mean_d1_uv},
          {"participant_mean_d2_uv", s.participant_mean_d2_uv},
          {"epochs_used_per_condition", s.epochs_used_per_condition},
          {"epochs_rejected", s.epochs_rejected}};
}

StyleErpResults style_from_json(const json& j) {
  StyleErpResults s;
  s.style = parse_style(j.at("style").get<std::string>());
  s.grand_d1 = waveform_from_json(j.at("grand").at("D1"));
  s.grand_d2 = waveform_from_json(j.at("grand").at("D2"));
  s.frn_d1 = frn_from_json(j.at("frn").at("D1"));
  s.frn_d2 = frn_from_json(j.at("frn").at("D2"));
  j.at("area_difference_uv_ms").get_to(s.area_difference_uv_ms);
  s.d2_vs_d1 = comparison_from_json(j.at("comparison"));
  for (const auto& e : j.at("channels")) {
    ChannelComparison cc;
    cc.channel = e.at("channel").get<std::string>();
    cc.result.label = cc.channel;
    e.at("t").get_to(cc.result.t_statistic);
    e.at("p").get_to(cc.result.p_value);
    e.at("n_pairs").get_to(cc.result.n_pairs);
    e.at("significant").get_to(cc.result.significant);
    s.channels.push_back(std::move(cc));
  }
  j.at("participant_mean_d1_uv").get_to(s.participant_mean_d1_uv);
  j.at("participant_mean_d2_uv").get_to(s.participant_mean_d2_uv);
  j.at("epochs_used_per_condition").get_to(s.epochs_used_per_condition);
  j.at("epochs_rejected").get_to(s.epochs_rejected);
  return s;
}

json curve_to_json(const BlockPositionCurve& c) {
  json levels = json::object();
  for (const auto& [level, cells] : c.by_level) {
    json arr = json::array();
    for (const auto& cell : cells)
      arr.push_back({{"mean_s", cell.mean_s}, {"sd_s", cell.sd_s}, {"n", cell.n}});
    levels[to_string(level)] = std::move(arr);
  }
  return {{"block_len", c.block_len}, {"levels", std::move(levels)}};
}

BlockPositionCurve curve_from_json(const json& j) {
  BlockPositionCurve c;
  j.at("block_len").get_to(c.block_len);
  for (auto it = j.at("levels").begin(); it != j.at("levels").end(); ++it) {
    auto& cells = c.by_level[parse_d_level(it.key())];
    for (const auto& e : it.value()) {
      CurveCell cell;
      e.at("mean_s").get_to(cell.mean_s);
      e.at("sd_s").get_to(cell.sd_s);
      e.at("n").get_to(cell.n);
      cells.push_back(cell);
    }
  }
  return c;
}

json congruency_to_json(const CongruencySequenceResult& c) {
  json group = json::object(), per_part = json::object(), supp = json::object();
  for (const auto& [tr, v] : c.group_mean_s) group[tr.label()] = v;
  for (const auto& [tr, v] : c.per_participant_s) per_part[tr.label()] = v;
  for (const auto& [tr, v] : c.supplementary_mean_s) supp[tr.label()] = v;
  json dropped = json::array();
  for (const auto& d : c.dropped)
    dropped.push_back({{"participant", d.participant}, {"comparison", d.comparison}});
  return {{"lead_trials", c.lead_trials},
          {"group_mean_s", std::move(group)},
          {"per_participant_s", std::move(per_part)},
          {"supplementary_mean_s", std::move(supp)},
          {"comparisons",
           {{"into_d1", comparison_to_json(c.into_d1)},
            {"into_d3", comparison_to_json(c.into_d3)}}},
          {"dropped", std::move(dropped)}};
}

Transition transition_from_label(const std::string& label) {
  const auto slash = label.find('/');
  if (slash == std::string::npos)
    throw std::invalid_argument("bad transition label: " + label);
  return {parse_d_level(label.substr(0, slash)), parse_d_level(label.substr(slash + 1))};
}

CongruencySequenceResult congruency_from_json(const json& j) {
  CongruencySequenceResult c;
  j.at("lead_trials").get_to(c.lead_trials);
  for (auto it = j.at("group_mean_s").begin(); it != j.at("group_mean_s").end(); ++it)
    c.group_mean_s[transition_from_label(it.key())] = it.value().get<double>();
  for (auto it = j.at("per_participant_s").begin(); it != j.at("per_participant_s").end(); ++it)
    c.per_participant_s[transition_from_label(it.key())] =
        it.value().get<std::vector<double>>();
  for (auto it = j.at("supplementary_mean_s").begin();
       it != j.at("supplementary_mean_s").end(); ++it)
    c.supplementary_mean_s[transition_from_label(it.key())] = it.value().get<double>();
  c.into_d1 = comparison_from_json(j.at("comparisons").at("into_d1"));
  c.into_d3 = comparison_from_json(j.at("comparisons").at("into_d3"));
  for (const auto& d : j.at("dropped"))
    c.dropped.push_back(
        {d.at("participant").get<int>(), d.at("comparison").get<std::string>()});
  return c;
}

}  // namespace

json results_to_json(const Results& r) {
  json j;
  j["meta"] = {{"tool", "vrconflict"}, {"seed", r.seed}, {"config_hash", r.config_hash}};
  j["config"] = r.config_echo;
  if (r.behavior) {
    j["behavior"] = {{"participants", r.behavior->participants},
                     {"curve", curve_to_json(r.behavior->curve)},
                     {"congruency", congruency_to_json(r.behavior->congruency)}};
  }
  if (r.erp) {
    json styles = json::array();
    for (const auto& s : r.erp->styles) styles.push_back(style_to_json(s));
    j["erp"] = {{"roi", r.erp->roi},
                {"window_ms", json::array({r.erp->window_lo_ms, r.erp->window_hi_ms})},
                {"participants", r.erp->participants},
                {"styles", std::move(styles)}};
  }
  return j;
}

Results results_from_json(const json& j) {
  Results r;
  j.at("meta").at("seed").get_to(r.seed);
  j.at("meta").at("config_hash").get_to(r.config_hash);
  r.config_echo = j.at("config");
  if (j.contains("behavior")) {
    BehaviorResults b;
    j.at("behavior").at("participants").get_to(b.participants);
    b.curve = curve_from_json(j.at("behavior").at("curve"));
    b.congruency = congruency_from_json(j.at("behavior").at("congruency"));
    r.behavior = std::move(b);
  }
  if (j.contains("erp")) {
    ErpResults e;
    j.at("erp").at("roi").get_to(e.roi);
    e.window_lo_ms = j.at("erp").at("window_ms")[0].get<double>();
    e.window_hi_ms = j.at("erp").at("window_ms")[1].get<double>();
    j.at("erp").at("participants").get_to(e.participants);
    for (const auto& s : j.at("erp").at("styles")) e.styles.push_back(style_from_json(s));
    r.erp = std::move(e);
  }
  return r;
}

// ---------------------------------------------------------------------------
// in-memory pipeline

std::vector<BlockedRun> simulate_blocked(const Config& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<BlockedRun> runs;
  runs.reserve(cfg.behavior.participants);
  for (int p = 0; p < cfg.behavior.participants; ++p) {
    BlockedRun run;
    run.participant = p;
    const TrialPlan plan =
        build_blocked_schedule(cfg.behavior.protocol, derive_seed(seed, SeedStream::blocked_schedule, p));
    Rng rng(derive_seed(seed, SeedStream::blocked_trials, p));
    run.records = simulate_trials(plan, cfg.conflict, cfg.reach, cfg.behavior.protocol, rng);
    run.markers = emit_markers(run.records, cfg.behavior.protocol, cfg.latency,
                               cfg.sample_rate_hz, derive_seed(seed, SeedStream::blocked_markers, p));
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<OddballSession> simulate_oddball(const Config& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<OddballSession> sessions;
  sessions.reserve(static_cast<std::size_t>(cfg.erp.participants) * cfg.erp.protocol.sessions);
  for (int p = 0; p < cfg.erp.participants; ++p) {
    const auto plans = build_oddball_schedule(cfg.erp.protocol, p);
    for (int s = 0; s < static_cast<int>(plans.size()); ++s) {
      OddballSession sess;
      sess.participant = p;
      sess.session = s;
      if (!plans[s].empty() && plans[s].front().style) sess.style = *plans[s].front().style;
      Rng rng(derive_seed(seed, SeedStream::oddball_trials, p, s));
      sess.records = simulate_trials(plans[s], cfg.conflict, cfg.reach, cfg.erp.protocol, rng);
      sess.markers = emit_markers(sess.records, cfg.erp.protocol, cfg.latency, cfg.sample_rate_hz,
                                  derive_seed(seed, SeedStream::oddball_markers, p, s));
      sessions.push_back(std::move(sess));
    }
  }
  return sessions;
}

EegRecording synth_recording(const Config& cfg, const OddballSession& session,
                             std::uint64_t seed) {
  if (session.markers.empty()) throw std::invalid_argument("session has no markers");
  // at least 1 s of tail margin, grown to a 5-smooth length so the pink-noise
  // FFT never lands on a slow prime-length transform
  const auto margin = static_cast<std::size_t>(std::llround(cfg.sample_rate_hz));
  const std::size_t n = fft_friendly_length(session.markers.back().sample_index + margin);

  NoiseSpec ns = cfg.erp.noise;
  ns.seed = derive_seed(seed, SeedStream::noise, session.participant, session.session);
  EegRecording rec =
      gen_noise(ChannelLayout::standard_32(), n, ns, cfg.sample_rate_hz);
  return inject(rec, session.markers, cfg.erp.waveform, cfg.erp.scenario);
}

EpochSet preprocess_recording(const Config& cfg, const EegRecording& rec,
                              std::span<const EventMarker> markers) {
  const EegRecording filtered = bandpass_filter(rec, cfg.erp.filter);
  EpochSet set = extract_epochs(filtered, markers, cfg.erp.window);
  set = baseline_correct(set);
  return reject_artifacts(set, cfg.analysis.artifact_threshold_uv);
}

BehaviorResults analyze_behavior(const Config& cfg, const std::vector<BlockedRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("no blocked runs to analyze");
  std::vector<TrialRecord> pooled;
  std::vector<std::vector<TrialRecord>> per_participant;
  per_participant.reserve(runs.size());
  for (const auto& run : runs) {
    pooled.insert(pooled.end(), run.records.begin(), run.records.end());
    per_participant.push_back(run.records);
  }
  BehaviorResults b;
  b.participants = static_cast<int>(runs.size());
  b.curve = block_position_curve(pooled);
  b.congruency = congruency_sequence_effect(per_participant);
  (void)cfg;
  return b;
}

namespace {

EpochSet filter_condition(const EpochSet& set, DLevel level) {
  EpochSet out;
  out.layout = set.layout;
  out.sample_rate_hz = set.sample_rate_hz;
  out.window = set.window;
  for (const auto& e : set.epochs)
    if (e.condition.d_level && *e.condition.d_level == level) out.epochs.push_back(e);
  return out;
}

std::size_t count_amplitude_rejections(const EpochSet& set) {
  std::size_t n = 0;
  for (const auto& r : set.rejection_log)
    if (r.reason == "amplitude") ++n;
  return n;
}

void merge_epoch_set(EpochSet& slot, EpochSet&& set) {
  if (slot.epochs.empty() && slot.rejection_log.empty()) {
    slot = std::move(set);
    return;
  }
  slot.epochs.insert(slot.epochs.end(), std::make_move_iterator(set.epochs.begin()),
                     std::make_move_iterator(set.epochs.end()));
  slot.rejection_log.insert(slot.rejection_log.end(), set.rejection_log.begin(),
                            set.rejection_log.end());
}

std::vector<ParticipantStyleEpochs> grouped_to_sets(
    std::map<std::pair<int, HandStyle>, EpochSet>&& grouped) {
  std::vector<ParticipantStyleEpochs> sets;
  sets.reserve(grouped.size());
  for (auto& [key, set] : grouped) sets.push_back({key.first, key.second, std::move(set)});
  return sets;
}

}  // namespace

ErpResults analyze_erp(const Config& cfg, std::vector<ParticipantStyleEpochs> sets,
                       std::uint64_t seed) {
  ErpResults out;
  out.roi = cfg.analysis.roi;
  out.window_lo_ms = cfg.analysis.frn_lo_ms;
  out.window_hi_ms = cfg.analysis.frn_hi_ms;

  std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
    if (a.participant != b.participant) return a.participant < b.participant;
    return a.style < b.style;
  });
  std::set<int> participants;
  for (const auto& s : sets) participants.insert(s.participant);
  out.participants = static_cast<int>(participants.size());

  for (const HandStyle style : {HandStyle::S1, HandStyle::S2, HandStyle::S3}) {
    StyleErpResults sr;
    sr.style = style;
    std::vector<ErpWaveform> erps_d1, erps_d2;
    std::vector<EpochSet> matched_d1, matched_d2;

    for (const auto& entry : sets) {
      if (entry.style != style) continue;
      EpochSet d1 = filter_condition(entry.epochs, DLevel::D1);
      EpochSet d2 = filter_condition(entry.epochs, DLevel::D2);
      if (d1.epochs.empty() || d2.epochs.empty())
        throw std::runtime_error("participant " + std::to_string(entry.participant) +
                                 " has no usable epochs for a condition in style " +
                                 to_string(style));
      auto [d1m, d2m] = match_trial_counts(
          d1, d2,
          derive_seed(seed, SeedStream::trial_match, entry.participant,
                      static_cast<std::uint64_t>(style)));
      sr.epochs_used_per_condition += d1m.epochs.size();
      sr.epochs_rejected += count_amplitude_rejections(entry.epochs);
      erps_d1.push_back(average_erp(d1m, cfg.analysis.roi));
      erps_d2.push_back(average_erp(d2m, cfg.analysis.roi));
      sr.participant_mean_d1_uv.push_back(window_mean_amplitude(
          d1m, cfg.analysis.roi, cfg.analysis.frn_lo_ms, cfg.analysis.frn_hi_ms));
      sr.participant_mean_d2_uv.push_back(window_mean_amplitude(
          d2m, cfg.analysis.roi, cfg.analysis.frn_lo_ms, cfg.analysis.frn_hi_ms));
      matched_d1.push_back(std::move(d1m));
      matched_d2.push_back(std::move(d2m));
    }
    if (erps_d1.size() < 2)
      throw std::runtime_error(std::string("style ") + to_string(style) +
                               " has fewer than 2 participants");

    sr.grand_d1 = grand_average(erps_d1);
    sr.grand_d2 = grand_average(erps_d2);
    sr.frn_d1 = frn_peak(sr.grand_d1, cfg.analysis.frn_lo_ms, cfg.analysis.frn_hi_ms);
    sr.frn_d2 = frn_peak(sr.grand_d2, cfg.analysis.frn_lo_ms, cfg.analysis.frn_hi_ms);
    sr.area_difference_uv_ms = area_difference(sr.grand_d2, sr.grand_d1,
                                               cfg.analysis.frn_lo_ms, cfg.analysis.frn_hi_ms);
    sr.d2_vs_d1 = paired_ttest(sr.participant_mean_d2_uv, sr.participant_mean_d1_uv,
                               std::string(to_string(style)) + ": D2 vs D1");
    sr.channels = channel_significance_map(matched_d2, matched_d1, cfg.analysis.frn_lo_ms,
                                           cfg.analysis.frn_hi_ms);
    out.styles.push_back(std::move(sr));
  }
  return out;
}

namespace {

// full EEG chain for a simulated cohort: synth + preprocess per session,
// merged per (participant, style)
std::vector<ParticipantStyleEpochs> build_erp_sets(const Config& cfg,
                                                   const std::vector<OddballSession>& sessions,
                                                   std::uint64_t seed) {
  std::map<std::pair<int, HandStyle>, EpochSet> grouped;
  for (const auto& sess : sessions) {
    const EegRecording rec = synth_recording(cfg, sess, seed);
    EpochSet set = preprocess_recording(cfg, rec, sess.markers);
    merge_epoch_set(grouped[{sess.participant, sess.style}], std::move(set));
  }
  return grouped_to_sets(std::move(grouped));
}

}  // namespace

Results run_all(const Config& cfg, std::uint64_t seed) {
  cfg.validate();
  Results res;
  res.seed = seed;
  res.config_hash = config_hash_hex(cfg);
  res.config_echo = to_json(cfg);
  res.behavior = analyze_behavior(cfg, simulate_blocked(cfg, seed));
  const auto sessions = simulate_oddball(cfg, seed);
  res.erp = analyze_erp(cfg, build_erp_sets(cfg, sessions, seed), seed);
  return res;
}

// ---------------------------------------------------------------------------
// staged file pipeline

namespace {

std::string pcode(int p) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%03d", p);
  return buf;
}

fs::path blocked_markers_path(const fs::path& out, int p) {
  return out / "markers" / ("blocked_" + pcode(p) + ".csv");
}

fs::path oddball_markers_path(const fs::path& out, int p, int s) {
  return out / "markers" / ("oddball_" + pcode(p) + "_s" + std::to_string(s) + ".csv");
}

fs::path bundle_dir(const fs::path& out, int p, int s) {
  return out / "bundles" / (pcode(p) + "_s" + std::to_string(s));
}

fs::path epoch_stem(const fs::path& out, int p, int s) {
  return out / "epochs" / (pcode(p) + "_s" + std::to_string(s));
}

void merge_into_results(const Config& cfg, std::uint64_t seed, const fs::path& out,
                        const std::function<void(Results&)>& apply) {
  const fs::path path = out / "results.json";
  Results res;
  if (fs::exists(path)) res = results_from_json(json::parse(io::read_text_file(path)));
  res.seed = seed;
  res.config_hash = config_hash_hex(cfg);
  res.config_echo = to_json(cfg);
  apply(res);
  io::write_text_file(path, results_to_json(res).dump(2) + "\n");
}

void require_exists(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p))
    throw std::runtime_error("missing " + hint + ": " + p.string());
}

}  // namespace

namespace stages {

void simulate(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  const auto runs = simulate_blocked(cfg, seed);
  std::vector<io::TrialLogRow> rows;
  for (const auto& run : runs) {
    for (const auto& r : run.records) rows.push_back({run.participant, 0, r});
    io::write_markers_csv(blocked_markers_path(out, run.participant), run.markers);
  }
  io::write_trial_log(out / "trials_blocked.csv", rows);

  const auto sessions = simulate_oddball(cfg, seed);
  rows.clear();
  for (const auto& sess : sessions) {
    for (const auto& r : sess.records) rows.push_back({sess.participant, sess.session, r});
    io::write_markers_csv(oddball_markers_path(out, sess.participant, sess.session),
                          sess.markers);
  }
  io::write_trial_log(out / "trials_oddball.csv", rows);
}

void synth(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  cfg.validate();
  require_exists(out / "trials_oddball.csv", "oddball trial log (run simulate first)");
  for (int p = 0; p < cfg.erp.participants; ++p) {
    for (int s = 0; s < cfg.erp.protocol.sessions; ++s) {
      const fs::path mpath = oddball_markers_path(out, p, s);
      require_exists(mpath, "markers file (run simulate first)");
      OddballSession sess;
      sess.participant = p;
      sess.session = s;
      sess.markers = io::read_markers_csv(mpath);
      bool have_style = false;
      for (const auto& m : sess.markers)
        if (m.condition.style) {
          sess.style = *m.condition.style;
          have_style = true;
          break;
        }
      if (!have_style)
        throw std::runtime_error(mpath.string() + ": no style tag on any marker");

      const EegRecording rec = synth_recording(cfg, sess, seed);
      json meta = {{"participant", p},
                   {"session", s},
                   {"style", to_string(sess.style)},
                   {"master_seed", seed},
                   {"noise_seed", derive_seed(seed, SeedStream::noise, p, s)},
                   {"config_hash", config_hash_hex(cfg)}};
      io::write_bundle(bundle_dir(out, p, s), rec, sess.markers, meta);
    }
  }
}

void preprocess(const Config& cfg, const fs::path& out) {
  cfg.validate();
  for (int p = 0; p < cfg.erp.participants; ++p) {
    for (int s = 0; s < cfg.erp.protocol.sessions; ++s) {
      const fs::path dir = bundle_dir(out, p, s);
      require_exists(dir / "meta.json", "recording bundle (run synth first)");
      const io::Bundle b = io::read_bundle(dir);
      const EpochSet set = preprocess_recording(cfg, b.recording, b.markers);
      json meta = {{"participant", p},
                   {"session", s},
                   {"config_hash", config_hash_hex(cfg)}};
      if (b.meta.contains("style")) meta["style"] = b.meta.at("style");
      if (b.meta.contains("master_seed")) meta["master_seed"] = b.meta.at("master_seed");
      io::write_epoch_store(epoch_stem(out, p, s), set, meta);
    }
  }
}

void erp(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  cfg.validate();
  std::map<std::pair<int, HandStyle>, EpochSet> grouped;
  for (int p = 0; p < cfg.erp.participants; ++p) {
    for (int s = 0; s < cfg.erp.protocol.sessions; ++s) {
      const fs::path stem = epoch_stem(out, p, s);
      fs::path json_path = stem;
      json_path += ".json";
      require_exists(json_path, "epoch store (run preprocess first)");
      io::EpochStore store = io::read_epoch_store(stem);
      HandStyle style = HandStyle::S1;
      if (store.meta.contains("style")) {
        style = parse_style(store.meta.at("style").get<std::string>());
      } else {
        bool found = false;
        for (const auto& e : store.set.epochs)
          if (e.condition.style) {
            style = *e.condition.style;
            found = true;
            break;
          }
        if (!found)
          throw std::runtime_error(json_path.string() + ": cannot determine hand style");
      }
      merge_epoch_set(grouped[{p, style}], std::move(store.set));
    }
  }
  ErpResults er = analyze_erp(cfg, grouped_to_sets(std::move(grouped)), seed);
  merge_into_results(cfg, seed, out, [&](Results& r) { r.erp = std::move(er); });
}

void behavior(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  cfg.validate();
  const fs::path log = out / "trials_blocked.csv";
  require_exists(log, "blocked trial log (run simulate first)");
  const auto rows = io::read_trial_log(log);
  std::map<int, std::vector<TrialRecord>> by_participant;
  for (const auto& row : rows) by_participant[row.participant].push_back(row.record);

  std::vector<BlockedRun> runs;
  for (auto& [p, records] : by_participant) {
    BlockedRun run;
    run.participant = p;
    run.records = std::move(records);
    runs.push_back(std::move(run));
  }
  BehaviorResults br = analyze_behavior(cfg, runs);
  merge_into_results(cfg, seed, out, [&](Results& r) { r.behavior = std::move(br); });
}

void report(const Config& cfg, const fs::path& out) {
  const fs::path path = out / "results.json";
  require_exists(path, "results.json (run behavior/erp or all first)");
  const Results res = results_from_json(json::parse(io::read_text_file(path)));
  svg::render_plots(res, out / "plots");
  (void)cfg;
}

void all(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  cfg.validate();
  Results res;
  res.seed = seed;
  res.config_hash = config_hash_hex(cfg);
  res.config_echo = to_json(cfg);

  const auto runs = simulate_blocked(cfg, seed);
  std::vector<io::TrialLogRow> rows;
  for (const auto& run : runs)
    for (const auto& r : run.records) rows.push_back({run.participant, 0, r});
  io::write_trial_log(out / "trials_blocked.csv", rows);
  res.behavior = analyze_behavior(cfg, runs);

  const auto sessions = simulate_oddball(cfg, seed);
  rows.clear();
  for (const auto& sess : sessions)
    for (const auto& r : sess.records) rows.push_back({sess.participant, sess.session, r});
  io::write_trial_log(out / "trials_oddball.csv", rows);
  res.erp = analyze_erp(cfg, build_erp_sets(cfg, sessions, seed), seed);

  io::write_text_file(out / "results.json", results_to_json(res).dump(2) + "\n");
  svg::render_plots(res, out / "plots");
}

}  // namespace stages

}  // namespace vrconflict
