#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vrconflict/behavior.hpp"
#include "vrconflict/erp.hpp"
#include "vrconflict/preprocess.hpp"
#include "vrconflict/syntheeg.hpp"
#include "vrconflict/tasksim.hpp"

namespace vrconflict {

struct AnalysisConfig {
  std::vector<std::string> roi{"Fz", "FCz", "F3", "F4"};
  double frn_lo_ms = 120.0;
  double frn_hi_ms = 220.0;
  double artifact_threshold_uv = 100.0;
};

struct BehaviorConfig {
  int participants = 16;
  ProtocolConfig protocol = ProtocolConfig::blocked_default();
};

struct ErpConfig {
  int participants = 10;
  ProtocolConfig protocol = ProtocolConfig::oddball_default();
  NoiseSpec noise;
  ErpTemplate waveform = ErpTemplate::frontal_default();
  ScenarioSpec scenario = ScenarioSpec::default_scales();
  FilterSpec filter;
  EpochWindow window;
};

struct Config {
  double sample_rate_hz = 1000.0;
  ReachModel reach;
  ConflictRtModel conflict;
  LatencySpec latency;
  BehaviorConfig behavior;
  ErpConfig erp;
  AnalysisConfig analysis;

  static Config defaults() { return {}; }
  void validate() const;
};

nlohmann::json to_json(const Config& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
// Empty path -> defaults.
Config load_config(const std::filesystem::path& file);
// FNV-1a over the canonical JSON dump, hex string.
std::string config_hash_hex(const Config& cfg);

// ---- results ----

struct StyleErpResults {
  HandStyle style = HandStyle::S1;
  ErpWaveform grand_d1, grand_d2;
  FrnMeasure frn_d1, frn_d2;
  double area_difference_uv_ms = 0.0;  // D2 - D1 over the FRN window
  ComparisonResult d2_vs_d1;
  std::vector<ChannelComparison> channels;
  std::vector<double> participant_mean_d1_uv;  // window means behind the test
  std::vector<double> participant_mean_d2_uv;
  std::size_t epochs_used_per_condition = 0;
  std::size_t epochs_rejected = 0;
};

struct ErpResults {
  std::vector<std::string> roi;
  double window_lo_ms = 120.0;
  double window_hi_ms = 220.0;
  int participants = 0;
  std::vector<StyleErpResults> styles;  // S1, S2, S3
};

struct BehaviorResults {
  int participants = 0;
  BlockPositionCurve curve;
  CongruencySequenceResult congruency;
};

struct Results {
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json config_echo;
  std::optional<BehaviorResults> behavior;
  std::optional<ErpResults> erp;
};

nlohmann::json results_to_json(const Results& r);
Results results_from_json(const nlohmann::json& j);

// ---- in-memory pipeline ----

struct BlockedRun {
  int participant = 0;
  std::vector<TrialRecord> records;
  std::vector<EventMarker> markers;
};

struct OddballSession {
  int participant = 0;
  int session = 0;
  HandStyle style = HandStyle::S1;
  std::vector<TrialRecord> records;
  std::vector<EventMarker> markers;
};

std::vector<BlockedRun> simulate_blocked(const Config& cfg, std::uint64_t seed);
std::vector<OddballSession> simulate_oddball(const Config& cfg, std::uint64_t seed);

// noise + injected template for one session; noise seed derived from the
// master seed, participant and session
EegRecording synth_recording(const Config& cfg, const OddballSession& session,
                             std::uint64_t seed);

// filter, epoch, baseline, artifact rejection
EpochSet preprocess_recording(const Config& cfg, const EegRecording& rec,
                              std::span<const EventMarker> markers);

struct ParticipantStyleEpochs {
  int participant = 0;
  HandStyle style = HandStyle::S1;
  EpochSet epochs;  // cleaned, both conditions mixed
};

BehaviorResults analyze_behavior(const Config& cfg,
                                 const std::vector<BlockedRun>& runs);
ErpResults analyze_erp(const Config& cfg, std::vector<ParticipantStyleEpochs> sets,
                       std::uint64_t seed);

Results run_all(const Config& cfg, std::uint64_t seed);

// ---- staged file pipeline (what the CLI drives) ----
// Artifact layout under `out`:
//   trials_blocked.csv, trials_oddball.csv
//   markers/blocked_pNNN.csv, markers/oddball_pNNN_sK.csv
//   bundles/pNNN_sK/{meta.json,samples.bin,events.csv}
//   epochs/pNNN_sK.{json,bin}
//   results.json
//   plots/*.svg

namespace stages {
void simulate(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
void synth(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
void preprocess(const Config& cfg, const std::filesystem::path& out);
void erp(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
void behavior(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
void report(const Config& cfg, const std::filesystem::path& out);
void all(const Config& cfg, std::uint64_t seed, const std::filesystem::path& out);
}  // namespace stages

}  // namespace vrconflict
