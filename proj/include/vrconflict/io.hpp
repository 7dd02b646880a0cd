#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vrconflict/preprocess.hpp"
#include "vrconflict/signal.hpp"
#include "vrconflict/tasksim.hpp"

namespace vrconflict::io {

// Recording bundle: directory with meta.json, samples.bin (little-endian
// float32, channel-major) and events.csv.  `extra_meta` is merged into
// meta.json (provenance: seeds, participant, session, config hash).
void write_bundle(const std::filesystem::path& dir, const EegRecording& rec,
                  std::span<const EventMarker> markers,
                  const nlohmann::json& extra_meta = nlohmann::json::object());

struct Bundle {
  EegRecording recording;
  std::vector<EventMarker> markers;
  nlohmann::json meta;
};

Bundle read_bundle(const std::filesystem::path& dir);

// events.csv schema shared by bundles and standalone marker files:
// sample_index,code,d_level,style,block_id,trial_id
void write_markers_csv(const std::filesystem::path& file, std::span<const EventMarker> markers);
std::vector<EventMarker> read_markers_csv(const std::filesystem::path& file);

// Trial log CSV: participant,session,trial_id,block_id,d_level,style,
// target_side,crossing_s,completion_s,prev_congruent
struct TrialLogRow {
  int participant = 0;
  int session = 0;
  TrialRecord record;
};

void write_trial_log(const std::filesystem::path& file, std::span<const TrialLogRow> rows);
std::vector<TrialLogRow> read_trial_log(const std::filesystem::path& file);

// Epoch store: <stem>.json (shape, tags, rejection log, provenance) plus
// <stem>.bin (float64, epoch-major then channel-major).
void write_epoch_store(const std::filesystem::path& stem, const EpochSet& set,
                       const nlohmann::json& extra_meta = nlohmann::json::object());
struct EpochStore {
  EpochSet set;
  nlohmann::json meta;
};
EpochStore read_epoch_store(const std::filesystem::path& stem);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, std::string_view text);

}  // namespace vrconflict::io
