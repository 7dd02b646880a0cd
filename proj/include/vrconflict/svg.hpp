#pragma once

#include <filesystem>
#include <string>

#include "vrconflict/pipeline.hpp"

namespace vrconflict::svg {

// Self-contained SVG documents; no external CSS or fonts.
std::string erp_waveform_plot(const StyleErpResults& s, double window_lo_ms,
                              double window_hi_ms);
std::string block_position_plot(const BlockPositionCurve& curve);
std::string congruency_plot(const CongruencySequenceResult& cse);
std::string channel_table(const StyleErpResults& s);

// Writes the plot set for whichever result sections are present:
//   erp_sN.svg, channels_sN.svg (per style), block_positions.svg, congruency.svg
void render_plots(const Results& results, const std::filesystem::path& out_dir);

}  // namespace vrconflict::svg
