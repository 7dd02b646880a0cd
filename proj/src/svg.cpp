#include "vrconflict/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vrconflict/io.hpp"

namespace vrconflict::svg {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// data -> pixel mapping for one plot panel
struct Panel {
  double x0, x1, y0, y1;          // data ranges (y0 = bottom value)
  double px, py, pw, ph;          // pixel rect

  double x(double v) const { return px + (v - x0) / (x1 - x0) * pw; }
  double y(double v) const { return py + ph - (v - y0) / (y1 - y0) * ph; }
};

struct Doc {
  std::ostringstream ss;
  Doc(double w, double h) {
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
       << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke,
            double width = 1.0, const char* dash = nullptr) {
    ss << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
       << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
       << fmt(width) << "\"";
    if (dash != nullptr) ss << " stroke-dasharray=\"" << dash << "\"";
    ss << "/>\n";
  }
  void rect(double x, double y, double w, double h, const char* fill,
            double opacity = 1.0) {
    ss << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
       << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\" opacity=\""
       << fmt(opacity) << "\"/>\n";
  }
  void circle(double x, double y, double r, const char* fill) {
    ss << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r)
       << "\" fill=\"" << fill << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const char* anchor = "start",
            double size = 12.0, const char* fill = "#222") {
    ss << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\""
       << " font-size=\"" << fmt(size) << "\" text-anchor=\"" << anchor << "\" fill=\""
       << fill << "\">" << xml_escape(s) << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke,
                double width = 1.5) {
    ss << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
       << fmt(width) << "\" points=\"";
    for (const auto& [x, y] : pts) ss << fmt(x) << ',' << fmt(y) << ' ';
    ss << "\"/>\n";
  }
  std::string close() {
    ss << "</svg>\n";
    return ss.str();
  }
};

void draw_axes(Doc& doc, const Panel& p, const std::string& x_label,
               const std::string& y_label, int n_ticks = 5) {
  doc.line(p.px, p.py + p.ph, p.px + p.pw, p.py + p.ph, "#444");
  doc.line(p.px, p.py, p.px, p.py + p.ph, "#444");
  for (int i = 0; i <= n_ticks; ++i) {
    const double fx = p.x0 + (p.x1 - p.x0) * i / n_ticks;
    const double fy = p.y0 + (p.y1 - p.y0) * i / n_ticks;
    doc.line(p.x(fx), p.py + p.ph, p.x(fx), p.py + p.ph + 4, "#444");
    doc.text(p.x(fx), p.py + p.ph + 16, fmt(fx), "middle", 10);
    doc.line(p.px - 4, p.y(fy), p.px, p.y(fy), "#444");
    doc.text(p.px - 6, p.y(fy) + 3, fmt(fy), "end", 10);
  }
  doc.text(p.px + p.pw / 2, p.py + p.ph + 32, x_label, "middle", 11);
  doc.text(p.px - 38, p.py - 8, y_label, "start", 11);
}

constexpr const char* kBlue = "#1f6fb4";
constexpr const char* kRed = "#c83737";
constexpr const char* kGreen = "#3a8c3f";

}  // namespace

std::string erp_waveform_plot(const StyleErpResults& s, double window_lo_ms,
                              double window_hi_ms) {
  const auto& t = s.grand_d1.time_ms;
  double lo = 0.0, hi = 0.0;
  for (double v : s.grand_d1.mean_uv) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : s.grand_d2.mean_uv) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const double pad = std::max(0.5, (hi - lo) * 0.15);
  Panel p{t.front(), t.back(), lo - pad, hi + pad, 60, 40, 540, 300};

  Doc doc(660, 400);
  doc.text(330, 22, std::string(to_string(s.style)) + " feedback-locked ERP (ROI mean)",
           "middle", 14);
  doc.rect(p.x(window_lo_ms), p.py, p.x(window_hi_ms) - p.x(window_lo_ms), p.ph, "#9ecbff",
           0.25);
  draw_axes(doc, p, "time relative to feedback (ms)", "amplitude (uV)");
  doc.line(p.x(0), p.py, p.x(0), p.py + p.ph, "#999", 1.0, "4,3");
  if (p.y0 < 0 && p.y1 > 0) doc.line(p.px, p.y(0), p.px + p.pw, p.y(0), "#999", 1.0, "4,3");

  auto trace = [&](const ErpWaveform& w, const char* color) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(w.time_ms.size());
    for (std::size_t i = 0; i < w.time_ms.size(); ++i)
      pts.emplace_back(p.x(w.time_ms[i]), p.y(w.mean_uv[i]));
    doc.polyline(pts, color);
  };
  trace(s.grand_d1, kBlue);
  trace(s.grand_d2, kRed);
  doc.circle(p.x(s.frn_d2.peak_latency_ms), p.y(s.frn_d2.peak_amplitude_uv), 3.5, kRed);
  doc.circle(p.x(s.frn_d1.peak_latency_ms), p.y(s.frn_d1.peak_amplitude_uv), 3.5, kBlue);

  doc.line(540, 50, 570, 50, kBlue, 2);
  doc.text(575, 54, "D1 (n=" + std::to_string(s.grand_d1.n_epochs) + ")", "start", 11);
  doc.line(540, 68, 570, 68, kRed, 2);
  doc.text(575, 72, "D2 (n=" + std::to_string(s.grand_d2.n_epochs) + ")", "start", 11);
  char note[128];
  std::snprintf(note, sizeof(note), "area diff %.1f uV*ms   t=%.2f p=%.4f%s",
                s.area_difference_uv_ms, s.d2_vs_d1.t_statistic, s.d2_vs_d1.p_value,
                s.d2_vs_d1.significant ? " *" : "");
  doc.text(60, 390, note, "start", 11);
  return doc.close();
}

std::string block_position_plot(const BlockPositionCurve& curve) {
  double lo = 1e30, hi = -1e30;
  for (const auto& [level, cells] : curve.by_level) {
    for (const auto& c : cells) {
      lo = std::min(lo, c.mean_s - c.sd_s);
      hi = std::max(hi, c.mean_s + c.sd_s);
    }
  }
  const double pad = (hi - lo) * 0.1;
  Panel p{0.5, curve.block_len + 0.5, lo - pad, hi + pad, 60, 40, 540, 300};

  Doc doc(660, 400);
  doc.text(330, 22, "completion time by within-block position", "middle", 14);
  draw_axes(doc, p, "trial position in block", "completion time (s)");

  const char* colors[3] = {kBlue, kRed, kGreen};
  double ly = 50;
  for (const auto& [level, cells] : curve.by_level) {
    const char* color = colors[static_cast<int>(level)];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double x = p.x(static_cast<double>(i) + 1.0);
      pts.emplace_back(x, p.y(cells[i].mean_s));
      doc.line(x, p.y(cells[i].mean_s - cells[i].sd_s), x, p.y(cells[i].mean_s + cells[i].sd_s),
               color, 1.0);
    }
    doc.polyline(pts, color);
    doc.line(540, ly, 570, ly, color, 2);
    doc.text(575, ly + 4, to_string(level), "start", 11);
    ly += 18;
  }
  return doc.close();
}

std::string congruency_plot(const CongruencySequenceResult& cse) {
  double hi = 0.0;
  for (const auto& [tr, v] : cse.group_mean_s) hi = std::max(hi, v);
  Panel p{0, 4, 0, hi * 1.2, 60, 40, 540, 300};

  Doc doc(660, 400);
  doc.text(330, 22, "first-trials completion time by block transition", "middle", 14);
  draw_axes(doc, p, "", "mean completion time (s)");

  double slot = 0;
  for (const auto& [tr, v] : cse.group_mean_s) {
    const double cx = slot + 0.5;
    const double w = 0.6;
    doc.rect(p.x(cx - w / 2), p.y(v), p.x(cx + w / 2) - p.x(cx - w / 2), p.y(0) - p.y(v),
             tr.prev == DLevel::D2 ? kRed : kBlue, 0.8);
    doc.text(p.x(cx), p.py + p.ph + 16, tr.label(), "middle", 11);
    char val[32];
    std::snprintf(val, sizeof(val), "%.3f", v);
    doc.text(p.x(cx), p.y(v) - 5, val, "middle", 10);
    slot += 1.0;
  }
  char line1[160], line2[160];
  std::snprintf(line1, sizeof(line1), "into D1: %s  t=%.2f p=%.4f%s",
                cse.into_d1.label.c_str(), cse.into_d1.t_statistic, cse.into_d1.p_value,
                cse.into_d1.significant ? " *" : "");
  std::snprintf(line2, sizeof(line2), "into D3: %s  t=%.2f p=%.4f%s",
                cse.into_d3.label.c_str(), cse.into_d3.t_statistic, cse.into_d3.p_value,
                cse.into_d3.significant ? " *" : "");
  doc.text(60, 374, line1, "start", 11);
  doc.text(60, 390, line2, "start", 11);
  return doc.close();
}

std::string channel_table(const StyleErpResults& s) {
  const double row_h = 16;
  const double height = 70 + row_h * static_cast<double>(s.channels.size());
  Doc doc(420, height);
  doc.text(210, 22, std::string(to_string(s.style)) + " per-channel D2 vs D1 (window mean)",
           "middle", 13);
  doc.text(40, 44, "channel", "start", 11, "#000");
  doc.text(160, 44, "t", "end", 11, "#000");
  doc.text(260, 44, "p", "end", 11, "#000");
  doc.text(300, 44, "sig", "start", 11, "#000");
  doc.line(30, 50, 390, 50, "#444");

  double y = 50 + row_h;
  bool stripe = false;
  for (const auto& cc : s.channels) {
    if (stripe) doc.rect(30, y - row_h + 4, 360, row_h, "#f0f0f0");
    stripe = !stripe;
    char tbuf[32], pbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.2f", cc.result.t_statistic);
    std::snprintf(pbuf, sizeof(pbuf), "%.2e", cc.result.p_value);
    doc.text(40, y, cc.channel, "start", 11);
    doc.text(160, y, tbuf, "end", 11);
    doc.text(260, y, pbuf, "end", 11);
    if (cc.result.significant) doc.text(300, y, "*", "start", 11, kRed);
    y += row_h;
  }
  return doc.close();
}

void render_plots(const Results& results, const std::filesystem::path& out_dir) {
  if (results.erp) {
    for (const auto& s : results.erp->styles) {
      std::string code = to_string(s.style);
      code[0] = 's';
      io::write_text_file(out_dir / ("erp_" + code + ".svg"),
                          erp_waveform_plot(s, results.erp->window_lo_ms,
                                            results.erp->window_hi_ms));
      io::write_text_file(out_dir / ("channels_" + code + ".svg"), channel_table(s));
    }
  }
  if (results.behavior) {
    io::write_text_file(out_dir / "block_positions.svg",
                        block_position_plot(results.behavior->curve));
    io::write_text_file(out_dir / "congruency.svg",
                        congruency_plot(results.behavior->congruency));
  }
}

}  // namespace vrconflict::svg
