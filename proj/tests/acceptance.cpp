// End-to-end acceptance suite.  Prints one [PASS]/[FAIL] line per criterion
// and exits nonzero if any criterion fails.  Criteria 1 and 2 share the same
// twenty seeded cohort runs, which dominate the runtime (~25 min).
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vrconflict/behavior.hpp"
#include "vrconflict/io.hpp"
#include "vrconflict/pipeline.hpp"
#include "vrconflict/rng.hpp"
#include "vrconflict/stats.hpp"
#include "vrconflict/syntheeg.hpp"

using namespace vrconflict;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, bool ok, const char* fmt, ...) {
  char detail[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(detail, sizeof(detail), fmt, args);
  va_end(args);
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double mean_v(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_v(const std::vector<double>& v) {
  const double m = mean_v(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// criteria 1 + 2: FRN recovery and the S1/S2/S3 significance pattern

// oddball half of the pipeline only; identical seed streams to run_all
ErpResults erp_only_run(const Config& cfg, std::uint64_t seed) {
  const auto sessions = simulate_oddball(cfg, seed);
  std::map<std::pair<int, HandStyle>, EpochSet> grouped;
  for (const auto& sess : sessions) {
    const EegRecording rec = synth_recording(cfg, sess, seed);
    EpochSet set = preprocess_recording(cfg, rec, sess.markers);
    auto& slot = grouped[{sess.participant, sess.style}];
    if (slot.epochs.empty() && slot.rejection_log.empty()) {
      slot = std::move(set);
    } else {
      for (auto& e : set.epochs) slot.epochs.push_back(std::move(e));
      for (auto& r : set.rejection_log) slot.rejection_log.push_back(r);
    }
  }
  std::vector<ParticipantStyleEpochs> sets;
  sets.reserve(grouped.size());
  for (auto& [key, set] : grouped) sets.push_back({key.first, key.second, std::move(set)});
  return analyze_erp(cfg, std::move(sets), seed);
}

const StyleErpResults& style_of(const ErpResults& er, HandStyle s) {
  for (const auto& sr : er.styles)
    if (sr.style == s) return sr;
  throw std::runtime_error("style missing from ERP results");
}

void criteria_1_and_2() {
  const Config cfg = Config::defaults();

  // injected ground truth: ROI-mean template area over the FRN window
  const ChannelLayout layout = ChannelLayout::standard_32();
  const TemplateWaveform tw = render_template(cfg.erp.waveform, cfg.sample_rate_hz, layout);
  double roi_gain = 0.0;
  for (const auto& label : cfg.analysis.roi) roi_gain += tw.channel_gain[layout.index_of(label)];
  roi_gain /= static_cast<double>(cfg.analysis.roi.size());
  const double dt_ms = 1000.0 / cfg.sample_rate_hz;
  const auto idx = [&](double ms) { return static_cast<std::size_t>(ms / dt_ms); };
  double gt_area = 0.0;  // trapezoid, uV*ms
  for (std::size_t i = idx(cfg.analysis.frn_lo_ms); i < idx(cfg.analysis.frn_hi_ms); ++i)
    gt_area += 0.5 * (tw.kernel[i] + tw.kernel[i + 1]) * dt_ms;
  gt_area *= roi_gain;

  const int n_seeds = 20;
  int hits_recovery = 0, hits_pattern = 0;
  double first_run_s = 0.0, worst_lat = 0.0, worst_area_rel = 0.0;

  for (int seed = 1; seed <= n_seeds; ++seed) {
    ErpResults er;
    if (seed == 1) {
      // one full default run, timed against the 2-minute budget
      const auto t0 = clk::now();
      const Results res = run_all(cfg, seed);
      first_run_s = std::chrono::duration<double>(clk::now() - t0).count();
      er = *res.erp;
    } else {
      er = erp_only_run(cfg, seed);
    }

    const StyleErpResults& s1 = style_of(er, HandStyle::S1);
    const double lat_err = std::abs(s1.frn_d2.peak_latency_ms - cfg.erp.waveform.peak_latency_ms);
    const double area_rel = std::abs(s1.area_difference_uv_ms - gt_area) / std::abs(gt_area);
    worst_lat = std::max(worst_lat, lat_err);
    worst_area_rel = std::max(worst_area_rel, area_rel);
    if (lat_err <= 10.0 && area_rel <= 0.20) ++hits_recovery;

    const bool pattern = s1.d2_vs_d1.significant &&
                         style_of(er, HandStyle::S2).d2_vs_d1.significant &&
                         !style_of(er, HandStyle::S3).d2_vs_d1.significant;
    if (pattern) ++hits_pattern;
    std::fprintf(stderr, "  seed %d/%d done\n", seed, n_seeds);
  }

  report(1, hits_recovery >= 18 && first_run_s < 120.0,
         "FRN recovery %d/%d seeds (peak within +/-10 ms, area within +/-20%% of %.1f uV*ms; "
         "worst %.1f ms / %.1f%%), full run %.1f s (budget 120 s)",
         hits_recovery, n_seeds, gt_area, worst_lat, 100.0 * worst_area_rel, first_run_s);
  report(2, hits_pattern >= 18,
         "style pattern (S1 and S2 significant, S3 not) in %d/%d seeds", hits_pattern, n_seeds);
}

// ---------------------------------------------------------------------------
// criteria 3 + 4: within-block adaptation and the congruency sequence effect

void criteria_3_and_4() {
  const Config cfg = Config::defaults();
  const auto runs = simulate_blocked(cfg, 101);

  // per participant and level: mean completion over block positions 1-2 vs 8-10
  bool adapt_ok = true;
  double max_p = 0.0;
  for (const DLevel level : {DLevel::D1, DLevel::D2, DLevel::D3}) {
    std::vector<double> early, late;
    for (const auto& run : runs) {
      double e = 0.0, l = 0.0;
      std::size_t ne = 0, nl = 0;
      for (const auto& r : run.records) {
        if (r.plan.d_level != level) continue;
        const int pos = r.plan.trial_id % cfg.behavior.protocol.block_len;
        if (pos <= 1) {
          e += r.completion_time_s;
          ++ne;
        } else if (pos >= 7) {
          l += r.completion_time_s;
          ++nl;
        }
      }
      early.push_back(e / static_cast<double>(ne));
      late.push_back(l / static_cast<double>(nl));
    }
    const ComparisonResult cr = paired_ttest(early, late);
    max_p = std::max(max_p, cr.p_value);
    if (!(cr.t_statistic > 0.0 && cr.p_value < 0.05 && mean_v(early) > mean_v(late)))
      adapt_ok = false;
  }
  report(3, adapt_ok,
         "positions 1-2 slower than 8-10 for all three D levels over %zu participants "
         "(max paired p = %.2e)",
         runs.size(), max_p);

  // headline congruency comparisons on the same cohort
  const BehaviorResults br = analyze_behavior(cfg, runs);
  const auto& c = br.congruency;
  const double d21 = c.group_mean_s.at({DLevel::D2, DLevel::D1});
  const double d31 = c.group_mean_s.at({DLevel::D3, DLevel::D1});
  const double d23 = c.group_mean_s.at({DLevel::D2, DLevel::D3});
  const double d13 = c.group_mean_s.at({DLevel::D1, DLevel::D3});
  const bool effect_ok = c.into_d1.significant && c.into_d3.significant && d21 > d31 && d23 > d13;

  // gamma = 0 null model: the effect must vanish on average over 50 cohorts
  Config null_cfg = cfg;
  null_cfg.conflict.congruency_modulation = 0.0;
  std::vector<double> diff_d1, diff_d3;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const BehaviorResults nb = analyze_behavior(null_cfg, simulate_blocked(null_cfg, seed));
    diff_d1.push_back(nb.congruency.group_mean_s.at({DLevel::D2, DLevel::D1}) -
                      nb.congruency.group_mean_s.at({DLevel::D3, DLevel::D1}));
    diff_d3.push_back(nb.congruency.group_mean_s.at({DLevel::D2, DLevel::D3}) -
                      nb.congruency.group_mean_s.at({DLevel::D1, DLevel::D3}));
  }
  const double se_d1 = sd_v(diff_d1) / std::sqrt(50.0);
  const double se_d3 = sd_v(diff_d3) / std::sqrt(50.0);
  const bool null_ok = std::abs(mean_v(diff_d1)) <= 1.96 * se_d1 &&
                       std::abs(mean_v(diff_d3)) <= 1.96 * se_d3;

  report(4, effect_ok && null_ok,
         "congruency effect: into-D1 p=%.2e, into-D3 p=%.2e, incongruent-preceded faster "
         "(%.0f ms and %.0f ms); gamma=0 over 50 runs: mean diff %+.2f ms (CI +/-%.2f), "
         "%+.2f ms (CI +/-%.2f)",
         c.into_d1.p_value, c.into_d3.p_value, 1000.0 * (d21 - d31), 1000.0 * (d23 - d13),
         1000.0 * mean_v(diff_d1), 1000.0 * 1.96 * se_d1, 1000.0 * mean_v(diff_d3),
         1000.0 * 1.96 * se_d3);
}

// ---------------------------------------------------------------------------
// criterion 5: filter response against the DFT oracle

double tone_amplitude(std::span<const double> y, double f_hz, double fs, std::size_t lo,
                      std::size_t hi) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double ph = 2.0 * M_PI * f_hz * static_cast<double>(i) / fs;
    s += y[i] * std::sin(ph);
    c += y[i] * std::cos(ph);
  }
  const double n = static_cast<double>(hi - lo);
  return 2.0 * std::hypot(s, c) / n;
}

void criterion_5() {
  const double fs = 1000.0;
  const std::size_t n = 40000;
  const ChannelLayout layout = ChannelLayout::standard_32();
  EegRecording rec = EegRecording::zeros(layout, n, fs);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    rec.channel("Fz")[i] = std::sin(2.0 * M_PI * 10.0 * t);
    rec.channel("Cz")[i] = std::sin(2.0 * M_PI * 0.1 * t);
    rec.channel("Pz")[i] = std::sin(2.0 * M_PI * 100.0 * t);
  }
  const FilterSpec spec;  // 1-40 Hz, order 4, zero phase
  const EegRecording out = bandpass_filter(rec, spec);

  // whole cycles inside the measurement window for all three tones
  const std::size_t lo = 10000, hi = 30000;
  const double pass_gain = tone_amplitude(out.channel("Fz"), 10.0, fs, lo, hi);
  const double stop_low = tone_amplitude(out.channel("Cz"), 0.1, fs, lo, hi);
  const double stop_high = tone_amplitude(out.channel("Pz"), 100.0, fs, lo, hi);
  const double atten_low_db = -20.0 * std::log10(stop_low);
  const double atten_high_db = -20.0 * std::log10(stop_high);

  // linearity of the whole forward-backward chain
  Rng rng(7);
  EegRecording xa = EegRecording::zeros(layout, 5000, fs);
  EegRecording xb = EegRecording::zeros(layout, 5000, fs);
  EegRecording xc = EegRecording::zeros(layout, 5000, fs);
  for (std::size_t i = 0; i < 5000; ++i) {
    const double a = rng.normal(), b = rng.normal();
    xa.channel("Fz")[i] = a;
    xb.channel("Fz")[i] = b;
    xc.channel("Fz")[i] = 0.6 * a - 1.7 * b;
  }
  const auto fa = bandpass_filter(xa, spec);
  const auto fb = bandpass_filter(xb, spec);
  const auto fc = bandpass_filter(xc, spec);
  double peak = 0.0, err = 0.0;
  for (std::size_t i = 0; i < 5000; ++i) {
    const double want = 0.6 * fa.channel("Fz")[i] - 1.7 * fb.channel("Fz")[i];
    peak = std::max(peak, std::abs(want));
    err = std::max(err, std::abs(fc.channel("Fz")[i] - want));
  }
  const double lin_rel = err / peak;

  const bool ok = std::abs(pass_gain - 1.0) <= 0.05 && atten_low_db >= 40.0 &&
                  atten_high_db >= 40.0 && lin_rel <= 1e-6;
  report(5, ok,
         "10 Hz gain %.4f (|err| %.2f%%), attenuation %.1f dB @ 0.1 Hz, %.1f dB @ 100 Hz, "
         "linearity %.2e relative",
         pass_gain, 100.0 * std::abs(pass_gain - 1.0), atten_low_db, atten_high_db, lin_rel);
}

// ---------------------------------------------------------------------------
// criterion 6: scheduler exactness

void criterion_6() {
  const ProtocolConfig blocked = ProtocolConfig::blocked_default();
  bool ok = true;
  char why[160] = "";

  for (std::uint64_t seed = 1; seed <= 300 && ok; ++seed) {
    const TrialPlan plan = build_blocked_schedule(blocked, seed);
    int counts[3] = {0, 0, 0};
    for (const auto& e : plan) ++counts[static_cast<int>(e.d_level)];
    if (plan.size() != 300 || counts[0] != 100 || counts[1] != 100 || counts[2] != 100) {
      ok = false;
      std::snprintf(why, sizeof(why), "blocked seed %llu: %zu trials, %d/%d/%d per level",
                    static_cast<unsigned long long>(seed), plan.size(), counts[0], counts[1],
                    counts[2]);
    }
    for (std::size_t i = 0; i < plan.size() && ok; ++i) {
      if (plan[i].block_id != static_cast<int>(i) / 10 ||
          plan[i].d_level != plan[(i / 10) * 10].d_level) {
        ok = false;
        std::snprintf(why, sizeof(why), "blocked seed %llu: level changes inside block %zu",
                      static_cast<unsigned long long>(seed), i / 10);
      }
    }
  }

  const ProtocolConfig oddball = ProtocolConfig::oddball_default();
  for (int p = 0; p < 30 && ok; ++p) {
    for (const TrialPlan& plan : build_oddball_schedule(oddball, p)) {
      int d1 = 0, d2 = 0;
      bool placed = true;
      for (const auto& e : plan) {
        if (e.d_level == DLevel::D1) ++d1;
        if (e.d_level == DLevel::D2) ++d2;
        if ((e.trial_id % 4 == 3) != (e.d_level == DLevel::D2)) placed = false;
      }
      if (plan.size() != 120 || d1 != 90 || d2 != 30 || !placed) {
        ok = false;
        std::snprintf(why, sizeof(why),
                      "oddball participant %d: %zu trials, %d standards, %d deviants%s", p,
                      plan.size(), d1, d2, placed ? "" : ", deviant off-pattern");
        break;
      }
    }
  }

  report(6, ok, "%s",
         ok ? "300 blocked seeds (300 trials, 100/level, level constant per 10-trial block); "
              "30 oddball participants x 3 sessions (90 D1 + 30 D2, deviant every 4th)"
            : why);
}

// ---------------------------------------------------------------------------
// criterion 7: analytic p vs the exhaustive sign-flip permutation oracle

double exhaustive_perm_p(const std::vector<double>& d) {
  const std::size_t n = d.size();
  const auto t_of = [&](unsigned mask) {
    std::vector<double> flipped(n);
    for (std::size_t i = 0; i < n; ++i)
      flipped[i] = (mask >> i) & 1u ? -d[i] : d[i];
    const double m = mean_v(flipped);
    const double sd = sd_v(flipped);
    return std::abs(m) / (sd / std::sqrt(static_cast<double>(n)));
  };
  const double t_obs = t_of(0);
  unsigned hits = 0;
  const unsigned total = 1u << n;
  for (unsigned mask = 0; mask < total; ++mask)
    if (t_of(mask) >= t_obs - 1e-12) ++hits;
  return static_cast<double>(hits) / static_cast<double>(total);
}

void criterion_7() {
  const std::vector<double> a = {0.9, 0.2, -0.4, 1.3, 0.6, -0.1, 0.8, 0.35};
  const std::vector<double> zero(a.size(), 0.0);

  const ComparisonResult fwd = paired_ttest(a, zero);
  const double p_perm = exhaustive_perm_p(a);
  const double dev = std::abs(fwd.p_value - p_perm);

  const ComparisonResult rev = paired_ttest(zero, a);
  const bool antisym = rev.t_statistic == -fwd.t_statistic && rev.p_value == fwd.p_value;

  const ComparisonResult same = paired_ttest(a, a);
  const bool ident = same.t_statistic == 0.0 && same.p_value == 1.0 && !same.significant;

  report(7, dev <= 0.02 && antisym && ident,
         "n=8 analytic p %.5f vs permutation %.5f (|diff| %.5f <= 0.02); antisymmetry %s, "
         "identical-input t=0 p=1 %s",
         fwd.p_value, p_perm, dev, antisym ? "exact" : "BROKEN", ident ? "exact" : "BROKEN");
}

// ---------------------------------------------------------------------------
// criterion 8: byte-identical results.json from two CLI `all` runs

void criterion_8() {
  const char* cli = std::getenv("VRCONFLICT_CLI");
  if (cli == nullptr || *cli == '\0') {
    report(8, false, "VRCONFLICT_CLI not set; cannot invoke the pipeline binary");
    return;
  }

  const fs::path root = fs::temp_directory_path() / "vrconflict_acceptance_c8";
  fs::remove_all(root);
  fs::create_directories(root);

  // reduced cohort: full pipeline, small enough to run twice in seconds
  Config cfg = Config::defaults();
  cfg.sample_rate_hz = 250.0;
  cfg.behavior.participants = 6;
  cfg.erp.participants = 2;
  cfg.erp.protocol.trials_total = 16;
  cfg.erp.protocol.inter_trial_rest_s = 1.0;
  const fs::path cfg_path = root / "config.json";
  io::write_text_file(cfg_path, to_json(cfg).dump(2) + "\n");

  bool ok = true;
  char why[256] = "";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + cli + "\" all --config " + cfg_path.string() +
                            " --seed 5 --out " + (root / run).string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      ok = false;
      std::snprintf(why, sizeof(why), "CLI run %s exited nonzero", run);
      break;
    }
  }
  std::size_t bytes = 0;
  if (ok) {
    const std::string ja = io::read_text_file(root / "a" / "results.json");
    const std::string jb = io::read_text_file(root / "b" / "results.json");
    bytes = ja.size();
    if (ja != jb) {
      ok = false;
      std::snprintf(why, sizeof(why), "results.json differs between runs (%zu vs %zu bytes)",
                    ja.size(), jb.size());
    }
  }
  fs::remove_all(root);
  report(8, ok, "%s",
         ok ? (std::string("two CLI `all` runs, results.json byte-identical (") +
               std::to_string(bytes) + " bytes)")
                  .c_str()
            : why);
}

// ---------------------------------------------------------------------------
// criterion 9: epoching exactness

void criterion_9() {
  const double fs = 1000.0;
  NoiseSpec ns;
  ns.seed = 42;
  const EegRecording rec = gen_noise(ChannelLayout::standard_32(), 3000, ns, fs);

  std::vector<EventMarker> markers{
      {150, MarkerCode::FeedbackOnset, {DLevel::D1, HandStyle::S1, 0, 0}},     // too early
      {1000, MarkerCode::FeedbackOnset, {DLevel::D1, HandStyle::S1, 0, 1}},    // valid
      {2500, MarkerCode::FeedbackOnset, {DLevel::D2, HandStyle::S1, 0, 2}},    // fits exactly
      {2600, MarkerCode::FeedbackOnset, {DLevel::D1, HandStyle::S1, 0, 3}},    // too late
  };
  const EpochWindow window{200.0, 500.0};
  EpochSet set = extract_epochs(rec, markers, window);

  bool ok = window.length(fs) == 700 && set.epochs.size() == 2 &&
            set.rejection_log.size() == 2;
  if (ok) {
    ok = set.epochs[0].marker_sample == 1000 && set.epochs[1].marker_sample == 2500;
    for (const auto& e : set.epochs)
      ok = ok && e.n_samples == 700 && e.pre_samples == 200 && e.time_ms(0) == -200.0 &&
           e.time_ms(200) == 0.0 && e.time_ms(699) == 499.0;
    ok = ok && set.rejection_log[0].marker.sample_index == 150 &&
         set.rejection_log[0].reason == "pre-boundary" &&
         set.rejection_log[1].marker.sample_index == 2600 &&
         set.rejection_log[1].reason == "post-boundary";
  }

  double worst_baseline = 0.0;
  if (ok) {
    const EpochSet corrected = baseline_correct(set);
    for (const auto& e : corrected.epochs)
      for (std::size_t c = 0; c < e.n_channels; ++c) {
        double m = 0.0;
        for (std::size_t i = 0; i < e.pre_samples; ++i) m += e.channel(c)[i];
        worst_baseline = std::max(worst_baseline,
                                  std::abs(m / static_cast<double>(e.pre_samples)));
      }
    ok = worst_baseline < 1e-9;
  }

  report(9, ok,
         "700-sample epochs at 1 kHz, boundary markers skipped and logged "
         "(pre/post), max baseline residual %.2e uV",
         worst_baseline);
}

}  // namespace

int main() {
  const auto t0 = clk::now();
#ifndef ACCEPTANCE_SKIP_SLOW
  criteria_1_and_2();
#endif
  criteria_3_and_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::printf("%d/9 criteria passed in %.0f s\n", 9 - g_failures,
              std::chrono::duration<double>(clk::now() - t0).count());
  return g_failures == 0 ? 0 : 1;
}
