#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "vrconflict/pipeline.hpp"

using namespace vrconflict;

int main(int argc, char** argv) {
  CLI::App app{"synthetic VR-conflict behavior/EEG pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int participants = -1;

  app.add_option("--config", config_path, "JSON config file (defaults when omitted)");
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--participants", participants,
                 "participant count override (default 16 behavior, 10 ERP)");
  app.fallthrough();

  auto* cmd_simulate =
      app.add_subcommand("simulate", "trial logs and marker files for both protocols");
  auto* cmd_synth = app.add_subcommand("synth", "recording bundles from marker files");
  auto* cmd_preprocess =
      app.add_subcommand("preprocess", "filtered, epoched, cleaned data from bundles");
  auto* cmd_erp = app.add_subcommand("erp", "ERP results from epoch stores");
  auto* cmd_behavior = app.add_subcommand("behavior", "behavior results from the trial log");
  auto* cmd_report = app.add_subcommand("report", "SVG plots from results.json");
  auto* cmd_all = app.add_subcommand("all", "full pipeline in memory");

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = load_config(config_path);
    if (participants >= 0) {
      if (participants == 0) throw std::invalid_argument("--participants must be >= 1");
      // the override targets whichever experiment the stage touches
      if (cmd_behavior->parsed() || cmd_simulate->parsed() || cmd_all->parsed())
        cfg.behavior.participants = participants;
      if (!cmd_behavior->parsed() && !cmd_report->parsed())
        cfg.erp.participants = participants;
    }
    cfg.validate();

    if (cmd_simulate->parsed()) stages::simulate(cfg, seed, out_dir);
    else if (cmd_synth->parsed()) stages::synth(cfg, seed, out_dir);
    else if (cmd_preprocess->parsed()) stages::preprocess(cfg, out_dir);
    else if (cmd_erp->parsed()) stages::erp(cfg, seed, out_dir);
    else if (cmd_behavior->parsed()) stages::behavior(cfg, seed, out_dir);
    else if (cmd_report->parsed()) stages::report(cfg, out_dir);
    else if (cmd_all->parsed()) stages::all(cfg, seed, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
