#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loro/experiment.hpp"
#include "verify.hpp"

using namespace loro;

namespace {

struct RunFlags {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;  // applied in order
};

int do_run(const RunFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_file.empty()) cfg = parse_config_file(flags.config_file);
  if (cfg.run_templates.empty()) cfg.run_templates.push_back(RunConfig{});
  for (RunConfig& run : cfg.run_templates)
    for (const auto& [key, value] : flags.overrides) apply_config_kv(cfg, run, key, value);
  finalize_config(cfg);

  const std::size_t total = cfg.run_templates.size() * cfg.seeds.size();
  std::size_t finished = 0;
  auto results = run_experiment(cfg, [&](const CompletedRun& run) {
    ++finished;
    std::printf("[%zu/%zu] %s %s seed=%llu episodes=%zu r_avg=%.4f steps=%ld (%.1fs)\n", finished,
                total, variant_name(run.config.variant).c_str(),
                env_kind_name(run.config.env.env_kind).c_str(),
                static_cast<unsigned long long>(run.config.seed),
                run.result.episode_rewards.size(), run.result.r_avg_first_tau,
                run.result.env_steps, run.result.wall_time_seconds);
    std::fflush(stdout);
  });

  // learning-curve figure next to the CSV
  const LoadedCsv loaded = load_runs_csv(cfg.out_dir + "/runs.csv");
  if (!loaded.groups.empty() || !loaded.flat_references.empty()) {
    const auto curves = aggregate(loaded.groups, cfg.plot.smoothing_window);
    std::ofstream svg(cfg.out_dir + "/curves.svg");
    svg << render_svg(curves, loaded.flat_references, cfg.plot);
  }
  std::printf("wrote %s/runs.csv and %s/curves.svg\n", cfg.out_dir.c_str(), cfg.out_dir.c_str());
  return 0;
}

int do_plot(const std::string& in_dir, const std::string& out_file, const PlotOptions& plot) {
  const LoadedCsv loaded = load_runs_csv(in_dir + "/runs.csv");
  const auto curves = aggregate(loaded.groups, plot.smoothing_window);
  std::ofstream out(out_file);
  if (!out) throw std::runtime_error("cannot open " + out_file);
  out << render_svg(curves, loaded.flat_references, plot);
  std::printf("wrote %s\n", out_file.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LORO laboratory: warm-started online RL experiments"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "execute an experiment and write runs.csv/curves.svg");
  RunFlags flags;
  run_cmd->add_option("--config", flags.config_file, "experiment config file (key = value)");
  // flag overrides applied on top of the config file, in command-line order
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--env", "env"},
      {"--variant", "variant"},
      {"--collector", "collector"},
      {"--tau", "tau"},
      {"--pretrain-steps", "pretrain_steps"},
      {"--updates-per-step", "updates_per_step"},
      {"--episodes", "episodes"},
      {"--seeds", "seeds"},
      {"--endpoint", "endpoint"},
      {"--model", "model"},
      {"--out", "out"},
      {"--save-dataset", "save_dataset"},
      {"--load-dataset", "load_dataset"},
      {"--save-agent", "save_agent"},
      {"--load-agent", "load_agent"},
      {"--jobs", "jobs"},
      {"--gamma", "gamma"},
      {"--epsilon", "epsilon"},
      {"--lr", "lr"},
      {"--batch", "batch"},
      {"--buffer", "buffer"},
      {"--target-interval", "target_interval"},
      {"--hidden", "hidden"},
      {"--activation", "activation"},
      {"--slippery", "slippery"},
      {"--history-mode", "history_mode"},
      {"--history-window", "history_window"},
      {"--transcripts", "transcripts"},
      {"--smoothing", "smoothing"},
      {"--ymin", "ymin"},
      {"--ymax", "ymax"},
      {"--llm-parallel", "llm_parallel"},
  };
  for (const auto& [flag, key] : flag_keys) {
    run_cmd->add_option_function<std::string>(
        flag,
        [&flags, key = key](const std::string& v) { flags.overrides.push_back({key, v}); },
        "override config key '" + key + "'");
  }

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render curves.svg from an existing runs.csv");
  std::string in_dir = "out", out_file = "curves.svg";
  PlotOptions plot;
  plot_cmd->add_option("--in", in_dir, "directory holding runs.csv");
  plot_cmd->add_option("--out", out_file, "output SVG path");
  plot_cmd->add_option("--smooth", plot.smoothing_window, "moving-average window for the mean");
  double ymin = 0, ymax = 0;
  auto* ymin_opt = plot_cmd->add_option("--ymin", ymin, "y-axis lower bound");
  auto* ymax_opt = plot_cmd->add_option("--ymax", ymax, "y-axis upper bound");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in oracle and property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(flags);
    if (plot_cmd->parsed()) {
      if (ymin_opt->count()) plot.y_min = ymin;
      if (ymax_opt->count()) plot.y_max = ymax;
      return do_plot(in_dir, out_file, plot);
    }
    if (verify_cmd->parsed()) return run_verify_checks() == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
