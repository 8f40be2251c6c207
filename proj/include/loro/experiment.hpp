#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "loro/runner.hpp"

namespace loro {

struct PlotOptions {
  int smoothing_window = 0;  // 0/1 = no smoothing
  std::optional<double> y_min, y_max;
};

struct ExperimentConfig {
  std::vector<RunConfig> run_templates;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string out_dir = "out";
  PlotOptions plot;
  int jobs = 1;
  bool llm_parallel = false;
};

// INI-like flat key = value text with repeated [run] sections. Keys before
// the first [run] set the shared template; each section clones it.
ExperimentConfig parse_config_file(const std::string& path);

// Applies one key = value pair (shared by the file parser and CLI flags).
void apply_config_kv(ExperimentConfig& cfg, RunConfig& run, const std::string& key,
                     const std::string& value);

void finalize_config(ExperimentConfig& cfg);  // fills env-dependent defaults, validates

struct CompletedRun {
  RunConfig config;
  RunResult result;
};

// Executes every (template x seed) run, up to `jobs` at a time. Finished
// row groups are appended to <out_dir>/runs.csv in deterministic order so
// partial results survive interruption.
std::vector<CompletedRun> run_experiment(const ExperimentConfig& cfg,
                                         const std::function<void(const CompletedRun&)>& on_done = {});

struct AggregateCurve {
  std::string label;
  std::vector<double> mean;  // per episode, across seeds
  std::vector<double> se;    // sample standard deviation / sqrt(n)
};

struct LabeledCurves {
  std::string label;
  std::vector<std::vector<double>> curves;  // one per seed, equal lengths
};

// Pointwise mean and standard error; optional trailing moving average applied
// to the mean only.
std::vector<AggregateCurve> aggregate(const std::vector<LabeledCurves>& grouped,
                                      int smoothing_window = 0);

// One polyline per variant with a translucent +-1 se band, flat horizontal
// reference lines, and a legend.
std::string render_svg(const std::vector<AggregateCurve>& curves,
                       const std::vector<std::pair<std::string, double>>& flat_references,
                       const PlotOptions& options = {});

// Reload of runs.csv, grouped by variant label; collector_only groups are
// returned as flat references instead of curves.
struct LoadedCsv {
  std::vector<LabeledCurves> groups;
  std::vector<std::pair<std::string, double>> flat_references;
};
LoadedCsv load_runs_csv(const std::string& path);

}  // namespace loro
