#include "loro/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace loro {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void apply_config_kv(ExperimentConfig& cfg, RunConfig& run, const std::string& key,
                     const std::string& value) {
  try {
    if (key == "env") {
      const bool slippery = run.env.slippery;
      run.env = make_spec(env_kind_from_name(value), slippery);
      if (!run.episodes_explicit) run.total_episodes_T = default_total_episodes(run.env.env_kind);
    } else if (key == "slippery") {
      run.env = make_spec(run.env.env_kind, parse_bool(value));
    } else if (key == "variant") {
      run.variant = variant_from_name(value);
    } else if (key == "collector") {
      run.collector = policy_kind_from_name(value);
    } else if (key == "tau") {
      run.tau = std::stoi(value);
    } else if (key == "pretrain_steps") {
      run.pretrain_steps = std::stoi(value);
    } else if (key == "updates_per_step") {
      run.updates_per_step = std::stoi(value);
    } else if (key == "episodes") {
      run.total_episodes_T = std::stoi(value);
      run.episodes_explicit = true;
    } else if (key == "gamma") {
      run.hypers.gamma = std::stod(value);
    } else if (key == "epsilon") {
      run.hypers.epsilon = std::stod(value);
    } else if (key == "lr" || key == "learning_rate") {
      run.hypers.learning_rate = std::stod(value);
    } else if (key == "batch") {
      run.hypers.batch_size = std::stoi(value);
    } else if (key == "buffer") {
      run.hypers.buffer_capacity = std::stol(value);
    } else if (key == "target_interval") {
      run.hypers.target_update_interval = std::stoi(value);
    } else if (key == "hidden") {
      run.hypers.hidden.clear();
      for (const auto& h : split_list(value)) run.hypers.hidden.push_back(std::stoi(h));
    } else if (key == "activation") {
      if (value == "tanh") run.hypers.activation = Activation::Tanh;
      else if (value == "relu") run.hypers.activation = Activation::Relu;
      else throw std::invalid_argument("unknown activation '" + value + "'");
    } else if (key == "endpoint") {
      run.llm.base_url = value;
    } else if (key == "model") {
      run.llm.model = value;
    } else if (key == "history_mode") {
      if (value == "summary") run.llm.history_mode = HistoryMode::Summary;
      else if (value == "concatenation") run.llm.history_mode = HistoryMode::Concatenation;
      else if (value == "none") run.llm.history_mode = HistoryMode::None;
      else throw std::invalid_argument("unknown history mode '" + value + "'");
    } else if (key == "history_window") {
      run.llm.history_window = std::stoi(value);
    } else if (key == "save_dataset") {
      run.save_dataset_path = value;
    } else if (key == "load_dataset") {
      run.preloaded_dataset = load_dataset(value);
    } else if (key == "save_agent") {
      run.save_agent_dir = value;
    } else if (key == "load_agent") {
      run.load_agent_dir = value;
    } else if (key == "transcripts") {
      run.llm.transcript_path = value;
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "jobs") {
      cfg.jobs = std::stoi(value);
    } else if (key == "llm_parallel") {
      cfg.llm_parallel = parse_bool(value);
    } else if (key == "smoothing") {
      cfg.plot.smoothing_window = std::stoi(value);
    } else if (key == "ymin") {
      cfg.plot.y_min = std::stod(value);
    } else if (key == "ymax") {
      cfg.plot.y_max = std::stod(value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid value '" + value + "' for key '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);

  ExperimentConfig cfg;
  RunConfig shared;
  std::vector<RunConfig> runs;
  RunConfig* current = &shared;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line == "[run]") {
      runs.push_back(shared);
      current = &runs.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_config_kv(cfg, *current, key, value);
  }
  cfg.run_templates = runs.empty() ? std::vector<RunConfig>{shared} : std::move(runs);
  return cfg;
}

void finalize_config(ExperimentConfig& cfg) {
  if (cfg.run_templates.empty()) throw std::invalid_argument("config has no runs");
  if (cfg.seeds.empty()) throw std::invalid_argument("config has no seeds");
  if (cfg.jobs < 1) cfg.jobs = 1;
  bool any_llm = false;
  for (RunConfig& run : cfg.run_templates) {
    if (run.collector == PolicyKind::Llm && run.variant != Variant::ON_POLICY) any_llm = true;
    validate_config(run);
  }
  if (any_llm && !cfg.llm_parallel) cfg.jobs = 1;  // endpoint courtesy
}

std::vector<CompletedRun> run_experiment(const ExperimentConfig& cfg,
                                         const std::function<void(const CompletedRun&)>& on_done) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string csv_path = cfg.out_dir + "/runs.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  write_csv_header(csv);
  csv.flush();

  std::vector<RunConfig> jobs;
  for (const RunConfig& tmpl : cfg.run_templates) {
    for (std::uint64_t seed : cfg.seeds) {
      RunConfig r = tmpl;
      r.seed = seed;
      jobs.push_back(std::move(r));
    }
  }

  std::vector<CompletedRun> results(jobs.size());
  std::vector<bool> done(jobs.size(), false);
  std::mutex mu;
  std::size_t next_job = 0;
  std::size_t next_write = 0;
  std::exception_ptr failure;

  auto worker = [&]() {
    while (true) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure || next_job >= jobs.size()) return;
        idx = next_job++;
      }
      try {
        CompletedRun run{jobs[idx], run_variant(jobs[idx])};
        std::lock_guard<std::mutex> lock(mu);
        results[idx] = std::move(run);
        done[idx] = true;
        // append finished groups in deterministic order
        while (next_write < jobs.size() && done[next_write]) {
          write_csv_rows(csv, results[next_write].config, results[next_write].result);
          csv.flush();
          if (on_done) on_done(results[next_write]);
          ++next_write;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::min<std::size_t>(cfg.jobs, jobs.size());
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<AggregateCurve> aggregate(const std::vector<LabeledCurves>& grouped,
                                      int smoothing_window) {
  std::vector<AggregateCurve> out;
  for (const LabeledCurves& group : grouped) {
    if (group.curves.empty()) continue;
    const std::size_t len = group.curves.front().size();
    for (const auto& c : group.curves)
      if (c.size() != len)
        throw std::invalid_argument("aggregate: ragged curves in group '" + group.label + "'");
    AggregateCurve agg;
    agg.label = group.label;
    agg.mean.resize(len);
    agg.se.resize(len);
    const double n = static_cast<double>(group.curves.size());
    for (std::size_t i = 0; i < len; ++i) {
      double m = 0.0;
      for (const auto& c : group.curves) m += c[i];
      m /= n;
      double var = 0.0;
      if (group.curves.size() > 1) {
        for (const auto& c : group.curves) var += (c[i] - m) * (c[i] - m);
        var /= (n - 1.0);
      }
      agg.mean[i] = m;
      agg.se[i] = std::sqrt(var) / std::sqrt(n);
    }
    if (smoothing_window > 1) {
      std::vector<double> smoothed(len);
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t start = i + 1 >= static_cast<std::size_t>(smoothing_window)
                                      ? i + 1 - smoothing_window
                                      : 0;
        double sum = 0.0;
        for (std::size_t k = start; k <= i; ++k) sum += agg.mean[k];
        smoothed[i] = sum / static_cast<double>(i - start + 1);
      }
      agg.mean = std::move(smoothed);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string xml_escape(const std::string& s) {
  std::string out;
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<AggregateCurve>& curves,
                       const std::vector<std::pair<std::string, double>>& flat_references,
                       const PlotOptions& options) {
  if (curves.empty() && flat_references.empty())
    throw std::invalid_argument("render_svg: nothing to plot");

  std::size_t episodes = 1;
  double lo = 1e300, hi = -1e300;
  for (const auto& c : curves) {
    episodes = std::max(episodes, c.mean.size());
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      lo = std::min(lo, c.mean[i] - c.se[i]);
      hi = std::max(hi, c.mean[i] + c.se[i]);
    }
  }
  for (const auto& [label, level] : flat_references) {
    lo = std::min(lo, level);
    hi = std::max(hi, level);
  }
  if (lo > hi) {
    lo = 0;
    hi = 1;
  }
  if (options.y_min) lo = *options.y_min;
  if (options.y_max) hi = *options.y_max;
  if (hi <= lo) hi = lo + 1;

  const double width = 860, height = 520;
  const double ml = 70, mr = 190, mt = 30, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto x_of = [&](double ep) {
    return ml + (episodes <= 1 ? 0.0 : pw * ep / static_cast<double>(episodes - 1));
  };
  const auto y_of = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << num(y_of(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << num(v) << "</text>\n";
    const double e = (episodes - 1) * tick / 4.0;
    svg << "<text x=\"" << num(x_of(e)) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << static_cast<long>(e) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">Episode</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">Episode reward</text>\n";

  int color_idx = 0;
  double legend_y = mt + 10;
  for (const auto& c : curves) {
    const std::string color = kPalette[color_idx % 6];
    ++color_idx;
    // se band
    std::ostringstream band;
    for (std::size_t i = 0; i < c.mean.size(); ++i)
      band << num(x_of(static_cast<double>(i))) << "," << num(y_of(c.mean[i] + c.se[i])) << " ";
    for (std::size_t i = c.mean.size(); i-- > 0;)
      band << num(x_of(static_cast<double>(i))) << "," << num(y_of(c.mean[i] - c.se[i])) << " ";
    svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color
        << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    std::ostringstream line;
    for (std::size_t i = 0; i < c.mean.size(); ++i)
      line << num(x_of(static_cast<double>(i))) << "," << num(y_of(c.mean[i])) << " ";
    svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"/>\n";
    svg << "<rect x=\"" << ml + pw + 14 << "\" y=\"" << legend_y - 9
        << "\" width=\"18\" height=\"4\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << ml + pw + 38 << "\" y=\"" << legend_y << "\" font-size=\"12\">"
        << xml_escape(c.label) << "</text>\n";
    legend_y += 18;
  }
  for (const auto& [label, level] : flat_references) {
    const std::string color = kPalette[color_idx % 6];
    ++color_idx;
    svg << "<line x1=\"" << ml << "\" y1=\"" << num(y_of(level)) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << num(y_of(level)) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.4\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<rect x=\"" << ml + pw + 14 << "\" y=\"" << legend_y - 9
        << "\" width=\"18\" height=\"4\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << ml + pw + 38 << "\" y=\"" << legend_y << "\" font-size=\"12\">"
        << xml_escape(label) << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

LoadedCsv load_runs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (trim(header) != "seed,variant,env,episode,reward,cum_env_steps,phase")
    throw std::runtime_error("unexpected CSV header in " + path);

  // (variant, seed) -> curve
  std::map<std::string, std::map<std::string, std::vector<double>>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_list(line);
    if (f.size() != 7) throw std::runtime_error("malformed CSV row: " + line);
    table[f[1]][f[0]].push_back(std::stod(f[4]));
  }

  LoadedCsv out;
  for (auto& [variant, by_seed] : table) {
    LabeledCurves group;
    group.label = variant;
    for (auto& [seed, curve] : by_seed) group.curves.push_back(std::move(curve));
    if (variant == "collector_only") {
      // flat reference at the mean collected level across seeds
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& c : group.curves)
        for (double v : c) {
          sum += v;
          ++n;
        }
      out.flat_references.push_back({variant, n ? sum / static_cast<double>(n) : 0.0});
    } else {
      out.groups.push_back(std::move(group));
    }
  }
  return out;
}

}  // namespace loro
