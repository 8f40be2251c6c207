#include "loro/runner.hpp"

#include <chrono>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "loro/rng.hpp"

namespace loro {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::LORO: return "loro";
    case Variant::MIX: return "mix";
    case Variant::ON_POLICY: return "on_policy";
    case Variant::PRETRAIN_RANDOM: return "pretrain_random";
    case Variant::PRETRAIN_ONPOLICY: return "pretrain_onpolicy";
    case Variant::COLLECTOR_ONLY: return "collector_only";
  }
  return "unknown";
}

Variant variant_from_name(const std::string& name) {
  if (name == "loro") return Variant::LORO;
  if (name == "mix") return Variant::MIX;
  if (name == "on_policy" || name == "onpolicy") return Variant::ON_POLICY;
  if (name == "pretrain_random") return Variant::PRETRAIN_RANDOM;
  if (name == "pretrain_onpolicy") return Variant::PRETRAIN_ONPOLICY;
  if (name == "collector_only") return Variant::COLLECTOR_ONLY;
  throw std::invalid_argument("unknown variant: " + name);
}

int default_total_episodes(EnvKind kind) {
  switch (kind) {
    case EnvKind::CartPole:
    case EnvKind::FrozenLake: return 150;
    case EnvKind::CliffWalking:
    case EnvKind::Pendulum: return 200;
    case EnvKind::MountainCar: return 300;
  }
  return 150;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.total_episodes_T < 1) throw std::invalid_argument("total episodes must be positive");
  if (cfg.tau < 0) throw std::invalid_argument("tau must be non-negative");
  if (cfg.tau > cfg.total_episodes_T)
    throw std::invalid_argument("tau cannot exceed the total episode count");
  if (cfg.pretrain_steps < 0) throw std::invalid_argument("pretrain steps must be non-negative");
  const bool needs_warm_start =
      cfg.variant == Variant::LORO || cfg.variant == Variant::MIX ||
      cfg.variant == Variant::PRETRAIN_RANDOM || cfg.variant == Variant::PRETRAIN_ONPOLICY;
  if (needs_warm_start && cfg.tau < 1)
    throw std::invalid_argument(variant_name(cfg.variant) + " requires tau >= 1");
  if (cfg.hypers.epsilon < 0 || cfg.hypers.epsilon > 1)
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (cfg.hypers.gamma < 0 || cfg.hypers.gamma > 1)
    throw std::invalid_argument("gamma must lie in [0, 1]");
}

CollectOutcome collect_episodes(Env& env, PolicySource& collector, int tau, std::mt19937_64& rng) {
  CollectOutcome out;
  out.dataset.env_kind = env.spec().env_kind;
  out.dataset.source_tag = collector.tag();
  for (int ep = 0; ep < tau; ++ep) {
    collector.begin_episode();
    Observation obs = env.reset();
    double total = 0.0;
    long steps = 0;
    std::vector<double> rewards;
    while (true) {
      const Action action = collector.act(obs, rng);
      const StepResult r = env.step(action);
      out.dataset.push({obs, action, r.reward, r.next_obs, r.terminated, r.truncated});
      collector.observe_step(obs, action, r);
      total += r.reward;
      rewards.push_back(r.reward);
      ++steps;
      obs = r.next_obs;
      if (r.terminated || r.truncated) break;
    }
    out.episode_rewards.push_back(total);
    out.episode_steps.push_back(steps);
    out.step_rewards.push_back(std::move(rewards));
  }
  return out;
}

void pretrain(Learner& agent, const Dataset& dataset, int steps, std::uint64_t seed) {
  if (steps == 0) return;
  if (dataset.empty()) throw std::invalid_argument("pretrain: empty dataset");
  ReplayBuffer pool(dataset.size(), split_seed(seed, static_cast<std::uint64_t>(SeedStream::Pretrain)));
  for (const Transition& t : dataset.transitions) pool.push(t);
  for (int i = 0; i < steps; ++i) agent.update(pool);
}

OnlineOutcome online_learn(Learner& agent, Env& env, ReplayBuffer& buffer, int episodes,
                           std::mt19937_64& rng, Dataset* harvest, int updates_per_step) {
  OnlineOutcome out;
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset();
    double total = 0.0;
    long steps = 0;
    std::vector<double> rewards;
    while (true) {
      const Action action = agent.act(obs, rng);
      const StepResult r = env.step(action);
      Transition t{obs, action, r.reward, r.next_obs, r.terminated, r.truncated, SourceTag::Online};
      if (harvest) harvest->push(t);
      buffer.push(std::move(t));
      for (int u = 0; u < updates_per_step; ++u) agent.update(buffer);
      total += r.reward;
      rewards.push_back(r.reward);
      ++steps;
      obs = r.next_obs;
      if (r.terminated || r.truncated) break;
    }
    out.episode_rewards.push_back(total);
    out.episode_steps.push_back(steps);
    out.step_rewards.push_back(std::move(rewards));
  }
  return out;
}

double avg_first_tau_reward(const std::vector<std::vector<double>>& episode_step_rewards, int tau,
                            int H) {
  if (tau <= 0) throw std::invalid_argument("avg_first_tau_reward: tau must be positive");
  if (static_cast<int>(episode_step_rewards.size()) < tau)
    throw std::invalid_argument("avg_first_tau_reward: fewer than tau episodes");
  double sum = 0.0;
  for (int t = 0; t < tau; ++t)
    sum = std::accumulate(episode_step_rewards[t].begin(), episode_step_rewards[t].end(), sum);
  return sum / (static_cast<double>(H) * static_cast<double>(tau));
}

namespace {

PolicySource make_collector(const RunConfig& cfg, PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Scripted: return PolicySource::scripted(cfg.env.env_kind);
    case PolicyKind::Random: return PolicySource::random(cfg.env.env_kind);
    case PolicyKind::Llm: return PolicySource::llm(cfg.env.env_kind, cfg.llm);
  }
  throw std::logic_error("unknown collector kind");
}

// Splits a saved dataset back into per-episode reward lists so a replayed
// collection phase produces the same curve prefix.
CollectOutcome outcome_from_dataset(const Dataset& d) {
  CollectOutcome out;
  out.dataset = d;
  std::vector<double> rewards;
  double total = 0.0;
  long steps = 0;
  for (const Transition& t : d.transitions) {
    total += t.reward;
    rewards.push_back(t.reward);
    ++steps;
    if (t.terminated || t.truncated) {
      out.episode_rewards.push_back(total);
      out.episode_steps.push_back(steps);
      out.step_rewards.push_back(std::move(rewards));
      rewards.clear();
      total = 0.0;
      steps = 0;
    }
  }
  if (!rewards.empty()) throw std::invalid_argument("loaded dataset ends mid-episode");
  return out;
}

struct Phases {
  CollectOutcome collect;
  OnlineOutcome online;
};

RunResult assemble(const RunConfig& cfg, const Phases& p, long env_steps, long extraction_failures) {
  RunResult r;
  r.episode_rewards = p.collect.episode_rewards;
  r.episode_steps = p.collect.episode_steps;
  r.phase.assign(p.collect.episode_rewards.size(), "collect");
  r.episode_rewards.insert(r.episode_rewards.end(), p.online.episode_rewards.begin(),
                           p.online.episode_rewards.end());
  r.episode_steps.insert(r.episode_steps.end(), p.online.episode_steps.begin(),
                         p.online.episode_steps.end());
  r.phase.insert(r.phase.end(), p.online.episode_rewards.size(), "online");
  r.extraction_failures = extraction_failures;
  r.env_steps = env_steps;

  std::vector<std::vector<double>> all_steps = p.collect.step_rewards;
  all_steps.insert(all_steps.end(), p.online.step_rewards.begin(), p.online.step_rewards.end());
  const int tau_for_metric = std::min<int>(cfg.tau > 0 ? cfg.tau : 1, all_steps.size());
  if (!all_steps.empty())
    r.r_avg_first_tau = avg_first_tau_reward(all_steps, tau_for_metric, cfg.env.horizon_H);
  return r;
}

}  // namespace

RunResult run_variant(const RunConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  auto env = make_env(cfg.env, split_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::Env)));
  auto action_rng = make_rng(cfg.seed, SeedStream::Actions);
  auto collector_rng = make_rng(cfg.seed, SeedStream::Collector);
  const std::uint64_t agent_seed = split_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::Agent));
  const std::uint64_t buffer_seed = split_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::Buffer));

  Phases phases;
  long extraction_failures = 0;

  auto collect_phase = [&](PolicyKind kind) {
    if (cfg.preloaded_dataset) {
      phases.collect = outcome_from_dataset(*cfg.preloaded_dataset);
      if (static_cast<int>(phases.collect.episode_rewards.size()) != cfg.tau)
        throw std::invalid_argument("loaded dataset holds " +
                                    std::to_string(phases.collect.episode_rewards.size()) +
                                    " episodes but tau is " + std::to_string(cfg.tau));
      return;
    }
    PolicySource collector = make_collector(cfg, kind);
    phases.collect = collect_episodes(*env, collector, cfg.tau, collector_rng);
    extraction_failures = collector.extraction_failures();
    if (!cfg.save_dataset_path.empty()) save_dataset(phases.collect.dataset, cfg.save_dataset_path);
  };

  auto learner = make_learner(cfg.env, cfg.hypers, agent_seed);
  if (!cfg.load_agent_dir.empty()) learner->load(cfg.load_agent_dir);

  switch (cfg.variant) {
    case Variant::LORO:
    case Variant::PRETRAIN_RANDOM: {
      collect_phase(cfg.variant == Variant::PRETRAIN_RANDOM ? PolicyKind::Random : cfg.collector);
      pretrain(*learner, phases.collect.dataset, cfg.pretrain_steps, cfg.seed);
      ReplayBuffer buffer(cfg.hypers.buffer_capacity, buffer_seed);
      if (cfg.verify_data_hygiene) buffer.require_source(SourceTag::Online);
      phases.online = online_learn(*learner, *env, buffer, cfg.total_episodes_T - cfg.tau,
                                   action_rng, nullptr, cfg.updates_per_step);
      break;
    }
    case Variant::PRETRAIN_ONPOLICY: {
      // scout run whose data (not parameters) seeds the pretraining
      auto scout = make_learner(
          cfg.env, cfg.hypers, split_seed(cfg.seed, static_cast<std::uint64_t>(SeedStream::Scout)));
      ReplayBuffer scout_buffer(cfg.hypers.buffer_capacity,
                                split_seed(buffer_seed, static_cast<std::uint64_t>(SeedStream::Scout)));
      Dataset harvest;
      harvest.env_kind = cfg.env.env_kind;
      harvest.source_tag = SourceTag::OnPolicy;
      OnlineOutcome scouted = online_learn(*scout, *env, scout_buffer, cfg.tau, collector_rng,
                                           &harvest, cfg.updates_per_step);
      phases.collect.dataset = std::move(harvest);
      phases.collect.episode_rewards = std::move(scouted.episode_rewards);
      phases.collect.episode_steps = std::move(scouted.episode_steps);
      phases.collect.step_rewards = std::move(scouted.step_rewards);
      if (!cfg.save_dataset_path.empty()) save_dataset(phases.collect.dataset, cfg.save_dataset_path);

      pretrain(*learner, phases.collect.dataset, cfg.pretrain_steps, cfg.seed);
      ReplayBuffer buffer(cfg.hypers.buffer_capacity, buffer_seed);
      if (cfg.verify_data_hygiene) buffer.require_source(SourceTag::Online);
      phases.online = online_learn(*learner, *env, buffer, cfg.total_episodes_T - cfg.tau,
                                   action_rng, nullptr, cfg.updates_per_step);
      break;
    }
    case Variant::MIX: {
      collect_phase(cfg.collector);
      ReplayBuffer buffer(cfg.hypers.buffer_capacity, buffer_seed);
      for (const Transition& t : phases.collect.dataset.transitions) buffer.push(t);
      phases.online = online_learn(*learner, *env, buffer, cfg.total_episodes_T - cfg.tau,
                                   action_rng, nullptr, cfg.updates_per_step);
      break;
    }
    case Variant::ON_POLICY: {
      ReplayBuffer buffer(cfg.hypers.buffer_capacity, buffer_seed);
      if (cfg.verify_data_hygiene) buffer.require_source(SourceTag::Online);
      phases.online = online_learn(*learner, *env, buffer, cfg.total_episodes_T, action_rng,
                                   nullptr, cfg.updates_per_step);
      break;
    }
    case Variant::COLLECTOR_ONLY: {
      collect_phase(cfg.collector);
      break;
    }
  }

  RunResult result = assemble(cfg, phases, env->total_steps(), extraction_failures);

  if (cfg.variant == Variant::COLLECTOR_ONLY) {
    // flat reference level: mean collected episode reward, padded to T entries
    const double level =
        std::accumulate(result.episode_rewards.begin(), result.episode_rewards.end(), 0.0) /
        std::max<std::size_t>(1, result.episode_rewards.size());
    while (static_cast<int>(result.episode_rewards.size()) < cfg.total_episodes_T) {
      result.episode_rewards.push_back(level);
      result.episode_steps.push_back(0);
      result.phase.push_back("collect");
    }
  }

  if (!cfg.save_agent_dir.empty()) learner->save(cfg.save_agent_dir);
  learner->assert_finite();

  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_csv_header(std::ostream& out) {
  out << "seed,variant,env,episode,reward,cum_env_steps,phase\n";
}

void write_csv_rows(std::ostream& out, const RunConfig& cfg, const RunResult& result) {
  long cum = 0;
  char buf[32];
  for (std::size_t i = 0; i < result.episode_rewards.size(); ++i) {
    cum += result.episode_steps[i];
    std::snprintf(buf, sizeof(buf), "%.17g", result.episode_rewards[i]);
    out << cfg.seed << ',' << variant_name(cfg.variant) << ',' << env_kind_name(cfg.env.env_kind)
        << ',' << i << ',' << buf << ',' << cum << ',' << result.phase[i] << '\n';
  }
}

}  // namespace loro
