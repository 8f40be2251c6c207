#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loro/agents.hpp"
#include "loro/env.hpp"
#include "loro/policy.hpp"
#include "loro/replay.hpp"

namespace loro {

enum class Variant { LORO, MIX, ON_POLICY, PRETRAIN_RANDOM, PRETRAIN_ONPOLICY, COLLECTOR_ONLY };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct RunConfig {
  MdpSpec env = make_spec(EnvKind::CartPole);
  Variant variant = Variant::LORO;
  PolicyKind collector = PolicyKind::Scripted;
  int tau = 10;                 // warm-start episodes
  int pretrain_steps = 1000;
  int total_episodes_T = 150;
  bool episodes_explicit = false;  // config plumbing: T was set by the user
  int updates_per_step = 4;        // gradient updates per online env step
  std::uint64_t seed = 0;
  AgentHypers hypers;
  LlmOptions llm;               // used when collector == Llm
  std::string save_dataset_path;
  std::optional<Dataset> preloaded_dataset;  // replaces the collection phase
  std::string save_agent_dir;
  std::string load_agent_dir;
  bool verify_data_hygiene = true;
};

// Paper protocol episode counts: 150 CartPole/FrozenLake, 200 CliffWalking/
// Pendulum, 300 MountainCar.
int default_total_episodes(EnvKind kind);

void validate_config(const RunConfig& cfg);  // throws std::invalid_argument

struct RunResult {
  std::vector<double> episode_rewards;  // always total_episodes_T entries
  std::vector<long> episode_steps;
  std::vector<std::string> phase;       // "collect" | "online"
  double r_avg_first_tau = 0.0;
  long extraction_failures = 0;
  long env_steps = 0;
  double wall_time_seconds = 0.0;
};

struct CollectOutcome {
  Dataset dataset;
  std::vector<double> episode_rewards;
  std::vector<long> episode_steps;
  std::vector<std::vector<double>> step_rewards;
};

// tau full episodes driven by the collector; every transition kept in order.
// No learner is involved.
CollectOutcome collect_episodes(Env& env, PolicySource& collector, int tau, std::mt19937_64& rng);

// `steps` gradient updates on a temporary uniform sampling pool over the
// dataset; zero environment interaction, pool discarded afterwards.
void pretrain(Learner& agent, const Dataset& dataset, int steps, std::uint64_t seed);

struct OnlineOutcome {
  std::vector<double> episode_rewards;
  std::vector<long> episode_steps;
  std::vector<std::vector<double>> step_rewards;
};

// Per step: behavior action, env step, push to buffer, then `updates_per_step`
// gradient updates. `harvest`, when given, additionally records every
// transition in order.
OnlineOutcome online_learn(Learner& agent, Env& env, ReplayBuffer& buffer, int episodes,
                           std::mt19937_64& rng, Dataset* harvest = nullptr,
                           int updates_per_step = 1);

RunResult run_variant(const RunConfig& cfg);

// Paper metric: sum of step rewards over the first tau episodes divided by
// H*tau (steps missing from early-terminated episodes contribute zero).
double avg_first_tau_reward(const std::vector<std::vector<double>>& episode_step_rewards, int tau,
                            int H);

// One CSV row per episode: seed, variant, env, episode, reward,
// cumulative env steps, phase.
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const RunConfig& cfg, const RunResult& result);

}  // namespace loro
