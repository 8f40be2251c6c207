#include "loro/policy.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace loro {

std::string policy_kind_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Llm: return "llm";
    case PolicyKind::Scripted: return "scripted";
    case PolicyKind::Random: return "random";
  }
  return "unknown";
}

PolicyKind policy_kind_from_name(const std::string& name) {
  if (name == "llm") return PolicyKind::Llm;
  if (name == "scripted") return PolicyKind::Scripted;
  if (name == "random") return PolicyKind::Random;
  throw std::invalid_argument("unknown collector kind: " + name);
}

int external_to_internal(EnvKind, int external_action) { return external_action - 1; }
int internal_to_external(EnvKind, int internal_action) { return internal_action + 1; }

std::vector<int> valid_external_actions(EnvKind kind) {
  const MdpSpec spec = make_spec(kind);
  std::vector<int> v;
  for (int a = 1; a <= spec.action_space.n; ++a) v.push_back(a);
  return v;
}

namespace {

int scripted_cartpole(const Observation& obs) {
  const double theta = obs.values[2], omega = obs.values[3];
  return theta + 0.5 * omega >= 0 ? 2 : 1;  // push toward the lean
}

int scripted_mountaincar(const Observation& obs) {
  const double v = obs.values[1];
  return v > 0 ? 3 : 1;  // accelerate with the swing
}

double scripted_pendulum(const Observation& obs) {
  const double theta = std::atan2(obs.values[1], obs.values[0]);
  const double omega = obs.values[2];
  // energy pump below the upright energy, PD balance near it
  const double energy = 0.5 * omega * omega + 10.0 * std::cos(theta);
  if (energy < 10.0) return omega >= 0 ? 2.0 : -2.0;
  return std::clamp(-(2.0 * theta + 0.5 * omega), -2.0, 2.0);
}

int scripted_cliffwalking(const Observation& obs) {
  if (obs.col < 11) return obs.row == 3 ? 1 : 2;  // off the cliff row, then right
  return 3;                                       // drop onto the goal
}

int scripted_frozenlake(const Observation& obs) {
  // fixed safe route on the canonical map; sensible fallbacks off-route
  static const int route[4][4] = {
      // external: 1 left, 2 down, 3 right, 4 up
      {2, 3, 2, 1},  // (0,0) down  (0,1) right (0,2) down  (0,3) left
      {2, 4, 2, 2},  // (1,0) down  (1,1) hole  (1,2) down  (1,3) hole
      {3, 3, 2, 2},  // (2,0) right (2,1) right (2,2) down  (2,3) hole
      {2, 3, 3, 3},  // (3,0) hole  (3,1) right (3,2) right (3,3) goal
  };
  return route[obs.row][obs.col];
}

}  // namespace

Action scripted_act(EnvKind kind, const Observation& obs) {
  switch (kind) {
    case EnvKind::CartPole: return Action{scripted_cartpole(obs)};
    case EnvKind::MountainCar: return Action{scripted_mountaincar(obs)};
    case EnvKind::Pendulum: return Action{std::vector<double>{scripted_pendulum(obs)}};
    case EnvKind::CliffWalking: return Action{scripted_cliffwalking(obs)};
    case EnvKind::FrozenLake: return Action{scripted_frozenlake(obs)};
  }
  throw std::invalid_argument("scripted_act: unknown env kind");
}

Action random_act(const MdpSpec& spec, std::mt19937_64& rng) {
  if (spec.action_space.discrete) {
    std::uniform_int_distribution<int> pick(0, spec.action_space.n - 1);
    return Action{pick(rng)};
  }
  std::uniform_real_distribution<double> u(spec.action_space.lo, spec.action_space.hi);
  std::vector<double> a(spec.action_space.dim);
  for (double& x : a) x = u(rng);
  return Action{a};
}

PolicySource::PolicySource(PolicyKind kind, EnvKind env)
    : kind_(kind), env_(env), spec_(make_spec(env)) {}

PolicySource PolicySource::scripted(EnvKind kind) { return PolicySource(PolicyKind::Scripted, kind); }
PolicySource PolicySource::random(EnvKind kind) { return PolicySource(PolicyKind::Random, kind); }

PolicySource PolicySource::llm(EnvKind kind, const LlmOptions& options) {
  PolicySource p(PolicyKind::Llm, kind);
  p.options_ = options;
  p.history_.mode = options.history_mode;
  p.history_.window = options.history_window;
  ChatClientConfig cc = chat_config_from_env();
  if (!options.base_url.empty()) cc.base_url = options.base_url;
  if (!options.api_key.empty()) cc.api_key = options.api_key;
  cc.max_attempts = options.max_attempts;
  cc.backoff_initial_ms = options.backoff_initial_ms;
  p.client_ = std::make_shared<ChatClient>(cc);
  return p;
}

SourceTag PolicySource::tag() const {
  switch (kind_) {
    case PolicyKind::Llm: return SourceTag::LLM;
    case PolicyKind::Scripted: return SourceTag::Scripted;
    case PolicyKind::Random: return SourceTag::Random;
  }
  return SourceTag::Online;
}

void PolicySource::begin_episode() { history_.prev.reset(); }

Action PolicySource::act(const Observation& obs, std::mt19937_64& rng) {
  switch (kind_) {
    case PolicyKind::Scripted: {
      Action a = scripted_act(env_, obs);
      if (const int* ext = std::get_if<int>(&a)) return Action{external_to_internal(env_, *ext)};
      return a;
    }
    case PolicyKind::Random: return random_act(spec_, rng);
    case PolicyKind::Llm: return llm_act(obs, rng);
  }
  throw std::logic_error("policy source: unknown kind");
}

Action PolicySource::llm_act(const Observation& obs, std::mt19937_64& rng) {
  const ChatRequest req = build_prompt(env_, obs, history_, options_.model);
  const bool discrete = spec_.action_space.discrete;
  const std::vector<int> valid = discrete ? valid_external_actions(env_) : std::vector<int>{};

  for (int query = 0; query < 2; ++query) {  // one re-query on extraction failure
    const std::string completion = client_->complete(req);
    if (discrete) {
      const DiscreteExtraction ex = extract_discrete_action(completion, valid);
      log_transcript(req, completion,
                     ex.ok ? std::to_string(ex.action) : extract_error_name(ex.error));
      if (ex.ok) return Action{external_to_internal(env_, ex.action)};
    } else {
      const TorqueExtraction ex = extract_torque(completion);
      log_transcript(req, completion,
                     ex.ok ? std::to_string(ex.torque) : extract_error_name(ex.error));
      if (ex.ok) return Action{std::vector<double>{ex.torque}};
    }
  }
  ++extraction_failures_;
  return random_act(spec_, rng);
}

void PolicySource::observe_step(const Observation& obs_before, const Action& taken,
                                const StepResult& result) {
  if (env_ != EnvKind::FrozenLake && env_ != EnvKind::CliffWalking) return;
  const bool hole = env_ == EnvKind::FrozenLake && result.terminated && result.reward == 0.0;
  history_.record_visit({result.next_obs.row, result.next_obs.col}, result.reward, hole);
  if (const int* internal = std::get_if<int>(&taken)) {
    history_.prev = PrevStep{{obs_before.row, obs_before.col},
                             internal_to_external(env_, *internal),
                             result.reward};
  }
}

void PolicySource::log_transcript(const ChatRequest& req, const std::string& completion,
                                  const std::string& extracted) {
  if (options_.transcript_path.empty()) return;
  std::ofstream out(options_.transcript_path, std::ios::app);
  out << "=== step ===\n";
  for (const ChatMessage& m : req.messages) out << "--- " << m.role << "\n" << m.content << "\n";
  out << "--- completion\n" << completion << "\n--- extracted: " << extracted << "\n\n";
}

}  // namespace loro
