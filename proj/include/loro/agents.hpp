#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "loro/env.hpp"
#include "loro/mlp.hpp"
#include "loro/replay.hpp"

namespace loro {

struct AgentHypers {
  double gamma = 0.99;
  double epsilon = 0.1;
  double learning_rate = 5e-5;
  int batch_size = 256;
  long buffer_capacity = 100000;
  int target_update_interval = 1000;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::Tanh;
  // SAC
  double soft_update_tau = 0.005;
  double initial_alpha = 1.0;
};

// Double DQN: the online network selects the bootstrap action, the target
// network evaluates it.
struct DdqnAgent {
  Mlp online_q;
  Mlp target_q;
  AdamState optimizer;
  double gamma = 0.99;
  double epsilon = 0.1;
  int target_update_interval = 1000;
  long update_counter = 0;
  int batch_size = 256;
};

DdqnAgent make_ddqn(int obs_dim, int n_actions, const AgentHypers& h, std::uint64_t seed);

// Per-transition regression targets: y = r when terminated, else
// y = r + gamma * Qt(s', argmax_a Qo(s', a)). Truncation still bootstraps.
Eigen::VectorXd ddqn_td_targets(const std::vector<Transition>& batch, const Mlp& online_q,
                                const Mlp& target_q, double gamma);

// One minibatch step of mean squared TD error; returns the loss. Hard-copies
// online into target every target_update_interval updates.
double ddqn_update(DdqnAgent& agent, ReplayBuffer& buf);

// Greedy with probability 1-eps (lowest index wins exact ties), otherwise a
// uniformly random index.
int epsilon_greedy(const Eigen::VectorXd& q_values, double epsilon, std::mt19937_64& rng);

struct SacAgent {
  Mlp policy;  // obs -> [mean, log_std]
  Mlp q1, q2;
  Mlp q1_target, q2_target;
  AdamState opt_policy, opt_q1, opt_q2;
  double log_alpha = 0.0;
  double alpha_m = 0.0, alpha_v = 0.0;  // scalar Adam moments for log_alpha
  long alpha_step = 0;
  double alpha_lr = 5e-5;
  double gamma = 0.99;
  double soft_update_tau = 0.005;
  double target_entropy = -1.0;
  double max_action = 2.0;
  int action_dim = 1;
  int batch_size = 256;
  long update_counter = 0;
  std::mt19937_64 noise_rng;

  double alpha() const { return std::exp(log_alpha); }
};

SacAgent make_sac(int obs_dim, int action_dim, double max_action, const AgentHypers& h,
                  std::uint64_t seed);

// Squashed-Gaussian sample: u ~ N(mean, std) (u = mean when deterministic),
// action = max_action * tanh(u). log_prob includes the tanh change of
// variables, summed over dimensions.
struct SacSample {
  std::vector<double> action;
  double log_prob = 0.0;
};
SacSample sac_sample_action(const SacAgent& agent, const Observation& obs, std::mt19937_64& rng,
                            bool deterministic);

// Density of the squashed-Gaussian policy at an arbitrary in-range action.
double sac_log_prob(const SacAgent& agent, const Observation& obs,
                    const std::vector<double>& action);

// Soft critic regression targets: y = r + gamma * (min(q1', q2')(s', a') -
// alpha * log pi(a'|s')) with a' freshly sampled; terminal transitions do not
// bootstrap.
Eigen::VectorXd sac_critic_targets(SacAgent& agent, const std::vector<Transition>& batch);

struct SacLosses {
  double q_loss = 0.0;
  double policy_loss = 0.0;
  double alpha_loss = 0.0;
};
SacLosses sac_update(SacAgent& agent, ReplayBuffer& buf);

void sac_soft_update(SacAgent& agent, double tau);

// Uniform polymorphic face used by the run loop.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual Action act(const Observation& obs, std::mt19937_64& rng) = 0;         // behavior policy
  virtual Action act_greedy(const Observation& obs, std::mt19937_64& rng) = 0;  // evaluation policy
  virtual double update(ReplayBuffer& buf) = 0;
  virtual long update_count() const = 0;
  virtual void save(const std::string& dir) const = 0;
  virtual void load(const std::string& dir) = 0;
  virtual void assert_finite() const = 0;
};

std::unique_ptr<Learner> make_learner(const MdpSpec& spec, const AgentHypers& h, std::uint64_t seed);

}  // namespace loro
