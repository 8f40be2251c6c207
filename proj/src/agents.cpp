#include "loro/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loro/rng.hpp"

namespace loro {

namespace {
constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// log(1 - tanh(u)^2), numerically stable for large |u|
double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
}

Eigen::MatrixXd obs_matrix(const std::vector<Transition>& batch, bool next) {
  const std::size_t dim = next ? batch[0].next_obs.values.size() : batch[0].obs.values.size();
  Eigen::MatrixXd m(batch.size(), dim);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& v = next ? batch[b].next_obs.values : batch[b].obs.values;
    if (v.size() != dim) throw std::invalid_argument("batch observation width mismatch");
    for (std::size_t i = 0; i < dim; ++i) m(b, i) = v[i];
  }
  return m;
}

void assert_agent_finite(const Mlp& net, const char* what) {
  if (!params_finite(net)) throw std::runtime_error(std::string(what) + ": non-finite parameter");
}
}  // namespace

DdqnAgent make_ddqn(int obs_dim, int n_actions, const AgentHypers& h, std::uint64_t seed) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  for (int u : h.hidden) sizes.push_back(u);
  sizes.push_back(n_actions);

  DdqnAgent agent;
  agent.online_q = make_mlp(sizes, seed, h.activation);
  agent.target_q = make_mlp(sizes, seed, h.activation);
  copy_params(agent.online_q, agent.target_q);
  agent.optimizer = make_adam(agent.online_q, h.learning_rate);
  agent.gamma = h.gamma;
  agent.epsilon = h.epsilon;
  agent.target_update_interval = h.target_update_interval;
  agent.batch_size = h.batch_size;
  return agent;
}

Eigen::VectorXd ddqn_td_targets(const std::vector<Transition>& batch, const Mlp& online_q,
                                const Mlp& target_q, double gamma) {
  if (batch.empty()) throw std::invalid_argument("ddqn_td_targets: empty batch");
  const Eigen::MatrixXd next = obs_matrix(batch, true);
  const Eigen::MatrixXd q_online = mlp_forward_batch(online_q, next);
  const Eigen::MatrixXd q_target = mlp_forward_batch(target_q, next);
  Eigen::VectorXd y(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].terminated) {
      y(b) = batch[b].reward;
    } else {
      Eigen::Index best;
      q_online.row(b).maxCoeff(&best);
      y(b) = batch[b].reward + gamma * q_target(b, best);
    }
  }
  return y;
}

double ddqn_update(DdqnAgent& agent, ReplayBuffer& buf) {
  const std::vector<Transition> batch = buf.sample(agent.batch_size);
  const Eigen::VectorXd y = ddqn_td_targets(batch, agent.online_q, agent.target_q, agent.gamma);

  const Eigen::MatrixXd x = obs_matrix(batch, false);
  ForwardCache cache;
  const Eigen::MatrixXd q = mlp_forward_batch(agent.online_q, x, &cache);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const int a = std::get<int>(batch[b].action);
    const double diff = q(b, a) - y(b);
    loss += diff * diff * inv_b;
    out_grad(b, a) = 2.0 * diff * inv_b;
  }

  const MlpGradients grads = mlp_gradient(agent.online_q, out_grad, cache, false);
  adam_step(agent.optimizer, agent.online_q, grads);
  assert_agent_finite(agent.online_q, "ddqn_update");

  agent.update_counter += 1;
  if (agent.update_counter % agent.target_update_interval == 0)
    copy_params(agent.online_q, agent.target_q);
  return loss;
}

int epsilon_greedy(const Eigen::VectorXd& q_values, double epsilon, std::mt19937_64& rng) {
  if (q_values.size() == 0) throw std::invalid_argument("epsilon_greedy: empty q vector");
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon_greedy: epsilon out of range");
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(q_values.size()) - 1);
      return pick(rng);
    }
  }
  int best = 0;
  for (int i = 1; i < q_values.size(); ++i)
    if (q_values(i) > q_values(best)) best = i;  // lowest index wins ties
  return best;
}

SacAgent make_sac(int obs_dim, int action_dim, double max_action, const AgentHypers& h,
                  std::uint64_t seed) {
  std::vector<int> policy_sizes{obs_dim};
  std::vector<int> q_sizes{obs_dim + action_dim};
  for (int u : h.hidden) {
    policy_sizes.push_back(u);
    q_sizes.push_back(u);
  }
  policy_sizes.push_back(2 * action_dim);
  q_sizes.push_back(1);

  SacAgent agent;
  agent.policy = make_mlp(policy_sizes, split_seed(seed, 11), h.activation);
  agent.q1 = make_mlp(q_sizes, split_seed(seed, 12), h.activation);
  agent.q2 = make_mlp(q_sizes, split_seed(seed, 13), h.activation);
  agent.q1_target = make_mlp(q_sizes, 0, h.activation);
  agent.q2_target = make_mlp(q_sizes, 0, h.activation);
  copy_params(agent.q1, agent.q1_target);
  copy_params(agent.q2, agent.q2_target);
  agent.opt_policy = make_adam(agent.policy, h.learning_rate);
  agent.opt_q1 = make_adam(agent.q1, h.learning_rate);
  agent.opt_q2 = make_adam(agent.q2, h.learning_rate);
  agent.alpha_lr = h.learning_rate;
  agent.log_alpha = std::log(h.initial_alpha);
  agent.gamma = h.gamma;
  agent.soft_update_tau = h.soft_update_tau;
  agent.target_entropy = -static_cast<double>(action_dim);
  agent.max_action = max_action;
  agent.action_dim = action_dim;
  agent.batch_size = h.batch_size;
  agent.noise_rng.seed(split_seed(seed, 14));
  return agent;
}

SacSample sac_sample_action(const SacAgent& agent, const Observation& obs, std::mt19937_64& rng,
                            bool deterministic) {
  const Eigen::VectorXd head =
      mlp_forward(agent.policy, Eigen::Map<const Eigen::VectorXd>(obs.values.data(), obs.values.size()));
  SacSample s;
  s.action.resize(agent.action_dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int d = 0; d < agent.action_dim; ++d) {
    const double mean = head(d);
    const double log_std = std::clamp(head(agent.action_dim + d), kLogStdMin, kLogStdMax);
    const double std_dev = std::exp(log_std);
    const double z = deterministic ? 0.0 : normal(rng);
    const double u = mean + std_dev * z;
    s.action[d] = agent.max_action * std::tanh(u);
    s.log_prob += -0.5 * z * z - log_std - kHalfLog2Pi - std::log(agent.max_action) -
                  log_one_minus_tanh_sq(u);
  }
  return s;
}

double sac_log_prob(const SacAgent& agent, const Observation& obs,
                    const std::vector<double>& action) {
  const Eigen::VectorXd head =
      mlp_forward(agent.policy, Eigen::Map<const Eigen::VectorXd>(obs.values.data(), obs.values.size()));
  double logp = 0.0;
  for (int d = 0; d < agent.action_dim; ++d) {
    const double mean = head(d);
    const double log_std = std::clamp(head(agent.action_dim + d), kLogStdMin, kLogStdMax);
    const double std_dev = std::exp(log_std);
    const double x = std::clamp(action[d] / agent.max_action, -1.0 + 1e-12, 1.0 - 1e-12);
    const double u = std::atanh(x);
    const double z = (u - mean) / std_dev;
    logp += -0.5 * z * z - log_std - kHalfLog2Pi - std::log(agent.max_action) -
            log_one_minus_tanh_sq(u);
  }
  return logp;
}

namespace {

// Batched squashed-Gaussian sample used inside sac_update; keeps the pieces
// needed for the reparameterized policy gradient.
struct PolicyBatch {
  Eigen::MatrixXd mean, log_std, std_dev, z, u, tanh_u;  // batch x action_dim
  Eigen::MatrixXd clamp_mask;                            // d(clamped log_std)/d(raw)
  Eigen::MatrixXd actions;                               // batch x action_dim
  Eigen::VectorXd log_prob;                              // batch
  ForwardCache cache;
};

PolicyBatch sample_policy_batch(SacAgent& agent, const Eigen::MatrixXd& obs, bool with_cache) {
  PolicyBatch p;
  const Eigen::MatrixXd head = mlp_forward_batch(agent.policy, obs, with_cache ? &p.cache : nullptr);
  const Eigen::Index b = obs.rows();
  const int da = agent.action_dim;
  p.mean = head.leftCols(da);
  Eigen::MatrixXd raw = head.rightCols(da);
  p.log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  p.clamp_mask = ((raw.array() > kLogStdMin) && (raw.array() < kLogStdMax)).cast<double>();
  p.std_dev = p.log_std.array().exp();
  p.z.resize(b, da);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < b; ++i)
    for (int d = 0; d < da; ++d) p.z(i, d) = normal(agent.noise_rng);
  p.u = p.mean + p.std_dev.cwiseProduct(p.z);
  p.tanh_u = p.u.array().tanh();
  p.actions = agent.max_action * p.tanh_u;
  p.log_prob = Eigen::VectorXd::Zero(b);
  for (Eigen::Index i = 0; i < b; ++i)
    for (int d = 0; d < da; ++d)
      p.log_prob(i) += -0.5 * p.z(i, d) * p.z(i, d) - p.log_std(i, d) - kHalfLog2Pi -
                       std::log(agent.max_action) - log_one_minus_tanh_sq(p.u(i, d));
  return p;
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& actions) {
  Eigen::MatrixXd in(obs.rows(), obs.cols() + actions.cols());
  in << obs, actions;
  return in;
}

}  // namespace

Eigen::VectorXd sac_critic_targets(SacAgent& agent, const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("sac_critic_targets: empty batch");
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd next_obs = obs_matrix(batch, true);
  const double alpha = agent.alpha();
  PolicyBatch next_pi = sample_policy_batch(agent, next_obs, false);
  const Eigen::MatrixXd next_in = critic_input(next_obs, next_pi.actions);
  const Eigen::VectorXd q1n = mlp_forward_batch(agent.q1_target, next_in).col(0);
  const Eigen::VectorXd q2n = mlp_forward_batch(agent.q2_target, next_in).col(0);
  Eigen::VectorXd y(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double soft_v = std::min(q1n(i), q2n(i)) - alpha * next_pi.log_prob(i);
    y(i) = batch[i].reward + (batch[i].terminated ? 0.0 : agent.gamma * soft_v);
  }
  return y;
}

SacLosses sac_update(SacAgent& agent, ReplayBuffer& buf) {
  const std::vector<Transition> batch = buf.sample(agent.batch_size);
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd obs = obs_matrix(batch, false);
  const double alpha = agent.alpha();

  Eigen::MatrixXd act(b, agent.action_dim);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& a = std::get<std::vector<double>>(batch[i].action);
    for (int d = 0; d < agent.action_dim; ++d) act(i, d) = a[d];
  }

  const Eigen::VectorXd y = sac_critic_targets(agent, batch);

  SacLosses losses;
  const double inv_b = 1.0 / static_cast<double>(b);
  const Eigen::MatrixXd in = critic_input(obs, act);
  for (int k = 0; k < 2; ++k) {
    Mlp& q = k == 0 ? agent.q1 : agent.q2;
    AdamState& opt = k == 0 ? agent.opt_q1 : agent.opt_q2;
    ForwardCache cache;
    const Eigen::VectorXd pred = mlp_forward_batch(q, in, &cache).col(0);
    const Eigen::VectorXd diff = pred - y;
    losses.q_loss += 0.5 * diff.squaredNorm() * inv_b;
    const Eigen::MatrixXd out_grad = (2.0 * inv_b) * diff;
    adam_step(opt, q, mlp_gradient(q, out_grad, cache, false));
  }

  // policy: ascend min-critic minus entropy penalty through the
  // reparameterized sample
  PolicyBatch pi = sample_policy_batch(agent, obs, true);
  const Eigen::MatrixXd pi_in = critic_input(obs, pi.actions);
  ForwardCache c1, c2;
  const Eigen::VectorXd q1pi = mlp_forward_batch(agent.q1, pi_in, &c1).col(0);
  const Eigen::VectorXd q2pi = mlp_forward_batch(agent.q2, pi_in, &c2).col(0);

  Eigen::VectorXd mask1(b), mask2(b), qmin(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const bool first = q1pi(i) <= q2pi(i);
    mask1(i) = first ? 1.0 : 0.0;
    mask2(i) = first ? 0.0 : 1.0;
    qmin(i) = first ? q1pi(i) : q2pi(i);
  }
  losses.policy_loss = (alpha * pi.log_prob - qmin).mean();

  // dqmin/da via the critics' input gradients (parameter grads discarded)
  const Eigen::MatrixXd dq_da =
      mlp_gradient(agent.q1, mask1, c1).input.rightCols(agent.action_dim) +
      mlp_gradient(agent.q2, mask2, c2).input.rightCols(agent.action_dim);

  // da/du for the squashed sample
  const Eigen::MatrixXd da_du =
      agent.max_action * (1.0 - pi.tanh_u.array().square()).matrix();
  const Eigen::MatrixXd dq_du = dq_da.cwiseProduct(da_du);
  const Eigen::MatrixXd sz = pi.std_dev.cwiseProduct(pi.z);  // du/dlog_std

  // dlogpi/du = 2 tanh(u); plus dlogpi/dlog_std = -1 (holding z fixed)
  Eigen::MatrixXd head_grad(b, 2 * agent.action_dim);
  head_grad.leftCols(agent.action_dim) =
      inv_b * (alpha * 2.0 * pi.tanh_u.array() - dq_du.array()).matrix();
  head_grad.rightCols(agent.action_dim) =
      inv_b * ((alpha * (2.0 * pi.tanh_u.array() * sz.array() - 1.0) - dq_du.array() * sz.array())
                   .matrix()
                   .cwiseProduct(pi.clamp_mask));
  adam_step(agent.opt_policy, agent.policy, mlp_gradient(agent.policy, head_grad, pi.cache, false));

  // temperature: descend alpha toward the entropy target
  const double entropy_gap = (pi.log_prob.array() + agent.target_entropy).mean();
  losses.alpha_loss = -agent.log_alpha * entropy_gap;
  const double grad_log_alpha = -entropy_gap;
  agent.alpha_step += 1;
  agent.alpha_m = 0.9 * agent.alpha_m + 0.1 * grad_log_alpha;
  agent.alpha_v = 0.999 * agent.alpha_v + 0.001 * grad_log_alpha * grad_log_alpha;
  const double mhat = agent.alpha_m / (1.0 - std::pow(0.9, static_cast<double>(agent.alpha_step)));
  const double vhat = agent.alpha_v / (1.0 - std::pow(0.999, static_cast<double>(agent.alpha_step)));
  agent.log_alpha -= agent.alpha_lr * mhat / (std::sqrt(vhat) + 1e-8);

  sac_soft_update(agent, agent.soft_update_tau);
  agent.update_counter += 1;

  assert_agent_finite(agent.policy, "sac_update(policy)");
  assert_agent_finite(agent.q1, "sac_update(q1)");
  assert_agent_finite(agent.q2, "sac_update(q2)");
  if (!std::isfinite(agent.log_alpha)) throw std::runtime_error("sac_update: non-finite alpha");
  return losses;
}

void sac_soft_update(SacAgent& agent, double tau) {
  for (int k = 0; k < 2; ++k) {
    const Mlp& src = k == 0 ? agent.q1 : agent.q2;
    Mlp& dst = k == 0 ? agent.q1_target : agent.q2_target;
    for (int l = 0; l < src.num_layers(); ++l) {
      dst.weights[l] = tau * src.weights[l] + (1.0 - tau) * dst.weights[l];
      dst.biases[l] = tau * src.biases[l] + (1.0 - tau) * dst.biases[l];
    }
  }
}

namespace {

class DdqnLearner final : public Learner {
 public:
  DdqnLearner(int obs_dim, int n_actions, const AgentHypers& h, std::uint64_t seed)
      : agent_(make_ddqn(obs_dim, n_actions, h, seed)) {}

  Action act(const Observation& obs, std::mt19937_64& rng) override {
    return Action{epsilon_greedy(q_of(obs), agent_.epsilon, rng)};
  }
  Action act_greedy(const Observation& obs, std::mt19937_64& rng) override {
    return Action{epsilon_greedy(q_of(obs), 0.0, rng)};
  }
  double update(ReplayBuffer& buf) override { return ddqn_update(agent_, buf); }
  long update_count() const override { return agent_.update_counter; }
  void save(const std::string& dir) const override {
    save_mlp(agent_.online_q, dir + "/online_q.bin");
    save_mlp(agent_.target_q, dir + "/target_q.bin");
  }
  void load(const std::string& dir) override {
    const Activation act = agent_.online_q.activation;  // snapshots do not carry it
    agent_.online_q = load_mlp(dir + "/online_q.bin");
    agent_.target_q = load_mlp(dir + "/target_q.bin");
    agent_.online_q.activation = act;
    agent_.target_q.activation = act;
  }
  void assert_finite() const override {
    assert_agent_finite(agent_.online_q, "ddqn");
    assert_agent_finite(agent_.target_q, "ddqn");
  }

  DdqnAgent& agent() { return agent_; }

 private:
  Eigen::VectorXd q_of(const Observation& obs) const {
    return mlp_forward(agent_.online_q,
                       Eigen::Map<const Eigen::VectorXd>(obs.values.data(), obs.values.size()));
  }
  DdqnAgent agent_;
};

class SacLearner final : public Learner {
 public:
  SacLearner(int obs_dim, int action_dim, double max_action, const AgentHypers& h, std::uint64_t seed)
      : agent_(make_sac(obs_dim, action_dim, max_action, h, seed)) {}

  Action act(const Observation& obs, std::mt19937_64& rng) override {
    return Action{sac_sample_action(agent_, obs, rng, false).action};
  }
  Action act_greedy(const Observation& obs, std::mt19937_64& rng) override {
    return Action{sac_sample_action(agent_, obs, rng, true).action};
  }
  double update(ReplayBuffer& buf) override { return sac_update(agent_, buf).q_loss; }
  long update_count() const override { return agent_.update_counter; }
  void save(const std::string& dir) const override {
    save_mlp(agent_.policy, dir + "/policy.bin");
    save_mlp(agent_.q1, dir + "/q1.bin");
    save_mlp(agent_.q2, dir + "/q2.bin");
    save_mlp(agent_.q1_target, dir + "/q1_target.bin");
    save_mlp(agent_.q2_target, dir + "/q2_target.bin");
  }
  void load(const std::string& dir) override {
    const Activation act = agent_.policy.activation;  // snapshots do not carry it
    agent_.policy = load_mlp(dir + "/policy.bin");
    agent_.q1 = load_mlp(dir + "/q1.bin");
    agent_.q2 = load_mlp(dir + "/q2.bin");
    agent_.q1_target = load_mlp(dir + "/q1_target.bin");
    agent_.q2_target = load_mlp(dir + "/q2_target.bin");
    for (Mlp* net : {&agent_.policy, &agent_.q1, &agent_.q2, &agent_.q1_target, &agent_.q2_target})
      net->activation = act;
  }
  void assert_finite() const override {
    assert_agent_finite(agent_.policy, "sac");
    assert_agent_finite(agent_.q1, "sac");
    assert_agent_finite(agent_.q2, "sac");
  }

  SacAgent& agent() { return agent_; }

 private:
  SacAgent agent_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const MdpSpec& spec, const AgentHypers& h, std::uint64_t seed) {
  if (spec.action_space.discrete)
    return std::make_unique<DdqnLearner>(spec.obs_dim, spec.action_space.n, h, seed);
  return std::make_unique<SacLearner>(spec.obs_dim, spec.action_space.dim, spec.action_space.hi, h,
                                      seed);
}

}  // namespace loro
