#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "loro/agents.hpp"
#include "loro/env.hpp"
#include "support/chain_mdp.hpp"

using namespace loro;

namespace {

// 1-layer net with zero weights: output equals the bias for every input, so a
// Q "table" can be pinned exactly.
Mlp table_net(int in, const std::vector<double>& outputs) {
  Mlp net = make_mlp({in, static_cast<int>(outputs.size())}, 0);
  net.weights[0].setZero();
  for (std::size_t i = 0; i < outputs.size(); ++i) net.biases[0](i) = outputs[i];
  return net;
}

Transition simple_transition(double reward, bool terminated, bool truncated = false) {
  Transition t;
  t.obs.values = {0.3, -0.2};
  t.action = Action{0};
  t.reward = reward;
  t.next_obs.values = {0.1, 0.4};
  t.terminated = terminated;
  t.truncated = truncated;
  return t;
}

}  // namespace

TEST_CASE("td targets: terminal transitions do not bootstrap") {
  const Mlp online = table_net(2, {1.0, 2.0});
  const Mlp target = table_net(2, {10.0, 0.0});
  const auto y = ddqn_td_targets({simple_transition(-100.0, true)}, online, target, 0.99);
  CHECK(y(0) == -100.0);
}

TEST_CASE("td targets: the online argmax picks, the target evaluates") {
  const Mlp online = table_net(2, {1.0, 2.0});   // argmax -> index 1
  const Mlp target = table_net(2, {10.0, 0.0});  // evaluates to 0 there
  const auto y = ddqn_td_targets({simple_transition(1.0, false)}, online, target, 0.99);
  CHECK(y(0) == doctest::Approx(1.0 + 0.99 * 0.0));
}

TEST_CASE("td targets: truncated transitions still bootstrap") {
  const Mlp online = table_net(2, {1.0, 2.0});
  const Mlp target = table_net(2, {10.0, 0.5});
  const auto y = ddqn_td_targets({simple_transition(1.0, false, true)}, online, target, 0.5);
  CHECK(y(0) == doctest::Approx(1.0 + 0.5 * 0.5));
}

TEST_CASE("td targets: gamma zero reduces to the rewards") {
  const Mlp online = table_net(2, {0.3, 0.7});
  const Mlp target = table_net(2, {5.0, 6.0});
  std::vector<Transition> batch{simple_transition(2.0, false), simple_transition(-3.0, false)};
  const auto y = ddqn_td_targets(batch, online, target, 0.0);
  CHECK(y(0) == 2.0);
  CHECK(y(1) == -3.0);
}

TEST_CASE("double-q decoupling holds whenever the two argmaxes differ") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const Mlp online = table_net(2, {u(rng), u(rng), u(rng)});
    const Mlp target = table_net(2, {u(rng), u(rng), u(rng)});
    int online_best = 0;
    for (int i = 1; i < 3; ++i)
      if (online.biases[0](i) > online.biases[0](online_best)) online_best = i;
    const auto y = ddqn_td_targets({simple_transition(0.0, false)}, online, target, 1.0);
    CHECK(y(0) == doctest::Approx(target.biases[0](online_best)));
  }
}

TEST_CASE("a self-consistent transition produces zero loss and no parameter motion") {
  AgentHypers h;
  h.batch_size = 8;
  DdqnAgent agent = make_ddqn(2, 2, h, 5);
  Transition t = simple_transition(0.0, true);
  // make the target equal the current prediction exactly
  const Eigen::VectorXd q = mlp_forward(
      agent.online_q, Eigen::Map<const Eigen::VectorXd>(t.obs.values.data(), t.obs.values.size()));
  t.reward = q(0);
  ReplayBuffer buf(4, 6);
  buf.push(t);
  const Mlp before = agent.online_q;
  const double loss = ddqn_update(agent, buf);
  CHECK(loss == doctest::Approx(0.0));
  for (int l = 0; l < before.num_layers(); ++l)
    CHECK((agent.online_q.weights[l] - before.weights[l]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(agent.update_counter == 1);
}

TEST_CASE("hard target sync lands exactly on the update interval") {
  AgentHypers h;
  h.batch_size = 4;
  h.target_update_interval = 10;
  h.learning_rate = 1e-3;
  DdqnAgent agent = make_ddqn(2, 2, h, 7);
  ReplayBuffer buf(16, 8);
  buf.push(simple_transition(1.0, false));
  for (int i = 0; i < 9; ++i) ddqn_update(agent, buf);
  bool diverged = false;
  for (int l = 0; l < agent.online_q.num_layers(); ++l)
    diverged = diverged ||
               (agent.online_q.weights[l] - agent.target_q.weights[l]).cwiseAbs().maxCoeff() > 0;
  CHECK(diverged);  // online has drifted away from target
  ddqn_update(agent, buf);  // update 10 -> sync
  for (int l = 0; l < agent.online_q.num_layers(); ++l) {
    CHECK((agent.online_q.weights[l] - agent.target_q.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((agent.online_q.biases[l] - agent.target_q.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("epsilon-greedy: pure argmax, tie-break, uniform tail") {
  std::mt19937_64 rng(9);
  Eigen::VectorXd q(3);
  q << 0.1, 0.9, 0.3;
  CHECK(epsilon_greedy(q, 0.0, rng) == 1);

  Eigen::VectorXd tie(3);
  tie << 0.5, 0.5, 0.2;
  for (int i = 0; i < 20; ++i) CHECK(epsilon_greedy(tie, 0.0, rng) == 0);  // lowest index wins

  // epsilon = 1: uniform over all three actions
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 30000; ++i) counts[epsilon_greedy(q, 1.0, rng)]++;
  for (int c : counts) CHECK(std::abs(c / 30000.0 - 1.0 / 3) < 0.02);

  // epsilon = 0.1 keeps the greedy arm with probability 1 - eps + eps/3
  Eigen::VectorXd q2(3);
  q2 << 0.0, 5.0, 1.0;
  int greedy = 0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i)
    if (epsilon_greedy(q2, 0.1, rng) == 1) ++greedy;
  CHECK(std::abs(greedy / static_cast<double>(draws) - (0.9 + 0.1 / 3)) < 0.01);
}

TEST_CASE("argmax is invariant to a constant shift of every q output") {
  AgentHypers h;
  DdqnAgent agent = make_ddqn(4, 3, h, 11);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = u(rng);
    const Eigen::VectorXd q = mlp_forward(agent.online_q, x);
    Mlp shifted = agent.online_q;
    shifted.biases.back().array() += 17.5;
    const Eigen::VectorXd qs = mlp_forward(shifted, x);
    std::mt19937_64 r1(1), r2(1);
    CHECK(epsilon_greedy(q, 0.0, r1) == epsilon_greedy(qs, 0.0, r2));
  }
}

TEST_CASE("chain mdp: ddqn reaches the value-iteration fixed point") {
  const double gamma = 0.9;
  AgentHypers h;
  h.gamma = gamma;
  h.batch_size = 64;
  h.learning_rate = 1e-3;
  h.target_update_interval = 250;
  DdqnAgent agent = make_ddqn(chain::kStates, chain::kActions, h, 13);
  ReplayBuffer buf(64, 14);
  for (const Transition& t : chain::exhaustive_experience()) buf.push(t);

  for (int i = 0; i < 8000; ++i) ddqn_update(agent, buf);

  const auto q_star = chain::value_iteration(gamma);
  for (int s = 0; s < 4; ++s) {
    const Eigen::VectorXd q = mlp_forward(
        agent.online_q,
        Eigen::Map<const Eigen::VectorXd>(chain::obs_of(s).values.data(), chain::kStates));
    const int greedy = q(0) > q(1) ? 0 : 1;
    const int optimal = q_star[s][0] > q_star[s][1] ? 0 : 1;
    CHECK(greedy == optimal);
    CHECK(std::abs(q(0) - q_star[s][0]) < 0.05);
    CHECK(std::abs(q(1) - q_star[s][1]) < 0.05);
  }
}

TEST_CASE("sac: deterministic action of a zeroed policy is zero") {
  AgentHypers h;
  SacAgent agent = make_sac(3, 1, 2.0, h, 15);
  for (auto& w : agent.policy.weights) w.setZero();
  for (auto& b : agent.policy.biases) b.setZero();
  std::mt19937_64 rng(16);
  Observation obs;
  obs.values = {0.5, -0.5, 1.0};
  const SacSample s = sac_sample_action(agent, obs, rng, true);
  CHECK(s.action[0] == 0.0);
}

TEST_CASE("sac: sampled actions lie strictly inside the torque bounds") {
  AgentHypers h;
  SacAgent agent = make_sac(3, 1, 2.0, h, 17);
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 5000; ++i) {
    Observation obs;
    obs.values = {u(rng), u(rng), 8 * u(rng)};
    const SacSample s = sac_sample_action(agent, obs, rng, false);
    CHECK(s.action[0] > -2.0);
    CHECK(s.action[0] < 2.0);
  }
}

TEST_CASE("sac: log_prob is a normalized density over the action interval") {
  AgentHypers h;
  SacAgent agent = make_sac(3, 1, 2.0, h, 19);
  Observation obs;
  obs.values = {0.3, -0.8, 2.0};
  // quadrature of exp(log pi(a)) over (-2, 2)
  const int n = 200000;
  double integral = 0.0;
  const double da = 4.0 / n;
  for (int k = 0; k < n; ++k) {
    const double a = -2.0 + (k + 0.5) * da;
    integral += std::exp(sac_log_prob(agent, obs, {a})) * da;
  }
  CHECK(std::abs(integral - 1.0) < 1e-3);

  // sampled pairs agree with the density evaluated at the sampled action
  std::mt19937_64 rng(20);
  for (int i = 0; i < 200; ++i) {
    const SacSample s = sac_sample_action(agent, obs, rng, false);
    CHECK(sac_log_prob(agent, obs, s.action) == doctest::Approx(s.log_prob).epsilon(1e-6));
  }
}

TEST_CASE("sac critic targets: gamma zero gives the rewards; twin-min picks the smaller") {
  AgentHypers h;
  SacAgent agent = make_sac(2, 1, 2.0, h, 21);
  std::vector<Transition> batch;
  for (int i = 0; i < 4; ++i) {
    Transition t;
    t.obs.values = {0.1 * i, -0.1 * i};
    t.next_obs.values = {0.2 * i, 0.1 * i};
    t.action = Action{std::vector<double>{0.5}};
    t.reward = i - 1.5;
    batch.push_back(std::move(t));
  }

  agent.gamma = 0.0;
  const Eigen::VectorXd y0 = sac_critic_targets(agent, batch);
  for (int i = 0; i < 4; ++i) CHECK(y0(i) == doctest::Approx(batch[i].reward));

  // constant-output target critics isolate the min term
  agent.gamma = 1.0;
  agent.log_alpha = -745.0;  // alpha ~ 0
  agent.q1_target = table_net(3, {5.0});
  agent.q2_target = table_net(3, {3.0});
  for (auto& t : batch) t.reward = 0.0;
  const Eigen::VectorXd y = sac_critic_targets(agent, batch);
  for (int i = 0; i < 4; ++i) CHECK(y(i) == doctest::Approx(3.0));
}

TEST_CASE("sac: a tau=1 soft update copies the critics exactly") {
  AgentHypers h;
  SacAgent agent = make_sac(3, 1, 2.0, h, 22);
  ReplayBuffer buf(64, 23);
  std::mt19937_64 rng(24);
  for (int i = 0; i < 40; ++i) {
    Transition t;
    t.obs.values = {0.1, 0.2, 0.3};
    t.next_obs.values = {0.2, 0.3, 0.4};
    t.action = Action{std::vector<double>{std::uniform_real_distribution<double>(-2, 2)(rng)}};
    t.reward = -1.0;
    buf.push(t);
  }
  agent.batch_size = 16;
  sac_update(agent, buf);  // drift critics away from their targets
  sac_soft_update(agent, 1.0);
  for (int l = 0; l < agent.q1.num_layers(); ++l) {
    CHECK((agent.q1.weights[l] - agent.q1_target.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((agent.q2.weights[l] - agent.q2_target.weights[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sac: quadratic bandit optimum is recovered") {
  AgentHypers h;
  h.batch_size = 64;
  h.learning_rate = 3e-4;
  SacAgent agent = make_sac(1, 1, 2.0, h, 25);
  ReplayBuffer buf(10000, 26);
  std::mt19937_64 rng(27);
  Observation obs;
  obs.values = {1.0};
  for (int step = 0; step < 10000; ++step) {
    const SacSample s = sac_sample_action(agent, obs, rng, false);
    Transition t;
    t.obs = obs;
    t.next_obs = obs;
    t.action = Action{s.action};
    t.reward = -(s.action[0] - 1.0) * (s.action[0] - 1.0);
    t.terminated = true;  // one-step episodes
    buf.push(std::move(t));
    sac_update(agent, buf);
  }
  std::mt19937_64 eval_rng(28);
  const SacSample best = sac_sample_action(agent, obs, eval_rng, true);
  CHECK(std::abs(best.action[0] - 1.0) < 0.1);
}

TEST_CASE("greedy rollouts of a frozen agent are deterministic given the env seed") {
  const MdpSpec spec = make_spec(EnvKind::CartPole);
  AgentHypers h;
  auto rollout = [&] {
    auto learner = make_learner(spec, h, 29);
    auto env = make_env(spec, 30);
    std::mt19937_64 rng(31);
    Observation obs = env->reset();
    std::vector<double> rewards;
    while (true) {
      const StepResult r = env->step(learner->act_greedy(obs, rng));
      rewards.push_back(r.reward);
      obs = r.next_obs;
      if (r.terminated || r.truncated) break;
    }
    return rewards;
  };
  CHECK(rollout() == rollout());
}
