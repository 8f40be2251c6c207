#include "loro/env.hpp"

#include <cmath>
#include <stdexcept>

namespace loro {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double theta) {
  // wraps to [-pi, pi]
  double t = std::fmod(theta + kPi, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  return t - kPi;
}

int require_discrete(const Action& a, int n) {
  const int* idx = std::get_if<int>(&a);
  if (!idx) throw std::invalid_argument("env: expected a discrete action");
  if (*idx < 0 || *idx >= n) throw std::invalid_argument("env: action index out of range");
  return *idx;
}

double torque_of(const Action& a) {
  if (const auto* v = std::get_if<std::vector<double>>(&a)) {
    if (v->size() != 1) throw std::invalid_argument("pendulum: torque must be 1-dimensional");
    return (*v)[0];
  }
  throw std::invalid_argument("pendulum: expected a continuous action");
}
}  // namespace

std::string env_kind_name(EnvKind k) {
  switch (k) {
    case EnvKind::CartPole: return "cartpole";
    case EnvKind::Pendulum: return "pendulum";
    case EnvKind::FrozenLake: return "frozenlake";
    case EnvKind::CliffWalking: return "cliffwalking";
    case EnvKind::MountainCar: return "mountaincar";
  }
  return "unknown";
}

EnvKind env_kind_from_name(const std::string& name) {
  if (name == "cartpole") return EnvKind::CartPole;
  if (name == "pendulum") return EnvKind::Pendulum;
  if (name == "frozenlake") return EnvKind::FrozenLake;
  if (name == "cliffwalking") return EnvKind::CliffWalking;
  if (name == "mountaincar") return EnvKind::MountainCar;
  throw std::invalid_argument("unknown env name: " + name);
}

MdpSpec make_spec(EnvKind kind, bool slippery) {
  MdpSpec s;
  s.env_kind = kind;
  s.slippery = slippery;
  switch (kind) {
    case EnvKind::CartPole:
      s.horizon_H = 500;
      s.action_space = {true, 2, 0, 0.0, 0.0};
      s.obs_dim = 4;
      break;
    case EnvKind::Pendulum:
      s.horizon_H = 200;
      s.action_space = {false, 0, 1, -2.0, 2.0};
      s.obs_dim = 3;
      break;
    case EnvKind::FrozenLake:
      s.horizon_H = 100;
      s.action_space = {true, 4, 0, 0.0, 0.0};
      s.obs_dim = 16;
      break;
    case EnvKind::CliffWalking:
      s.horizon_H = 200;
      s.action_space = {true, 4, 0, 0.0, 0.0};
      s.obs_dim = 48;
      break;
    case EnvKind::MountainCar:
      s.horizon_H = 200;
      s.action_space = {true, 3, 0, 0.0, 0.0};
      s.obs_dim = 2;
      break;
  }
  return s;
}

int grid_rows(EnvKind kind) { return 4; }
int grid_cols(EnvKind kind) { return kind == EnvKind::CliffWalking ? 12 : 4; }

Observation grid_observation(EnvKind kind, int row, int col) {
  const int cols = grid_cols(kind);
  const int cells = grid_rows(kind) * cols;
  Observation o;
  o.values.assign(cells, 0.0);
  o.row = row;
  o.col = col;
  o.index = row * cols + col;
  o.values[o.index] = 1.0;
  return o;
}

bool frozenlake_is_hole(int row, int col) {
  return (row == 1 && col == 1) || (row == 1 && col == 3) || (row == 2 && col == 3) ||
         (row == 3 && col == 0);
}
bool frozenlake_is_goal(int row, int col) { return row == 3 && col == 3; }

bool cliffwalking_is_cliff(int row, int col) { return row == 3 && col >= 1 && col <= 10; }
bool cliffwalking_is_goal(int row, int col) { return row == 3 && col == 11; }

Observation Env::reset() {
  episode_steps_ = 0;
  in_episode_ = true;
  return do_reset(rng_);
}

StepResult Env::step(const Action& action) {
  if (!in_episode_) throw std::logic_error("env: step before reset or after episode end");
  StepResult r = do_step(action, rng_);
  ++total_steps_;
  ++episode_steps_;
  r.truncated = !r.terminated && episode_steps_ >= spec_.horizon_H;
  if (r.terminated || r.truncated) in_episode_ = false;
  return r;
}

namespace {

class CartPoleEnv final : public Env {
 public:
  CartPoleEnv(MdpSpec spec, std::uint64_t seed) : Env(std::move(spec), seed) {}

 private:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kTotalMass = kMassCart + kMassPole;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kPoleMassLength = kMassPole * kHalfLength;
  static constexpr double kForceMag = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kXThreshold = 2.4;
  static constexpr double kThetaThreshold = 0.2095;

  Observation do_reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    x_ = u(rng);
    x_dot_ = u(rng);
    theta_ = u(rng);
    theta_dot_ = u(rng);
    return obs();
  }

  StepResult do_step(const Action& action, std::mt19937_64&) override {
    const int a = require_discrete(action, 2);
    const double force = a == 1 ? kForceMag : -kForceMag;
    const double cos_t = std::cos(theta_);
    const double sin_t = std::sin(theta_);
    const double temp = (force + kPoleMassLength * theta_dot_ * theta_dot_ * sin_t) / kTotalMass;
    const double theta_acc =
        (kGravity * sin_t - cos_t * temp) /
        (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
    x_ += kDt * x_dot_;
    x_dot_ += kDt * x_acc;
    theta_ += kDt * theta_dot_;
    theta_dot_ += kDt * theta_acc;

    StepResult r;
    r.next_obs = obs();
    r.reward = 1.0;
    r.terminated = std::abs(x_) > kXThreshold || std::abs(theta_) > kThetaThreshold;
    return r;
  }

  Observation obs() const { return Observation{{x_, x_dot_, theta_, theta_dot_}, -1, -1, -1}; }

  double x_ = 0, x_dot_ = 0, theta_ = 0, theta_dot_ = 0;
};

class PendulumEnv final : public Env {
 public:
  PendulumEnv(MdpSpec spec, std::uint64_t seed) : Env(std::move(spec), seed) {}

 private:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;

  Observation do_reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> u_theta(-kPi, kPi);
    std::uniform_real_distribution<double> u_vel(-1.0, 1.0);
    theta_ = u_theta(rng);
    theta_dot_ = u_vel(rng);
    return obs();
  }

  StepResult do_step(const Action& action, std::mt19937_64&) override {
    const double u = std::clamp(torque_of(action), -kMaxTorque, kMaxTorque);
    const double norm = wrap_angle(theta_);
    const double cost = norm * norm + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

    theta_dot_ += (3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                   3.0 / (kMass * kLength * kLength) * u) *
                  kDt;
    theta_dot_ = std::clamp(theta_dot_, -kMaxSpeed, kMaxSpeed);
    theta_ += theta_dot_ * kDt;

    StepResult r;
    r.next_obs = obs();
    r.reward = -cost;
    r.terminated = false;
    return r;
  }

  Observation obs() const {
    return Observation{{std::cos(theta_), std::sin(theta_), theta_dot_}, -1, -1, -1};
  }

  double theta_ = 0, theta_dot_ = 0;
};

class FrozenLakeEnv final : public Env {
 public:
  FrozenLakeEnv(MdpSpec spec, std::uint64_t seed) : Env(std::move(spec), seed) {}

 private:
  // internal actions: 0 left, 1 down, 2 right, 3 up
  Observation do_reset(std::mt19937_64&) override {
    row_ = 0;
    col_ = 0;
    return grid_observation(EnvKind::FrozenLake, row_, col_);
  }

  StepResult do_step(const Action& action, std::mt19937_64& rng) override {
    int a = require_discrete(action, 4);
    if (spec_.slippery) {
      // realized direction: intended or either perpendicular, 1/3 each
      std::uniform_int_distribution<int> pick(0, 2);
      const int offsets[3] = {3, 0, 1};  // a-1, a, a+1 (mod 4)
      a = (a + offsets[pick(rng)]) % 4;
    }
    int nr = row_, nc = col_;
    switch (a) {
      case 0: nc -= 1; break;
      case 1: nr += 1; break;
      case 2: nc += 1; break;
      case 3: nr -= 1; break;
    }
    if (nr < 0 || nr >= 4 || nc < 0 || nc >= 4) {
      nr = row_;
      nc = col_;
    }
    row_ = nr;
    col_ = nc;

    StepResult r;
    r.next_obs = grid_observation(EnvKind::FrozenLake, row_, col_);
    if (frozenlake_is_goal(row_, col_)) {
      r.reward = 1.0;
      r.terminated = true;
    } else if (frozenlake_is_hole(row_, col_)) {
      r.reward = 0.0;
      r.terminated = true;
    } else {
      r.reward = 0.0;
      r.terminated = false;
    }
    return r;
  }

  int row_ = 0, col_ = 0;
};

class CliffWalkingEnv final : public Env {
 public:
  CliffWalkingEnv(MdpSpec spec, std::uint64_t seed) : Env(std::move(spec), seed) {}

 private:
  // internal actions: 0 up, 1 right, 2 down, 3 left
  Observation do_reset(std::mt19937_64&) override {
    row_ = 3;
    col_ = 0;
    return grid_observation(EnvKind::CliffWalking, row_, col_);
  }

  StepResult do_step(const Action& action, std::mt19937_64&) override {
    const int a = require_discrete(action, 4);
    int nr = row_, nc = col_;
    switch (a) {
      case 0: nr -= 1; break;
      case 1: nc += 1; break;
      case 2: nr += 1; break;
      case 3: nc -= 1; break;
    }
    if (nr < 0 || nr >= 4 || nc < 0 || nc >= 12) {
      nr = row_;
      nc = col_;
    }

    StepResult r;
    if (cliffwalking_is_cliff(nr, nc)) {
      r.reward = -100.0;
      row_ = 3;
      col_ = 0;
      r.terminated = false;
    } else {
      r.reward = -1.0;
      row_ = nr;
      col_ = nc;
      r.terminated = cliffwalking_is_goal(row_, col_);
    }
    r.next_obs = grid_observation(EnvKind::CliffWalking, row_, col_);
    return r;
  }

  int row_ = 3, col_ = 0;
};

class MountainCarEnv final : public Env {
 public:
  MountainCarEnv(MdpSpec spec, std::uint64_t seed) : Env(std::move(spec), seed) {}

 private:
  static constexpr double kMinPos = -1.2;
  static constexpr double kMaxPos = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPos = 0.5;

  Observation do_reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> u(-0.6, -0.4);
    pos_ = u(rng);
    vel_ = 0.0;
    return obs();
  }

  StepResult do_step(const Action& action, std::mt19937_64&) override {
    const int a = require_discrete(action, 3);  // 0 left, 1 coast, 2 right
    vel_ += 0.001 * (a - 1) - 0.0025 * std::cos(3.0 * pos_);
    vel_ = std::clamp(vel_, -kMaxSpeed, kMaxSpeed);
    pos_ += vel_;
    pos_ = std::clamp(pos_, kMinPos, kMaxPos);
    if (pos_ <= kMinPos && vel_ < 0.0) vel_ = 0.0;

    StepResult r;
    r.next_obs = obs();
    r.terminated = pos_ >= kGoalPos;
    r.reward = r.terminated ? 0.0 : -1.0;
    return r;
  }

  Observation obs() const { return Observation{{pos_, vel_}, -1, -1, -1}; }

  double pos_ = 0, vel_ = 0;
};

}  // namespace

std::unique_ptr<Env> make_env(const MdpSpec& spec, std::uint64_t seed) {
  switch (spec.env_kind) {
    case EnvKind::CartPole: return std::make_unique<CartPoleEnv>(spec, seed);
    case EnvKind::Pendulum: return std::make_unique<PendulumEnv>(spec, seed);
    case EnvKind::FrozenLake: return std::make_unique<FrozenLakeEnv>(spec, seed);
    case EnvKind::CliffWalking: return std::make_unique<CliffWalkingEnv>(spec, seed);
    case EnvKind::MountainCar: return std::make_unique<MountainCarEnv>(spec, seed);
  }
  throw std::invalid_argument("make_env: unknown env kind");
}

std::pair<std::unique_ptr<Env>, Observation> env_reset(const MdpSpec& spec, std::uint64_t seed) {
  auto env = make_env(spec, seed);
  Observation first = env->reset();
  return {std::move(env), std::move(first)};
}

}  // namespace loro
