#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace loro {

enum class EnvKind { CartPole, Pendulum, FrozenLake, CliffWalking, MountainCar };

std::string env_kind_name(EnvKind k);
EnvKind env_kind_from_name(const std::string& name);

// Discrete actions are 0-based indices here; the 1-based numbering used at
// the text boundary lives in the policy layer.
using Action = std::variant<int, std::vector<double>>;

struct ActionSpace {
  bool discrete = true;
  int n = 0;           // discrete cardinality
  int dim = 0;         // continuous dimensionality
  double lo = 0.0, hi = 0.0;
};

struct MdpSpec {
  EnvKind env_kind = EnvKind::CartPole;
  int horizon_H = 1;
  ActionSpace action_space;
  int obs_dim = 1;
  bool slippery = true;  // FrozenLake only
};

// Standard spec for each environment (horizons: CartPole 500, FrozenLake 100,
// Pendulum / CliffWalking / MountainCar 200).
MdpSpec make_spec(EnvKind kind, bool slippery = true);

struct Observation {
  std::vector<double> values;  // what the learner sees (one-hot for grids)
  int index = -1;              // grid worlds: flat cell index
  int row = -1, col = -1;      // grid worlds: (row, col) decomposition
};

struct StepResult {
  Observation next_obs;
  double reward = 0.0;
  bool terminated = false;  // MDP reached an absorbing outcome
  bool truncated = false;   // horizon hit
};

class Env {
 public:
  virtual ~Env() = default;

  const MdpSpec& spec() const { return spec_; }

  // Starts a new episode, drawing any initial randomness from the env's own
  // seeded generator.
  Observation reset();

  StepResult step(const Action& action);

  long total_steps() const { return total_steps_; }
  int episode_steps() const { return episode_steps_; }

 protected:
  Env(MdpSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {}
  virtual Observation do_reset(std::mt19937_64& rng) = 0;
  virtual StepResult do_step(const Action& action, std::mt19937_64& rng) = 0;

  MdpSpec spec_;

 private:
  std::mt19937_64 rng_;
  long total_steps_ = 0;
  int episode_steps_ = 0;
  bool in_episode_ = false;
};

std::unique_ptr<Env> make_env(const MdpSpec& spec, std::uint64_t seed);

// Fresh seeded environment plus its first observation.
std::pair<std::unique_ptr<Env>, Observation> env_reset(const MdpSpec& spec, std::uint64_t seed);

// Grid geometry shared by FrozenLake (4x4) and CliffWalking (4x12).
int grid_cols(EnvKind kind);
int grid_rows(EnvKind kind);
Observation grid_observation(EnvKind kind, int row, int col);

// FrozenLake map queries (canonical 4x4 layout).
bool frozenlake_is_hole(int row, int col);
bool frozenlake_is_goal(int row, int col);

// CliffWalking map queries.
bool cliffwalking_is_cliff(int row, int col);
bool cliffwalking_is_goal(int row, int col);

}  // namespace loro
