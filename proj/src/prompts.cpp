#include "loro/prompts.hpp"

#include <cmath>
#include <cstdio>

namespace loro {

namespace {

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

const char* kCartPoleSystem =
    "You are an expert-level game player. In the CartPole game, you control a cart that moves "
    "along a horizontal track. There is a pole standing upright on the cart. The goal of the game "
    "is to keep the pole balanced upright by moving the cart left or right. The game ends if the "
    "pole tilts too far from the vertical position or if the cart moves too far from the center "
    "of the track. The longer you can keep the pole balanced, the higher your score. Note that "
    "when the Cart Position is out of the (-2.4, 2.4) zone or the Pole Angle is out of the zone "
    "(-.2095, .2095), the round ends and the game is lost. The goal is to keep the pole balanced "
    "upright for as long as possible. \n"
    "Type '1' to push the cart to the left or '2' to push the cart to the right. Ensure you only "
    "provide the action number from the valid action list, i.e., [1, 2].";

const char* kMountainCarSystem =
    "You are an expert-level game player. In the Mountain Car game, you control a car placed "
    "stochastically at the bottom of a sinusoidal valley. The only possible actions are the "
    "accelerations that can be applied to the car in either direction. The goal of the game is to "
    "strategically accelerate the car to reach the goal state on top of the right hill as quickly "
    "as possible. The episode ends if either the car reaches the goal position on top of the "
    "right hill or the length of the episode is 200. The goal is to reach the flag placed on top "
    "of the right hill as quickly as possible. \n"
    "Type '1' to accelerate to the left, '2' to not accelerate, or '3' to accelerate to the "
    "right. Ensure you only provide the action number from the valid action list, i.e., "
    "[1, 2, 3].";

const char* kPendulumSystem =
    "You are an expert-level game player. In the Pendulum game, you control a pendulum attached "
    "to a fixed pivot point. The goal is to apply torques to swing the pendulum upright and keep "
    "it balanced. The game ends if the pendulum cannot be stabilized within the given time limit. "
    "The closer the pendulum is to the upright position, the higher your score. The goal is to "
    "swing the pendulum upright and keep it balanced. Provide a torque value (e.g., a float "
    "between -2.0 and 2.0) to control the pendulum's movement. Return the torque value enclosed "
    "in < and >, e.g., <1.5>.";

const char* kCliffWalkingSystemHead =
    "You are an expert-level game player. Cliff walking is a task in which you control a player "
    "navigating a '4x12' grid world. The ('x', 'y') coordinate indicates the position at row 'x' "
    "and column 'y'. The player needs to find a goal location while avoiding cliffs. The player "
    "can choose from 4 actions: move up, move right, move down, or move left. If the player takes "
    "an action at ('x', 'y'), he tries to move to ('a', 'b'). Rules: 1. If ('a', 'b') is a cliff, "
    "the player incurs a large penalty of -100, and is reset to the starting position. 2. If "
    "('a', 'b') is safe or towards the grid boundary, results in a small penalty of -1. If "
    "('a', 'b') is outside the grid's boundaries, it does not change position but still receive "
    "the -1 penalty. 3. The game ends when the ('a', 'b') is the goal or 200 actions are "
    "performed. The goal is to navigate from the starting point to an target, while avoiding the "
    "cliff, in as few steps as possible.\n"
    "Type a number to indicate the action. For current position ('x', 'y'), the action means the "
    "player try to step into the next position. Type '1' to move up, which means trying to step "
    "into ('x-1', 'y'), '2' to move right, which means ('x', 'y+1'), '3' to move down, which "
    "means ('x+1', 'y'), or '4' to move left, which means ('x', 'y-1'). Ensure you only provide "
    "the action number from the valid action list, i.e., [1, 2, 3, 4]. ";

const char* kFrozenLakeSystemHead =
    "You are an expert-level game player. In the FrozenLake game, the player starts at the start "
    "position of the grid and tries to reach the goal position. There are holes which the player "
    "must avoid. The frozen lake is slippery, meaning that the player might not always move in "
    "the intended direction. The game ends when the player reaches the goal or falls into a "
    "hole. The goal is to navigate across the frozen lake and reach the goal position without "
    "falling into any holes. For current position ('x', 'y'), the action means the player try to "
    "step into the next position. The possible actions are: 1: Move left, which means "
    "('x', 'y-1'), 2: Move down, which means ('x+1', 'y'), 3: Move right, which means "
    "('x', 'y+1'), 4: Move up, which means trying to step into ('x-1', 'y'). Ensure you only "
    "provide the action number from the valid action list, i.e., [1, 2, 3, 4]. Do not return the "
    "target's coordination. ";

std::string reward_text_for_prev(double r, EnvKind kind) {
  if (kind == EnvKind::FrozenLake) return fixed(r, 1);
  return std::to_string(static_cast<long>(r));
}

std::string grid_tail(EnvKind kind, const EnvHistory& history) {
  std::string s = "Environment history: ";
  const std::string rendered = render_history(history, kind);
  if (!rendered.empty()) s += rendered + " ";
  if (history.prev) {
    const PrevStep& p = *history.prev;
    s += "Previous location: (" + std::to_string(p.loc.row) + ", " + std::to_string(p.loc.col) +
         "), previous action: " + std::to_string(p.action_external) +
         ", previous reward: " + reward_text_for_prev(p.reward, kind) + ". ";
  }
  s += " Return the action at the end of your answer without the target's location.";
  return s;
}

}  // namespace

std::string system_prompt_text(EnvKind kind, const EnvHistory& history) {
  switch (kind) {
    case EnvKind::CartPole: return kCartPoleSystem;
    case EnvKind::MountainCar: return kMountainCarSystem;
    case EnvKind::Pendulum: return kPendulumSystem;
    case EnvKind::CliffWalking: return kCliffWalkingSystemHead + grid_tail(kind, history);
    case EnvKind::FrozenLake: return kFrozenLakeSystemHead + grid_tail(kind, history);
  }
  return "";
}

std::string user_message_text(EnvKind kind, const Observation& obs) {
  switch (kind) {
    case EnvKind::CartPole: {
      const double x = obs.values[0], v = obs.values[1], th = obs.values[2], om = obs.values[3];
      return "The cart is positioned at " + fixed(x, 3) + ", with a velocity of " +
             fixed(std::abs(v), 2) + " towards the " + (v > 0 ? "right" : "left") +
             ". The pole is tilted at " + fixed(std::abs(th), 2) + " radians, rotating at " +
             fixed(std::abs(om), 2) + " radians per second towards the " +
             (om > 0 ? "right" : "left") + ".\nThink step by step.";
    }
    case EnvKind::MountainCar: {
      const double p = obs.values[0], v = obs.values[1];
      return "The car is positioned at " + fixed(p, 3) + ", with a velocity of " +
             fixed(std::abs(v), 3) + " towards the " + (v > 0 ? "right" : "left") +
             ".\nThink step by step.";
    }
    case EnvKind::Pendulum: {
      // angle and turning direction are derived for the prompt only
      const double theta = std::atan2(obs.values[1], obs.values[0]);
      const double om = obs.values[2];
      return "The pendulum is at an angle of " + fixed(theta, 3) +
             " radians from the vertical (zero when upright), rotating at " +
             fixed(std::abs(om), 2) + " radians per second in the " +
             (om > 0 ? "clockwise" : "counterclockwise") + " direction.\nThink step by step.";
    }
    case EnvKind::FrozenLake:
      return "You are at row " + std::to_string(obs.row) + ", column " + std::to_string(obs.col) +
             ".\nThink step by step.";
    case EnvKind::CliffWalking:
      return "You are at location (" + std::to_string(obs.row) + ", " + std::to_string(obs.col) +
             ") in the grid world.\nThink step by step.";
  }
  return "";
}

ChatRequest build_prompt(EnvKind kind, const Observation& obs, const EnvHistory& history,
                         const std::string& model) {
  ChatRequest req;
  req.model = model;
  req.messages.push_back({"system", system_prompt_text(kind, history)});
  req.messages.push_back({"user", user_message_text(kind, obs)});
  return req;
}

}  // namespace loro
