#pragma once

#include <string>
#include <vector>

#include "loro/env.hpp"
#include "loro/history.hpp"

namespace loro {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;  // first message is the system prompt
  double temperature = 0.9;
  double top_p = 0.6;
  int top_k = 0;
  int max_tokens = 2000;
};

// System prompt for the environment, with the rendered reward history and the
// previous-step line appended for the grid worlds.
std::string system_prompt_text(EnvKind kind, const EnvHistory& history);

// Current observation phrased the way the game wrappers describe it, ending
// with "Think step by step."
std::string user_message_text(EnvKind kind, const Observation& obs);

ChatRequest build_prompt(EnvKind kind, const Observation& obs, const EnvHistory& history,
                         const std::string& model = "");

}  // namespace loro
