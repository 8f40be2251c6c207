#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>

#include "loro/chat_client.hpp"
#include "loro/env.hpp"
#include "loro/extract.hpp"
#include "loro/history.hpp"
#include "loro/prompts.hpp"
#include "loro/replay.hpp"

namespace loro {

enum class PolicyKind { Llm, Scripted, Random };

std::string policy_kind_name(PolicyKind k);
PolicyKind policy_kind_from_name(const std::string& name);

// Action numbering at the text boundary is 1-based; the environments are
// 0-based. These two functions own that mapping.
int external_to_internal(EnvKind kind, int external_action);
int internal_to_external(EnvKind kind, int internal_action);

std::vector<int> valid_external_actions(EnvKind kind);

// Deterministic stand-in policies, one per environment, phrased in external
// numbering (Pendulum returns a torque instead).
Action scripted_act(EnvKind kind, const Observation& obs);

// Uniform random action in env-internal form.
Action random_act(const MdpSpec& spec, std::mt19937_64& rng);

struct LlmOptions {
  std::string base_url;
  std::string api_key;
  std::string model;
  std::string transcript_path;  // append-only audit log, empty = off
  int max_attempts = 3;
  int backoff_initial_ms = 200;
  HistoryMode history_mode = HistoryMode::Summary;
  std::optional<int> history_window;
};

// Maps observations (plus history for the grid worlds) to env-ready actions.
class PolicySource {
 public:
  static PolicySource scripted(EnvKind kind);
  static PolicySource random(EnvKind kind);
  static PolicySource llm(EnvKind kind, const LlmOptions& options);

  PolicyKind kind() const { return kind_; }
  SourceTag tag() const;

  void begin_episode();
  // Chooses the next action; queries the endpoint for the Llm kind. On an
  // extraction failure the query is retried once, then a uniformly random
  // valid action is substituted and counted.
  Action act(const Observation& obs, std::mt19937_64& rng);
  // Threads the step outcome into the history and previous-step line.
  void observe_step(const Observation& obs_before, const Action& taken, const StepResult& result);

  long extraction_failures() const { return extraction_failures_; }
  const EnvHistory& history() const { return history_; }

 private:
  PolicySource(PolicyKind kind, EnvKind env);

  Action llm_act(const Observation& obs, std::mt19937_64& rng);
  void log_transcript(const ChatRequest& req, const std::string& completion,
                      const std::string& extracted);

  PolicyKind kind_;
  EnvKind env_;
  MdpSpec spec_;
  EnvHistory history_;
  long extraction_failures_ = 0;
  LlmOptions options_;
  std::shared_ptr<ChatClient> client_;
};

}  // namespace loro
