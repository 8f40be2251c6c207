#pragma once

#include <stdexcept>
#include <string>

#include "loro/prompts.hpp"

namespace loro {

struct ChatClientConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string api_key;
  int max_attempts = 3;
  int backoff_initial_ms = 200;
  double backoff_factor = 2.0;
  int timeout_seconds = 120;
};

// Reads LORO_LLM_BASE_URL and LORO_LLM_API_KEY.
ChatClientConfig chat_config_from_env();

struct ChatError : std::runtime_error {
  ChatError(const std::string& msg, int attempts_made)
      : std::runtime_error(msg), attempts(attempts_made) {}
  int attempts = 0;
};

// POSTs {base_url}/v1/chat/completions and returns choices[0].message.content.
// Transient transport failures and 5xx responses are retried with exponential
// backoff up to max_attempts total tries; ChatError carries the attempt count.
class ChatClient {
 public:
  explicit ChatClient(ChatClientConfig config);
  std::string complete(const ChatRequest& request) const;

  // Request body as sent on the wire (exposed so tests can pin the sampling
  // fields without a server).
  static std::string request_body_json(const ChatRequest& request);

 private:
  ChatClientConfig config_;
  std::string host_;  // scheme://host:port
  std::string path_prefix_;
};

}  // namespace loro
