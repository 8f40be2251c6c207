#include "loro/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace loro {

using nlohmann::json;

ChatClientConfig chat_config_from_env() {
  ChatClientConfig c;
  if (const char* url = std::getenv("LORO_LLM_BASE_URL")) c.base_url = url;
  if (const char* key = std::getenv("LORO_LLM_API_KEY")) c.api_key = key;
  return c;
}

ChatClient::ChatClient(ChatClientConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty())
    throw std::invalid_argument("chat client: base url is empty (set LORO_LLM_BASE_URL)");
  // split scheme://host:port from any path prefix
  std::string url = config_.base_url;
  if (!url.empty() && url.back() == '/') url.pop_back();
  const std::size_t scheme = url.find("://");
  const std::size_t path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    host_ = url;
  } else {
    host_ = url.substr(0, path_start);
    path_prefix_ = url.substr(path_start);
  }
}

std::string ChatClient::request_body_json(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  body["messages"] = json::array();
  for (const ChatMessage& m : request.messages)
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = request.temperature;
  body["top_p"] = request.top_p;
  if (request.top_k > 0) body["top_k"] = request.top_k;
  body["max_tokens"] = request.max_tokens;
  return body.dump();
}

std::string ChatClient::complete(const ChatRequest& request) const {
  const std::string body = request_body_json(request);
  const std::string path = path_prefix_ + "/v1/chat/completions";

  httplib::Client cli(host_);
  cli.set_connection_timeout(config_.timeout_seconds);
  cli.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.insert({"Authorization", "Bearer " + config_.api_key});

  std::string last_error;
  int attempts = 0;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      const double delay = config_.backoff_initial_ms *
                           std::pow(config_.backoff_factor, static_cast<double>(attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
    }
    ++attempts;
    httplib::Result res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw ChatError("chat endpoint returned status " + std::to_string(res->status) + " after " +
                          std::to_string(attempts) + " attempt(s)",
                      attempts);
    json parsed;
    try {
      parsed = json::parse(res->body);
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw ChatError(std::string("malformed chat response: ") + e.what(), attempts);
    }
  }
  throw ChatError("chat request failed after " + std::to_string(attempts) +
                      " attempts: " + last_error,
                  attempts);
}

}  // namespace loro
