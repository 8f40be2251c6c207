#pragma once

// In-process chat-completions endpoint for the client and integration tests.
// Responses come from a scripted queue, a responder callback, or a fixed
// fallback, in that order. Every request body is recorded.

#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace mockchat {

class Server {
 public:
  using Responder = std::function<std::string(const nlohmann::json& request)>;

  explicit Server(std::string fallback = "ok") : fallback_(std::move(fallback)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   int status = 200;
                   std::string content;
                   {
                     std::lock_guard<std::mutex> lock(mu_);
                     bodies_.push_back(req.body);
                     if (!script_.empty()) {
                       status = script_.front().first;
                       content = script_.front().second;
                       script_.pop_front();
                     } else if (responder_) {
                       content = responder_(nlohmann::json::parse(req.body));
                     } else {
                       content = fallback_;
                     }
                   }
                   if (status != 200) {
                     res.status = status;
                     res.set_content("simulated failure", "text/plain");
                     return;
                   }
                   nlohmann::json out;
                   out["choices"] = nlohmann::json::array();
                   out["choices"].push_back(
                       {{"message", {{"role", "assistant"}, {"content", content}}}});
                   res.set_content(out.dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~Server() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  void push_response(std::string content, int status = 200) {
    std::lock_guard<std::mutex> lock(mu_);
    script_.push_back({status, std::move(content)});
  }

  void set_responder(Responder r) {
    std::lock_guard<std::mutex> lock(mu_);
    responder_ = std::move(r);
  }

  std::vector<std::string> request_bodies() const {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }

  std::size_t request_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_.size();
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::vector<std::string> bodies_;
  std::deque<std::pair<int, std::string>> script_;
  Responder responder_;
  std::string fallback_;
};

}  // namespace mockchat
