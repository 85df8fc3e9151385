#ifndef EMPA_AGENTS_CHAT_CLIENT_HPP_
#define EMPA_AGENTS_CHAT_CLIENT_HPP_

// Chat-completion client: POST {model, messages, ...} to
// <base_url>/chat/completions and read choices[0].message.content.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "empa/agents/judge_wire.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"

namespace empa::agents {

struct ChatEndpointConfig {
  std::string base_url;
  std::string model_name;
  // Name of the environment variable holding the API key.
  std::string auth_env_var;
  double timeout_s = 60.0;
  int max_retries = 4;
  // Requests per minute across every client of this endpoint; <= 0 disables.
  double rate_limit = 0.0;
  double backoff_initial_s = 1.0;
  double temperature = 0.7;
  double top_p = 1.0;
  int max_tokens = 1024;
};

inline void to_json(json& j, const ChatEndpointConfig& c) {
  j = json{{"base_url", c.base_url},       {"model_name", c.model_name},
           {"auth_env_var", c.auth_env_var}, {"timeout_s", c.timeout_s},
           {"max_retries", c.max_retries},   {"rate_limit", c.rate_limit},
           {"backoff_initial_s", c.backoff_initial_s},
           {"temperature", c.temperature},   {"top_p", c.top_p},
           {"max_tokens", c.max_tokens}};
}

inline void from_json(const json& j, ChatEndpointConfig& c) {
  if (j.contains("api_key")) {
    throw Error(ErrorCode::kConfigError,
                "keys are read from the environment; name the variable in auth_env_var");
  }
  c = ChatEndpointConfig{};
  c.base_url = j.at("base_url").get<std::string>();
  c.model_name = j.at("model_name").get<std::string>();
  c.auth_env_var = j.value("auth_env_var", c.auth_env_var);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.rate_limit = j.value("rate_limit", c.rate_limit);
  c.backoff_initial_s = j.value("backoff_initial_s", c.backoff_initial_s);
  c.temperature = j.value("temperature", c.temperature);
  c.top_p = j.value("top_p", c.top_p);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
}

// Spaces requests at least 60/rpm seconds apart.
class RateLimiter {
 public:
  explicit RateLimiter(double rpm) : rpm_(rpm) {}

  void acquire() {
    if (rpm_ <= 0.0) return;
    const auto interval = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(60.0 / rpm_));
    Clock::time_point slot;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
  }

  // One limiter per (base_url, model) shared by every client in the process.
  static std::shared_ptr<RateLimiter> shared(const ChatEndpointConfig& cfg) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<RateLimiter>> registry;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = registry[cfg.base_url + "|" + cfg.model_name];
    if (!slot) slot = std::make_shared<RateLimiter>(cfg.rate_limit);
    return slot;
  }

 private:
  using Clock = std::chrono::steady_clock;
  double rpm_;
  std::mutex mu_;
  Clock::time_point next_{};
};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "base_url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

class ChatClient {
 public:
  using Logger = std::function<void(const std::string&)>;

  explicit ChatClient(ChatEndpointConfig cfg, Logger log = {})
      : cfg_(std::move(cfg)), log_(std::move(log)), limiter_(RateLimiter::shared(cfg_)) {}

  const ChatEndpointConfig& config() const { return cfg_; }

  // Retries performed by the most recent completed call on this client.
  int last_retries() const { return last_retries_.load(); }

  std::string complete(const std::vector<ChatMessage>& messages) {
    const char* key = cfg_.auth_env_var.empty() ? nullptr : std::getenv(cfg_.auth_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::kAuthMissing,
                  "environment variable '" + cfg_.auth_env_var + "' is empty");
    }
    const SplitUrl url = split_url(cfg_.base_url);

    json body{{"model", cfg_.model_name},
              {"temperature", cfg_.temperature},
              {"top_p", cfg_.top_p},
              {"max_tokens", cfg_.max_tokens},
              {"messages", json::array()}};
    for (const auto& m : messages) {
      body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    const std::string payload = body.dump();
    const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

    ErrorCode last_code = ErrorCode::kBackendFailure;
    std::string last_msg;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        const double wait = cfg_.backoff_initial_s * static_cast<double>(1 << (attempt - 1));
        if (log_) log_("retry " + std::to_string(attempt) + " after " + last_msg);
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      }
      limiter_->acquire();
      httplib::Client client(url.origin);
      const auto secs = static_cast<time_t>(cfg_.timeout_s);
      const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      auto res = client.Post(url.path + "/chat/completions", headers, payload,
                             "application/json");
      if (!res) {
        const auto err = res.error();
        last_code = (err == httplib::Error::Read || err == httplib::Error::Write ||
                     err == httplib::Error::ConnectionTimeout)
                        ? ErrorCode::kTimeout
                        : ErrorCode::kBackendFailure;
        last_msg = "transport error: " + httplib::to_string(err);
        continue;
      }
      if (res->status == 429) {
        last_code = ErrorCode::kRateLimited;
        last_msg = "HTTP 429";
        continue;
      }
      if (res->status >= 500) {
        last_code = ErrorCode::kBackendFailure;
        last_msg = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        last_retries_ = attempt;
        throw Error(ErrorCode::kBackendFailure,
                    "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
      }
      last_retries_ = attempt;
      return read_content(res->body);
    }
    last_retries_ = cfg_.max_retries;
    throw Error(last_code, last_msg + " after " + std::to_string(cfg_.max_retries) + " retries");
  }

  ChatFn as_fn() {
    return [this](const std::vector<ChatMessage>& m) { return complete(m); };
  }

  static std::string read_content(const std::string& body) {
    try {
      const json j = json::parse(body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw Error(ErrorCode::kMalformedResponse, "content not text");
      return content.get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedResponse, e.what());
    }
  }

 private:
  ChatEndpointConfig cfg_;
  Logger log_;
  std::shared_ptr<RateLimiter> limiter_;
  std::atomic<int> last_retries_{0};
};

}  // namespace empa::agents

#endif  // EMPA_AGENTS_CHAT_CLIENT_HPP_
