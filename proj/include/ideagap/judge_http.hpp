#pragma once

// Live chat-completions client over HTTP(S) with bounded exponential-backoff
// retries.  Auth comes from a Bearer token read out of the environment at
// construction time.

#include <atomic>
#include <cstdint>
#include <functional>

#include "ideagap/judge.hpp"

namespace ideagap::judge {

class HttpJudgeBackend : public JudgeBackend {
 public:
  // Throws JudgeError when the endpoint URL is unusable or the key variable
  // is unset/empty.
  explicit HttpJudgeBackend(JudgeConfig config);

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "live"; }

  // Total network attempts across all calls (observable retry behavior).
  std::uint64_t total_attempts() const { return attempts_.load(); }

  // Test hook: replaces the inter-retry sleep.
  void set_sleeper(std::function<void(int /*ms*/)> fn) { sleeper_ = std::move(fn); }

 private:
  JudgeConfig config_;
  std::string scheme_host_;  // e.g. "https://gateway.example.com:8443"
  std::string path_;         // e.g. "/v1/chat/completions"
  std::string api_key_;
  std::function<void(int)> sleeper_;
  std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace ideagap::judge
