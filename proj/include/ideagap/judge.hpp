#pragma once

// Uniform interface to chat-completion judges: a live HTTP gateway client, a
// deterministic seeded mock, a JSONL response cache, and a concurrency
// limiter, all behind one JudgeBackend abstraction.

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ideagap::judge {

// ---------------------------------------------------------------------------
// Requests and responses
// ---------------------------------------------------------------------------

enum class Role { System, User };

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  int max_tokens = 16;
  double temperature = 0.0;
  std::optional<int> top_logprobs;  // request token alternatives when set
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

// Chosen token plus the gateway's ranked alternatives (chosen included).
struct TokenAlternatives {
  std::string chosen_token;
  std::vector<TokenLogprob> alternatives;
};

struct ChatResponse {
  std::string content;
  std::optional<TokenAlternatives> alternatives;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class JudgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transport-level failure after retries were exhausted (or non-retryable).
class RequestFailed : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

// Response arrived but did not contain what the request demanded.
class MalformedResponse : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

class EmptyResponse : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

// Replay-only cache had no entry for the request.
class CacheMiss : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

// ---------------------------------------------------------------------------
// Backend interface
// ---------------------------------------------------------------------------

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_backoff_ms = 250;
  double multiplier = 2.0;
};

struct JudgeConfig {
  std::string endpoint_url;  // full chat-completions URL
  std::string api_key_env = "JUDGE_API_KEY";
  int timeout_seconds = 120;
  int max_in_flight = 4;
  RetryPolicy retry;
  std::optional<std::filesystem::path> cache_path;
};

// Single-token classification call.  Enforces max_tokens=1, temperature=0
// and top_logprobs=20 on the request, and validates the returned
// alternatives: non-empty, chosen token present, all logprobs finite and
// <= 1e-6.
TokenAlternatives complete_single_token(JudgeBackend& backend, const ChatRequest& request);

// Free-text call; empty content raises EmptyResponse.
std::string complete_text(JudgeBackend& backend, const ChatRequest& request);

// Canonical JSON serialization of a request (sorted keys, stable float
// formatting) and its SHA-256 hex digest, used as the cache key.
std::string canonical_request_json(const ChatRequest& request);
std::string request_cache_key(const ChatRequest& request);

std::string sha256_hex(std::string_view bytes);

// First brace-balanced span in `text` that parses as a JSON object (handles
// code fences and surrounding chatter); nullopt when there is none.
std::optional<std::string> extract_json_object(std::string_view text);

// ---------------------------------------------------------------------------
// Concurrency limiter
// ---------------------------------------------------------------------------

// Wraps another backend and allows at most `max_in_flight` concurrent
// complete() calls through it.
class BoundedBackend : public JudgeBackend {
 public:
  BoundedBackend(std::shared_ptr<JudgeBackend> inner, int max_in_flight);

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override;

 private:
  std::shared_ptr<JudgeBackend> inner_;
  int capacity_;
  int in_use_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace ideagap::judge
