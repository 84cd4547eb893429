#include "ideagap/judge.hpp"

#include <cmath>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ideagap/common.hpp"

namespace ideagap::judge {

namespace {

constexpr double kLogprobSlack = 1e-6;  // tolerate tiny positive logprobs

std::string_view role_name(Role r) { return r == Role::System ? "system" : "user"; }

}  // namespace

TokenAlternatives complete_single_token(JudgeBackend& backend, const ChatRequest& request) {
  if (request.max_tokens != 1 || request.temperature != 0.0 ||
      request.top_logprobs.value_or(0) != 20)
    throw std::invalid_argument(
        "complete_single_token: request must carry max_tokens=1, temperature=0, "
        "top_logprobs=20");

  ChatResponse response = backend.complete(request);
  if (!response.alternatives)
    throw MalformedResponse("single-token response missing logprob block");
  TokenAlternatives alts = std::move(*response.alternatives);
  if (alts.alternatives.empty())
    throw MalformedResponse("single-token response with empty alternatives");

  bool chosen_present = false;
  for (const auto& a : alts.alternatives) {
    if (!std::isfinite(a.logprob) || a.logprob > kLogprobSlack)
      throw MalformedResponse("invalid logprob for token '" + a.token + "'");
    if (a.token == alts.chosen_token) chosen_present = true;
  }
  if (!chosen_present)
    throw MalformedResponse("chosen token absent from alternatives");
  return alts;
}

std::string complete_text(JudgeBackend& backend, const ChatRequest& request) {
  ChatResponse response = backend.complete(request);
  if (trim_view(response.content).empty())
    throw EmptyResponse("empty completion for model " + request.model);
  return response.content;
}

std::string canonical_request_json(const ChatRequest& request) {
  // nlohmann::json orders object keys lexicographically, which is exactly the
  // canonical form needed for stable hashing.
  nlohmann::json j;
  j["model"] = request.model;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : request.messages)
    msgs.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
  j["messages"] = msgs;
  j["max_tokens"] = request.max_tokens;
  j["temperature"] = request.temperature;
  if (request.top_logprobs) j["top_logprobs"] = *request.top_logprobs;
  return j.dump();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string request_cache_key(const ChatRequest& request) {
  return sha256_hex(canonical_request_json(request));
}

namespace {

// Next brace-balanced {...} span starting at or after `from`, respecting
// JSON string literals and escapes.
std::optional<std::string_view> balanced_brace_span(std::string_view text,
                                                    std::size_t from) {
  std::size_t start = text.find('{', from);
  while (start != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}') {
        if (--depth == 0) return text.substr(start, i - start + 1);
      }
    }
    start = text.find('{', start + 1);
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> extract_json_object(std::string_view text) {
  std::size_t from = 0;
  while (true) {
    const auto span = balanced_brace_span(text, from);
    if (!span) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(*span);
      if (j.is_object()) return std::string(*span);
    } catch (const nlohmann::json::parse_error&) {
      // fall through to the next candidate
    }
    from = static_cast<std::size_t>(span->data() - text.data()) + 1;
  }
}

// ---------------------------------------------------------------------------
// BoundedBackend
// ---------------------------------------------------------------------------

BoundedBackend::BoundedBackend(std::shared_ptr<JudgeBackend> inner, int max_in_flight)
    : inner_(std::move(inner)), capacity_(max_in_flight) {
  if (!inner_) throw std::invalid_argument("BoundedBackend: null inner backend");
  if (capacity_ < 1) throw std::invalid_argument("BoundedBackend: capacity must be >= 1");
}

ChatResponse BoundedBackend::complete(const ChatRequest& request) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_use_ < capacity_; });
    ++in_use_;
  }
  struct Release {
    BoundedBackend* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_use_;
      }
      self->cv_.notify_one();
    }
  } release{this};
  return inner_->complete(request);
}

std::string BoundedBackend::name() const { return inner_->name(); }

}  // namespace ideagap::judge
