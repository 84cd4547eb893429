#include "ideagap/judge_http.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace ideagap::judge {

namespace {

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

std::string clip(const std::string& s, std::size_t n = 200) {
  return s.size() <= n ? s : s.substr(0, n) + "...";
}

}  // namespace

HttpJudgeBackend::HttpJudgeBackend(JudgeConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint_url;
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw JudgeError("endpoint URL missing scheme: " + url);
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    scheme_host_ = url;
    path_ = "/";
  } else {
    scheme_host_ = url.substr(0, slash);
    path_ = url.substr(slash);
  }

  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key)
    throw JudgeError("API key environment variable not set: " + config_.api_key_env);
  api_key_ = key;

  sleeper_ = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

ChatResponse HttpJudgeBackend::complete(const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = request.model;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : request.messages)
    msgs.push_back({{"role", m.role == Role::System ? "system" : "user"},
                    {"content", m.content}});
  body["messages"] = msgs;
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;
  if (request.top_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = *request.top_logprobs;
  }
  const std::string payload = body.dump();

  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  std::string last_error;
  const RetryPolicy& rp = config_.retry;
  for (int attempt = 1; attempt <= rp.max_attempts; ++attempt) {
    attempts_.fetch_add(1);
    // A fresh client per attempt keeps this trivially thread-safe.
    httplib::Client cli(scheme_host_);
    cli.set_connection_timeout(30, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);

    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw MalformedResponse(std::string("response is not JSON: ") + e.what());
      }
      try {
        const auto& choice = j.at("choices").at(0);
        ChatResponse out;
        out.content = choice.at("message").at("content").get<std::string>();
        if (request.top_logprobs) {
          if (!choice.contains("logprobs") || choice["logprobs"].is_null())
            throw MalformedResponse("response missing logprob block");
          const auto& first = choice.at("logprobs").at("content").at(0);
          TokenAlternatives alts;
          alts.chosen_token = first.at("token").get<std::string>();
          const double chosen_lp = first.at("logprob").get<double>();
          bool chosen_seen = false;
          for (const auto& t : first.at("top_logprobs")) {
            TokenLogprob tl{t.at("token").get<std::string>(),
                            t.at("logprob").get<double>()};
            if (tl.token == alts.chosen_token) chosen_seen = true;
            alts.alternatives.push_back(std::move(tl));
          }
          if (!chosen_seen)
            alts.alternatives.insert(alts.alternatives.begin(),
                                     {alts.chosen_token, chosen_lp});
          out.alternatives = std::move(alts);
        }
        return out;
      } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(std::string("unexpected response shape: ") + e.what());
      }
    } else if (retryable_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + clip(res->body);
    } else {
      throw RequestFailed("HTTP " + std::to_string(res->status) + ": " + clip(res->body));
    }

    if (attempt < rp.max_attempts) {
      const double backoff =
          rp.base_backoff_ms * std::pow(rp.multiplier, attempt - 1);
      sleeper_(static_cast<int>(backoff));
    }
  }
  throw RequestFailed("request failed after " + std::to_string(rp.max_attempts) +
                      " attempts; last error: " + last_error);
}

}  // namespace ideagap::judge
