#include "ideagap/judge_cache.hpp"

#include <ctime>

#include <nlohmann/json.hpp>

#include "ideagap/common.hpp"

namespace ideagap::judge {

namespace {

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json response_to_json(const ChatResponse& r) {
  nlohmann::json j;
  j["content"] = r.content;
  if (r.alternatives) {
    nlohmann::json tops = nlohmann::json::array();
    for (const auto& t : r.alternatives->alternatives)
      tops.push_back({{"token", t.token}, {"logprob", t.logprob}});
    j["alternatives"] = {{"chosen_token", r.alternatives->chosen_token},
                         {"top", tops}};
  } else {
    j["alternatives"] = nullptr;
  }
  return j;
}

ChatResponse response_from_json(const nlohmann::json& j) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  if (j.contains("alternatives") && !j["alternatives"].is_null()) {
    TokenAlternatives alts;
    alts.chosen_token = j["alternatives"].at("chosen_token").get<std::string>();
    for (const auto& t : j["alternatives"].at("top"))
      alts.alternatives.push_back(
          {t.at("token").get<std::string>(), t.at("logprob").get<double>()});
    r.alternatives = std::move(alts);
  }
  return r;
}

}  // namespace

CachingBackend::CachingBackend(std::shared_ptr<JudgeBackend> inner,
                               std::filesystem::path cache_path)
    : inner_(std::move(inner)), path_(std::move(cache_path)) {
  std::ifstream in(path_);
  if (in) {
    std::string line;
    while (std::getline(in, line)) {
      if (trim_view(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        entries_[j.at("key").get<std::string>()] =
            response_from_json(j.at("response"));
      } catch (const nlohmann::json::exception&) {
        // Tolerate torn/corrupt lines (e.g. interrupted previous run).
        continue;
      }
    }
  } else if (!inner_) {
    throw JudgeError("replay cache not readable: " + path_.string());
  }
}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
  const std::string key = request_cache_key(request);
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      hits_.fetch_add(1);
      return it->second;
    }
  }
  misses_.fetch_add(1);
  if (!inner_)
    throw CacheMiss("no cached response for request " + key + " (model " +
                    request.model + ")");

  // Call through without holding the lock so unrelated requests overlap.
  ChatResponse response = inner_->complete(request);
  {
    std::lock_guard lock(mu_);
    auto [it, inserted] = entries_.emplace(key, response);
    if (inserted) append_entry(key, request, response);
    return it->second;
  }
}

void CachingBackend::append_entry(const std::string& key, const ChatRequest& request,
                                  const ChatResponse& response) {
  if (!out_.is_open()) {
    if (path_.has_parent_path())
      std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::app);
    if (!out_) throw JudgeError("cannot open cache for append: " + path_.string());
  }
  nlohmann::json j;
  j["key"] = key;
  j["request"] = nlohmann::json::parse(canonical_request_json(request));
  j["response"] = response_to_json(response);
  j["timestamp"] = utc_now_iso8601();
  out_ << j.dump() << '\n';
  out_.flush();
}

std::string CachingBackend::name() const {
  return inner_ ? "cache+" + inner_->name() : "cache";
}

}  // namespace ideagap::judge
