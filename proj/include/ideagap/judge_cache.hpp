#pragma once

// Append-only JSONL response cache keyed by the SHA-256 of the canonical
// request JSON.  With an inner backend it is a write-through cache; without
// one it replays a previous run and treats any miss as an error.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "ideagap/judge.hpp"

namespace ideagap::judge {

class CachingBackend : public JudgeBackend {
 public:
  // inner == nullptr selects replay-only mode.
  CachingBackend(std::shared_ptr<JudgeBackend> inner, std::filesystem::path cache_path);

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override;

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t size() const { return entries_.size(); }

 private:
  void append_entry(const std::string& key, const ChatRequest& request,
                    const ChatResponse& response);

  std::shared_ptr<JudgeBackend> inner_;
  std::filesystem::path path_;
  std::unordered_map<std::string, ChatResponse> entries_;
  std::mutex mu_;
  std::ofstream out_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace ideagap::judge
