#pragma once

// Shared scaffolding for tests: a scripted judge backend, a self-cleaning
// temporary directory, and small builders for papers and word blobs.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ideagap/corpus.hpp"
#include "ideagap/judge.hpp"

namespace testutil {

// Replays a fixed list of responses and records every request it saw.
class ScriptedBackend : public ideagap::judge::JudgeBackend {
 public:
  explicit ScriptedBackend(std::vector<ideagap::judge::ChatResponse> responses)
      : responses_(std::move(responses)) {}

  ideagap::judge::ChatResponse complete(const ideagap::judge::ChatRequest& r) override {
    seen.push_back(r);
    if (next_ >= responses_.size()) throw std::runtime_error("script exhausted");
    return responses_[next_++];
  }
  std::string name() const override { return "scripted"; }

  std::vector<ideagap::judge::ChatRequest> seen;

 private:
  std::vector<ideagap::judge::ChatResponse> responses_;
  std::size_t next_ = 0;
};

inline ideagap::judge::ChatResponse text_response(std::string content) {
  ideagap::judge::ChatResponse r;
  r.content = std::move(content);
  return r;
}

// n space-separated pseudo-words ("w1 w2 ... wn").
inline std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 1; i <= n; ++i) {
    if (!out.empty()) out += ' ';
    out += "w" + std::to_string(i);
  }
  return out;
}

// Unique temporary directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    const auto tag = std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1));
    path_ = std::filesystem::temp_directory_path() / ("ideagap-test-" + tag);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& rel, const std::string& content) const {
    const auto full = path_ / rel;
    std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary);
    out << content;
    return full;
  }

 private:
  std::filesystem::path path_;
};

inline ideagap::corpus::Paper make_paper(std::string id, ideagap::corpus::Cohort cohort,
                                         std::string text) {
  ideagap::corpus::Paper p;
  p.id = std::move(id);
  p.cohort = cohort;
  p.full_text = text;
  p.front_matter = std::move(text);
  return p;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testutil
