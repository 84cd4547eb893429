#pragma once

// Seeded deterministic judge: responses are a pure function of (seed,
// request), so identical runs produce identical bytes with no network.
// The response shape is inferred from the request: single-token requests get
// tier logprobs, rubric/pairwise prompts get JSON, extraction prompts get a
// summary paragraph.

#include <cstdint>

#include "ideagap/judge.hpp"

namespace ideagap::judge {

class MockJudgeBackend : public JudgeBackend {
 public:
  explicit MockJudgeBackend(std::uint64_t seed) : seed_(seed) {}

  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "mock"; }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace ideagap::judge
