#pragma once

// Idea-quality measurement: summarize a paper's core idea from its front
// matter, classify the summary into one of four tiers via single-token
// logprobs, and average the top-tier probability across an ensemble of
// judge models.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ideagap/judge.hpp"

namespace ideagap::idea {

class IdeaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExtractionFailed : public IdeaError {
 public:
  using IdeaError::IdeaError;
};

// No alternative token matched any tier name.
class NoTierSignal : public IdeaError {
 public:
  using IdeaError::IdeaError;
};

class InvalidLogprob : public IdeaError {
 public:
  using IdeaError::IdeaError;
};

// Tier order is fixed and meaningful: best to worst.
enum class Tier { Exceptional = 0, Strong = 1, Fair = 2, Limited = 3 };

inline constexpr std::array<Tier, 4> kTiers = {Tier::Exceptional, Tier::Strong,
                                               Tier::Fair, Tier::Limited};

std::string_view tier_name(Tier t);
std::optional<Tier> parse_tier(std::string_view name);

// Probabilities over the four tiers, in kTiers order; sums to 1.
struct TierDistribution {
  std::array<double, 4> p{};

  double operator[](Tier t) const { return p[static_cast<std::size_t>(t)]; }
};

struct IdeaSummary {
  std::string paper_id;
  std::string text;
  std::size_t word_count = 0;
  bool retried = false;       // a second extraction attempt was made
  bool out_of_band = false;   // final length outside the accepted 80-220 band
};

struct ModelScore {
  TierDistribution distribution;
  Tier predicted_tier = Tier::Limited;
};

struct IdeaScore {
  std::string paper_id;
  // Keyed by model id; iteration order (lexicographic) is the canonical
  // serialization order.
  std::map<std::string, ModelScore> per_model;
  double ensemble_exceptional = 0.0;
};

struct ExtractionConfig {
  std::string model;
  int max_tokens = 512;           // must stay >= 400 for a full paragraph
  std::size_t target_min = 120;   // preferred band
  std::size_t target_max = 150;
  std::size_t accept_min = 80;    // accepted after one retry; outside -> flagged
  std::size_t accept_max = 220;
};

// One summary per paper.  Retries once with a length reminder when the first
// attempt misses the 120-150 word band; an empty text on both attempts is
// ExtractionFailed.
IdeaSummary extract_idea(const std::string& paper_id, const std::string& front_matter,
                         judge::JudgeBackend& backend, const ExtractionConfig& config);

// Logprobs for the four tiers (kTiers order) recovered from the gateway's
// token alternatives: tokens are trimmed, lowercased and prefix-matched
// against tier names; a tier absent from the alternatives is imputed at
// (min observed logprob - 10).
std::array<double, 4> fill_missing_tiers(const judge::TokenAlternatives& alternatives);

// Softmax over the four tier logprobs.  Invariant under a common shift;
// output sums to 1.
TierDistribution softmax_tiers(const std::array<double, 4>& logprobs);

// Highest-probability tier; an exact tie goes to the better tier.
Tier argmax_tier(const TierDistribution& dist);

// Full single-token classification round trip for one model.
ModelScore classify_tier(const IdeaSummary& summary, const std::string& model_id,
                         judge::JudgeBackend& backend);

// Mean p[Exceptional] across the ensemble (at least one model required).
IdeaScore ensemble_idea_score(
    const std::string& paper_id,
    const std::vector<std::pair<std::string, ModelScore>>& per_model);

}  // namespace ideagap::idea
