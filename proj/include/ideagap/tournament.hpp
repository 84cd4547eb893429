#pragma once

// Position-swapped pairwise tournament over papers with TrueSkill-style
// rating updates.  Each scheduled match asks the judge twice (A-then-B and
// B-then-A); only agreement in both orders produces a decisive outcome.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ideagap/corpus.hpp"
#include "ideagap/judge.hpp"
#include "ideagap/trueskill.hpp"

namespace ideagap::tournament {

using trueskill::MatchOutcome;

// Verdict of a single ordered comparison.
enum class Judgment { FirstListedWins, SecondListedWins };

struct PairwiseDecision {
  Judgment judgment = Judgment::FirstListedWins;
  std::string confidence;  // "high" / "medium" / "low"; may be empty
};

class PairwiseJudge {
 public:
  virtual ~PairwiseJudge() = default;
  // Must be safe to call from multiple threads concurrently.
  virtual PairwiseDecision judge(const corpus::Paper& first,
                                 const corpus::Paper& second) = 0;
};

// Decisive only when both orders agree on the same underlying paper.
MatchOutcome aggregate_outcome(Judgment ab, Judgment ba);

struct MatchRecord {
  std::size_t match_index = 0;
  std::string paper_a;
  std::string paper_b;
  Judgment judgment_ab = Judgment::FirstListedWins;  // a listed first
  Judgment judgment_ba = Judgment::FirstListedWins;  // b listed first
  MatchOutcome outcome = MatchOutcome::Tie;
  std::string confidence_ab;
  std::string confidence_ba;
};

struct LeaderboardEntry {
  std::string paper_id;
  double mu = 0.0;
  double sigma = 0.0;
  double conservative = 0.0;
  std::size_t matches_played = 0;
};

struct TournamentConfig {
  std::size_t n_matches = 200;
  std::uint64_t seed = 0;       // drives pairing only
  int concurrency = 1;          // parallel judging; updates stay ordered
  trueskill::TrueSkillParams params;
};

struct TournamentResult {
  // Sorted by conservative rating (desc), ties by paper id (asc).
  std::vector<LeaderboardEntry> leaderboard;
  std::vector<MatchRecord> matches;           // successful matches only
  std::vector<std::string> failures;          // skipped matches, with reasons
};

// Uniform random pairings without immediate rematches; ratings are updated
// sequentially in schedule order, so results do not depend on judging
// concurrency (decisions are per-match).
TournamentResult run_tournament(std::span<const corpus::Paper> papers,
                                PairwiseJudge& judge, const TournamentConfig& config);

// ---------------------------------------------------------------------------
// Judges
// ---------------------------------------------------------------------------

// Asks a chat model to pick the stronger of two paper excerpts.
class LlmPairwiseJudge : public PairwiseJudge {
 public:
  LlmPairwiseJudge(judge::JudgeBackend& backend, std::string model,
                   std::size_t char_budget = 20000);

  PairwiseDecision judge(const corpus::Paper& first,
                         const corpus::Paper& second) override;

 private:
  judge::JudgeBackend& backend_;
  std::string model_;
  std::size_t char_budget_;
};

// Synthetic judge with known latent qualities: P(first wins) is a logistic
// function of the quality difference.  Deterministic given (seed, ids);
// used for convergence checks.
class SimulatedPairwiseJudge : public PairwiseJudge {
 public:
  SimulatedPairwiseJudge(std::map<std::string, double> latent_quality,
                         double accuracy_scale, std::uint64_t seed);

  PairwiseDecision judge(const corpus::Paper& first,
                         const corpus::Paper& second) override;

 private:
  std::map<std::string, double> latent_;
  double scale_;
  std::uint64_t seed_;
};

}  // namespace ideagap::tournament
