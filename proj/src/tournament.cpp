#include "ideagap/tournament.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ideagap/common.hpp"
#include "ideagap/prompts.hpp"

namespace ideagap::tournament {

MatchOutcome aggregate_outcome(Judgment ab, Judgment ba) {
  // ab: a listed first, so FirstListedWins favors a.
  // ba: b listed first, so SecondListedWins favors a.
  if (ab == Judgment::FirstListedWins && ba == Judgment::SecondListedWins)
    return MatchOutcome::AWins;
  if (ab == Judgment::SecondListedWins && ba == Judgment::FirstListedWins)
    return MatchOutcome::BWins;
  return MatchOutcome::Tie;
}

// ---------------------------------------------------------------------------
// run_tournament
// ---------------------------------------------------------------------------

namespace {

struct JudgedMatch {
  PairwiseDecision ab;
  PairwiseDecision ba;
  std::optional<std::string> failure;
};

}  // namespace

TournamentResult run_tournament(std::span<const corpus::Paper> papers,
                                PairwiseJudge& judge, const TournamentConfig& config) {
  const std::size_t n = papers.size();
  if (n < 2) throw std::invalid_argument("run_tournament: need at least 2 papers");

  // Schedule: uniform ordered pairs, no immediate unordered rematch.
  SmallRng rng(config.seed);
  std::vector<std::pair<std::size_t, std::size_t>> schedule;
  schedule.reserve(config.n_matches);
  std::size_t prev_lo = n, prev_hi = n;
  for (std::size_t m = 0; m < config.n_matches; ++m) {
    while (true) {
      const std::size_t i = static_cast<std::size_t>(rng.next_below(n));
      std::size_t j = static_cast<std::size_t>(rng.next_below(n - 1));
      if (j >= i) ++j;
      const std::size_t lo = std::min(i, j), hi = std::max(i, j);
      if (n > 2 && lo == prev_lo && hi == prev_hi) continue;
      schedule.emplace_back(i, j);
      prev_lo = lo;
      prev_hi = hi;
      break;
    }
  }

  // Judge all scheduled matches (possibly in parallel; decisions are pure
  // per match, so ordering of judging does not matter).
  std::vector<JudgedMatch> judged(schedule.size());
  auto judge_one = [&](std::size_t m) {
    const corpus::Paper& a = papers[schedule[m].first];
    const corpus::Paper& b = papers[schedule[m].second];
    try {
      judged[m].ab = judge.judge(a, b);
      judged[m].ba = judge.judge(b, a);
    } catch (const std::exception& e) {
      judged[m].failure = std::string(e.what());
    }
  };
  const int workers = std::max(1, config.concurrency);
  if (workers == 1 || schedule.size() < 2) {
    for (std::size_t m = 0; m < schedule.size(); ++m) judge_one(m);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int count = std::min<std::size_t>(workers, schedule.size());
    for (int w = 0; w < count; ++w)
      pool.emplace_back([&] {
        while (true) {
          const std::size_t m = next.fetch_add(1);
          if (m >= schedule.size()) return;
          judge_one(m);
        }
      });
    for (auto& t : pool) t.join();
  }

  // Sequential rating updates in schedule order.
  std::vector<trueskill::SkillRating> ratings(n, config.params.initial());
  std::vector<std::size_t> played(n, 0);
  TournamentResult result;
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    const auto [ia, ib] = schedule[m];
    if (judged[m].failure) {
      result.failures.push_back("match " + std::to_string(m) + " (" + papers[ia].id +
                                " vs " + papers[ib].id + "): " + *judged[m].failure);
      continue;
    }
    MatchRecord rec;
    rec.match_index = m;
    rec.paper_a = papers[ia].id;
    rec.paper_b = papers[ib].id;
    rec.judgment_ab = judged[m].ab.judgment;
    rec.judgment_ba = judged[m].ba.judgment;
    rec.confidence_ab = judged[m].ab.confidence;
    rec.confidence_ba = judged[m].ba.confidence;
    rec.outcome = aggregate_outcome(rec.judgment_ab, rec.judgment_ba);

    const auto [na, nb] =
        trueskill::update_ratings(ratings[ia], ratings[ib], rec.outcome, config.params);
    ratings[ia] = na;
    ratings[ib] = nb;
    ++played[ia];
    ++played[ib];
    result.matches.push_back(std::move(rec));
  }

  result.leaderboard.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LeaderboardEntry e;
    e.paper_id = papers[i].id;
    e.mu = ratings[i].mu;
    e.sigma = ratings[i].sigma;
    e.conservative =
        trueskill::conservative_rating(ratings[i], config.params.k_conservative);
    e.matches_played = played[i];
    result.leaderboard.push_back(std::move(e));
  }
  std::sort(result.leaderboard.begin(), result.leaderboard.end(),
            [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
              if (a.conservative != b.conservative)
                return a.conservative > b.conservative;
              return a.paper_id < b.paper_id;
            });
  return result;
}

// ---------------------------------------------------------------------------
// LlmPairwiseJudge
// ---------------------------------------------------------------------------

LlmPairwiseJudge::LlmPairwiseJudge(judge::JudgeBackend& backend, std::string model,
                                   std::size_t char_budget)
    : backend_(backend), model_(std::move(model)), char_budget_(char_budget) {}

PairwiseDecision LlmPairwiseJudge::judge(const corpus::Paper& first,
                                         const corpus::Paper& second) {
  judge::ChatRequest request;
  request.model = model_;
  request.max_tokens = 256;
  request.temperature = 0.0;
  std::string user = "Paper A:\n";
  user += utf8_truncate(first.full_text, char_budget_);
  user += "\nPaper B:\n";
  user += utf8_truncate(second.full_text, char_budget_);
  user += "\n\nWhich paper is stronger?";
  request.messages = {{judge::Role::System, std::string(prompts::pairwise_judge_system())},
                      {judge::Role::User, std::move(user)}};

  const std::string reply = judge::complete_text(backend_, request);
  const auto span = judge::extract_json_object(reply);
  if (!span)
    throw judge::MalformedResponse("pairwise verdict is not JSON: " +
                                   reply.substr(0, 120));
  const auto j = nlohmann::json::parse(*span);
  if (!j.contains("winner") || !j["winner"].is_string())
    throw judge::MalformedResponse("pairwise verdict missing winner");
  const std::string winner = to_lower(trim(j["winner"].get<std::string>()));

  PairwiseDecision decision;
  if (winner == "a")
    decision.judgment = Judgment::FirstListedWins;
  else if (winner == "b")
    decision.judgment = Judgment::SecondListedWins;
  else
    throw judge::MalformedResponse("pairwise verdict names unknown winner: " + winner);
  if (j.contains("confidence") && j["confidence"].is_string())
    decision.confidence = j["confidence"].get<std::string>();
  return decision;
}

// ---------------------------------------------------------------------------
// SimulatedPairwiseJudge
// ---------------------------------------------------------------------------

SimulatedPairwiseJudge::SimulatedPairwiseJudge(std::map<std::string, double> latent_quality,
                                               double accuracy_scale, std::uint64_t seed)
    : latent_(std::move(latent_quality)), scale_(accuracy_scale), seed_(seed) {}

PairwiseDecision SimulatedPairwiseJudge::judge(const corpus::Paper& first,
                                               const corpus::Paper& second) {
  const auto fit = latent_.find(first.id);
  const auto sit = latent_.find(second.id);
  if (fit == latent_.end() || sit == latent_.end())
    throw std::invalid_argument("SimulatedPairwiseJudge: unknown paper id");
  const double qf = fit->second, qs = sit->second;
  const double p_first = 1.0 / (1.0 + std::exp(-scale_ * (qf - qs)));
  // Order-dependent coin, pure in (seed, first, second): swapped calls are
  // independent draws, mirroring a position-sensitive judge.
  const double coin = static_cast<double>(
                          hash_mix(seed_, "sim-judge", first.id, second.id) >> 11) *
                      0x1.0p-53;
  PairwiseDecision d;
  d.judgment = coin < p_first ? Judgment::FirstListedWins : Judgment::SecondListedWins;
  const double margin = std::fabs(qf - qs);
  d.confidence = margin > 0.5 ? "high" : (margin > 0.2 ? "medium" : "low");
  return d;
}

}  // namespace ideagap::tournament
