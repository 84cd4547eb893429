#include "ideagap/idea.hpp"

#include <algorithm>
#include <cmath>

#include "ideagap/common.hpp"
#include "ideagap/prompts.hpp"

namespace ideagap::idea {

std::string_view tier_name(Tier t) {
  switch (t) {
    case Tier::Exceptional: return "Exceptional";
    case Tier::Strong: return "Strong";
    case Tier::Fair: return "Fair";
    case Tier::Limited: return "Limited";
  }
  return "Limited";
}

std::optional<Tier> parse_tier(std::string_view name) {
  const std::string t = to_lower(trim_view(name));
  for (Tier tier : kTiers)
    if (t == to_lower(tier_name(tier))) return tier;
  return std::nullopt;
}

IdeaSummary extract_idea(const std::string& paper_id, const std::string& front_matter,
                         judge::JudgeBackend& backend, const ExtractionConfig& config) {
  if (config.max_tokens < 400)
    throw std::invalid_argument("extract_idea: max_tokens must be >= 400");
  if (trim_view(front_matter).empty())
    throw ExtractionFailed("empty front matter for " + paper_id);

  judge::ChatRequest request;
  request.model = config.model;
  request.max_tokens = config.max_tokens;
  request.temperature = 0.0;
  request.messages = {{judge::Role::System, std::string(prompts::idea_extraction_system())},
                      {judge::Role::User, front_matter}};

  std::string first;
  try {
    first = trim(judge::complete_text(backend, request));
  } catch (const judge::EmptyResponse&) {
    first.clear();
  }
  const std::size_t first_count = count_words(first);

  IdeaSummary summary;
  summary.paper_id = paper_id;
  if (!first.empty() && first_count >= config.target_min &&
      first_count <= config.target_max) {
    summary.text = first;
    summary.word_count = first_count;
    return summary;
  }

  // One retry with an explicit length reminder appended to the user turn.
  judge::ChatRequest retry = request;
  retry.messages.back().content +=
      "\n\nReminder: respond with a single paragraph of " +
      std::to_string(config.target_min) + "-" + std::to_string(config.target_max) +
      " words.";
  std::string second;
  try {
    second = trim(judge::complete_text(backend, retry));
  } catch (const judge::EmptyResponse&) {
    second.clear();
  }

  if (first.empty() && second.empty())
    throw ExtractionFailed("no summary produced for " + paper_id);

  summary.retried = true;
  summary.text = second.empty() ? first : second;
  summary.word_count = count_words(summary.text);
  summary.out_of_band =
      summary.word_count < config.accept_min || summary.word_count > config.accept_max;
  return summary;
}

std::array<double, 4> fill_missing_tiers(const judge::TokenAlternatives& alternatives) {
  constexpr double kMissingPenalty = 10.0;
  std::array<double, 4> logprobs{};
  std::array<bool, 4> seen{};

  for (const auto& alt : alternatives.alternatives) {
    const std::string token = to_lower(trim(alt.token));
    if (token.empty()) continue;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string name = to_lower(tier_name(kTiers[i]));
      if (name.rfind(token, 0) == 0) {  // token is a prefix of the tier name
        if (!seen[i] || alt.logprob > logprobs[i]) {
          logprobs[i] = alt.logprob;
          seen[i] = true;
        }
      }
    }
  }

  double min_seen = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (seen[i]) {
      min_seen = any ? std::min(min_seen, logprobs[i]) : logprobs[i];
      any = true;
    }
  }
  if (!any)
    throw NoTierSignal("no tier token among " +
                       std::to_string(alternatives.alternatives.size()) +
                       " alternatives (chosen '" + alternatives.chosen_token + "')");
  for (std::size_t i = 0; i < 4; ++i)
    if (!seen[i]) logprobs[i] = min_seen - kMissingPenalty;
  return logprobs;
}

TierDistribution softmax_tiers(const std::array<double, 4>& logprobs) {
  for (double lp : logprobs)
    if (!std::isfinite(lp)) throw InvalidLogprob("non-finite tier logprob");
  const double mx = *std::max_element(logprobs.begin(), logprobs.end());
  std::array<double, 4> e{};
  double z = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    e[i] = std::exp(logprobs[i] - mx);
    z += e[i];
  }
  TierDistribution dist;
  for (std::size_t i = 0; i < 4; ++i) dist.p[i] = e[i] / z;
  return dist;
}

Tier argmax_tier(const TierDistribution& dist) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i)
    if (dist.p[i] > dist.p[best]) best = i;  // strict: ties keep the better tier
  return kTiers[best];
}

ModelScore classify_tier(const IdeaSummary& summary, const std::string& model_id,
                         judge::JudgeBackend& backend) {
  judge::ChatRequest request;
  request.model = model_id;
  request.max_tokens = 1;
  request.temperature = 0.0;
  request.top_logprobs = 20;
  request.messages = {{judge::Role::System, std::string(prompts::idea_tier_system())},
                      {judge::Role::User, summary.text}};

  const judge::TokenAlternatives alts = judge::complete_single_token(backend, request);
  ModelScore score;
  score.distribution = softmax_tiers(fill_missing_tiers(alts));
  score.predicted_tier = argmax_tier(score.distribution);
  return score;
}

IdeaScore ensemble_idea_score(
    const std::string& paper_id,
    const std::vector<std::pair<std::string, ModelScore>>& per_model) {
  if (per_model.empty())
    throw IdeaError("ensemble_idea_score: no model scores for " + paper_id);
  IdeaScore score;
  score.paper_id = paper_id;
  double sum = 0.0;
  for (const auto& [model, ms] : per_model) {
    if (score.per_model.count(model))
      throw IdeaError("ensemble_idea_score: duplicate model id " + model);
    score.per_model.emplace(model, ms);
    sum += ms.distribution[Tier::Exceptional];
  }
  score.ensemble_exceptional = sum / static_cast<double>(per_model.size());
  return score;
}

}  // namespace ideagap::idea
