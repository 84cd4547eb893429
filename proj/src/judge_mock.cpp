#include "ideagap/judge_mock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ideagap/common.hpp"

namespace ideagap::judge {

namespace {

const std::string* find_system(const ChatRequest& r) {
  for (const auto& m : r.messages)
    if (m.role == Role::System) return &m.content;
  return nullptr;
}

const std::string* find_user(const ChatRequest& r) {
  for (const auto& m : r.messages)
    if (m.role == Role::User) return &m.content;
  return nullptr;
}

double unit_from(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// --- tier classification -------------------------------------------------

ChatResponse tier_response(std::uint64_t seed, const ChatRequest& req) {
  const std::string user = find_user(req) ? *find_user(req) : "";
  const std::uint64_t h = hash_mix(seed, "tier", req.model, user);
  const double quality = unit_from(h);
  const std::uint64_t style = hash_mix(h, "style");

  // Gaussian-bump logits around tier-specific quality centers.
  static constexpr std::array<const char*, 4> tier_words = {"Exceptional", "Strong",
                                                            "Fair", "Limited"};
  static constexpr std::array<double, 4> centers = {0.90, 0.62, 0.35, 0.10};
  std::array<double, 4> logits{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double d = quality - centers[i];
    logits[i] = -(d * d) / (2.0 * 0.18 * 0.18);
  }

  struct Cand {
    std::string token;
    double logit;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < 4; ++i) {
    std::string tok = tier_words[i];
    // Exercise downstream token normalization: sometimes a leading space,
    // sometimes a tokenizer-style prefix fragment.
    if ((style >> i) & 1) tok = " " + tok;
    if ((style >> (i + 8)) & 1 && tok.size() > 5) tok = tok.substr(0, 5);
    cands.push_back({tok, logits[i]});
  }
  const double lmin = std::min({logits[0], logits[1], logits[2], logits[3]});
  cands.push_back({" the", lmin - 3.0 - unit_from(hash_mix(h, "j1"))});
  cands.push_back({".", lmin - 4.0 - unit_from(hash_mix(h, "j2"))});

  // Log-softmax so every alternative is a genuine logprob.
  double mx = cands[0].logit;
  for (const auto& c : cands) mx = std::max(mx, c.logit);
  double z = 0.0;
  for (const auto& c : cands) z += std::exp(c.logit - mx);
  const double logz = mx + std::log(z);

  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.logit > b.logit; });

  TokenAlternatives alts;
  alts.chosen_token = cands.front().token;
  const std::size_t keep =
      std::min(cands.size(), static_cast<std::size_t>(req.top_logprobs.value_or(20)));
  for (std::size_t i = 0; i < keep; ++i)
    alts.alternatives.push_back({cands[i].token, cands[i].logit - logz});

  ChatResponse resp;
  resp.content = alts.chosen_token;
  resp.alternatives = std::move(alts);
  return resp;
}

// --- idea extraction ------------------------------------------------------

ChatResponse extraction_response(std::uint64_t seed, const ChatRequest& req) {
  const std::string user = find_user(req) ? *find_user(req) : "";
  const std::uint64_t h = hash_mix(seed, "extract", req.model, user);
  SmallRng rng(h);

  static const std::array<std::string_view, 56> lexicon = {
      "the",        "effect",     "of",          "policy",      "reform",
      "on",         "local",      "labor",       "markets",     "firm",
      "entry",      "household",  "consumption", "credit",      "access",
      "tax",        "incentives", "trade",       "exposure",    "wage",
      "growth",     "employment", "outcomes",    "estimates",   "suggest",
      "regional",   "variation",  "in",          "adoption",    "timing",
      "identifies", "causal",     "impacts",     "using",       "administrative",
      "records",    "linked",     "panel",       "data",        "treated",
      "areas",      "experience", "persistent",  "gains",       "relative",
      "to",         "comparable", "controls",    "consistent",  "with",
      "frictions",  "matching",   "information", "supply",      "demand",
      "responses"};

  const std::size_t target = 120 + static_cast<std::size_t>(rng.next_below(31));
  std::string out;
  std::size_t words = 0;
  while (words < target) {
    const std::size_t remaining = target - words;
    std::size_t len = 9 + static_cast<std::size_t>(rng.next_below(5));
    if (remaining < len + 6) len = remaining;  // close out exactly
    for (std::size_t k = 0; k < len; ++k) {
      std::string w(lexicon[rng.next_below(lexicon.size())]);
      if (k == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      if (!out.empty()) out += ' ';
      out += w;
    }
    out += '.';
    words += len;
  }
  return {out, std::nullopt};
}

// --- execution rubric -----------------------------------------------------

ChatResponse rubric_response(std::uint64_t seed, const ChatRequest& req) {
  const std::string user = find_user(req) ? *find_user(req) : "";
  const std::uint64_t h = hash_mix(seed, "rubric", req.model, user);
  const double quality = unit_from(h);

  static constexpr std::array<const char*, 6> dims = {
      "Identification", "Econometrics", "Robustness", "DataQuality", "Mechanism",
      "Writing"};
  std::string scores;
  for (std::size_t i = 0; i < 6; ++i) {
    const double jitter = (unit_from(hash_mix(h, "dim", dims[i])) - 0.5) * 0.35;
    const double level = std::clamp(quality + jitter, 0.0, 1.0);
    const int s = std::clamp(static_cast<int>(std::lround(1.0 + 4.0 * level)), 1, 5);
    scores += '"';
    scores += dims[i];
    scores += "\": " + std::to_string(s) + ", ";
  }

  static constexpr std::array<const char*, 8> methods = {
      "difference-in-differences",
      "instrumental variables",
      "regression discontinuity",
      "randomized controlled trial",
      "structural",
      "mixed",
      "descriptive",
      "Difference in Differences"};  // label variant, same method
  const std::size_t mi = hash_mix(h, "method") % methods.size();

  std::string body = "{" + scores + "\"method\": \"" + methods[mi] + "\"}";
  // Half the time, wrap in a code fence with chatter, exercising the
  // first-JSON-object scan downstream.
  if (hash_mix(h, "fence") & 1)
    body = "Here is my assessment:\n```json\n" + body + "\n```\n";
  return {body, std::nullopt};
}

// --- pairwise comparison --------------------------------------------------

ChatResponse pairwise_response(std::uint64_t seed, const ChatRequest& req) {
  const std::string user = find_user(req) ? *find_user(req) : "";
  std::string_view a_text, b_text;
  const std::size_t a_pos = user.find("Paper A:\n");
  const std::size_t b_pos = user.find("\nPaper B:\n");
  if (a_pos != std::string::npos && b_pos != std::string::npos && b_pos > a_pos) {
    a_text = std::string_view(user).substr(a_pos + 9, b_pos - (a_pos + 9));
    b_text = std::string_view(user).substr(b_pos + 10);
    const std::size_t tail = b_text.rfind("\n\n");
    if (tail != std::string_view::npos) b_text = b_text.substr(0, tail);
  }

  const double qa = unit_from(hash_mix(seed, "latent", a_text));
  const double qb = unit_from(hash_mix(seed, "latent", b_text));
  const double p_a = 1.0 / (1.0 + std::exp(-8.0 * (qa - qb)));
  const double coin = unit_from(hash_mix(seed, "pairwise-coin", req.model, user));
  const bool a_wins = coin < p_a;

  const double margin = std::fabs(qa - qb);
  const char* conf = margin > 0.30 ? "high" : (margin > 0.12 ? "medium" : "low");
  std::string body = std::string("{\"winner\": \"") + (a_wins ? "A" : "B") +
                     "\", \"confidence\": \"" + conf +
                     "\", \"reasoning\": \"The stronger design and evidence.\"}";
  if (hash_mix(hash_mix(seed, "pairwise-coin", req.model, user), "fence") & 1)
    body = "```json\n" + body + "\n```";
  return {body, std::nullopt};
}

}  // namespace

ChatResponse MockJudgeBackend::complete(const ChatRequest& request) {
  if (request.max_tokens == 1 && request.top_logprobs)
    return tier_response(seed_, request);

  const std::string* sys = find_system(request);
  const std::string s = sys ? *sys : "";
  if (s.find("core research idea") != std::string::npos)
    return extraction_response(seed_, request);
  if (s.find("\"winner\"") != std::string::npos)
    return pairwise_response(seed_, request);
  if (s.find("DataQuality") != std::string::npos)
    return rubric_response(seed_, request);
  return extraction_response(seed_, request);
}

}  // namespace ideagap::judge
