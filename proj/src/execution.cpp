#include "ideagap/execution.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ideagap/common.hpp"
#include "ideagap/prompts.hpp"

namespace ideagap::exec {

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Identification: return "Identification";
    case Dimension::Econometrics: return "Econometrics";
    case Dimension::Robustness: return "Robustness";
    case Dimension::DataQuality: return "DataQuality";
    case Dimension::Mechanism: return "Mechanism";
    case Dimension::Writing: return "Writing";
  }
  return "Writing";
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::DiD: return "DiD";
    case Method::IV: return "IV";
    case Method::RDD: return "RDD";
    case Method::RCT: return "RCT";
    case Method::Structural: return "Structural";
    case Method::Mixed: return "Mixed";
    case Method::Descriptive: return "Descriptive";
    case Method::Other: return "Other";
  }
  return "Other";
}

namespace {

// Lowercase letters only: "Difference-in-Differences" -> "differenceindifferences".
std::string fold_label(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c >= 'A' && c <= 'Z') out += static_cast<char>(c - 'A' + 'a');
    else if (c >= 'a' && c <= 'z') out += c;
  }
  return out;
}

}  // namespace

Method parse_method(std::string_view label) {
  const std::string f = fold_label(label);
  if (f.empty()) return Method::Other;
  if (f == "did" || f == "differenceindifferences" || f == "differencesindifferences" ||
      f == "diffindiff" || f == "diffsindiffs" || f == "eventstudydid")
    return Method::DiD;
  if (f == "iv" || f == "instrumentalvariable" || f == "instrumentalvariables" ||
      f == "instrument")
    return Method::IV;
  if (f == "rdd" || f == "rd" || f == "regressiondiscontinuity" ||
      f == "regressiondiscontinuitydesign")
    return Method::RDD;
  if (f == "rct" || f == "randomizedcontrolledtrial" || f == "randomizedcontroltrial" ||
      f == "randomizedexperiment" || f == "experiment" || f == "fieldexperiment")
    return Method::RCT;
  if (f == "structural" || f == "structuralmodel" || f == "structuralestimation")
    return Method::Structural;
  if (f == "mixed" || f == "multiplemethods" || f == "multiple")
    return Method::Mixed;
  if (f == "descriptive" || f == "descriptiveanalysis" || f == "correlational")
    return Method::Descriptive;
  return Method::Other;
}

double composite_score(const std::array<double, 6>& scores) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    if (!std::isfinite(scores[i]) || scores[i] < 1.0 || scores[i] > 5.0)
      throw ExecError("composite_score: score outside [1, 5]");
    sum += kWeights[i] * scores[i];
  }
  return sum;
}

namespace {

const nlohmann::json* find_key_folded(const nlohmann::json& obj, std::string_view want) {
  const std::string target = fold_label(want);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (fold_label(it.key()) == target) return &it.value();
  }
  return nullptr;
}

}  // namespace

ParsedScorecard parse_scorecard_json(std::string_view text) {
  const auto span = judge::extract_json_object(text);
  if (!span) throw ParseError("no JSON object in scorecard response");
  const nlohmann::json j = nlohmann::json::parse(*span);

  ParsedScorecard out;
  for (std::size_t i = 0; i < 6; ++i) {
    const std::string_view name = dimension_name(kDimensions[i]);
    const nlohmann::json* v = find_key_folded(j, name);
    if (!v) throw ParseError("scorecard missing key: " + std::string(name));
    if (!v->is_number())
      throw ParseError("scorecard key not numeric: " + std::string(name));
    const double raw = v->get<double>();
    int s = static_cast<int>(std::lround(raw));
    if (static_cast<double>(s) != raw)
      out.warnings.push_back(std::string(name) + ": rounded " + format_double(raw) +
                             " to " + std::to_string(s));
    if (s < 1 || s > 5) {
      const int clamped = std::clamp(s, 1, 5);
      out.warnings.push_back(std::string(name) + ": clamped " + std::to_string(s) +
                             " to " + std::to_string(clamped));
      s = clamped;
    }
    out.scores[i] = s;
  }

  const nlohmann::json* m = find_key_folded(j, "method");
  if (!m || !m->is_string()) throw ParseError("scorecard missing key: method");
  out.method = parse_method(m->get<std::string>());
  return out;
}

Scorecard evaluate_execution(const corpus::Paper& paper, judge::JudgeBackend& backend,
                             const EvalConfig& config) {
  Scorecard card;
  card.paper_id = paper.id;

  std::string_view body = paper.full_text;
  const std::string_view cut = utf8_truncate(body, config.char_budget);
  card.truncated = cut.size() < body.size();

  judge::ChatRequest request;
  request.model = config.model;
  request.max_tokens = config.max_tokens;
  request.temperature = 0.0;
  request.messages = {{judge::Role::System, std::string(prompts::execution_rubric_system())},
                      {judge::Role::User, std::string(cut)}};

  std::string reply = judge::complete_text(backend, request);
  ParsedScorecard parsed;
  try {
    parsed = parse_scorecard_json(reply);
  } catch (const ParseError& first_error) {
    judge::ChatRequest retry = request;
    retry.messages.back().content += "\n\nRespond with only the JSON object.";
    reply = judge::complete_text(backend, retry);
    try {
      parsed = parse_scorecard_json(reply);
    } catch (const ParseError& second_error) {
      throw ScoringFailed("scorecard for " + paper.id + " unparseable (" +
                          first_error.what() + "; after reprompt: " +
                          second_error.what() + ")");
    }
  }

  card.scores = parsed.scores;
  card.method = parsed.method;
  card.warnings = std::move(parsed.warnings);
  std::array<double, 6> as_double{};
  for (std::size_t i = 0; i < 6; ++i) as_double[i] = parsed.scores[i];
  card.composite = composite_score(as_double);
  return card;
}

std::map<Method, double> method_distribution(std::span<const Scorecard> cards) {
  if (cards.empty()) throw ExecError("method_distribution: no scorecards");
  std::map<Method, double> out;
  for (Method m : kMethods) out[m] = 0.0;
  for (const auto& c : cards) out[c.method] += 1.0;
  for (auto& [m, v] : out) v /= static_cast<double>(cards.size());
  return out;
}

}  // namespace ideagap::exec
