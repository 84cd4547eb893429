#pragma once

// Execution-quality measurement: a six-dimension referee rubric scored over
// the full paper text, with a weighted composite and an identification-method
// label per paper.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ideagap/corpus.hpp"
#include "ideagap/judge.hpp"

namespace ideagap::exec {

class ExecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scorecard JSON unparseable after the reprompt.
class ScoringFailed : public ExecError {
 public:
  using ExecError::ExecError;
};

class ParseError : public ExecError {
 public:
  using ExecError::ExecError;
};

enum class Dimension {
  Identification = 0,
  Econometrics = 1,
  Robustness = 2,
  DataQuality = 3,
  Mechanism = 4,
  Writing = 5,
};

inline constexpr std::array<Dimension, 6> kDimensions = {
    Dimension::Identification, Dimension::Econometrics, Dimension::Robustness,
    Dimension::DataQuality,    Dimension::Mechanism,    Dimension::Writing};

std::string_view dimension_name(Dimension d);

// Fixed composite weights, in kDimensions order; sum to 1.
inline constexpr std::array<double, 6> kWeights = {0.25, 0.20, 0.20, 0.15, 0.10, 0.10};

enum class Method { DiD, IV, RDD, RCT, Structural, Mixed, Descriptive, Other };

inline constexpr std::array<Method, 8> kMethods = {
    Method::DiD,        Method::IV,    Method::RDD,         Method::RCT,
    Method::Structural, Method::Mixed, Method::Descriptive, Method::Other};

std::string_view method_name(Method m);

// Tolerant mapping from a judge's free-form label to a Method (case,
// punctuation and spelling variants); unrecognized labels map to Other.
Method parse_method(std::string_view label);

struct Scorecard {
  std::string paper_id;
  std::array<int, 6> scores{};  // 1..5, kDimensions order
  Method method = Method::Other;
  double composite = 0.0;
  bool truncated = false;  // paper text was cut to the character budget
  std::vector<std::string> warnings;
};

// Weighted average of the six dimension scores (real-valued input accepted).
double composite_score(const std::array<double, 6>& scores);

struct ParsedScorecard {
  std::array<int, 6> scores{};
  Method method = Method::Other;
  std::vector<std::string> warnings;  // e.g. clamped out-of-range values
};

// Finds the first balanced JSON object in free text (fenced or not) and
// reads the six dimension scores plus the method label.  Missing keys raise
// ParseError; fractional scores are rounded and out-of-range scores clamped
// to 1..5 with a warning.
ParsedScorecard parse_scorecard_json(std::string_view text);

struct EvalConfig {
  std::string model;
  int max_tokens = 2048;
  std::size_t char_budget = 120000;  // UTF-8-safe truncation bound
};

// Full rubric round trip for one paper, with one "respond with only the JSON
// object" reprompt before giving up.
Scorecard evaluate_execution(const corpus::Paper& paper, judge::JudgeBackend& backend,
                             const EvalConfig& config);

// Share of papers per method; every method key present, shares sum to 1.
std::map<Method, double> method_distribution(std::span<const Scorecard> cards);

}  // namespace ideagap::exec
