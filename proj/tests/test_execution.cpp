#include <array>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ideagap/execution.hpp"
#include "ideagap/prompts.hpp"

using namespace ideagap;
using namespace ideagap::exec;
using testutil::ScriptedBackend;
using testutil::make_paper;
using testutil::text_response;

TEST_CASE("composite weights the six dimensions as 25/20/20/15/10/10") {
  CHECK(composite_score({3, 3, 3, 3, 3, 3}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(composite_score({5, 1, 1, 1, 1, 1}) == doctest::Approx(2.0).epsilon(1e-15));
  // Frozen reference vector.
  CHECK(composite_score({3.69, 3.71, 3.91, 4.03, 3.32, 4.58}) ==
        doctest::Approx(3.841).epsilon(1e-12));
  CHECK_THROWS_AS(composite_score({0.5, 3, 3, 3, 3, 3}), ExecError);
  CHECK_THROWS_AS(composite_score({3, 3, 3, 3, 3, 5.01}), ExecError);
}

TEST_CASE("method labels fold punctuation, case, and spelling variants") {
  CHECK(parse_method("DiD") == Method::DiD);
  CHECK(parse_method("difference-in-differences") == Method::DiD);
  CHECK(parse_method("Differences in Differences") == Method::DiD);
  CHECK(parse_method("event-study DiD") == Method::DiD);
  CHECK(parse_method("IV") == Method::IV);
  CHECK(parse_method("instrumental variables") == Method::IV);
  CHECK(parse_method("regression discontinuity design") == Method::RDD);
  CHECK(parse_method("RD") == Method::RDD);
  CHECK(parse_method("randomized controlled trial") == Method::RCT);
  CHECK(parse_method("field experiment") == Method::RCT);
  CHECK(parse_method("structural estimation") == Method::Structural);
  CHECK(parse_method("multiple methods") == Method::Mixed);
  CHECK(parse_method("descriptive analysis") == Method::Descriptive);
  CHECK(parse_method("correlational") == Method::Descriptive);
  // A bare event study is not enough for a DiD label.
  CHECK(parse_method("event study") == Method::Other);
  CHECK(parse_method("kitchen sink") == Method::Other);
  CHECK(parse_method("") == Method::Other);
}

namespace {

const char* kGoodCard =
    R"({"Identification": 4, "Econometrics": 3, "Robustness": 3,
        "DataQuality": 5, "Mechanism": 2, "Writing": 4, "Method": "IV"})";

}  // namespace

TEST_CASE("scorecard parsing reads plain, fenced, and chatty responses") {
  const auto plain = parse_scorecard_json(kGoodCard);
  CHECK(plain.scores == std::array<int, 6>{4, 3, 3, 5, 2, 4});
  CHECK(plain.method == Method::IV);
  CHECK(plain.warnings.empty());

  const auto fenced = parse_scorecard_json(std::string("```json\n") + kGoodCard + "\n```");
  CHECK(fenced.scores == plain.scores);

  const auto chatty = parse_scorecard_json(
      std::string("Here is my assessment of the paper:\n\n") + kGoodCard +
      "\n\nLet me know if you need detail.");
  CHECK(chatty.scores == plain.scores);
}

TEST_CASE("scorecard parsing folds key case and underscores") {
  const auto p = parse_scorecard_json(
      R"({"identification": 3, "econometrics": 3, "robustness": 3,
          "data_quality": 3, "mechanism": 3, "writing": 3, "method": "did"})");
  CHECK(p.scores == std::array<int, 6>{3, 3, 3, 3, 3, 3});
  CHECK(p.method == Method::DiD);
}

TEST_CASE("scorecard parsing rounds fractions and clamps outliers with warnings") {
  const auto p = parse_scorecard_json(
      R"({"Identification": 4.6, "Econometrics": 7, "Robustness": 0,
          "DataQuality": 3, "Mechanism": 3, "Writing": 3, "Method": "Other"})");
  CHECK(p.scores[0] == 5);  // 4.6 rounds up
  CHECK(p.scores[1] == 5);  // 7 clamps down
  CHECK(p.scores[2] == 1);  // 0 clamps up
  CHECK(p.warnings.size() == 3);
}

TEST_CASE("scorecard parsing rejects incomplete or non-JSON replies") {
  CHECK_THROWS_AS(parse_scorecard_json(
                      R"({"Identification": 4, "Econometrics": 3, "Robustness": 3,
                          "DataQuality": 5, "Mechanism": 2, "Method": "IV"})"),
                  ParseError);  // Writing missing
  CHECK_THROWS_AS(parse_scorecard_json(
                      R"({"Identification": "high", "Econometrics": 3, "Robustness": 3,
                          "DataQuality": 5, "Mechanism": 2, "Writing": 4, "Method": "IV"})"),
                  ParseError);  // non-numeric score
  CHECK_THROWS_AS(parse_scorecard_json(
                      R"({"Identification": 4, "Econometrics": 3, "Robustness": 3,
                          "DataQuality": 5, "Mechanism": 2, "Writing": 4})"),
                  ParseError);  // method missing
  CHECK_THROWS_AS(parse_scorecard_json("I would rate this paper highly."), ParseError);
}

TEST_CASE("evaluate_execution sends the rubric and computes the composite") {
  ScriptedBackend backend({text_response(kGoodCard)});
  const auto paper = make_paper("p1", corpus::Cohort::AI, "Full body text.");
  EvalConfig cfg;
  cfg.model = "referee";

  const auto card = evaluate_execution(paper, backend, cfg);
  CHECK(card.paper_id == "p1");
  CHECK(card.scores == std::array<int, 6>{4, 3, 3, 5, 2, 4});
  CHECK(card.method == Method::IV);
  CHECK(card.composite ==
        doctest::Approx(0.25 * 4 + 0.20 * 3 + 0.20 * 3 + 0.15 * 5 + 0.10 * 2 + 0.10 * 4)
            .epsilon(1e-12));
  CHECK_FALSE(card.truncated);

  REQUIRE(backend.seen.size() == 1);
  CHECK(backend.seen[0].model == "referee");
  CHECK(backend.seen[0].messages[0].content == prompts::execution_rubric_system());
  CHECK(backend.seen[0].messages[1].content == "Full body text.");
}

TEST_CASE("evaluate_execution reprompts once on an unparseable reply") {
  ScriptedBackend backend(
      {text_response("Happy to help! The paper is strong overall."),
       text_response(kGoodCard)});
  const auto paper = make_paper("p2", corpus::Cohort::Human, "Body.");
  EvalConfig cfg;
  cfg.model = "referee";

  const auto card = evaluate_execution(paper, backend, cfg);
  CHECK(card.scores[0] == 4);
  REQUIRE(backend.seen.size() == 2);
  const std::string& retry_user = backend.seen[1].messages[1].content;
  CHECK(retry_user == "Body.\n\nRespond with only the JSON object.");
}

TEST_CASE("evaluate_execution gives up after the reprompt fails") {
  ScriptedBackend backend({text_response("chatter"), text_response("more chatter")});
  const auto paper = make_paper("p3", corpus::Cohort::AI, "Body.");
  EvalConfig cfg;
  cfg.model = "referee";
  CHECK_THROWS_AS(evaluate_execution(paper, backend, cfg), ScoringFailed);
}

TEST_CASE("evaluate_execution truncates long papers to the character budget") {
  ScriptedBackend backend({text_response(kGoodCard)});
  auto paper = make_paper("p4", corpus::Cohort::AI, std::string(30, 'x'));
  EvalConfig cfg;
  cfg.model = "referee";
  cfg.char_budget = 10;

  const auto card = evaluate_execution(paper, backend, cfg);
  CHECK(card.truncated);
  CHECK(backend.seen[0].messages[1].content == std::string(10, 'x'));
}

TEST_CASE("method_distribution covers every label and sums to one") {
  std::vector<Scorecard> cards(4);
  cards[0].method = Method::DiD;
  cards[1].method = Method::DiD;
  cards[2].method = Method::DiD;
  cards[3].method = Method::IV;

  const auto dist = method_distribution(cards);
  CHECK(dist.size() == 8);
  CHECK(dist.at(Method::DiD) == doctest::Approx(0.75));
  CHECK(dist.at(Method::IV) == doctest::Approx(0.25));
  CHECK(dist.at(Method::RCT) == doctest::Approx(0.0));
  double total = 0.0;
  for (const auto& [m, share] : dist) total += share;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(method_distribution(std::vector<Scorecard>{}), ExecError);
}
