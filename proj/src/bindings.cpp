// Python bindings for the core operations: LaTeX stripping, tier softmax,
// rubric composites, the statistics toolkit, rating updates, simulated
// tournaments, and the full pipeline driver.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ideagap/corpus.hpp"
#include "ideagap/execution.hpp"
#include "ideagap/idea.hpp"
#include "ideagap/judge.hpp"
#include "ideagap/report.hpp"
#include "ideagap/stats.hpp"
#include "ideagap/tournament.hpp"
#include "ideagap/trueskill.hpp"

namespace py = pybind11;
using namespace ideagap;

namespace {

py::dict test_result_to_dict(const stats::TestResult& t) {
  py::dict d;
  d["name"] = t.name;
  d["statistic"] = t.statistic;
  d["z"] = t.z ? py::cast(*t.z) : py::none();
  d["df"] = t.df ? py::cast(*t.df) : py::none();
  d["p_value"] = t.p_value;
  return d;
}

stats::MannWhitneyMode parse_mw_mode(const std::string& mode) {
  if (mode == "auto") return stats::MannWhitneyMode::Auto;
  if (mode == "exact") return stats::MannWhitneyMode::Exact;
  if (mode == "normal") return stats::MannWhitneyMode::NormalApprox;
  throw py::value_error("mode must be 'auto', 'exact', or 'normal'");
}

trueskill::MatchOutcome parse_outcome(const std::string& outcome) {
  if (outcome == "a_wins") return trueskill::MatchOutcome::AWins;
  if (outcome == "b_wins") return trueskill::MatchOutcome::BWins;
  if (outcome == "tie") return trueskill::MatchOutcome::Tie;
  throw py::value_error("outcome must be 'a_wins', 'b_wins', or 'tie'");
}

trueskill::TrueSkillParams make_params(double mu0, double sigma0, double beta,
                                       double tau, double draw_probability,
                                       double k_conservative) {
  trueskill::TrueSkillParams p;
  p.mu0 = mu0;
  p.sigma0 = sigma0;
  p.beta = beta;
  p.tau = tau;
  p.draw_probability = draw_probability;
  p.k_conservative = k_conservative;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core routines for decomposing an AI-vs-human research quality gap";

  py::register_exception<stats::StatsError>(m, "StatsError");
  py::register_exception<report::ConfigError>(m, "ConfigError");
  py::register_exception<corpus::CorpusError>(m, "CorpusError");

  // --- corpus ---------------------------------------------------------------

  m.def(
      "strip_latex",
      [](const std::string& source) {
        const auto r = corpus::strip_latex(source);
        return py::make_tuple(r.text, r.warnings);
      },
      py::arg("source"),
      "Convert LaTeX source to plain text; returns (text, warnings).");

  m.def(
      "extract_front_matter",
      [](const std::string& text, std::size_t fallback_chars) {
        corpus::FrontMatterOptions opts;
        opts.fallback_chars = fallback_chars;
        const auto fm = corpus::extract_front_matter(text, opts);
        py::dict d;
        d["text"] = fm.text;
        d["fallback"] = fm.fallback;
        return d;
      },
      py::arg("text"), py::arg("fallback_chars") = 8000,
      "Isolate the abstract-through-introduction span of a paper.");

  // --- idea tiers -----------------------------------------------------------

  m.def(
      "softmax_tiers",
      [](const std::array<double, 4>& logprobs) {
        const auto d = idea::softmax_tiers(logprobs);
        return std::vector<double>(d.p.begin(), d.p.end());
      },
      py::arg("logprobs"),
      "Probabilities over the four quality tiers (best to worst).");

  m.def(
      "fill_missing_tiers",
      [](const std::vector<std::pair<std::string, double>>& alternatives,
         const std::string& chosen_token) {
        judge::TokenAlternatives alts;
        alts.chosen_token = chosen_token;
        for (const auto& [token, lp] : alternatives)
          alts.alternatives.push_back({token, lp});
        const auto lp = idea::fill_missing_tiers(alts);
        return std::vector<double>(lp.begin(), lp.end());
      },
      py::arg("alternatives"), py::arg("chosen_token") = "",
      "Recover the four tier logprobs from token alternatives.");

  m.def("tier_names", [] {
    std::vector<std::string> out;
    for (auto t : idea::kTiers) out.emplace_back(idea::tier_name(t));
    return out;
  });

  // --- execution rubric -----------------------------------------------------

  m.def("composite_score", &exec::composite_score, py::arg("scores"),
        "Weighted mean of the six rubric dimensions (weights 25/20/20/15/10/10).");

  m.def(
      "parse_scorecard_json",
      [](const std::string& text) {
        const auto p = exec::parse_scorecard_json(text);
        py::dict d;
        py::dict scores;
        for (std::size_t i = 0; i < 6; ++i)
          scores[py::str(std::string(exec::dimension_name(exec::kDimensions[i])))] =
              p.scores[i];
        d["scores"] = scores;
        d["method"] = std::string(exec::method_name(p.method));
        d["warnings"] = p.warnings;
        return d;
      },
      py::arg("text"), "Parse a referee scorecard out of a free-text judge reply.");

  m.def(
      "parse_method",
      [](const std::string& label) {
        return std::string(exec::method_name(exec::parse_method(label)));
      },
      py::arg("label"), "Normalize a free-form identification-method label.");

  m.def("dimension_names", [] {
    std::vector<std::string> out;
    for (auto d : exec::kDimensions) out.emplace_back(exec::dimension_name(d));
    return out;
  });

  // --- statistics -----------------------------------------------------------

  m.def(
      "cohens_d",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return stats::cohens_d(x, y);
      },
      py::arg("x"), py::arg("y"), "Cohen's d with pooled (n-1) standard deviation.");
  m.def(
      "pearson_r",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return stats::pearson_r(x, y);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "spearman_rho",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return stats::spearman_rho(x, y);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "percentile",
      [](const std::vector<double>& values, double q) {
        return stats::percentile(values, q);
      },
      py::arg("values"), py::arg("q"),
      "Linear-interpolation percentile, q in [0, 100].");

  m.def(
      "mann_whitney_u",
      [](const std::vector<double>& x, const std::vector<double>& y,
         const std::string& mode) {
        return test_result_to_dict(stats::mann_whitney_u(x, y, parse_mw_mode(mode)));
      },
      py::arg("x"), py::arg("y"), py::arg("mode") = "auto",
      "Two-sided Mann-Whitney U; exact enumeration for small samples.");

  m.def(
      "chi_square_independence",
      [](const std::vector<double>& row_a, const std::vector<double>& row_b) {
        return test_result_to_dict(stats::chi_square_independence(row_a, row_b));
      },
      py::arg("row_a"), py::arg("row_b"),
      "Chi-square independence test for a 2 x k count table.");

  m.def(
      "decompose_gap",
      [](double d_idea, double d_exec) {
        const auto g = stats::decompose_gap(d_idea, d_exec);
        py::dict d;
        d["d_idea"] = g.d_idea;
        d["d_exec"] = g.d_exec;
        d["share_idea"] = g.share_idea;
        d["share_exec"] = g.share_exec;
        return d;
      },
      py::arg("d_idea"), py::arg("d_exec"),
      "Split a standardized gap into idea and execution shares.");

  m.def(
      "funnel_analysis",
      [](const std::vector<std::pair<double, double>>& ai,
         const std::vector<std::pair<double, double>>& human) {
        std::vector<stats::ScorePair> a, h;
        for (const auto& [i, e] : ai) a.push_back({i, e});
        for (const auto& [i, e] : human) h.push_back({i, e});
        const auto f = stats::funnel_analysis(a, h);
        auto level = [](const stats::FunnelResult::Level& l) {
          py::dict d;
          d["idea_threshold"] = l.idea_threshold;
          d["exec_threshold"] = l.exec_threshold;
          d["count"] = l.count;
          d["share"] = l.share;
          return d;
        };
        py::dict d;
        d["median"] = level(f.median);
        d["q25"] = level(f.q25);
        d["min"] = level(f.min);
        d["n_ai"] = f.n_ai;
        return d;
      },
      py::arg("ai"), py::arg("human"),
      "Count AI (idea, exec) pairs strictly above human reference levels.");

  m.def("normal_upper_tail", &stats::normal_upper_tail, py::arg("z"));
  m.def("chisq_upper_tail", &stats::chisq_upper_tail, py::arg("x"), py::arg("df"));

  // --- skill ratings --------------------------------------------------------

  m.def(
      "update_ratings",
      [](double mu_a, double sigma_a, double mu_b, double sigma_b,
         const std::string& outcome, double mu0, double sigma0, double beta,
         double tau, double draw_probability, double k_conservative) {
        const auto [na, nb] = trueskill::update_ratings(
            {mu_a, sigma_a}, {mu_b, sigma_b}, parse_outcome(outcome),
            make_params(mu0, sigma0, beta, tau, draw_probability, k_conservative));
        return py::make_tuple(py::make_tuple(na.mu, na.sigma),
                              py::make_tuple(nb.mu, nb.sigma));
      },
      py::arg("mu_a"), py::arg("sigma_a"), py::arg("mu_b"), py::arg("sigma_b"),
      py::arg("outcome"), py::arg("mu0") = 25.0, py::arg("sigma0") = 25.0 / 3.0,
      py::arg("beta") = 25.0 / 6.0, py::arg("tau") = 25.0 / 300.0,
      py::arg("draw_probability") = 0.10, py::arg("k_conservative") = 3.0,
      "One two-player rating update; outcome is 'a_wins', 'b_wins', or 'tie'.");

  m.def(
      "conservative_rating",
      [](double mu, double sigma, double k) {
        return trueskill::conservative_rating({mu, sigma}, k);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("k") = 3.0,
      "Pessimistic rank score mu - k * sigma.");

  m.def("draw_margin", &trueskill::draw_margin, py::arg("draw_probability"),
        py::arg("c"));
  m.def("normal_inverse_cdf", &trueskill::normal_inverse_cdf, py::arg("p"));

  // --- tournament -----------------------------------------------------------

  m.def(
      "run_simulated_tournament",
      [](const std::map<std::string, double>& latent, double accuracy_scale,
         std::size_t n_matches, std::uint64_t seed, int concurrency) {
        std::vector<corpus::Paper> papers;
        for (const auto& [id, q] : latent) {
          corpus::Paper p;
          p.id = id;
          papers.push_back(std::move(p));
        }
        tournament::SimulatedPairwiseJudge judge(latent, accuracy_scale, seed);
        tournament::TournamentConfig cfg;
        cfg.n_matches = n_matches;
        cfg.seed = seed;
        cfg.concurrency = concurrency;
        const auto result = tournament::run_tournament(papers, judge, cfg);
        py::list board;
        for (const auto& e : result.leaderboard) {
          py::dict d;
          d["paper_id"] = e.paper_id;
          d["mu"] = e.mu;
          d["sigma"] = e.sigma;
          d["conservative"] = e.conservative;
          d["matches_played"] = e.matches_played;
          board.append(d);
        }
        return board;
      },
      py::arg("latent"), py::arg("accuracy_scale") = 11.56,
      py::arg("n_matches") = 200, py::arg("seed") = 0, py::arg("concurrency") = 1,
      "Tournament against a synthetic judge with known latent qualities.");

  // --- pipeline -------------------------------------------------------------

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& corpus_root, const std::filesystem::path& out_dir,
         const std::string& backend, std::uint64_t seed, int concurrency,
         const std::optional<std::filesystem::path>& config_file,
         const std::optional<std::filesystem::path>& manifest,
         const std::optional<std::filesystem::path>& cache,
         std::optional<std::size_t> tournament_matches,
         const std::vector<std::string>& stages, bool force) {
        report::PipelineConfig cfg;
        if (config_file) report::apply_config_file(cfg, *config_file);
        cfg.corpus_root = corpus_root;
        cfg.out_dir = out_dir;
        const auto mode = report::parse_backend_mode(backend);
        if (!mode)
          throw report::ConfigError("unknown backend: " + backend);
        cfg.backend = *mode;
        cfg.seed = seed;
        cfg.concurrency = concurrency;
        if (manifest) cfg.corpus_manifest = manifest;
        if (cache) cfg.cache_path = cache;
        if (tournament_matches) cfg.tournament_matches = *tournament_matches;

        const auto outcome = report::run_pipeline(cfg, stages, force);
        py::dict d;
        d["ok"] = outcome.ok;
        d["failed_stage"] = outcome.failed_stage;
        d["error"] = outcome.error;
        return d;
      },
      py::arg("corpus"), py::arg("out"), py::arg("backend") = "mock",
      py::arg("seed") = 42, py::arg("concurrency") = 4,
      py::arg("config_file") = py::none(), py::arg("manifest") = py::none(),
      py::arg("cache") = py::none(), py::arg("tournament_matches") = py::none(),
      py::arg("stages") = std::vector<std::string>{}, py::arg("force") = false,
      "Run the scoring pipeline; returns {'ok', 'failed_stage', 'error'}.");
}
