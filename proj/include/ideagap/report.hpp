#pragma once

// Pipeline orchestration and reporting: runs ingest -> extract -> idea
// scoring -> execution scoring -> tournament -> stats over a corpus, persists
// every intermediate as JSONL/CSV, and renders the final tables, plot data
// and summary.  All outputs are deterministic for a fixed config and seed
// (no timestamps, stable float formatting, lexicographic ordering).

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ideagap/corpus.hpp"
#include "ideagap/execution.hpp"
#include "ideagap/idea.hpp"
#include "ideagap/judge.hpp"
#include "ideagap/stats.hpp"
#include "ideagap/tournament.hpp"
#include "ideagap/trueskill.hpp"

namespace ideagap::report {

// Configuration problems (bad flag values, unreadable config file, missing
// cache in replay mode).  The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage failed; earlier outputs are retained.  Exit code 1.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_name(std::move(stage)) {}
  std::string stage_name;
};

enum class BackendMode { Live, Mock, Cache };

std::string_view backend_mode_name(BackendMode m);
std::optional<BackendMode> parse_backend_mode(std::string_view s);

struct PipelineConfig {
  std::filesystem::path corpus_root;
  std::optional<std::filesystem::path> corpus_manifest;
  std::filesystem::path out_dir;

  BackendMode backend = BackendMode::Mock;
  std::string endpoint_url = "https://openrouter.ai/api/v1/chat/completions";
  std::string api_key_env = "JUDGE_API_KEY";
  std::optional<std::filesystem::path> cache_path;
  int timeout_seconds = 120;
  judge::RetryPolicy retry;

  std::uint64_t seed = 42;
  int concurrency = 4;

  std::string extraction_model = "qwen-3.6-plus";
  std::vector<std::string> ensemble_models = {"gpt-4.1-nano-econ", "econ-30b"};
  std::string execution_model = "gemini-3.1-flash-lite";
  std::string pairwise_model = "gemini-3.1-flash-lite";

  std::size_t front_matter_fallback_chars = 8000;
  std::size_t execution_char_budget = 120000;
  std::size_t pairwise_char_budget = 20000;
  int extraction_max_tokens = 512;
  int rubric_max_tokens = 2048;

  bool tournament_enabled = true;
  std::size_t tournament_matches = 200;
  trueskill::TrueSkillParams trueskill;
};

// Flat "key = value" config file; '#' starts a comment.  Unknown keys and
// unparseable values raise ConfigError.  Values already set by the file can
// be overridden afterwards by CLI flags.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);
void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value);
void validate_config(const PipelineConfig& config);

// SHA-256 over the canonical serialization of the experiment-defining fields
// (output/cache locations excluded, so relocated runs hash identically).
std::string config_hash(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Gap report
// ---------------------------------------------------------------------------

struct MeasureSummary {
  stats::GroupSummary ai;
  stats::GroupSummary human;
};

struct DimensionStats {
  std::string name;
  double ai_mean = 0.0;
  double human_mean = 0.0;
  double d = 0.0;  // positive favors the human cohort
  double p_value = 1.0;
};

struct GapReport {
  std::size_t n_ai = 0;
  std::size_t n_human = 0;

  MeasureSummary idea;       // ensemble p[top tier]
  MeasureSummary composite;  // weighted rubric composite

  double d_idea = 0.0;  // positive favors the human cohort
  double d_exec = 0.0;
  stats::TestResult mw_idea;
  stats::TestResult mw_exec;
  std::vector<DimensionStats> dimensions;  // six entries, fixed order

  // model -> {AI, Human} -> share per tier (kTiers order).
  std::map<std::string, std::array<std::array<double, 4>, 2>> tier_shares;
  std::string tier_test_model;  // model whose predicted tiers feed the test
  stats::TestResult tier_chi_square;

  stats::GapDecomposition decomposition;
  stats::FunnelResult funnel;

  // cohort name -> method name -> share.
  std::map<std::string, std::map<std::string, double>> method_shares;

  // Idea-vs-execution correlation within the AI cohort (absent when the
  // cohort is degenerate).
  std::optional<double> pearson_idea_exec_ai;
  // measure name -> Spearman rho against the tournament's conservative
  // rating; present only when the tournament ran.
  std::optional<std::map<std::string, double>> tournament_spearman;

  std::vector<std::string> notes;  // degeneracies encountered while computing
};

nlohmann::ordered_json gap_report_to_json(const GapReport& report);
GapReport gap_report_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineOutcome {
  bool ok = true;
  std::string failed_stage;
  std::string error;
};

// Stage names in execution order.
inline constexpr std::array<std::string_view, 7> kStages = {
    "ingest", "extract", "score-ideas", "score-execution",
    "tournament", "stats", "report"};

// Runs the listed stages (all of them for run-all) against the configured
// corpus and output directory.  Missing inputs of a requested stage are
// computed on the fly; `force` recomputes even when intermediates exist.
// Writes <out>/manifest.json last.  Throws ConfigError for configuration
// problems; stage failures are reported in the outcome, not thrown.
PipelineOutcome run_pipeline(const PipelineConfig& config,
                             const std::vector<std::string>& stages, bool force);

}  // namespace ideagap::report
