#include "ideagap/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "ideagap/common.hpp"
#include "ideagap/judge_cache.hpp"
#include "ideagap/judge_http.hpp"
#include "ideagap/judge_mock.hpp"
#include "ideagap/prompts.hpp"

namespace ideagap::report {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view backend_mode_name(BackendMode m) {
  switch (m) {
    case BackendMode::Live: return "live";
    case BackendMode::Mock: return "mock";
    case BackendMode::Cache: return "cache";
  }
  return "mock";
}

std::optional<BackendMode> parse_backend_mode(std::string_view s) {
  const std::string t = to_lower(trim_view(s));
  if (t == "live") return BackendMode::Live;
  if (t == "mock") return BackendMode::Mock;
  if (t == "cache") return BackendMode::Cache;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

std::uint64_t parse_u64_or(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
}

int parse_int_or(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

double parse_double_or(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool_or(const std::string& key, const std::string& value) {
  const std::string t = to_lower(value);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    if (comma == std::string::npos) comma = value.size();
    const std::string item = trim(value.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(item);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "corpus" || key == "corpus_root") config.corpus_root = value;
  else if (key == "corpus_manifest" || key == "manifest") config.corpus_manifest = value;
  else if (key == "out" || key == "out_dir") config.out_dir = value;
  else if (key == "backend") {
    const auto mode = parse_backend_mode(value);
    if (!mode) throw ConfigError("backend: expected live|mock|cache, got '" + value + "'");
    config.backend = *mode;
  } else if (key == "endpoint_url") config.endpoint_url = value;
  else if (key == "api_key_env") config.api_key_env = value;
  else if (key == "cache" || key == "cache_path") config.cache_path = value;
  else if (key == "timeout_seconds") config.timeout_seconds = parse_int_or(key, value);
  else if (key == "retry_max_attempts") config.retry.max_attempts = parse_int_or(key, value);
  else if (key == "retry_base_backoff_ms")
    config.retry.base_backoff_ms = parse_int_or(key, value);
  else if (key == "retry_multiplier") config.retry.multiplier = parse_double_or(key, value);
  else if (key == "seed") config.seed = parse_u64_or(key, value);
  else if (key == "concurrency") config.concurrency = parse_int_or(key, value);
  else if (key == "extraction_model") config.extraction_model = value;
  else if (key == "ensemble_models") config.ensemble_models = parse_list(value);
  else if (key == "execution_model") config.execution_model = value;
  else if (key == "pairwise_model") config.pairwise_model = value;
  else if (key == "front_matter_fallback_chars")
    config.front_matter_fallback_chars = parse_u64_or(key, value);
  else if (key == "execution_char_budget")
    config.execution_char_budget = parse_u64_or(key, value);
  else if (key == "pairwise_char_budget")
    config.pairwise_char_budget = parse_u64_or(key, value);
  else if (key == "extraction_max_tokens")
    config.extraction_max_tokens = parse_int_or(key, value);
  else if (key == "rubric_max_tokens") config.rubric_max_tokens = parse_int_or(key, value);
  else if (key == "tournament_enabled")
    config.tournament_enabled = parse_bool_or(key, value);
  else if (key == "tournament_matches")
    config.tournament_matches = parse_u64_or(key, value);
  else if (key == "trueskill_mu0") config.trueskill.mu0 = parse_double_or(key, value);
  else if (key == "trueskill_sigma0") config.trueskill.sigma0 = parse_double_or(key, value);
  else if (key == "trueskill_beta") config.trueskill.beta = parse_double_or(key, value);
  else if (key == "trueskill_tau") config.trueskill.tau = parse_double_or(key, value);
  else if (key == "trueskill_draw_probability")
    config.trueskill.draw_probability = parse_double_or(key, value);
  else if (key == "trueskill_k_conservative")
    config.trueskill.k_conservative = parse_double_or(key, value);
  else
    throw ConfigError("unknown config key: " + key);
}

void apply_config_file(PipelineConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    apply_config_entry(config, key, value);
  }
}

void validate_config(const PipelineConfig& config) {
  if (config.corpus_root.empty()) throw ConfigError("corpus root not set");
  if (!fs::exists(config.corpus_root) || !fs::is_directory(config.corpus_root))
    throw ConfigError("corpus root is not a directory: " + config.corpus_root.string());
  if (config.corpus_manifest && !fs::exists(*config.corpus_manifest))
    throw ConfigError("corpus manifest not found: " + config.corpus_manifest->string());
  if (config.out_dir.empty()) throw ConfigError("output directory not set");
  if (config.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (config.ensemble_models.empty()) throw ConfigError("ensemble_models is empty");
  if (config.retry.max_attempts < 1) throw ConfigError("retry_max_attempts must be >= 1");
  if (config.retry.multiplier < 1.0) throw ConfigError("retry_multiplier must be >= 1");
  if (config.extraction_max_tokens < 400)
    throw ConfigError("extraction_max_tokens must be >= 400");
  if (config.execution_char_budget == 0 || config.pairwise_char_budget == 0)
    throw ConfigError("character budgets must be positive");
  if (config.trueskill.sigma0 <= 0.0 || config.trueskill.beta <= 0.0 ||
      config.trueskill.tau < 0.0)
    throw ConfigError("trueskill parameters out of range");
  if (config.trueskill.draw_probability <= 0.0 || config.trueskill.draw_probability >= 1.0)
    throw ConfigError("trueskill_draw_probability must be inside (0, 1)");
  if (config.backend == BackendMode::Cache && !config.cache_path)
    throw ConfigError("cache backend requires a cache path");
}

std::string config_hash(const PipelineConfig& config) {
  // json (not ordered_json) sorts keys, giving a canonical serialization.
  json j;
  j["backend"] = std::string(backend_mode_name(config.backend));
  j["corpus_root"] = config.corpus_root.string();
  j["corpus_manifest"] =
      config.corpus_manifest ? json(config.corpus_manifest->string()) : json(nullptr);
  j["endpoint_url"] = config.endpoint_url;
  j["api_key_env"] = config.api_key_env;
  j["timeout_seconds"] = config.timeout_seconds;
  j["retry"] = {{"max_attempts", config.retry.max_attempts},
                {"base_backoff_ms", config.retry.base_backoff_ms},
                {"multiplier", config.retry.multiplier}};
  j["seed"] = config.seed;
  j["concurrency"] = config.concurrency;
  j["extraction_model"] = config.extraction_model;
  j["ensemble_models"] = config.ensemble_models;
  j["execution_model"] = config.execution_model;
  j["pairwise_model"] = config.pairwise_model;
  j["front_matter_fallback_chars"] = config.front_matter_fallback_chars;
  j["execution_char_budget"] = config.execution_char_budget;
  j["pairwise_char_budget"] = config.pairwise_char_budget;
  j["extraction_max_tokens"] = config.extraction_max_tokens;
  j["rubric_max_tokens"] = config.rubric_max_tokens;
  j["tournament_enabled"] = config.tournament_enabled;
  j["tournament_matches"] = config.tournament_matches;
  j["trueskill"] = {{"mu0", config.trueskill.mu0},
                    {"sigma0", config.trueskill.sigma0},
                    {"beta", config.trueskill.beta},
                    {"tau", config.trueskill.tau},
                    {"draw_probability", config.trueskill.draw_probability},
                    {"k_conservative", config.trueskill.k_conservative}};
  return judge::sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// GapReport serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json group_to_json(const stats::GroupSummary& g) {
  return {{"n", g.n}, {"mean", g.mean}, {"sd", g.sd}};
}

stats::GroupSummary group_from_json(const json& j) {
  stats::GroupSummary g;
  g.n = j.at("n").get<std::size_t>();
  g.mean = j.at("mean").get<double>();
  g.sd = j.at("sd").get<double>();
  return g;
}

ordered_json test_to_json(const stats::TestResult& t) {
  ordered_json j;
  j["name"] = t.name;
  j["statistic"] = t.statistic;
  j["z"] = t.z ? json(*t.z) : json(nullptr);
  j["df"] = t.df ? json(*t.df) : json(nullptr);
  j["p_value"] = t.p_value;
  return j;
}

stats::TestResult test_from_json(const json& j) {
  stats::TestResult t;
  t.name = j.at("name").get<std::string>();
  t.statistic = j.at("statistic").get<double>();
  if (!j.at("z").is_null()) t.z = j["z"].get<double>();
  if (!j.at("df").is_null()) t.df = j["df"].get<int>();
  t.p_value = j.at("p_value").get<double>();
  return t;
}

ordered_json funnel_level_to_json(const stats::FunnelResult::Level& l) {
  return {{"idea_threshold", l.idea_threshold},
          {"exec_threshold", l.exec_threshold},
          {"count", l.count},
          {"share", l.share}};
}

stats::FunnelResult::Level funnel_level_from_json(const json& j) {
  stats::FunnelResult::Level l;
  l.idea_threshold = j.at("idea_threshold").get<double>();
  l.exec_threshold = j.at("exec_threshold").get<double>();
  l.count = j.at("count").get<std::size_t>();
  l.share = j.at("share").get<double>();
  return l;
}

const std::array<std::string_view, 4> kTierKeys = {"exceptional", "strong", "fair",
                                                   "limited"};

}  // namespace

ordered_json gap_report_to_json(const GapReport& r) {
  ordered_json j;
  j["n_ai"] = r.n_ai;
  j["n_human"] = r.n_human;
  j["idea"] = {{"ai", group_to_json(r.idea.ai)}, {"human", group_to_json(r.idea.human)}};
  j["composite"] = {{"ai", group_to_json(r.composite.ai)},
                    {"human", group_to_json(r.composite.human)}};
  j["d_idea"] = r.d_idea;
  j["d_exec"] = r.d_exec;
  j["mw_idea"] = test_to_json(r.mw_idea);
  j["mw_exec"] = test_to_json(r.mw_exec);

  ordered_json dims = ordered_json::array();
  for (const auto& d : r.dimensions)
    dims.push_back({{"name", d.name},
                    {"ai_mean", d.ai_mean},
                    {"human_mean", d.human_mean},
                    {"d", d.d},
                    {"p_value", d.p_value}});
  j["dimensions"] = dims;

  ordered_json tiers = ordered_json::object();
  for (const auto& [model, shares] : r.tier_shares) {
    ordered_json per_cohort = ordered_json::object();
    const std::array<std::string_view, 2> cohorts = {"AI", "Human"};
    for (std::size_t c = 0; c < 2; ++c) {
      ordered_json m = ordered_json::object();
      for (std::size_t t = 0; t < 4; ++t)
        m[std::string(kTierKeys[t])] = shares[c][t];
      per_cohort[std::string(cohorts[c])] = m;
    }
    tiers[model] = per_cohort;
  }
  j["tier_shares"] = tiers;
  j["tier_test_model"] = r.tier_test_model;
  j["tier_chi_square"] = test_to_json(r.tier_chi_square);

  j["decomposition"] = {{"d_idea", r.decomposition.d_idea},
                        {"d_exec", r.decomposition.d_exec},
                        {"share_idea", r.decomposition.share_idea},
                        {"share_exec", r.decomposition.share_exec}};
  j["funnel"] = {{"n_ai", r.funnel.n_ai},
                 {"median", funnel_level_to_json(r.funnel.median)},
                 {"q25", funnel_level_to_json(r.funnel.q25)},
                 {"min", funnel_level_to_json(r.funnel.min)}};

  ordered_json methods = ordered_json::object();
  for (const auto& [cohort, shares] : r.method_shares) {
    ordered_json m = ordered_json::object();
    for (const auto& [method, share] : shares) m[method] = share;
    methods[cohort] = m;
  }
  j["method_shares"] = methods;

  j["pearson_idea_exec_ai"] =
      r.pearson_idea_exec_ai ? json(*r.pearson_idea_exec_ai) : json(nullptr);
  if (r.tournament_spearman) {
    ordered_json s = ordered_json::object();
    for (const auto& [measure, rho] : *r.tournament_spearman) s[measure] = rho;
    j["tournament_spearman"] = s;
  } else {
    j["tournament_spearman"] = nullptr;
  }
  j["notes"] = r.notes;
  return j;
}

GapReport gap_report_from_json(const json& j) {
  GapReport r;
  r.n_ai = j.at("n_ai").get<std::size_t>();
  r.n_human = j.at("n_human").get<std::size_t>();
  r.idea.ai = group_from_json(j.at("idea").at("ai"));
  r.idea.human = group_from_json(j.at("idea").at("human"));
  r.composite.ai = group_from_json(j.at("composite").at("ai"));
  r.composite.human = group_from_json(j.at("composite").at("human"));
  r.d_idea = j.at("d_idea").get<double>();
  r.d_exec = j.at("d_exec").get<double>();
  r.mw_idea = test_from_json(j.at("mw_idea"));
  r.mw_exec = test_from_json(j.at("mw_exec"));
  for (const auto& d : j.at("dimensions")) {
    DimensionStats ds;
    ds.name = d.at("name").get<std::string>();
    ds.ai_mean = d.at("ai_mean").get<double>();
    ds.human_mean = d.at("human_mean").get<double>();
    ds.d = d.at("d").get<double>();
    ds.p_value = d.at("p_value").get<double>();
    r.dimensions.push_back(std::move(ds));
  }
  for (const auto& [model, per_cohort] : j.at("tier_shares").items()) {
    std::array<std::array<double, 4>, 2> shares{};
    const std::array<std::string_view, 2> cohorts = {"AI", "Human"};
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t t = 0; t < 4; ++t)
        shares[c][t] =
            per_cohort.at(std::string(cohorts[c])).at(std::string(kTierKeys[t])).get<double>();
    r.tier_shares[model] = shares;
  }
  r.tier_test_model = j.at("tier_test_model").get<std::string>();
  r.tier_chi_square = test_from_json(j.at("tier_chi_square"));
  r.decomposition.d_idea = j.at("decomposition").at("d_idea").get<double>();
  r.decomposition.d_exec = j.at("decomposition").at("d_exec").get<double>();
  r.decomposition.share_idea = j.at("decomposition").at("share_idea").get<double>();
  r.decomposition.share_exec = j.at("decomposition").at("share_exec").get<double>();
  r.funnel.n_ai = j.at("funnel").at("n_ai").get<std::size_t>();
  r.funnel.median = funnel_level_from_json(j.at("funnel").at("median"));
  r.funnel.q25 = funnel_level_from_json(j.at("funnel").at("q25"));
  r.funnel.min = funnel_level_from_json(j.at("funnel").at("min"));
  for (const auto& [cohort, shares] : j.at("method_shares").items())
    for (const auto& [method, share] : shares.items())
      r.method_shares[cohort][method] = share.get<double>();
  if (!j.at("pearson_idea_exec_ai").is_null())
    r.pearson_idea_exec_ai = j["pearson_idea_exec_ai"].get<double>();
  if (!j.at("tournament_spearman").is_null()) {
    std::map<std::string, double> s;
    for (const auto& [measure, rho] : j["tournament_spearman"].items())
      s[measure] = rho.get<double>();
    r.tournament_spearman = std::move(s);
  }
  for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
  return r;
}

// ---------------------------------------------------------------------------
// Intermediate rows
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCorpusFile = "corpus.jsonl";
constexpr const char* kSummariesFile = "summaries.jsonl";
constexpr const char* kIdeaScoresFile = "idea_scores.jsonl";
constexpr const char* kExecScoresFile = "exec_scores.jsonl";
constexpr const char* kMatchLogFile = "match_log.jsonl";
constexpr const char* kLeaderboardFile = "leaderboard.csv";
constexpr const char* kGapReportFile = "gap_report.json";
constexpr const char* kManifestFile = "manifest.json";

struct SummaryRow {
  std::string paper_id;
  corpus::Cohort cohort = corpus::Cohort::AI;
  std::string text;
  std::size_t word_count = 0;
  bool retried = false;
  bool out_of_band = false;
};

struct IdeaScoreRow {
  std::string paper_id;
  corpus::Cohort cohort = corpus::Cohort::AI;
  std::string summary;
  std::size_t word_count = 0;
  std::vector<std::pair<std::string, idea::ModelScore>> models;  // config order
  double ensemble = 0.0;
};

struct ExecScoreRow {
  std::string paper_id;
  corpus::Cohort cohort = corpus::Cohort::AI;
  exec::Method method = exec::Method::Other;
  std::array<int, 6> scores{};
  double composite = 0.0;
  bool truncated = false;
};

std::ofstream open_out(const fs::path& path, const char* stage) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StageFailure(stage, "cannot write " + path.string());
  return out;
}

std::string read_text_file(const fs::path& path, const char* stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageFailure(stage, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

corpus::Cohort cohort_from_json(const json& j) {
  const auto c = corpus::parse_cohort(j.get<std::string>());
  if (!c) throw std::runtime_error("unknown cohort: " + j.get<std::string>());
  return *c;
}

// --- summaries ---

void write_summaries(const std::vector<SummaryRow>& rows, const fs::path& path) {
  auto out = open_out(path, "extract");
  for (const auto& r : rows) {
    ordered_json j;
    j["paper_id"] = r.paper_id;
    j["cohort"] = std::string(corpus::cohort_name(r.cohort));
    j["text"] = r.text;
    j["word_count"] = r.word_count;
    j["retried"] = r.retried;
    j["out_of_band"] = r.out_of_band;
    out << j.dump() << '\n';
  }
}

std::vector<SummaryRow> load_summaries(const fs::path& path) {
  std::vector<SummaryRow> rows;
  for (const auto& line : split_lines(read_text_file(path, "extract"))) {
    if (trim_view(line).empty()) continue;
    const json j = json::parse(line);
    SummaryRow r;
    r.paper_id = j.at("paper_id").get<std::string>();
    r.cohort = cohort_from_json(j.at("cohort"));
    r.text = j.at("text").get<std::string>();
    r.word_count = j.at("word_count").get<std::size_t>();
    r.retried = j.at("retried").get<bool>();
    r.out_of_band = j.at("out_of_band").get<bool>();
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- idea scores ---

void write_idea_scores(const std::vector<IdeaScoreRow>& rows, const fs::path& path) {
  auto out = open_out(path, "score-ideas");
  for (const auto& r : rows) {
    ordered_json j;
    j["paper_id"] = r.paper_id;
    j["cohort"] = std::string(corpus::cohort_name(r.cohort));
    j["summary"] = r.summary;
    j["word_count"] = r.word_count;
    ordered_json models = ordered_json::object();
    for (const auto& [model, score] : r.models) {
      models[model] = {
          {"p_exceptional", score.distribution[idea::Tier::Exceptional]},
          {"p_strong", score.distribution[idea::Tier::Strong]},
          {"p_fair", score.distribution[idea::Tier::Fair]},
          {"p_limited", score.distribution[idea::Tier::Limited]},
          {"predicted_tier", std::string(idea::tier_name(score.predicted_tier))}};
    }
    j["models"] = models;
    j["ensemble_exceptional"] = r.ensemble;
    out << j.dump() << '\n';
  }
}

std::vector<IdeaScoreRow> load_idea_scores(const fs::path& path) {
  std::vector<IdeaScoreRow> rows;
  for (const auto& line : split_lines(read_text_file(path, "score-ideas"))) {
    if (trim_view(line).empty()) continue;
    const json j = json::parse(line);
    IdeaScoreRow r;
    r.paper_id = j.at("paper_id").get<std::string>();
    r.cohort = cohort_from_json(j.at("cohort"));
    r.summary = j.at("summary").get<std::string>();
    r.word_count = j.at("word_count").get<std::size_t>();
    for (const auto& [model, v] : j.at("models").items()) {
      idea::ModelScore s;
      s.distribution.p = {v.at("p_exceptional").get<double>(),
                          v.at("p_strong").get<double>(),
                          v.at("p_fair").get<double>(),
                          v.at("p_limited").get<double>()};
      const auto tier = idea::parse_tier(v.at("predicted_tier").get<std::string>());
      if (!tier) throw std::runtime_error("bad predicted_tier in " + path.string());
      s.predicted_tier = *tier;
      r.models.emplace_back(model, s);
    }
    r.ensemble = j.at("ensemble_exceptional").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- exec scores ---

void write_exec_scores(const std::vector<ExecScoreRow>& rows, const fs::path& path) {
  auto out = open_out(path, "score-execution");
  for (const auto& r : rows) {
    ordered_json j;
    j["paper_id"] = r.paper_id;
    j["cohort"] = std::string(corpus::cohort_name(r.cohort));
    j["method"] = std::string(exec::method_name(r.method));
    ordered_json scores = ordered_json::object();
    for (std::size_t i = 0; i < 6; ++i)
      scores[std::string(exec::dimension_name(exec::kDimensions[i]))] = r.scores[i];
    j["scores"] = scores;
    j["composite"] = r.composite;
    j["truncated"] = r.truncated;
    out << j.dump() << '\n';
  }
}

std::vector<ExecScoreRow> load_exec_scores(const fs::path& path) {
  std::vector<ExecScoreRow> rows;
  for (const auto& line : split_lines(read_text_file(path, "score-execution"))) {
    if (trim_view(line).empty()) continue;
    const json j = json::parse(line);
    ExecScoreRow r;
    r.paper_id = j.at("paper_id").get<std::string>();
    r.cohort = cohort_from_json(j.at("cohort"));
    r.method = exec::parse_method(j.at("method").get<std::string>());
    for (std::size_t i = 0; i < 6; ++i)
      r.scores[i] =
          j.at("scores").at(std::string(exec::dimension_name(exec::kDimensions[i]))).get<int>();
    r.composite = j.at("composite").get<double>();
    r.truncated = j.at("truncated").get<bool>();
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- tournament artifacts ---

std::string favored_paper(tournament::Judgment judgment, bool a_listed_first) {
  const bool first_listed_won = judgment == tournament::Judgment::FirstListedWins;
  if (a_listed_first) return first_listed_won ? "A" : "B";
  return first_listed_won ? "B" : "A";
}

void write_match_log(const std::vector<tournament::MatchRecord>& matches,
                     const fs::path& path) {
  auto out = open_out(path, "tournament");
  for (const auto& m : matches) {
    ordered_json j;
    j["match_index"] = m.match_index;
    j["paper_a"] = m.paper_a;
    j["paper_b"] = m.paper_b;
    j["judgment_ab"] = favored_paper(m.judgment_ab, true);
    j["judgment_ba"] = favored_paper(m.judgment_ba, false);
    switch (m.outcome) {
      case trueskill::MatchOutcome::AWins: j["outcome"] = "a_wins"; break;
      case trueskill::MatchOutcome::BWins: j["outcome"] = "b_wins"; break;
      case trueskill::MatchOutcome::Tie: j["outcome"] = "tie"; break;
    }
    if (!m.confidence_ab.empty()) j["confidence_ab"] = m.confidence_ab;
    if (!m.confidence_ba.empty()) j["confidence_ba"] = m.confidence_ba;
    out << j.dump() << '\n';
  }
}

void write_leaderboard(const std::vector<tournament::LeaderboardEntry>& entries,
                       const fs::path& path) {
  auto out = open_out(path, "tournament");
  out << "rank,paper_id,mu,sigma,conservative,matches\n";
  std::size_t rank = 1;
  for (const auto& e : entries) {
    out << rank++ << ',' << e.paper_id << ',' << format_double(e.mu) << ','
        << format_double(e.sigma) << ',' << format_double(e.conservative) << ','
        << e.matches_played << '\n';
  }
}

std::vector<tournament::LeaderboardEntry> load_leaderboard(const fs::path& path) {
  std::vector<tournament::LeaderboardEntry> entries;
  const auto lines = split_lines(read_text_file(path, "stats"));
  for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (fields.size() != 6)
      throw std::runtime_error("bad leaderboard row: " + line);
    tournament::LeaderboardEntry e;
    e.paper_id = fields[1];
    e.mu = std::stod(fields[2]);
    e.sigma = std::stod(fields[3]);
    e.conservative = std::stod(fields[4]);
    e.matches_played = std::stoull(fields[5]);
    entries.push_back(std::move(e));
  }
  return entries;
}

// ---------------------------------------------------------------------------
// Stats assembly
// ---------------------------------------------------------------------------

std::vector<double> pluck_idea(const std::vector<IdeaScoreRow>& rows,
                               corpus::Cohort cohort) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.cohort == cohort) out.push_back(r.ensemble);
  return out;
}

std::vector<double> pluck_composite(const std::vector<ExecScoreRow>& rows,
                                    corpus::Cohort cohort) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.cohort == cohort) out.push_back(r.composite);
  return out;
}

GapReport build_gap_report(const std::vector<IdeaScoreRow>& idea_rows,
                           const std::vector<ExecScoreRow>& exec_rows,
                           const std::optional<std::vector<tournament::LeaderboardEntry>>&
                               leaderboard,
                           const std::vector<std::string>& ensemble_models) {
  GapReport r;
  const auto ai = corpus::Cohort::AI;
  const auto human = corpus::Cohort::Human;

  const std::vector<double> idea_ai = pluck_idea(idea_rows, ai);
  const std::vector<double> idea_human = pluck_idea(idea_rows, human);
  const std::vector<double> comp_ai = pluck_composite(exec_rows, ai);
  const std::vector<double> comp_human = pluck_composite(exec_rows, human);
  if (idea_ai.size() < 2 || idea_human.size() < 2)
    throw StageFailure("stats", "need at least 2 idea-scored papers per cohort");
  if (comp_ai.size() < 2 || comp_human.size() < 2)
    throw StageFailure("stats", "need at least 2 execution-scored papers per cohort");

  r.n_ai = idea_ai.size();
  r.n_human = idea_human.size();
  r.idea.ai = stats::summarize(idea_ai);
  r.idea.human = stats::summarize(idea_human);
  r.composite.ai = stats::summarize(comp_ai);
  r.composite.human = stats::summarize(comp_human);

  r.d_idea = stats::cohens_d(idea_human, idea_ai);
  r.d_exec = stats::cohens_d(comp_human, comp_ai);
  r.mw_idea = stats::mann_whitney_u(idea_human, idea_ai);
  r.mw_idea.name = "mann_whitney_idea";
  r.mw_exec = stats::mann_whitney_u(comp_human, comp_ai);
  r.mw_exec.name = "mann_whitney_composite";

  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> dim_ai, dim_human;
    for (const auto& row : exec_rows) {
      (row.cohort == ai ? dim_ai : dim_human).push_back(row.scores[i]);
    }
    DimensionStats ds;
    ds.name = std::string(exec::dimension_name(exec::kDimensions[i]));
    ds.ai_mean = stats::summarize(dim_ai).mean;
    ds.human_mean = stats::summarize(dim_human).mean;
    try {
      ds.d = stats::cohens_d(dim_human, dim_ai);
    } catch (const stats::StatsError& e) {
      ds.d = 0.0;
      r.notes.push_back(ds.name + ": " + e.what());
    }
    ds.p_value = stats::mann_whitney_u(dim_human, dim_ai).p_value;
    r.dimensions.push_back(std::move(ds));
  }

  // Tier shares per model, and the independence test on the first ensemble
  // model's predicted tiers.
  for (const auto& model : ensemble_models) {
    std::array<std::array<double, 4>, 2> shares{};
    std::array<std::array<double, 4>, 2> counts{};
    std::array<double, 2> totals{};
    for (const auto& row : idea_rows) {
      const auto it =
          std::find_if(row.models.begin(), row.models.end(),
                       [&](const auto& p) { return p.first == model; });
      if (it == row.models.end()) continue;
      const std::size_t c = row.cohort == ai ? 0 : 1;
      counts[c][static_cast<std::size_t>(it->second.predicted_tier)] += 1.0;
      totals[c] += 1.0;
    }
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t t = 0; t < 4; ++t)
        shares[c][t] = totals[c] > 0.0 ? counts[c][t] / totals[c] : 0.0;
    r.tier_shares[model] = shares;
    if (model == ensemble_models.front()) {
      r.tier_test_model = model;
      try {
        r.tier_chi_square = stats::chi_square_independence(counts[0], counts[1]);
      } catch (const stats::StatsError& e) {
        r.tier_chi_square.name = "chi_square_independence";
        r.tier_chi_square.statistic = 0.0;
        r.tier_chi_square.df = 0;
        r.tier_chi_square.p_value = 1.0;
        r.notes.push_back(std::string("tier chi-square degenerate: ") + e.what());
      }
    }
  }

  r.decomposition = stats::decompose_gap(r.d_idea, r.d_exec);

  // Funnel and correlations need papers scored on both measures.
  std::vector<stats::ScorePair> ai_pairs, human_pairs;
  std::vector<double> ai_idea_joined, ai_exec_joined;
  {
    std::map<std::string, double> exec_by_id;
    std::map<std::string, corpus::Cohort> cohort_by_id;
    for (const auto& e : exec_rows) {
      exec_by_id[e.paper_id] = e.composite;
      cohort_by_id[e.paper_id] = e.cohort;
    }
    for (const auto& i : idea_rows) {
      const auto it = exec_by_id.find(i.paper_id);
      if (it == exec_by_id.end()) continue;
      const stats::ScorePair pair{i.ensemble, it->second};
      if (i.cohort == ai) {
        ai_pairs.push_back(pair);
        ai_idea_joined.push_back(pair.idea);
        ai_exec_joined.push_back(pair.exec);
      } else {
        human_pairs.push_back(pair);
      }
    }
  }
  if (ai_pairs.empty() || human_pairs.empty())
    throw StageFailure("stats", "no papers scored on both measures in some cohort");
  r.funnel = stats::funnel_analysis(ai_pairs, human_pairs);

  try {
    r.pearson_idea_exec_ai = stats::pearson_r(ai_idea_joined, ai_exec_joined);
  } catch (const stats::StatsError& e) {
    r.notes.push_back(std::string("idea-execution correlation degenerate: ") + e.what());
  }

  // Method shares per cohort.
  for (const auto cohort : {ai, human}) {
    std::vector<exec::Scorecard> cards;
    for (const auto& e : exec_rows) {
      if (e.cohort != cohort) continue;
      exec::Scorecard c;
      c.paper_id = e.paper_id;
      c.method = e.method;
      cards.push_back(std::move(c));
    }
    const auto dist = exec::method_distribution(cards);
    auto& out = r.method_shares[std::string(corpus::cohort_name(cohort))];
    for (const auto& [m, share] : dist) out[std::string(exec::method_name(m))] = share;
  }

  if (leaderboard) {
    std::map<std::string, double> rating_by_id;
    for (const auto& e : *leaderboard) rating_by_id[e.paper_id] = e.conservative;
    std::map<std::string, double> idea_by_id, comp_by_id;
    for (const auto& i : idea_rows) idea_by_id[i.paper_id] = i.ensemble;
    for (const auto& e : exec_rows) comp_by_id[e.paper_id] = e.composite;
    std::map<std::string, double> spearman;
    for (const auto& [measure, values] :
         {std::pair{std::string("ensemble_exceptional"), &idea_by_id},
          std::pair{std::string("composite"), &comp_by_id}}) {
      std::vector<double> xs, ys;
      for (const auto& [id, v] : *values) {
        const auto it = rating_by_id.find(id);
        if (it == rating_by_id.end()) continue;
        xs.push_back(v);
        ys.push_back(it->second);
      }
      if (xs.size() >= 2) {
        try {
          spearman[measure] = stats::spearman_rho(xs, ys);
        } catch (const stats::StatsError& e) {
          r.notes.push_back(measure + " vs tournament degenerate: " + e.what());
        }
      }
    }
    if (!spearman.empty()) r.tournament_spearman = std::move(spearman);
  }

  return r;
}

// ---------------------------------------------------------------------------
// Tables, figures, summary
// ---------------------------------------------------------------------------

std::string format_sig(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

void emit_tables(const GapReport& r, const fs::path& dir) {
  {
    auto out = open_out(dir / "table1_dimensions.csv", "report");
    out << "dimension,ai_mean,human_mean,cohens_d,p_value\n";
    for (const auto& d : r.dimensions)
      out << d.name << ',' << format_double(d.ai_mean) << ','
          << format_double(d.human_mean) << ',' << format_double(d.d) << ','
          << format_double(d.p_value) << '\n';
  }
  {
    auto out = open_out(dir / "tier_distribution.csv", "report");
    out << "model,cohort,n,exceptional,strong,fair,limited\n";
    for (const auto& [model, shares] : r.tier_shares) {
      const std::array<std::pair<std::string_view, std::size_t>, 2> cohorts = {
          std::pair{std::string_view("AI"), r.n_ai},
          std::pair{std::string_view("Human"), r.n_human}};
      for (std::size_t c = 0; c < 2; ++c) {
        out << model << ',' << cohorts[c].first << ',' << cohorts[c].second;
        for (std::size_t t = 0; t < 4; ++t) out << ',' << format_double(shares[c][t]);
        out << '\n';
      }
    }
  }
}

void emit_plot_data(const GapReport& r, const std::vector<IdeaScoreRow>& idea_rows,
                    const std::vector<ExecScoreRow>& exec_rows, const fs::path& dir) {
  {
    auto out = open_out(dir / "fig1_tiers.csv", "report");
    out << "model,cohort,tier,share\n";
    for (const auto& [model, shares] : r.tier_shares) {
      const std::array<std::string_view, 2> cohorts = {"AI", "Human"};
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t t = 0; t < 4; ++t)
          out << model << ',' << cohorts[c] << ','
              << idea::tier_name(idea::kTiers[t]) << ',' << format_double(shares[c][t])
              << '\n';
    }
  }
  {
    auto out = open_out(dir / "fig1b_hist.csv", "report");
    out << "cohort,bin_start,bin_end,count\n";
    constexpr double width = 0.05;
    constexpr int bins = 20;
    for (const auto cohort : {corpus::Cohort::AI, corpus::Cohort::Human}) {
      std::array<std::size_t, bins> counts{};
      for (const auto& row : idea_rows) {
        if (row.cohort != cohort) continue;
        int b = static_cast<int>(row.ensemble / width);
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < bins; ++b)
        out << corpus::cohort_name(cohort) << ',' << format_double(b * width) << ','
            << format_double((b + 1) * width) << ',' << counts[static_cast<std::size_t>(b)]
            << '\n';
    }
  }
  {
    auto out = open_out(dir / "fig2_radar.csv", "report");
    out << "cohort,dimension,mean\n";
    for (const auto& d : r.dimensions) out << "AI," << d.name << ',' << format_double(d.ai_mean) << '\n';
    for (const auto& d : r.dimensions)
      out << "Human," << d.name << ',' << format_double(d.human_mean) << '\n';
  }
  {
    auto out = open_out(dir / "fig3_scatter.csv", "report");
    out << "paper_id,cohort,idea,execution\n";
    std::map<std::string, const ExecScoreRow*> exec_by_id;
    for (const auto& e : exec_rows) exec_by_id[e.paper_id] = &e;
    for (const auto& i : idea_rows) {
      const auto it = exec_by_id.find(i.paper_id);
      if (it == exec_by_id.end()) continue;
      out << i.paper_id << ',' << corpus::cohort_name(i.cohort) << ','
          << format_double(i.ensemble) << ',' << format_double(it->second->composite)
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "fig4_funnel.csv", "report");
    out << "level,idea_threshold,exec_threshold,count,share\n";
    const std::array<std::pair<std::string_view, const stats::FunnelResult::Level*>, 3>
        levels = {std::pair{std::string_view("human_median"), &r.funnel.median},
                  std::pair{std::string_view("human_q25"), &r.funnel.q25},
                  std::pair{std::string_view("human_min"), &r.funnel.min}};
    for (const auto& [name, level] : levels)
      out << name << ',' << format_double(level->idea_threshold) << ','
          << format_double(level->exec_threshold) << ',' << level->count << ','
          << format_double(level->share) << '\n';
  }
  {
    auto out = open_out(dir / "fig5_methods.csv", "report");
    out << "cohort,method,share\n";
    for (const auto& [cohort, shares] : r.method_shares)
      for (const auto& [method, share] : shares)
        out << cohort << ',' << method << ',' << format_double(share) << '\n';
  }
  {
    auto out = open_out(dir / "fig5b_correlations.csv", "report");
    out << "measure,statistic,value\n";
    if (r.pearson_idea_exec_ai)
      out << "idea_vs_execution_ai,pearson_r," << format_double(*r.pearson_idea_exec_ai)
          << '\n';
    if (r.tournament_spearman)
      for (const auto& [measure, rho] : *r.tournament_spearman)
        out << measure << ",spearman_vs_tournament," << format_double(rho) << '\n';
  }
}

void emit_summary_md(const GapReport& r, const fs::path& dir) {
  auto out = open_out(dir / "summary.md", "report");
  out << "# Research quality gap report\n\n";
  out << "## Cohorts\n\n";
  out << "- AI-generated papers scored: " << r.n_ai << "\n";
  out << "- Human-written papers scored: " << r.n_human << "\n\n";

  out << "## Idea quality (ensemble top-tier probability)\n\n";
  out << "- AI mean " << format_fixed(r.idea.ai.mean, 3) << " (sd "
      << format_fixed(r.idea.ai.sd, 3) << "), human mean "
      << format_fixed(r.idea.human.mean, 3) << " (sd " << format_fixed(r.idea.human.sd, 3)
      << ")\n";
  out << "- Cohen's d (human - AI): " << format_fixed(r.d_idea, 2)
      << ", Mann-Whitney p = " << format_sig(r.mw_idea.p_value) << "\n\n";

  out << "## Execution quality (weighted rubric composite)\n\n";
  out << "- AI mean " << format_fixed(r.composite.ai.mean, 2) << " (sd "
      << format_fixed(r.composite.ai.sd, 2) << "), human mean "
      << format_fixed(r.composite.human.mean, 2) << " (sd "
      << format_fixed(r.composite.human.sd, 2) << ")\n";
  out << "- Cohen's d (human - AI): " << format_fixed(r.d_exec, 2)
      << ", Mann-Whitney p = " << format_sig(r.mw_exec.p_value) << "\n\n";

  out << "## Dimension means\n\n";
  out << "| Dimension | AI | Human | d | p |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& d : r.dimensions)
    out << "| " << d.name << " | " << format_fixed(d.ai_mean, 2) << " | "
        << format_fixed(d.human_mean, 2) << " | " << format_fixed(d.d, 2) << " | "
        << format_sig(d.p_value) << " |\n";
  out << "\n";

  out << "## Tier distribution\n\n";
  out << "| Model | Cohort | Exceptional | Strong | Fair | Limited |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& [model, shares] : r.tier_shares) {
    const std::array<std::string_view, 2> cohorts = {"AI", "Human"};
    for (std::size_t c = 0; c < 2; ++c) {
      out << "| " << model << " | " << cohorts[c] << " |";
      for (std::size_t t = 0; t < 4; ++t)
        out << ' ' << format_fixed(shares[c][t] * 100.0, 1) << "% |";
      out << '\n';
    }
  }
  out << "\nIndependence test on " << r.tier_test_model
      << " tiers: chi-square = " << format_fixed(r.tier_chi_square.statistic, 2)
      << ", df = " << (r.tier_chi_square.df ? *r.tier_chi_square.df : 0)
      << ", p = " << format_sig(r.tier_chi_square.p_value) << "\n\n";

  out << "## Gap decomposition\n\n";
  out << "- Idea share of the standardized gap: "
      << format_fixed(r.decomposition.share_idea * 100.0, 1) << "%\n";
  out << "- Execution share: " << format_fixed(r.decomposition.share_exec * 100.0, 1)
      << "%\n\n";

  out << "## Funnel (AI papers strictly above the human reference on both measures)\n\n";
  out << "- Above human median: " << r.funnel.median.count << " of " << r.funnel.n_ai
      << " (" << format_fixed(r.funnel.median.share * 100.0, 1) << "%)\n";
  out << "- Above human 25th percentile: " << r.funnel.q25.count << " ("
      << format_fixed(r.funnel.q25.share * 100.0, 1) << "%)\n";
  out << "- Above human minimum: " << r.funnel.min.count << " ("
      << format_fixed(r.funnel.min.share * 100.0, 1) << "%)\n\n";

  out << "## Identification methods\n\n";
  out << "| Cohort | Method | Share |\n|---|---|---|\n";
  for (const auto& [cohort, shares] : r.method_shares)
    for (const auto& [method, share] : shares)
      if (share > 0.0)
        out << "| " << cohort << " | " << method << " | "
            << format_fixed(share * 100.0, 1) << "% |\n";
  out << "\n";

  out << "## Correlations\n\n";
  if (r.pearson_idea_exec_ai)
    out << "- Idea vs execution quality within the AI cohort: r = "
        << format_fixed(*r.pearson_idea_exec_ai, 3) << "\n";
  if (r.tournament_spearman)
    for (const auto& [measure, rho] : *r.tournament_spearman)
      out << "- " << measure << " vs tournament conservative rating: rho = "
          << format_fixed(rho, 3) << "\n";
  if (!r.pearson_idea_exec_ai && !r.tournament_spearman) out << "- not available\n";

  if (!r.notes.empty()) {
    out << "\n## Notes\n\n";
    for (const auto& n : r.notes) out << "- " << n << "\n";
  }
}

// ---------------------------------------------------------------------------
// Pipeline context
// ---------------------------------------------------------------------------

struct Records {
  std::vector<std::string> skips;                 // "path: reason"
  std::vector<std::string> conversion_warnings;   // "id: warning"
  std::vector<std::string> front_matter_fallbacks;
  std::vector<std::string> extraction_failures;
  std::vector<std::string> retried_extractions;
  std::vector<std::string> out_of_band_summaries;
  std::vector<std::string> idea_scoring_failures;
  std::vector<std::string> execution_failures;
  std::vector<std::string> truncated_papers;
  std::vector<std::string> score_warnings;
  std::vector<std::string> tournament_failures;
  std::vector<std::string> stats_notes;
};

template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t count = std::min(static_cast<std::size_t>(workers), n);
  for (std::size_t w = 0; w < count; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

class Context {
 public:
  Context(const PipelineConfig& config, bool force) : cfg_(config), force_(force) {
    for (const auto s : kStages) statuses_[std::string(s)] = "skipped";
  }

  void run_stage(const std::string& stage) {
    if (stage == "ingest") ensure_corpus(true);
    else if (stage == "extract") ensure_summaries(true);
    else if (stage == "score-ideas") ensure_idea_scores(true);
    else if (stage == "score-execution") ensure_exec_scores(true);
    else if (stage == "tournament") ensure_tournament(true);
    else if (stage == "stats") ensure_gap_report(true);
    else if (stage == "report") do_report();
    else throw ConfigError("unknown stage: " + stage);
  }

  void mark_failed(const std::string& stage, const std::string& error) {
    statuses_[stage] = "failed: " + error;
  }

  void write_manifest() {
    ordered_json j;
    j["backend"] = std::string(backend_mode_name(cfg_.backend));
    j["seed"] = cfg_.seed;
    j["config_hash"] = config_hash(cfg_);
    if (corpus_) {
      j["corpus"] = {{"papers", corpus_->papers.size()},
                     {"ai", corpus_->count(corpus::Cohort::AI)},
                     {"human", corpus_->count(corpus::Cohort::Human)}};
    } else {
      j["corpus"] = nullptr;
    }
    ordered_json stages = ordered_json::object();
    for (const auto s : kStages) stages[std::string(s)] = statuses_.at(std::string(s));
    j["stages"] = stages;
    if (cache_layer_) {
      j["cache"] = {{"hits", cache_layer_->hits()}, {"misses", cache_layer_->misses()}};
    } else {
      j["cache"] = nullptr;
    }
    ordered_json rec;
    rec["skips"] = records_.skips;
    rec["conversion_warnings"] = records_.conversion_warnings;
    rec["front_matter_fallbacks"] = records_.front_matter_fallbacks;
    rec["extraction_failures"] = records_.extraction_failures;
    rec["retried_extractions"] = records_.retried_extractions;
    rec["out_of_band_summaries"] = records_.out_of_band_summaries;
    rec["idea_scoring_failures"] = records_.idea_scoring_failures;
    rec["execution_failures"] = records_.execution_failures;
    rec["truncated_papers"] = records_.truncated_papers;
    rec["score_warnings"] = records_.score_warnings;
    rec["tournament_failures"] = records_.tournament_failures;
    rec["stats_notes"] = records_.stats_notes;
    j["records"] = rec;

    auto out = open_out(cfg_.out_dir / kManifestFile, "manifest");
    out << j.dump(2) << '\n';
  }

 private:
  // --- backend -------------------------------------------------------------

  judge::JudgeBackend& backend() {
    if (backend_) return *backend_;
    std::shared_ptr<judge::JudgeBackend> inner;
    switch (cfg_.backend) {
      case BackendMode::Mock:
        inner = std::make_shared<judge::MockJudgeBackend>(cfg_.seed);
        break;
      case BackendMode::Live: {
        judge::JudgeConfig jc;
        jc.endpoint_url = cfg_.endpoint_url;
        jc.api_key_env = cfg_.api_key_env;
        jc.timeout_seconds = cfg_.timeout_seconds;
        jc.max_in_flight = cfg_.concurrency;
        jc.retry = cfg_.retry;
        try {
          inner = std::make_shared<judge::HttpJudgeBackend>(jc);
        } catch (const judge::JudgeError& e) {
          throw ConfigError(e.what());
        }
        break;
      }
      case BackendMode::Cache: {
        try {
          cache_layer_ =
              std::make_shared<judge::CachingBackend>(nullptr, *cfg_.cache_path);
        } catch (const judge::JudgeError& e) {
          throw ConfigError(e.what());
        }
        backend_ = cache_layer_;
        return *backend_;
      }
    }
    std::shared_ptr<judge::JudgeBackend> bounded =
        std::make_shared<judge::BoundedBackend>(std::move(inner), cfg_.concurrency);
    if (cfg_.cache_path) {
      cache_layer_ = std::make_shared<judge::CachingBackend>(bounded, *cfg_.cache_path);
      backend_ = cache_layer_;
    } else {
      backend_ = std::move(bounded);
    }
    return *backend_;
  }

  // --- stages --------------------------------------------------------------

  void ensure_corpus(bool requested = false) {
    if (corpus_) return;
    const fs::path file = cfg_.out_dir / kCorpusFile;
    if (!force_ && !requested && fs::exists(file)) {
      corpus_ = load_corpus_jsonl(file);
      statuses_["ingest"] = "reused";
      return;
    }
    corpus::LoadOptions opts;
    opts.front_matter.fallback_chars = cfg_.front_matter_fallback_chars;
    opts.manifest = cfg_.corpus_manifest;
    try {
      corpus_ = corpus::load_corpus(cfg_.corpus_root, opts);
    } catch (const corpus::CorpusError& e) {
      throw StageFailure("ingest", e.what());
    }
    for (const auto& s : corpus_->skips)
      records_.skips.push_back(s.path + ": " + s.reason);
    records_.conversion_warnings = corpus_->warnings;
    for (const auto& p : corpus_->papers)
      if (p.front_matter_fallback) records_.front_matter_fallbacks.push_back(p.id);
    auto out = open_out(file, "ingest");
    corpus::dump_jsonl(*corpus_, out);
    statuses_["ingest"] = "ok";
  }

  corpus::Corpus load_corpus_jsonl(const fs::path& path) {
    corpus::Corpus c;
    for (const auto& line : split_lines(read_text_file(path, "ingest"))) {
      if (trim_view(line).empty()) continue;
      const json j = json::parse(line);
      corpus::Paper p;
      p.id = j.at("id").get<std::string>();
      p.cohort = cohort_from_json(j.at("cohort"));
      p.title = j.at("title").get<std::string>();
      p.front_matter = j.at("front_matter").get<std::string>();
      p.full_text = j.at("full_text").get<std::string>();
      c.papers.push_back(std::move(p));
    }
    if (c.papers.empty()) throw StageFailure("ingest", "corpus.jsonl is empty");
    std::sort(c.papers.begin(), c.papers.end(),
              [](const corpus::Paper& a, const corpus::Paper& b) { return a.id < b.id; });
    return c;
  }

  void ensure_summaries(bool requested = false) {
    if (summaries_) return;
    const fs::path file = cfg_.out_dir / kSummariesFile;
    if (!force_ && !requested && fs::exists(file)) {
      summaries_ = load_summaries(file);
      statuses_["extract"] = "reused";
      return;
    }
    ensure_corpus();
    auto& papers = corpus_->papers;
    idea::ExtractionConfig xc;
    xc.model = cfg_.extraction_model;
    xc.max_tokens = cfg_.extraction_max_tokens;
    std::vector<std::optional<idea::IdeaSummary>> results(papers.size());
    std::vector<std::string> errors(papers.size());
    auto& be = backend();
    parallel_for(papers.size(), cfg_.concurrency, [&](std::size_t i) {
      try {
        results[i] = idea::extract_idea(papers[i].id, papers[i].front_matter, be, xc);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    std::vector<SummaryRow> rows;
    for (std::size_t i = 0; i < papers.size(); ++i) {
      if (!results[i]) {
        records_.extraction_failures.push_back(papers[i].id + ": " + errors[i]);
        continue;
      }
      const auto& s = *results[i];
      if (s.retried) records_.retried_extractions.push_back(s.paper_id);
      if (s.out_of_band) records_.out_of_band_summaries.push_back(s.paper_id);
      rows.push_back({s.paper_id, papers[i].cohort, s.text, s.word_count, s.retried,
                      s.out_of_band});
    }
    if (rows.empty()) throw StageFailure("extract", "no summaries produced");
    write_summaries(rows, file);
    summaries_ = std::move(rows);
    statuses_["extract"] = "ok";
  }

  void ensure_idea_scores(bool requested = false) {
    if (idea_scores_) return;
    const fs::path file = cfg_.out_dir / kIdeaScoresFile;
    if (!force_ && !requested && fs::exists(file)) {
      idea_scores_ = load_idea_scores(file);
      statuses_["score-ideas"] = "reused";
      return;
    }
    ensure_summaries();
    const auto& rows_in = *summaries_;
    std::vector<std::optional<IdeaScoreRow>> results(rows_in.size());
    std::vector<std::string> errors(rows_in.size());
    auto& be = backend();
    parallel_for(rows_in.size(), cfg_.concurrency, [&](std::size_t i) {
      try {
        idea::IdeaSummary s;
        s.paper_id = rows_in[i].paper_id;
        s.text = rows_in[i].text;
        s.word_count = rows_in[i].word_count;
        std::vector<std::pair<std::string, idea::ModelScore>> per_model;
        for (const auto& model : cfg_.ensemble_models)
          per_model.emplace_back(model, idea::classify_tier(s, model, be));
        const idea::IdeaScore score = idea::ensemble_idea_score(s.paper_id, per_model);
        IdeaScoreRow row;
        row.paper_id = rows_in[i].paper_id;
        row.cohort = rows_in[i].cohort;
        row.summary = rows_in[i].text;
        row.word_count = rows_in[i].word_count;
        row.models = std::move(per_model);
        row.ensemble = score.ensemble_exceptional;
        results[i] = std::move(row);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    std::vector<IdeaScoreRow> rows;
    for (std::size_t i = 0; i < rows_in.size(); ++i) {
      if (!results[i]) {
        records_.idea_scoring_failures.push_back(rows_in[i].paper_id + ": " + errors[i]);
        continue;
      }
      rows.push_back(std::move(*results[i]));
    }
    if (rows.empty()) throw StageFailure("score-ideas", "no idea scores produced");
    write_idea_scores(rows, file);
    idea_scores_ = std::move(rows);
    statuses_["score-ideas"] = "ok";
  }

  void ensure_exec_scores(bool requested = false) {
    if (exec_scores_) return;
    const fs::path file = cfg_.out_dir / kExecScoresFile;
    if (!force_ && !requested && fs::exists(file)) {
      exec_scores_ = load_exec_scores(file);
      statuses_["score-execution"] = "reused";
      return;
    }
    ensure_corpus();
    const auto& papers = corpus_->papers;
    exec::EvalConfig ec;
    ec.model = cfg_.execution_model;
    ec.max_tokens = cfg_.rubric_max_tokens;
    ec.char_budget = cfg_.execution_char_budget;
    std::vector<std::optional<exec::Scorecard>> results(papers.size());
    std::vector<std::string> errors(papers.size());
    auto& be = backend();
    parallel_for(papers.size(), cfg_.concurrency, [&](std::size_t i) {
      try {
        results[i] = exec::evaluate_execution(papers[i], be, ec);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    std::vector<ExecScoreRow> rows;
    for (std::size_t i = 0; i < papers.size(); ++i) {
      if (!results[i]) {
        records_.execution_failures.push_back(papers[i].id + ": " + errors[i]);
        continue;
      }
      const auto& card = *results[i];
      if (card.truncated) records_.truncated_papers.push_back(card.paper_id);
      for (const auto& w : card.warnings)
        records_.score_warnings.push_back(card.paper_id + ": " + w);
      rows.push_back({card.paper_id, papers[i].cohort, card.method, card.scores,
                      card.composite, card.truncated});
    }
    if (rows.empty())
      throw StageFailure("score-execution", "no execution scores produced");
    write_exec_scores(rows, file);
    exec_scores_ = std::move(rows);
    statuses_["score-execution"] = "ok";
  }

  void ensure_tournament(bool requested = false) {
    if (leaderboard_) return;
    if (!cfg_.tournament_enabled) {
      statuses_["tournament"] = "skipped (disabled)";
      return;
    }
    const fs::path board = cfg_.out_dir / kLeaderboardFile;
    if (!force_ && !requested && fs::exists(board)) {
      leaderboard_ = load_leaderboard(board);
      statuses_["tournament"] = "reused";
      return;
    }
    ensure_corpus();
    tournament::LlmPairwiseJudge pj(backend(), cfg_.pairwise_model,
                                    cfg_.pairwise_char_budget);
    tournament::TournamentConfig tc;
    tc.n_matches = cfg_.tournament_matches;
    tc.seed = cfg_.seed;
    tc.concurrency = cfg_.concurrency;
    tc.params = cfg_.trueskill;
    tournament::TournamentResult result;
    try {
      result = tournament::run_tournament(corpus_->papers, pj, tc);
    } catch (const std::exception& e) {
      throw StageFailure("tournament", e.what());
    }
    records_.tournament_failures = result.failures;
    write_match_log(result.matches, cfg_.out_dir / kMatchLogFile);
    write_leaderboard(result.leaderboard, board);
    leaderboard_ = std::move(result.leaderboard);
    statuses_["tournament"] = "ok";
  }

  void ensure_gap_report(bool requested = false) {
    if (report_) return;
    const fs::path file = cfg_.out_dir / kGapReportFile;
    if (!force_ && !requested && fs::exists(file)) {
      report_ = gap_report_from_json(json::parse(read_text_file(file, "stats")));
      statuses_["stats"] = "reused";
      return;
    }
    ensure_idea_scores();
    ensure_exec_scores();
    ensure_tournament();
    std::optional<std::vector<tournament::LeaderboardEntry>> board;
    if (leaderboard_) board = *leaderboard_;
    GapReport r =
        build_gap_report(*idea_scores_, *exec_scores_, board, cfg_.ensemble_models);
    records_.stats_notes = r.notes;
    auto out = open_out(file, "stats");
    out << gap_report_to_json(r).dump(2) << '\n';
    report_ = std::move(r);
    statuses_["stats"] = "ok";
  }

  void do_report() {
    ensure_gap_report();
    ensure_idea_scores();
    ensure_exec_scores();
    emit_tables(*report_, cfg_.out_dir);
    emit_plot_data(*report_, *idea_scores_, *exec_scores_, cfg_.out_dir);
    emit_summary_md(*report_, cfg_.out_dir);
    statuses_["report"] = "ok";
  }

  const PipelineConfig& cfg_;
  bool force_;
  std::optional<corpus::Corpus> corpus_;
  std::optional<std::vector<SummaryRow>> summaries_;
  std::optional<std::vector<IdeaScoreRow>> idea_scores_;
  std::optional<std::vector<ExecScoreRow>> exec_scores_;
  std::optional<std::vector<tournament::LeaderboardEntry>> leaderboard_;
  std::optional<GapReport> report_;
  std::shared_ptr<judge::JudgeBackend> backend_;
  std::shared_ptr<judge::CachingBackend> cache_layer_;
  Records records_;
  std::map<std::string, std::string> statuses_;
};

}  // namespace

// ---------------------------------------------------------------------------
// run_pipeline
// ---------------------------------------------------------------------------

PipelineOutcome run_pipeline(const PipelineConfig& config,
                             const std::vector<std::string>& stages, bool force) {
  validate_config(config);
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + config.out_dir.string());

  // Canonical execution order, restricted to the requested stages.
  std::vector<std::string> to_run;
  for (const auto s : kStages) {
    const std::string name(s);
    if (stages.empty() ||
        std::find(stages.begin(), stages.end(), name) != stages.end())
      to_run.push_back(name);
  }
  if (to_run.empty()) throw ConfigError("no known stage requested");

  Context ctx(config, force);
  PipelineOutcome outcome;
  for (const auto& stage : to_run) {
    try {
      ctx.run_stage(stage);
    } catch (const ConfigError&) {
      ctx.mark_failed(stage, "configuration error");
      ctx.write_manifest();
      throw;
    } catch (const StageFailure& e) {
      ctx.mark_failed(e.stage_name, e.what());
      outcome.ok = false;
      outcome.failed_stage = e.stage_name;
      outcome.error = e.what();
      break;
    } catch (const std::exception& e) {
      ctx.mark_failed(stage, e.what());
      outcome.ok = false;
      outcome.failed_stage = stage;
      outcome.error = e.what();
      break;
    }
  }
  ctx.write_manifest();
  return outcome;
}

}  // namespace ideagap::report
