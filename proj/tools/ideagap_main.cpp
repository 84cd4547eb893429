// Command-line driver for the idea-vs-execution gap pipeline.
//
// Exit codes: 0 success, 1 stage failure, 2 configuration/usage error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ideagap/report.hpp"

namespace rp = ideagap::report;

int main(int argc, char** argv) {
  CLI::App app{"Decomposes an AI-vs-human research quality gap into idea and "
               "execution components"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string corpus, out, backend, config_file, manifest, cache, endpoint;
  std::uint64_t seed = 42;
  int concurrency = 4;
  std::size_t matches = 200;
  bool force = false;

  auto* opt_corpus = app.add_option("--corpus", corpus, "Corpus root directory");
  auto* opt_out = app.add_option("--out", out, "Output directory for artifacts");
  auto* opt_backend =
      app.add_option("--backend", backend, "Judge backend")
          ->check(CLI::IsMember({"live", "mock", "cache"}));
  auto* opt_seed = app.add_option("--seed", seed, "Deterministic run seed");
  auto* opt_conc =
      app.add_option("--concurrency", concurrency, "Max parallel judge requests");
  auto* opt_config =
      app.add_option("--config", config_file, "Config file with 'key = value' lines");
  auto* opt_manifest = app.add_option(
      "--manifest", manifest, "Corpus manifest TSV (path<TAB>cohort<TAB>id)");
  auto* opt_cache =
      app.add_option("--cache", cache, "Judge response cache file (JSONL)");
  auto* opt_matches =
      app.add_option("--matches", matches, "Number of tournament matches");
  auto* opt_endpoint =
      app.add_option("--endpoint", endpoint, "Chat-completions endpoint URL");
  app.add_flag("--force", force, "Recompute stages even when outputs already exist");

  struct Sub {
    const char* name;
    const char* help;
    std::vector<std::string> stages;
  };
  const std::vector<Sub> subs = {
      {"ingest", "Load the corpus, convert LaTeX, and write corpus.jsonl", {"ingest"}},
      {"extract", "Extract one-paragraph idea summaries", {"extract"}},
      {"score-ideas", "Classify idea summaries into quality tiers", {"score-ideas"}},
      {"score-execution", "Score execution quality on the six-dimension rubric",
       {"score-execution"}},
      {"stats", "Compute the gap statistics and write gap_report.json", {"stats"}},
      {"tournament", "Run the pairwise tournament and write the leaderboard",
       {"tournament"}},
      {"report", "Emit tables, figure data, and the summary", {"report"}},
      {"run-all", "Run every stage in order", {}},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  rp::PipelineConfig cfg;
  try {
    if (opt_config->count()) rp::apply_config_file(cfg, config_file);
    if (opt_corpus->count()) cfg.corpus_root = corpus;
    if (opt_out->count()) cfg.out_dir = out;
    if (opt_backend->count()) cfg.backend = *rp::parse_backend_mode(backend);
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_conc->count()) cfg.concurrency = concurrency;
    if (opt_manifest->count()) cfg.corpus_manifest = manifest;
    if (opt_cache->count()) cfg.cache_path = cache;
    if (opt_matches->count()) cfg.tournament_matches = matches;
    if (opt_endpoint->count()) cfg.endpoint_url = endpoint;
  } catch (const rp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  std::vector<std::string> stages;
  for (const auto* chosen : app.get_subcommands())
    for (const auto& s : subs)
      if (chosen->get_name() == s.name) stages = s.stages;

  try {
    const rp::PipelineOutcome outcome = rp::run_pipeline(cfg, stages, force);
    if (!outcome.ok) {
      std::cerr << "error: stage '" << outcome.failed_stage
                << "' failed: " << outcome.error << '\n';
      return 1;
    }
  } catch (const rp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "artifacts written to " << cfg.out_dir.string() << '\n';
  return 0;
}
