#pragma once

// Paper ingestion: LaTeX-to-text conversion, front-matter isolation, and
// deterministic corpus loading from a directory tree or an explicit manifest.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ideagap::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Cohort { AI, Human };

std::string_view cohort_name(Cohort c);
std::optional<Cohort> parse_cohort(std::string_view s);

enum class SourceFormat { LatexSource, PlainText };

struct Paper {
  std::string id;          // unique within a corpus; derived from path or manifest
  Cohort cohort = Cohort::AI;
  std::string title;       // may be empty
  std::string full_text;   // markup-stripped body
  std::string front_matter;
  SourceFormat source_format = SourceFormat::PlainText;
  bool front_matter_fallback = false;  // true when headers were undetectable
};

struct SkipRecord {
  std::string path;
  std::string reason;
};

struct Corpus {
  std::vector<Paper> papers;  // sorted by id (bytewise)
  std::vector<SkipRecord> skips;
  std::vector<std::string> warnings;  // "<id>: <message>" from conversion

  std::size_t count(Cohort c) const;
  const Paper* find(std::string_view id) const;
};

// ---------------------------------------------------------------------------
// LaTeX stripping
// ---------------------------------------------------------------------------

struct StripResult {
  std::string text;
  std::vector<std::string> warnings;  // unbalanced braces, unclosed math, ...
};

// Best-effort LaTeX-to-plain-text: comments removed, math replaced by a
// placeholder, sectioning commands turned into their argument on its own
// line, remaining commands dropped with brace-group contents kept (a short
// deny-list of purely structural commands loses its arguments too).
// Plain text passes through unchanged and the transform is idempotent on its
// own output.
StripResult strip_latex(std::string_view source);

inline constexpr std::string_view kMathPlaceholder = "⟨math⟩";  // ⟨math⟩

// Collapse space runs, trim line edges, and bound vertical whitespace at one
// blank line.  Idempotent; used by strip_latex and exposed for callers that
// need the same normalization on plain text.
std::string collapse_whitespace(std::string_view s);

// ---------------------------------------------------------------------------
// Front matter
// ---------------------------------------------------------------------------

struct FrontMatterOptions {
  std::size_t fallback_chars = 8000;
};

struct FrontMatter {
  std::string text;
  bool fallback = false;
};

// The initial region spanning the abstract through the end of the
// introduction, located via case-insensitive header lines.  When the
// boundaries cannot be found, falls back to the first `fallback_chars`
// characters (UTF-8 safe) with the fallback flag set.
FrontMatter extract_front_matter(std::string_view paper_text,
                                 const FrontMatterOptions& options = {});

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

struct LoadOptions {
  FrontMatterOptions front_matter;
  // Optional manifest: one "<relative-path>\t<cohort>\t<id>" line per paper.
  std::optional<std::filesystem::path> manifest;
};

// Load every readable .tex/.txt document under <root>/ai and <root>/human
// (or the manifest's explicit list).  Unreadable or empty documents become
// skip records; an empty cohort or duplicate id is an error.
Corpus load_corpus(const std::filesystem::path& root, const LoadOptions& options = {});

// One JSON object per paper: {"id","cohort","title","front_matter","full_text"}.
void dump_jsonl(const Corpus& corpus, std::ostream& out);

}  // namespace ideagap::corpus
