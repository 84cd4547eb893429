#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "ideagap/common.hpp"
#include "ideagap/corpus.hpp"

using namespace ideagap;
using testutil::TempDir;

TEST_CASE("latex: sectioning becomes a line, comments vanish") {
  const auto r = corpus::strip_latex("\\section{Data} We use X. % note\n");
  CHECK(r.text == "Data\nWe use X.");
  CHECK(r.warnings.empty());
}

TEST_CASE("latex: plain prose with percentages and prices passes through") {
  const std::string prose = "Revenue grew 5% while prices fell to $3 per unit.";
  CHECK(corpus::strip_latex(prose).text == prose);
}

TEST_CASE("latex: math is replaced by a placeholder") {
  const std::string ph(corpus::kMathPlaceholder);
  CHECK(corpus::strip_latex("Let $x + y$ hold.").text == "Let " + ph + " hold.");
  CHECK(corpus::strip_latex("Then \\[ E = mc^2 \\] follows.").text ==
        "Then " + ph + " follows.");
  CHECK(corpus::strip_latex("Also $$a=b$$ here.").text == "Also " + ph + " here.");
  CHECK(corpus::strip_latex("We solve\n\\begin{equation}\ny = f(x)\n\\end{equation}\nnow.")
            .text == "We solve\n" + ph + "\nnow.");
}

TEST_CASE("latex: formatting commands keep their argument text") {
  CHECK(corpus::strip_latex("A \\textbf{bold} claim.").text == "A bold claim.");
  CHECK(corpus::strip_latex("See \\emph{this}.").text == "See this.");
}

TEST_CASE("latex: structural commands lose their arguments") {
  CHECK(corpus::strip_latex("Prior work \\cite{smith2020} shows.").text ==
        "Prior work shows.");
  CHECK(corpus::strip_latex("\\label{sec:x}Results here.").text == "Results here.");
  CHECK(corpus::strip_latex("\\usepackage{amsmath}Text.").text == "Text.");
}

TEST_CASE("latex: href keeps the link text only") {
  CHECK(corpus::strip_latex("See \\href{https://x.org/a}{the registry} now.").text ==
        "See the registry now.");
}

TEST_CASE("latex: escapes, quotes, and ties become their plain forms") {
  CHECK(corpus::strip_latex("Costs rose 10\\% or \\$2.").text == "Costs rose 10% or $2.");
  CHECK(corpus::strip_latex("``quoted'' text").text == "\"quoted\" text");
  CHECK(corpus::strip_latex("Table~3").text == "Table 3");
  CHECK(corpus::strip_latex("A \\& B").text == "A & B");
}

TEST_CASE("latex: abstract environment becomes a header line") {
  const auto r =
      corpus::strip_latex("\\begin{abstract}\nWe do things.\n\\end{abstract}\nBody.");
  CHECK(r.text == "Abstract\n\nWe do things.\n\nBody.");
}

TEST_CASE("latex: unbalanced braces produce a warning but still text") {
  const auto r = corpus::strip_latex("Broken {group never closes.");
  CHECK(r.text == "Broken group never closes.");
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("latex: unclosed inline math falls back to a literal dollar") {
  const auto r = corpus::strip_latex("We owe $x to someone");
  CHECK(r.text.find('$') != std::string::npos);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("latex stripping is idempotent on generated documents") {
  const std::vector<std::string> snippets = {
      "\\section{Results}",
      "Plain sentence with 12 words and 4% growth.",
      "Inline $a_i + b$ math.",
      "\\begin{itemize}\\item one \\item two\\end{itemize}",
      "\\textit{emphasis} and \\textbf{bold}.",
      "A citation \\citep{x1999} here.",
      "``Quotes'' and costs of \\$5.",
      "\\begin{equation}x^2\\end{equation}",
      "Percent signs: 95% confidence.",
      "\\subsection{Sub part}",
      "Table~\\ref{tab:a} summarizes.",
      "\\footnote{A note with $y$ math.}",
      "{Grouped words} stay.",
  };
  SmallRng rng(7);
  for (int doc = 0; doc < 30; ++doc) {
    std::string source;
    const int parts = 3 + static_cast<int>(rng.next_below(8));
    for (int i = 0; i < parts; ++i) {
      source += snippets[rng.next_below(snippets.size())];
      source += (rng.next_below(3) == 0) ? "\n\n" : "\n";
    }
    const auto once = corpus::strip_latex(source);
    const auto twice = corpus::strip_latex(once.text);
    CAPTURE(source);
    CHECK(twice.text == once.text);
  }
}

TEST_CASE("collapse_whitespace bounds vertical and horizontal space") {
  CHECK(corpus::collapse_whitespace("  a   b \n\n\n c ") == "a b\n\nc");
  CHECK(corpus::collapse_whitespace("x") == "x");
  CHECK(corpus::collapse_whitespace("") == "");
  // Idempotent.
  CHECK(corpus::collapse_whitespace("a b\n\nc") == "a b\n\nc");
}

TEST_CASE("front matter spans abstract through end of introduction") {
  const std::string doc =
      "The Empirics of Widgets\n"
      "\n"
      "Abstract\n"
      "We measure widgets. We find widgets matter.\n"
      "\n"
      "1 Introduction\n"
      "Widgets are everywhere. This paper counts them.\n"
      "\n"
      "2 Data\n"
      "We obtain widget registries.\n";
  const auto fm = corpus::extract_front_matter(doc);
  CHECK_FALSE(fm.fallback);
  CHECK(fm.text ==
        "Abstract\n"
        "We measure widgets. We find widgets matter.\n"
        "\n"
        "1 Introduction\n"
        "Widgets are everywhere. This paper counts them.");
}

TEST_CASE("front matter without an abstract starts at the beginning") {
  const std::string doc =
      "A Title Line\n"
      "\n"
      "Introduction\n"
      "Opening text.\n"
      "\n"
      "Results\n"
      "Findings.\n";
  const auto fm = corpus::extract_front_matter(doc);
  CHECK_FALSE(fm.fallback);
  CHECK(fm.text == "A Title Line\n\nIntroduction\nOpening text.");
}

TEST_CASE("front matter recognizes roman numeral section numbers") {
  const std::string doc =
      "Abstract\n"
      "Summary text.\n"
      "\n"
      "I. Introduction\n"
      "Opening.\n"
      "\n"
      "II. Data\n"
      "Sources.\n";
  const auto fm = corpus::extract_front_matter(doc);
  CHECK_FALSE(fm.fallback);
  CHECK(fm.text == "Abstract\nSummary text.\n\nI. Introduction\nOpening.");
}

TEST_CASE("front matter falls back to a UTF-8-safe prefix when headers are missing") {
  std::string big(7999, 'a');
  big += "\xC3\xA9";  // two-byte character straddling the 8000-byte boundary
  big += std::string(12000, 'b');
  const auto fm = corpus::extract_front_matter(big);
  CHECK(fm.fallback);
  CHECK(fm.text.size() == 7999);  // truncation never splits the sequence
  CHECK(fm.text == std::string(7999, 'a'));
}

TEST_CASE("short header-less documents fall back to the whole text") {
  const auto fm = corpus::extract_front_matter("Too short to have sections.");
  CHECK(fm.fallback);
  CHECK(fm.text == "Too short to have sections.");
}

namespace {

void write_minimal_corpus(const TempDir& dir) {
  dir.write("ai/x1.tex",
            "\\title{A Tiny Paper}\n"
            "\\begin{abstract}\nSmall but complete.\n\\end{abstract}\n"
            "\\section{Introduction}\nHello there.\n"
            "\\section{Data}\nNumbers.\n");
  dir.write("ai/x2.txt",
            "Second Paper\n\nAbstract\nAlso small.\n\nIntroduction\nHi.\n\n"
            "Data\nMore numbers.\n");
  dir.write("human/y1.txt",
            "Hand-made Paper\n\nAbstract\nWritten by hand.\n\nIntroduction\n"
            "Opening.\n\nMethods\nCareful ones.\n");
}

}  // namespace

TEST_CASE("load_corpus scans cohort directories, sorts, and titles papers") {
  TempDir dir;
  write_minimal_corpus(dir);
  dir.write("ai/ignored.pdf", "binary-ish");
  dir.write("ai/empty.tex", "");
  dir.write("human/comments_only.tex", "% nothing here\n% at all\n");

  const auto c = corpus::load_corpus(dir.path());
  REQUIRE(c.papers.size() == 3);
  CHECK(c.count(corpus::Cohort::AI) == 2);
  CHECK(c.count(corpus::Cohort::Human) == 1);
  CHECK(c.papers[0].id == "ai/x1");
  CHECK(c.papers[1].id == "ai/x2");
  CHECK(c.papers[2].id == "human/y1");
  CHECK(c.papers[0].title == "A Tiny Paper");
  CHECK(c.papers[1].title == "Second Paper");
  CHECK(c.papers[0].source_format == corpus::SourceFormat::LatexSource);
  CHECK(c.papers[1].source_format == corpus::SourceFormat::PlainText);
  CHECK(c.find("ai/x2") != nullptr);
  CHECK(c.find("missing") == nullptr);
  CHECK(c.papers[0].full_text.find("Abstract") != std::string::npos);
  CHECK_FALSE(c.papers[0].front_matter_fallback);
  CHECK(c.papers[0].front_matter.find("Small but complete.") != std::string::npos);
  CHECK(c.papers[0].front_matter.find("Numbers.") == std::string::npos);

  REQUIRE(c.skips.size() == 2);  // empty.tex and comments_only.tex; pdf ignored
  bool saw_empty = false, saw_converted = false;
  for (const auto& s : c.skips) {
    if (s.reason == "empty file") saw_empty = true;
    if (s.reason == "empty after conversion") saw_converted = true;
  }
  CHECK(saw_empty);
  CHECK(saw_converted);
}

TEST_CASE("load_corpus requires both cohorts") {
  TempDir dir;
  dir.write("ai/only.txt", "T\n\nAbstract\nA.\n\nIntroduction\nB.\n\nData\nC.\n");
  CHECK_THROWS_AS(corpus::load_corpus(dir.path()), corpus::CorpusError);
}

TEST_CASE("load_corpus rejects a missing root") {
  CHECK_THROWS_AS(corpus::load_corpus("/nonexistent/surely-not-here"),
                  corpus::CorpusError);
}

TEST_CASE("manifest mode: explicit ids and cohorts, strict parsing") {
  TempDir dir;
  write_minimal_corpus(dir);

  SUBCASE("valid manifest with comments and a missing file") {
    const auto mf = dir.write("list.tsv",
                              "# comment line\n"
                              "ai/x1.tex\tai\tpaper-one\n"
                              "human/y1.txt\thuman\tpaper-two\n"
                              "ai/absent.tex\tai\tpaper-three\n");
    corpus::LoadOptions opts;
    opts.manifest = mf;
    const auto c = corpus::load_corpus(dir.path(), opts);
    REQUIRE(c.papers.size() == 2);
    CHECK(c.papers[0].id == "paper-one");
    CHECK(c.papers[1].id == "paper-two");
    REQUIRE(c.skips.size() == 1);
    CHECK(c.skips[0].reason == "unreadable");
  }
  SUBCASE("malformed line") {
    const auto mf = dir.write("bad.tsv", "ai/x1.tex ai no-tabs\n");
    corpus::LoadOptions opts;
    opts.manifest = mf;
    CHECK_THROWS_AS(corpus::load_corpus(dir.path(), opts), corpus::CorpusError);
  }
  SUBCASE("unknown cohort") {
    const auto mf = dir.write("bad2.tsv", "ai/x1.tex\tmartian\tx\n");
    corpus::LoadOptions opts;
    opts.manifest = mf;
    CHECK_THROWS_AS(corpus::load_corpus(dir.path(), opts), corpus::CorpusError);
  }
  SUBCASE("duplicate ids") {
    const auto mf = dir.write("dup.tsv",
                              "ai/x1.tex\tai\tsame\n"
                              "human/y1.txt\thuman\tsame\n");
    corpus::LoadOptions opts;
    opts.manifest = mf;
    CHECK_THROWS_AS(corpus::load_corpus(dir.path(), opts), corpus::CorpusError);
  }
}

TEST_CASE("dump_jsonl emits one parseable object per paper with fixed keys") {
  TempDir dir;
  write_minimal_corpus(dir);
  const auto c = corpus::load_corpus(dir.path());
  std::ostringstream out;
  corpus::dump_jsonl(c, out);
  const auto lines = split_lines(out.str());
  REQUIRE(lines.size() == 4);  // 3 papers + trailing empty after last newline
  CHECK(lines[3].empty());
  const auto j = nlohmann::json::parse(lines[0]);
  CHECK(j.at("id") == "ai/x1");
  CHECK(j.at("cohort") == "AI");
  CHECK(j.contains("title"));
  CHECK(j.contains("front_matter"));
  CHECK(j.contains("full_text"));
  // Key order is part of the format.
  CHECK(lines[0].rfind("{\"id\":", 0) == 0);
}
