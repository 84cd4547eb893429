#include "ideagap/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ideagap/common.hpp"

namespace ideagap::corpus {

std::string_view cohort_name(Cohort c) { return c == Cohort::AI ? "AI" : "Human"; }

std::optional<Cohort> parse_cohort(std::string_view s) {
  const std::string t = to_lower(trim_view(s));
  if (t == "ai") return Cohort::AI;
  if (t == "human") return Cohort::Human;
  return std::nullopt;
}

std::size_t Corpus::count(Cohort c) const {
  return static_cast<std::size_t>(
      std::count_if(papers.begin(), papers.end(),
                    [c](const Paper& p) { return p.cohort == c; }));
}

const Paper* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(papers.begin(), papers.end(), id,
                             [](const Paper& p, std::string_view v) { return p.id < v; });
  if (it != papers.end() && it->id == id) return &*it;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Front matter
// ---------------------------------------------------------------------------

namespace {

struct Line {
  std::size_t offset;  // byte offset of line start in the text
  std::string_view text;
};

std::vector<Line> index_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back({pos, text.substr(pos)});
      break;
    }
    lines.push_back({pos, text.substr(pos, nl - pos)});
    pos = nl + 1;
  }
  return lines;
}

constexpr std::size_t kMaxHeaderLen = 60;

bool is_abstract_header(std::string_view line) {
  const std::string t = to_lower(trim_view(line));
  if (t.size() > kMaxHeaderLen) return false;
  if (t.rfind("abstract", 0) != 0) return false;
  return t.size() == 8 || !std::isalpha(static_cast<unsigned char>(t[8]));
}

// "introduction", optionally preceded by "1" / "I" numbering.
bool is_intro_header(std::string_view line) {
  std::string t = to_lower(trim_view(line));
  if (t.empty() || t.size() > kMaxHeaderLen) return false;
  if (t[0] == '1' || t[0] == 'i') {
    std::size_t p = 1;
    if (p < t.size() && (t[p] == '.' || t[p] == ')' || t[p] == ':')) ++p;
    if (p < t.size() && (t[p] == ' ' || t[p] == '\t')) {
      while (p < t.size() && (t[p] == ' ' || t[p] == '\t')) ++p;
      t = t.substr(p);
    } else if (t[0] == 'i') {
      // keep t as-is: "introduction" itself starts with 'i'
    } else {
      return false;  // "1introduction" is not a header
    }
  }
  if (t.rfind("introduction", 0) != 0) return false;
  return t.size() == 12 || !std::isalpha(static_cast<unsigned char>(t[12]));
}

const std::array<std::string_view, 17> kSectionWords = {
    "data",        "background",  "literature",    "related work",
    "theoretical", "conceptual",  "empirical",     "institutional",
    "methods",     "methodology", "method",        "model",
    "setting",     "results",     "research design", "experimental design",
    "identification"};

// A header line that plausibly opens the section after the introduction:
// arabic or roman numbering >= 2 followed by a capitalized word, or a known
// section word at the start of a short capitalized line.
bool is_post_intro_header(std::string_view raw) {
  const std::string_view t = trim_view(raw);
  if (t.empty() || t.size() > kMaxHeaderLen) return false;
  const std::string tl = to_lower(t);

  auto capitalized_after = [&](std::size_t p) {
    while (p < t.size() && (t[p] == ' ' || t[p] == '\t')) ++p;
    return p < t.size() && std::isupper(static_cast<unsigned char>(t[p]));
  };

  // Arabic numbering: "2 Data", "3. Model", "10) Results".
  if (std::isdigit(static_cast<unsigned char>(t[0]))) {
    std::size_t p = 0;
    while (p < t.size() && std::isdigit(static_cast<unsigned char>(t[p]))) ++p;
    const int value = std::stoi(std::string(t.substr(0, p)));
    if (value >= 2) {
      if (p < t.size() && (t[p] == '.' || t[p] == ')' || t[p] == ':')) ++p;
      if (p < t.size() && (t[p] == ' ' || t[p] == '\t') && capitalized_after(p)) return true;
    }
    return false;
  }

  // Roman numbering II..IX.
  static const std::array<std::string_view, 8> romans = {"ii",  "iii", "iv", "v",
                                                         "vi",  "vii", "viii", "ix"};
  for (std::string_view r : romans) {
    if (tl.rfind(r, 0) == 0) {
      std::size_t p = r.size();
      if (p < t.size() && (t[p] == '.' || t[p] == ')' || t[p] == ':')) ++p;
      if (p < t.size() && (t[p] == ' ' || t[p] == '\t') && capitalized_after(p)) return true;
    }
  }

  // Named sections; require a capitalized header line.
  if (!std::isupper(static_cast<unsigned char>(t[0]))) return false;
  for (std::string_view w : kSectionWords) {
    if (tl.rfind(w, 0) == 0) {
      const std::size_t end = w.size();
      if (end == tl.size() || !std::isalpha(static_cast<unsigned char>(tl[end])))
        return true;
    }
  }
  return false;
}

FrontMatter fallback_front(std::string_view text, std::size_t fallback_chars) {
  FrontMatter fm;
  fm.text = std::string(utf8_truncate(text, fallback_chars));
  fm.fallback = true;
  return fm;
}

}  // namespace

FrontMatter extract_front_matter(std::string_view paper_text,
                                 const FrontMatterOptions& options) {
  const std::vector<Line> lines = index_lines(paper_text);

  std::size_t abstract_line = lines.size();
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (is_abstract_header(lines[li].text)) {
      abstract_line = li;
      break;
    }
  }

  std::size_t intro_line = lines.size();
  const std::size_t intro_from = (abstract_line < lines.size()) ? abstract_line + 1 : 0;
  for (std::size_t li = intro_from; li < lines.size(); ++li) {
    if (is_intro_header(lines[li].text)) {
      intro_line = li;
      break;
    }
  }
  if (intro_line == lines.size())
    return fallback_front(paper_text, options.fallback_chars);

  std::size_t next_line = lines.size();
  for (std::size_t li = intro_line + 1; li < lines.size(); ++li) {
    if (is_post_intro_header(lines[li].text)) {
      next_line = li;
      break;
    }
  }
  if (next_line == lines.size())
    return fallback_front(paper_text, options.fallback_chars);

  const std::size_t start = (abstract_line < lines.size()) ? lines[abstract_line].offset : 0;
  const std::size_t end = lines[next_line].offset;
  FrontMatter fm;
  fm.text = trim(paper_text.substr(start, end - start));
  fm.fallback = false;
  return fm;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

std::string drop_cr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (c != '\r') out += c;
  return out;
}

std::string one_line(std::string_view s) {
  std::string flat(s);
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  return trim(collapse_whitespace(flat));
}

// First \title{...} argument, already stripped to plain text.
std::string latex_title(std::string_view source) {
  std::size_t pos = 0;
  while (true) {
    pos = source.find("\\title", pos);
    if (pos == std::string_view::npos) return {};
    std::size_t p = pos + 6;
    while (p < source.size() && (source[p] == ' ' || source[p] == '\t')) ++p;
    if (p < source.size() && source[p] == '[') {
      const std::size_t close = source.find(']', p);
      if (close == std::string_view::npos) return {};
      p = close + 1;
      while (p < source.size() && (source[p] == ' ' || source[p] == '\t')) ++p;
    }
    if (p < source.size() && source[p] == '{') {
      std::size_t depth = 0;
      for (std::size_t j = p; j < source.size(); ++j) {
        if (source[j] == '\\') {
          ++j;
          continue;
        }
        if (source[j] == '{') ++depth;
        if (source[j] == '}') {
          if (--depth == 0)
            return one_line(strip_latex(source.substr(p + 1, j - p - 1)).text);
        }
      }
      return {};
    }
    pos += 6;
  }
}

std::string plain_title(std::string_view text) {
  for (const auto& line : split_lines(text)) {
    const std::string t = trim(line);
    if (!t.empty()) return t.size() <= 150 ? t : std::string();
  }
  return {};
}

struct PendingFile {
  std::filesystem::path path;  // absolute
  std::string display_path;    // as recorded in skip records
  Cohort cohort;
  std::string id;
};

}  // namespace

Corpus load_corpus(const std::filesystem::path& root, const LoadOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::exists(root) || !fs::is_directory(root))
    throw CorpusError("corpus root is not a directory: " + root.string());

  std::vector<PendingFile> pending;

  if (options.manifest) {
    auto contents = read_file(*options.manifest);
    if (!contents)
      throw CorpusError("cannot read manifest: " + options.manifest->string());
    std::size_t lineno = 0;
    for (const auto& raw : split_lines(*contents)) {
      ++lineno;
      const std::string line = trim(raw);
      if (line.empty() || line[0] == '#') continue;
      const std::size_t t1 = line.find('\t');
      const std::size_t t2 = (t1 == std::string::npos) ? std::string::npos
                                                       : line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos)
        throw CorpusError("manifest line " + std::to_string(lineno) +
                          ": expected <path>\\t<cohort>\\t<id>");
      const std::string rel = trim(line.substr(0, t1));
      const auto cohort = parse_cohort(line.substr(t1 + 1, t2 - t1 - 1));
      const std::string id = trim(line.substr(t2 + 1));
      if (!cohort)
        throw CorpusError("manifest line " + std::to_string(lineno) +
                          ": unknown cohort");
      if (rel.empty() || id.empty())
        throw CorpusError("manifest line " + std::to_string(lineno) +
                          ": empty path or id");
      pending.push_back({root / rel, rel, *cohort, id});
    }
  } else {
    for (const auto& [sub, cohort] :
         {std::pair{std::string("ai"), Cohort::AI},
          std::pair{std::string("human"), Cohort::Human}}) {
      const fs::path dir = root / sub;
      if (!fs::exists(dir) || !fs::is_directory(dir)) continue;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = to_lower(entry.path().extension().string());
        if (ext != ".tex" && ext != ".txt") continue;
        const std::string id = sub + "/" + entry.path().stem().string();
        pending.push_back({entry.path(), sub + "/" + entry.path().filename().string(),
                           cohort, id});
      }
    }
  }

  Corpus corpus;
  for (const auto& item : pending) {
    auto raw = read_file(item.path);
    if (!raw) {
      corpus.skips.push_back({item.display_path, "unreadable"});
      continue;
    }
    if (trim_view(*raw).empty()) {
      corpus.skips.push_back({item.display_path, "empty file"});
      continue;
    }
    const std::string ext = to_lower(item.path.extension().string());
    Paper paper;
    paper.id = item.id;
    paper.cohort = item.cohort;
    if (ext == ".tex") {
      paper.source_format = SourceFormat::LatexSource;
      StripResult stripped = strip_latex(*raw);
      paper.full_text = std::move(stripped.text);
      paper.title = latex_title(*raw);
      for (const auto& w : stripped.warnings)
        corpus.warnings.push_back(item.id + ": " + w);
    } else {
      paper.source_format = SourceFormat::PlainText;
      paper.full_text = drop_cr(*raw);
      paper.title = plain_title(paper.full_text);
    }
    if (trim_view(paper.full_text).empty()) {
      corpus.skips.push_back({item.display_path, "empty after conversion"});
      continue;
    }
    FrontMatter fm = extract_front_matter(paper.full_text, options.front_matter);
    paper.front_matter = std::move(fm.text);
    paper.front_matter_fallback = fm.fallback;
    corpus.papers.push_back(std::move(paper));
  }

  std::sort(corpus.papers.begin(), corpus.papers.end(),
            [](const Paper& a, const Paper& b) { return a.id < b.id; });
  for (std::size_t k = 1; k < corpus.papers.size(); ++k)
    if (corpus.papers[k].id == corpus.papers[k - 1].id)
      throw CorpusError("duplicate paper id: " + corpus.papers[k].id);

  for (Cohort c : {Cohort::AI, Cohort::Human})
    if (corpus.count(c) == 0)
      throw CorpusError("cohort '" + std::string(cohort_name(c)) + "' has no papers");

  return corpus;
}

void dump_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const Paper& p : corpus.papers) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["cohort"] = std::string(cohort_name(p.cohort));
    j["title"] = p.title;
    j["front_matter"] = p.front_matter;
    j["full_text"] = p.full_text;
    out << j.dump() << '\n';
  }
}

}  // namespace ideagap::corpus
