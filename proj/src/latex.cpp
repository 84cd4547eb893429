#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ideagap/common.hpp"
#include "ideagap/corpus.hpp"

// LaTeX-to-plain-text conversion.  Single left-to-right scan handling
// comments, math, environments, commands and escapes, followed by a
// whitespace-normalization pass.  Best effort: malformed input degrades to
// literal text plus a warning, never an exception.

namespace ideagap::corpus {

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

const std::array<std::string_view, 16> kMathEnvs = {
    "equation", "equation*", "align",    "align*",    "eqnarray", "eqnarray*",
    "displaymath", "math",   "gather",   "gather*",   "multline", "multline*",
    "flalign", "flalign*",   "alignat",  "alignat*"};

bool is_math_env(std::string_view env) {
  return std::find(kMathEnvs.begin(), kMathEnvs.end(), env) != kMathEnvs.end();
}

// Environments whose \begin takes a {column-spec} argument to discard.
bool takes_column_spec(std::string_view env) {
  return env == "tabular" || env == "tabular*" || env == "tabularx" ||
         env == "array" || env == "longtable";
}

bool is_section_command(std::string_view name) {
  return name == "part" || name == "chapter" || name == "section" ||
         name == "subsection" || name == "subsubsection" || name == "paragraph" ||
         name == "subparagraph" || name == "title";
}

// Commands whose brace arguments are structural, not prose; arguments are
// discarded along with the command.
bool is_denied_command(std::string_view name) {
  static const std::array<std::string_view, 30> deny = {
      "label",        "ref",          "eqref",          "pageref",
      "autoref",      "cref",         "Cref",           "cite",
      "citep",        "citet",        "citealp",        "citeauthor",
      "citeyear",     "includegraphics", "input",       "include",
      "usepackage",   "documentclass", "bibliography",  "bibliographystyle",
      "vspace",       "hspace",       "setlength",      "addtolength",
      "newcommand",   "renewcommand", "providecommand", "graphicspath",
      "pagestyle",    "thispagestyle"};
  return std::find(deny.begin(), deny.end(), name) != deny.end();
}

struct Scanner {
  std::string_view src;
  std::size_t i = 0;
  std::string out;
  std::vector<std::string>* warnings;
  int depth_limit = 8;

  explicit Scanner(std::string_view s, std::vector<std::string>* w) : src(s), warnings(w) {}

  void warn(const std::string& msg) {
    // Deduplicate identical warnings.
    if (std::find(warnings->begin(), warnings->end(), msg) == warnings->end())
      warnings->push_back(msg);
  }

  bool at_end() const { return i >= src.size(); }
  char cur() const { return src[i]; }
  char peek(std::size_t k = 1) const { return i + k < src.size() ? src[i + k] : '\0'; }

  void skip_spaces() {
    while (!at_end() && (cur() == ' ' || cur() == '\t')) ++i;
  }

  // Reads a balanced {...} group starting at src[i] == '{'.  Returns the
  // contents and advances past the closing brace, or nullopt on imbalance.
  std::optional<std::string_view> read_group() {
    if (at_end() || cur() != '{') return std::nullopt;
    std::size_t depth = 0;
    std::size_t start = i + 1;
    for (std::size_t j = i; j < src.size(); ++j) {
      const char c = src[j];
      if (c == '\\') {
        ++j;  // skip escaped char
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}') {
        --depth;
        if (depth == 0) {
          auto content = src.substr(start, j - start);
          i = j + 1;
          return content;
        }
      }
    }
    return std::nullopt;
  }

  // Reads an optional [...] group (no nesting needed in practice).
  void skip_optional_arg() {
    if (at_end() || cur() != '[') return;
    std::size_t j = src.find(']', i + 1);
    if (j == std::string_view::npos) {
      warn("unclosed optional argument");
      ++i;
      return;
    }
    i = j + 1;
  }

  // Finds the next unescaped occurrence of `needle` at or after `from`.
  std::size_t find_unescaped(std::string_view needle, std::size_t from) const {
    std::size_t pos = from;
    while (true) {
      pos = src.find(needle, pos);
      if (pos == std::string_view::npos) return pos;
      std::size_t backslashes = 0;
      for (std::size_t k = pos; k > 0 && src[k - 1] == '\\'; --k) ++backslashes;
      if (backslashes % 2 == 0) return pos;
      pos += 1;
    }
  }

  std::string run() {
    long brace_balance = 0;
    bool brace_warned = false;
    while (!at_end()) {
      const char c = cur();
      switch (c) {
        case '\\':
          handle_backslash();
          break;
        case '{':
          ++brace_balance;
          ++i;
          break;
        case '}':
          --brace_balance;
          if (brace_balance < 0 && !brace_warned) {
            warn("unbalanced braces");
            brace_warned = true;
          }
          ++i;
          break;
        case '$':
          handle_dollar();
          break;
        case '%':
          // Comment to end of line; a % right after a digit is literal text
          // (a percentage), which also keeps re-stripping stable.
          if (i > 0 && is_digit(src[i - 1])) {
            out += '%';
            ++i;
          } else {
            std::size_t nl = src.find('\n', i);
            i = (nl == std::string_view::npos) ? src.size() : nl;
          }
          break;
        case '~':
          out += ' ';
          ++i;
          break;
        case '`':
          if (peek() == '`') {
            out += '"';
            i += 2;
          } else {
            out += c;
            ++i;
          }
          break;
        case '\'':
          if (peek() == '\'') {
            out += '"';
            i += 2;
          } else {
            out += c;
            ++i;
          }
          break;
        default:
          out += c;
          ++i;
          break;
      }
    }
    if (brace_balance != 0 && !brace_warned) warn("unbalanced braces");
    return std::move(out);
  }

  void handle_dollar() {
    const bool display = peek() == '$';
    if (display) {
      const std::size_t close = find_unescaped("$$", i + 2);
      if (close == std::string_view::npos) {
        warn("unclosed display math");
        i += 2;
        return;
      }
      out += kMathPlaceholder;
      i = close + 2;
      return;
    }
    const char next = peek();
    // A $ before a digit, whitespace, or end of input is treated as literal
    // text (currency), not a math delimiter.
    if (next == '\0' || is_digit(next) || next == ' ' || next == '\t' || next == '\n') {
      out += '$';
      ++i;
      return;
    }
    const std::size_t close = find_unescaped("$", i + 1);
    if (close == std::string_view::npos) {
      warn("unclosed inline math");
      out += '$';
      ++i;
      return;
    }
    out += kMathPlaceholder;
    i = close + 1;
  }

  void handle_backslash() {
    const char next = peek();
    if (next == '\0') {
      ++i;
      return;
    }
    // Escaped specials become literal characters; escaped braces are dropped
    // like structural braces.
    if (next == '%' || next == '$' || next == '&' || next == '#' || next == '_') {
      out += next;
      i += 2;
      return;
    }
    if (next == '{' || next == '}') {
      i += 2;
      return;
    }
    if (next == '\\') {  // line break, possibly \\[len]
      i += 2;
      skip_optional_arg();
      out += '\n';
      return;
    }
    if (next == '[') {  // display math \[ ... \]
      const std::size_t close = find_unescaped("\\]", i + 2);
      if (close == std::string_view::npos) {
        warn("unclosed display math");
        i += 2;
        return;
      }
      out += kMathPlaceholder;
      i = close + 2;
      return;
    }
    if (next == '(') {  // inline math \( ... \)
      const std::size_t close = find_unescaped("\\)", i + 2);
      if (close == std::string_view::npos) {
        warn("unclosed inline math");
        i += 2;
        return;
      }
      out += kMathPlaceholder;
      i = close + 2;
      return;
    }
    if (!is_letter(next)) {  // accent or other single-char command
      i += 2;
      return;
    }

    // Named command.
    std::size_t j = i + 1;
    while (j < src.size() && is_letter(src[j])) ++j;
    std::string_view name = src.substr(i + 1, j - i - 1);
    i = j;
    if (!at_end() && cur() == '*') ++i;  // starred variant

    if (name == "begin") {
      handle_begin();
      return;
    }
    if (name == "end") {
      skip_spaces();
      auto env = read_group();
      if (env && trim_view(*env) == "abstract") out += '\n';
      return;
    }
    if (is_section_command(name)) {
      skip_spaces();
      skip_optional_arg();
      skip_spaces();
      auto arg = read_group();
      if (!arg) {
        warn("sectioning command without argument");
        return;
      }
      out += '\n';
      if (depth_limit > 0) {
        Scanner inner(*arg, warnings);
        inner.depth_limit = depth_limit - 1;
        out += inner.run();
      } else {
        out += *arg;
      }
      out += '\n';
      return;
    }
    if (name == "href") {
      // \href{url}{text}: discard the url, keep the text (handled by the
      // normal brace flow).
      skip_spaces();
      read_group();
      return;
    }
    if (is_denied_command(name)) {
      // Discard up to three immediately-following argument groups.
      for (int k = 0; k < 3; ++k) {
        skip_spaces();
        if (!at_end() && cur() == '[') {
          skip_optional_arg();
          continue;
        }
        if (!at_end() && cur() == '{') {
          if (!read_group()) {
            warn("unbalanced braces");
            return;
          }
          continue;
        }
        break;
      }
      return;
    }
    // Default: drop the command token, discard optional [...] arguments,
    // leave brace groups to the normal flow (contents kept).
    skip_spaces_before_optional();
  }

  void skip_spaces_before_optional() {
    const std::size_t save = i;
    skip_spaces();
    if (!at_end() && cur() == '[') {
      skip_optional_arg();
      return;
    }
    i = save;
  }

  void handle_begin() {
    skip_spaces();
    auto env_raw = read_group();
    if (!env_raw) {
      warn("malformed environment");
      return;
    }
    const std::string env = trim(*env_raw);
    if (is_math_env(env)) {
      const std::string closer = "\\end{" + env + "}";
      const std::size_t close = src.find(closer, i);
      if (close == std::string_view::npos) {
        warn("unclosed environment " + env);
        return;
      }
      out += kMathPlaceholder;
      i = close + closer.size();
      return;
    }
    if (env == "abstract") {
      out += "\nAbstract\n";
      return;
    }
    // Other environments: drop the markup, keep the contents.  Discard
    // trailing option groups and, for table-like environments, the column
    // spec.
    skip_spaces();
    while (!at_end() && cur() == '[') {
      skip_optional_arg();
      skip_spaces();
    }
    if (takes_column_spec(env)) {
      skip_spaces();
      if (!at_end() && cur() == '{') read_group();
    }
  }
};

}  // namespace

// Collapse horizontal whitespace runs, trim line edges, and bound vertical
// whitespace at one blank line.  Keeps headers at line starts; idempotent.
std::string collapse_whitespace(std::string_view s) {
  std::vector<std::string> lines;
  std::string current;
  auto flush = [&] {
    lines.push_back(trim(current));
    current.clear();
  };
  for (char c : s) {
    if (c == '\n') {
      flush();
    } else if (c == '\r') {
      continue;
    } else if (c == ' ' || c == '\t') {
      if (!current.empty() && current.back() != ' ') current += ' ';
    } else {
      current += c;
    }
  }
  flush();

  std::string out;
  bool last_blank = true;  // swallow leading blanks
  for (const std::string& line : lines) {
    if (line.empty()) {
      if (!last_blank) out += '\n';
      last_blank = true;
    } else {
      if (!out.empty() && out.back() != '\n') out += '\n';
      out += line;
      out += '\n';
      last_blank = false;
    }
  }
  // Trim the trailing newline(s).
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

StripResult strip_latex(std::string_view source) {
  StripResult result;
  // Normalize line endings first so offsets behave.
  std::string normalized;
  normalized.reserve(source.size());
  for (char c : source)
    if (c != '\r') normalized += c;

  Scanner scanner(normalized, &result.warnings);
  const std::string scanned = scanner.run();
  result.text = collapse_whitespace(scanned);
  return result;
}

}  // namespace ideagap::corpus
