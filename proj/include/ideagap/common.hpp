#pragma once

// Small shared helpers: deterministic hashing/RNG, float formatting, and
// string utilities used across modules.  Nothing here touches global state.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace ideagap {

// ---------------------------------------------------------------------------
// Deterministic hashing / RNG.
//
// std::hash and the std <random> distributions are implementation-defined, so
// everything that must reproduce byte-identically across toolchains uses the
// fixed FNV-1a / splitmix64 primitives below.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Combine a seed with one or more strings into a single 64-bit value.
inline std::uint64_t hash_mix(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Rest>
std::uint64_t hash_mix(std::uint64_t seed, std::string_view first, Rest... rest) {
  std::uint64_t h = fnv1a64(first, kFnvOffset ^ splitmix64(seed));
  return hash_mix(h, rest...);
}

// Minimal deterministic RNG (splitmix64 stream).  Identical sequences on any
// platform, unlike std::mt19937_64 + std distributions.
class SmallRng {
 public:
  explicit SmallRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Float formatting.
// ---------------------------------------------------------------------------

// Shortest representation that round-trips (std::to_chars).  Deterministic and
// locale-independent; used for CSV output.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Fixed-precision formatting for human-facing tables.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// String helpers.
// ---------------------------------------------------------------------------

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::string_view trim_view(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return s.substr(b, e - b);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

// Whitespace-delimited token count (words).
inline std::size_t count_words(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    bool ws = (c == ' ' || c == '\t' || c == '\r' || c == '\n');
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

inline std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

// Truncate to at most `max_bytes` without splitting a UTF-8 sequence.
inline std::string_view utf8_truncate(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return s;
  std::size_t end = max_bytes;
  while (end > 0 && (static_cast<unsigned char>(s[end]) & 0xC0) == 0x80) --end;
  return s.substr(0, end);
}

}  // namespace ideagap
