#include "ideagap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>

namespace ideagap::stats {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw StatsError(msg);
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double v : xs) s += v;
  return s / static_cast<double>(xs.size());
}

// Sample variance, n-1 denominator.
double var_of(std::span<const double> xs, double mean) {
  double s = 0.0;
  for (double v : xs) s += (v - mean) * (v - mean);
  return s / static_cast<double>(xs.size() - 1);
}

void require_finite(std::span<const double> xs, const char* who) {
  for (double v : xs)
    if (!std::isfinite(v)) throw StatsError(std::string(who) + ": non-finite input");
}

}  // namespace

GroupSummary summarize(std::span<const double> xs) {
  require(xs.size() >= 2, "summarize: need at least 2 observations");
  require_finite(xs, "summarize");
  GroupSummary g;
  g.n = xs.size();
  g.mean = mean_of(xs);
  g.sd = std::sqrt(var_of(xs, g.mean));
  return g;
}

// ---------------------------------------------------------------------------
// Effect sizes and correlations
// ---------------------------------------------------------------------------

double cohens_d(std::span<const double> x, std::span<const double> y) {
  require(x.size() >= 2 && y.size() >= 2, "cohens_d: need at least 2 per group");
  require_finite(x, "cohens_d");
  require_finite(y, "cohens_d");
  const double mx = mean_of(x), my = mean_of(y);
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
  const double pooled_var =
      ((n1 - 1.0) * var_of(x, mx) + (n2 - 1.0) * var_of(y, my)) / (n1 + n2 - 2.0);
  if (pooled_var <= 0.0) {
    if (mx == my) return 0.0;
    throw StatsError("cohens_d: zero pooled variance with unequal means");
  }
  return (mx - my) / std::sqrt(pooled_var);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "pearson_r: length mismatch");
  require(x.size() >= 2, "pearson_r: need at least 2 pairs");
  require_finite(x, "pearson_r");
  require_finite(y, "pearson_r");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, "pearson_r: zero variance input");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share midrank (i+1 + j+1)/2.
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "spearman_rho: length mismatch");
  require(x.size() >= 2, "spearman_rho: need at least 2 pairs");
  require_finite(x, "spearman_rho");
  require_finite(y, "spearman_rho");
  const std::vector<double> rx = midranks(x), ry = midranks(y);
  return pearson_r(rx, ry);
}

double percentile(std::span<const double> values, double q) {
  require(!values.empty(), "percentile: empty input");
  require(q >= 0.0 && q <= 100.0, "percentile: q outside [0, 100]");
  require_finite(values, "percentile");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() == 1) return sorted[0];
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// ---------------------------------------------------------------------------
// Mann-Whitney U
// ---------------------------------------------------------------------------

namespace {

// Exact null distribution of the first-sample rank sum with ties, via DP over
// doubled midranks (doubling makes every rank an integer).  count[k][s] =
// number of k-subsets of the pooled ranks with doubled-rank sum s.
// Feasible comfortably for n1*n2 <= 400.
double exact_two_sided_p(const std::vector<double>& pooled_ranks, std::size_t n1,
                         double r1_observed) {
  const std::size_t n = pooled_ranks.size();
  std::vector<std::uint64_t> doubled(n);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pooled_ranks[i] * 2.0;
    doubled[i] = static_cast<std::uint64_t>(std::llround(d));
    total += doubled[i];
  }
  const std::size_t max_sum = static_cast<std::size_t>(total);
  // dp[k][s], flattened; counts fit in double exactly (max C(40,20) < 2^53
  // for the n1*n2 bound used here, and C(n, n1) in general stays well below
  // 2^63 for pooled n relevant to the 400 product cap).
  std::vector<std::vector<double>> dp(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
  dp[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = static_cast<std::size_t>(doubled[i]);
    const std::size_t kmax = std::min(n1, i + 1);
    for (std::size_t k = kmax; k >= 1; --k) {
      auto& row = dp[k];
      const auto& prev = dp[k - 1];
      for (std::size_t s = max_sum; s + 1 >= r + 1; --s) row[s] += prev[s - r];
    }
  }
  const auto& dist = dp[n1];
  const std::uint64_t r1d = static_cast<std::uint64_t>(std::llround(r1_observed * 2.0));
  double below = 0.0, above = 0.0, all = 0.0;
  for (std::size_t s = 0; s <= max_sum; ++s) {
    all += dist[s];
    if (s <= r1d) below += dist[s];
    if (s >= r1d) above += dist[s];
  }
  const double p = 2.0 * std::min(below / all, above / all);
  return std::min(1.0, p);
}

}  // namespace

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                          MannWhitneyMode mode) {
  require(!x.empty() && !y.empty(), "mann_whitney_u: empty sample");
  require_finite(x, "mann_whitney_u");
  require_finite(y, "mann_whitney_u");
  const std::size_t n1 = x.size(), n2 = y.size();
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::vector<double> ranks = midranks(pooled);

  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double u1 = r1 - static_cast<double>(n1 * (n1 + 1)) / 2.0;

  TestResult out;
  out.name = "mann_whitney_u";
  out.statistic = u1;

  const bool exact = (mode == MannWhitneyMode::Exact) ||
                     (mode == MannWhitneyMode::Auto && n1 * n2 <= 400);
  if (exact) {
    out.p_value = exact_two_sided_p(ranks, n1, r1);
    return out;
  }

  // Normal approximation with tie-corrected variance and continuity
  // correction toward the mean.
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  const double n = dn1 + dn2;
  const double mean_u = dn1 * dn2 / 2.0;
  double tie_term = 0.0;
  {
    std::map<double, std::size_t> tally;
    for (double v : pooled) ++tally[v];
    for (const auto& [value, t] : tally) {
      (void)value;
      const double td = static_cast<double>(t);
      tie_term += td * td * td - td;
    }
  }
  const double var_u = dn1 * dn2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var_u <= 0.0) {
    out.z = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const double diff = u1 - mean_u;
  const double cc = diff > 0.0 ? -0.5 : (diff < 0.0 ? 0.5 : 0.0);
  const double z = (diff + cc) / std::sqrt(var_u);
  out.z = z;
  out.p_value = std::min(1.0, 2.0 * normal_upper_tail(std::fabs(z)));
  return out;
}

// ---------------------------------------------------------------------------
// Chi-square independence (2 x k)
// ---------------------------------------------------------------------------

TestResult chi_square_independence(std::span<const double> row_a,
                                   std::span<const double> row_b) {
  require(row_a.size() == row_b.size(), "chi_square: row length mismatch");
  require(row_a.size() >= 2, "chi_square: need at least 2 columns");
  require_finite(row_a, "chi_square");
  require_finite(row_b, "chi_square");
  for (std::size_t i = 0; i < row_a.size(); ++i)
    require(row_a[i] >= 0.0 && row_b[i] >= 0.0, "chi_square: negative count");

  const double total_a = std::accumulate(row_a.begin(), row_a.end(), 0.0);
  const double total_b = std::accumulate(row_b.begin(), row_b.end(), 0.0);
  const double grand = total_a + total_b;
  require(total_a > 0.0 && total_b > 0.0, "chi_square: empty row");

  double stat = 0.0;
  int used_cols = 0;
  for (std::size_t j = 0; j < row_a.size(); ++j) {
    const double col = row_a[j] + row_b[j];
    if (col == 0.0) continue;  // zero expected count; drop column
    ++used_cols;
    const double ea = total_a * col / grand;
    const double eb = total_b * col / grand;
    stat += (row_a[j] - ea) * (row_a[j] - ea) / ea;
    stat += (row_b[j] - eb) * (row_b[j] - eb) / eb;
  }
  require(used_cols >= 2, "chi_square: fewer than 2 non-empty columns");

  TestResult out;
  out.name = "chi_square_independence";
  out.statistic = stat;
  out.df = used_cols - 1;
  out.p_value = chisq_upper_tail(stat, used_cols - 1);
  return out;
}

// ---------------------------------------------------------------------------
// Gap decomposition and funnel
// ---------------------------------------------------------------------------

GapDecomposition decompose_gap(double d_idea, double d_exec) {
  require(std::isfinite(d_idea) && std::isfinite(d_exec), "decompose_gap: non-finite d");
  const double ai = std::fabs(d_idea), ae = std::fabs(d_exec);
  require(ai + ae > 0.0, "decompose_gap: both effects zero");
  GapDecomposition g;
  g.d_idea = d_idea;
  g.d_exec = d_exec;
  g.share_idea = ai / (ai + ae);
  g.share_exec = 1.0 - g.share_idea;
  return g;
}

FunnelResult funnel_analysis(std::span<const ScorePair> ai,
                             std::span<const ScorePair> human) {
  require(!ai.empty(), "funnel: empty AI cohort");
  require(!human.empty(), "funnel: empty human cohort");

  std::vector<double> h_idea, h_exec;
  h_idea.reserve(human.size());
  h_exec.reserve(human.size());
  for (const auto& p : human) {
    h_idea.push_back(p.idea);
    h_exec.push_back(p.exec);
  }

  FunnelResult out;
  out.n_ai = ai.size();
  auto fill = [&](FunnelResult::Level& lvl, double q) {
    lvl.idea_threshold = percentile(h_idea, q);
    lvl.exec_threshold = percentile(h_exec, q);
    std::size_t c = 0;
    for (const auto& p : ai)
      if (p.idea > lvl.idea_threshold && p.exec > lvl.exec_threshold) ++c;
    lvl.count = c;
    lvl.share = static_cast<double>(c) / static_cast<double>(ai.size());
  };
  fill(out.median, 50.0);
  fill(out.q25, 25.0);
  fill(out.min, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Tail functions
// ---------------------------------------------------------------------------

double normal_upper_tail(double z) {
  require(std::isfinite(z), "normal_upper_tail: non-finite z");
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace {

// Regularized incomplete gamma P(a,x) by series (x < a+1 regime).
double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

// Regularized incomplete gamma Q(a,x) by continued fraction (x >= a+1).
double gamma_q_cont_frac(double a, double x) {
  const double gln = std::lgamma(a);
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chisq_upper_tail(double x, int df) {
  require(df >= 1, "chisq_upper_tail: df must be >= 1");
  require(std::isfinite(x), "chisq_upper_tail: non-finite x");
  if (x <= 0.0) return 1.0;
  const double a = static_cast<double>(df) / 2.0;
  const double xx = x / 2.0;
  if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
  return gamma_q_cont_frac(a, xx);
}

}  // namespace ideagap::stats
