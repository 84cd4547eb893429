#pragma once

// Self-contained statistics for two-cohort comparisons: effect sizes, rank
// tests, contingency tests, correlations, percentiles, gap decomposition and
// funnel counts.  No external numerics dependencies; the normal and chi-square
// tail functions are implemented here.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ideagap::stats {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n, sample mean, sample standard deviation (n-1 denominator).
struct GroupSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

GroupSummary summarize(std::span<const double> xs);

// Named test outcome.  `z` is set when a normal approximation was used and
// `df` when the statistic has a chi-square reference distribution.
struct TestResult {
  std::string name;
  double statistic = 0.0;
  std::optional<double> z;
  std::optional<int> df;
  double p_value = 1.0;
};

// ---------------------------------------------------------------------------
// Effect sizes and correlations
// ---------------------------------------------------------------------------

// Cohen's d with pooled standard deviation (n-1 variances).  Requires at
// least two observations per group and a positive pooled variance unless both
// means are identical (then d = 0).
double cohens_d(std::span<const double> x, std::span<const double> y);

double pearson_r(std::span<const double> x, std::span<const double> y);

// Spearman's rho: Pearson correlation of midranks (tie-safe).
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Average ranks 1..n with ties sharing their midrank.
std::vector<double> midranks(std::span<const double> values);

// Linear-interpolation percentile (q in [0,100]) over the sorted values at
// positions q/100 * (n-1).
double percentile(std::span<const double> values, double q);

// ---------------------------------------------------------------------------
// Hypothesis tests
// ---------------------------------------------------------------------------

enum class MannWhitneyMode { Auto, Exact, NormalApprox };

// Two-sided Mann-Whitney U.  Exact p by enumeration over subsets of the
// pooled midranks when n1*n2 <= 400 (Auto), otherwise the normal
// approximation with tie-corrected variance and continuity correction.
// statistic = U for the first sample; p = min(1, 2*min(P(U<=u), P(U>=u)))
// in exact mode.
TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                          MannWhitneyMode mode = MannWhitneyMode::Auto);

// Chi-square test of independence for a 2 x k table of counts (no continuity
// correction).  Columns whose expected count is zero are dropped and the
// degrees of freedom reduced; fewer than two surviving columns is an error.
TestResult chi_square_independence(std::span<const double> row_a,
                                   std::span<const double> row_b);

// ---------------------------------------------------------------------------
// Gap decomposition and funnel
// ---------------------------------------------------------------------------

struct GapDecomposition {
  double d_idea = 0.0;
  double d_exec = 0.0;
  double share_idea = 0.0;  // |d_idea| / (|d_idea| + |d_exec|)
  double share_exec = 0.0;
};

GapDecomposition decompose_gap(double d_idea, double d_exec);

struct ScorePair {
  double idea = 0.0;
  double exec = 0.0;
};

// Counts of AI papers strictly above the human reference on *both* measures,
// at three reference levels: human median, human 25th percentile, human
// minimum.  Counts are monotone non-decreasing across the three levels.
struct FunnelResult {
  struct Level {
    double idea_threshold = 0.0;
    double exec_threshold = 0.0;
    std::size_t count = 0;
    double share = 0.0;  // count / n_ai
  };
  Level median;
  Level q25;
  Level min;
  std::size_t n_ai = 0;
};

FunnelResult funnel_analysis(std::span<const ScorePair> ai,
                             std::span<const ScorePair> human);

// ---------------------------------------------------------------------------
// Tail functions
// ---------------------------------------------------------------------------

// P(Z > z) for standard normal Z, via erfc.
double normal_upper_tail(double z);

// P(X > x) for chi-square X with df degrees of freedom (regularized upper
// incomplete gamma; series for x < df+1, continued fraction otherwise).
double chisq_upper_tail(double x, int df);

}  // namespace ideagap::stats
