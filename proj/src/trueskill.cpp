#include "ideagap/trueskill.hpp"

#include <algorithm>
#include <cmath>

namespace ideagap::trueskill {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// phi(u)/Phi(u), stable for u << 0.  Direct evaluation is exact down to
// u ~ -30 (erfc stays normal); beyond that use the Mills-ratio series
// 1/lambda = -(1 - u^-2 + 3 u^-4 - 15 u^-6 + ...) / u.
double hazard_ratio(double u) {
  if (u > -30.0) {
    const double denom = normal_cdf(u);
    if (denom > 0.0) return normal_pdf(u) / denom;
  }
  const double inv_u2 = 1.0 / (u * u);
  double term = 1.0, series = 1.0, k = 1.0;
  for (int i = 0; i < 12; ++i) {
    term *= -k * inv_u2;
    series += term;
    k += 2.0;
    if (std::fabs(term) < 1e-17) break;
  }
  return -u / series;
}

}  // namespace

double v_win(double t, double eps) { return hazard_ratio(t - eps); }

double w_win(double t, double eps) {
  const double u = t - eps;
  const double v = hazard_ratio(u);
  const double w = v * (v + u);
  // Exact arithmetic keeps w in (0,1); clamp the floating-point edges only.
  return std::clamp(w, 1e-300, 1.0 - 1e-16);
}

double v_draw(double t, double eps) {
  const double a = std::fabs(t);
  const double sign = (t >= 0.0) ? 1.0 : -1.0;
  const double z = normal_cdf(eps - a) - normal_cdf(-eps - a);
  double v;
  if (z > 1e-290) {
    v = (normal_pdf(-eps - a) - normal_pdf(eps - a)) / z;
  } else {
    // Mass concentrates at the near edge of the interval.
    v = eps - a;
  }
  return sign * v;
}

double w_draw(double t, double eps) {
  const double a = std::fabs(t);
  const double z = normal_cdf(eps - a) - normal_cdf(-eps - a);
  if (z <= 1e-290) {
    const double u = a - eps;  // distance past the near edge
    return std::clamp(1.0 - 1.0 / (u * u), 0.5, 1.0 - 1e-16);
  }
  const double v = (normal_pdf(-eps - a) - normal_pdf(eps - a)) / z;
  const double w =
      v * v + ((eps - a) * normal_pdf(eps - a) + (eps + a) * normal_pdf(eps + a)) / z;
  return std::clamp(w, 1e-300, 1.0 - 1e-16);
}

double normal_inverse_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw RatingError("normal_inverse_cdf: p outside (0, 1)");

  // Acklam's approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the forward CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

double draw_margin(double draw_probability, double c) {
  if (draw_probability <= 0.0 || draw_probability >= 1.0)
    throw RatingError("draw_margin: draw probability outside (0, 1)");
  return normal_inverse_cdf((1.0 + draw_probability) / 2.0) * c;
}

std::pair<SkillRating, SkillRating> update_ratings(const SkillRating& a,
                                                   const SkillRating& b,
                                                   MatchOutcome outcome,
                                                   const TrueSkillParams& params) {
  if (!(a.sigma > 0.0) || !(b.sigma > 0.0))
    throw RatingError("update_ratings: sigma must be positive");
  if (!std::isfinite(a.mu) || !std::isfinite(b.mu) || !std::isfinite(a.sigma) ||
      !std::isfinite(b.sigma))
    throw RatingError("update_ratings: non-finite rating");

  // Dynamics: inflate both sigmas before the update.
  const double va = a.sigma * a.sigma + params.tau * params.tau;
  const double vb = b.sigma * b.sigma + params.tau * params.tau;
  const double c2 = va + vb + 2.0 * params.beta * params.beta;
  const double c = std::sqrt(c2);

  const double t = (a.mu - b.mu) / c;
  const double eps = draw_margin(params.draw_probability, c) / c;  // normalized

  // v is the mean shift in a's favor (in units of sigma~^2 / c); w is the
  // variance-contraction factor, shared by both players.
  double v, w;
  switch (outcome) {
    case MatchOutcome::AWins:
      v = v_win(t, eps);
      w = w_win(t, eps);
      break;
    case MatchOutcome::BWins:
      // Mirror the difference: b beat a.
      v = -v_win(-t, eps);
      w = w_win(-t, eps);
      break;
    case MatchOutcome::Tie:
    default:
      v = v_draw(t, eps);
      w = w_draw(t, eps);
      break;
  }

  auto apply = [&](double mu, double var, double direction) {
    SkillRating r;
    r.mu = mu + direction * (var / c) * v;
    const double shrink = 1.0 - (var / c2) * w;
    r.sigma = std::sqrt(var * std::max(shrink, 1e-12));
    return r;
  };

  return {apply(a.mu, va, 1.0), apply(b.mu, vb, -1.0)};
}

double conservative_rating(const SkillRating& r, double k) {
  return r.mu - k * r.sigma;
}

}  // namespace ideagap::trueskill
