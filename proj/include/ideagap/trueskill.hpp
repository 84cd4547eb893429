#pragma once

// Two-player Gaussian skill ratings with draws.  Ratings are N(mu, sigma^2);
// a match outcome truncates the joint performance-difference posterior and
// the update moment-matches it back to a Gaussian per player.

#include <cstddef>
#include <stdexcept>
#include <utility>

namespace ideagap::trueskill {

struct SkillRating {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;
};

struct TrueSkillParams {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;              // performance noise, sigma0/2
  double tau = 25.0 / 300.0;             // additive dynamics, sigma0/100
  double draw_probability = 0.10;
  double k_conservative = 3.0;

  SkillRating initial() const { return {mu0, sigma0}; }
};

enum class MatchOutcome { AWins, BWins, Tie };

class RatingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truncation corrections for the win case, u = t - eps (both in units of c):
//   v = phi(u) / Phi(u),    w = v * (v + u)
// and for the draw case (|difference| < eps):
//   v = (phi(-eps-t) - phi(eps-t)) / Z
//   w = v^2 + ((eps-t) phi(eps-t) + (eps+t) phi(eps+t)) / Z
// with Z = Phi(eps-t) - Phi(-eps-t).  All four are guarded against extreme
// arguments (asymptotic forms instead of 0/0) and never return NaN.
double v_win(double t, double eps);
double w_win(double t, double eps);
double v_draw(double t, double eps);
double w_draw(double t, double eps);

// Draw margin: eps = Phi^{-1}((1 + draw_probability) / 2) * c, where
// c^2 = sigma_a^2 + sigma_b^2 + 2 beta^2 (after tau inflation).
double draw_margin(double draw_probability, double c);

// Inverse standard normal CDF (Acklam's rational approximation plus one
// Halley refinement step; |error| < 1e-13 over (0,1)).
double normal_inverse_cdf(double p);

// One match between a and b.  Both sigmas are inflated by tau before the
// update; mu moves by (sigma~^2 / c) * v and sigma^2 shrinks by factor
// (1 - (sigma~^2 / c^2) * w).  Sigma never increases beyond its tau-inflated
// value and never reaches zero.
std::pair<SkillRating, SkillRating> update_ratings(const SkillRating& a,
                                                   const SkillRating& b,
                                                   MatchOutcome outcome,
                                                   const TrueSkillParams& params = {});

// mu - k * sigma: pessimistic lower bound used for ranking.
double conservative_rating(const SkillRating& r, double k);

}  // namespace ideagap::trueskill
