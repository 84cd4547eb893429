#include <cmath>

#include "doctest.h"
#include "ideagap/common.hpp"
#include "ideagap/trueskill.hpp"
#include "oracles.hpp"

using namespace ideagap;
using doctest::Approx;
using trueskill::MatchOutcome;
using trueskill::SkillRating;
using trueskill::TrueSkillParams;

TEST_CASE("equal-prior win: frozen posterior") {
  const TrueSkillParams params;
  const auto [a, b] = trueskill::update_ratings(params.initial(), params.initial(),
                                                MatchOutcome::AWins, params);
  CHECK(a.mu == Approx(29.636000080444519).epsilon(1e-12));
  CHECK(a.sigma == Approx(7.1434913626600914).epsilon(1e-12));
  CHECK(b.mu == Approx(20.363999919555481).epsilon(1e-12));
  CHECK(b.sigma == Approx(7.1434913626600914).epsilon(1e-12));
  // Symmetric priors: the gain and the loss mirror around the prior mean.
  CHECK(a.mu - 25.0 == Approx(25.0 - b.mu).epsilon(1e-12));
}

TEST_CASE("unequal priors: frozen win and draw posteriors") {
  const TrueSkillParams params;
  const SkillRating ra{28.0, 6.0}, rb{24.0, 7.0};
  SUBCASE("win") {
    const auto [a, b] = trueskill::update_ratings(ra, rb, MatchOutcome::AWins, params);
    CHECK(a.mu == Approx(30.144482810577840).epsilon(1e-12));
    CHECK(a.sigma == Approx(5.4511772067790991).epsilon(1e-12));
    CHECK(b.mu == Approx(21.081269972179785).epsilon(1e-12));
    CHECK(b.sigma == Approx(6.1116405478826918).epsilon(1e-12));
  }
  SUBCASE("draw pulls the means together") {
    const auto [a, b] = trueskill::update_ratings(ra, rb, MatchOutcome::Tie, params);
    CHECK(a.mu == Approx(26.803440549383881).epsilon(1e-12));
    CHECK(a.sigma == Approx(5.0235262611479903).epsilon(1e-12));
    CHECK(b.mu == Approx(25.628567028543481).epsilon(1e-12));
    CHECK(b.sigma == Approx(5.3901893712506866).epsilon(1e-12));
    CHECK(a.mu < ra.mu);
    CHECK(b.mu > rb.mu);
  }
}

TEST_CASE("updates agree with numeric posterior moments") {
  const TrueSkillParams params;
  const SkillRating ra{28.0, 6.0}, rb{24.0, 7.0};
  const double sa = std::sqrt(ra.sigma * ra.sigma + params.tau * params.tau);
  const double sb = std::sqrt(rb.sigma * rb.sigma + params.tau * params.tau);
  const double c =
      std::sqrt(sa * sa + sb * sb + 2.0 * params.beta * params.beta);
  const double eps = trueskill::draw_margin(params.draw_probability, c);

  SUBCASE("win case") {
    const auto [a, b] = trueskill::update_ratings(ra, rb, MatchOutcome::AWins, params);
    const auto ma = oracles::posterior_moments(ra.mu, sa, rb.mu, sb, params.beta, eps,
                                               oracles::OutcomeKind::Win);
    const auto mb = oracles::posterior_moments(rb.mu, sb, ra.mu, sa, params.beta, eps,
                                               oracles::OutcomeKind::Lose);
    CHECK(a.mu == Approx(ma.mean).epsilon(1e-8));
    CHECK(a.sigma == Approx(ma.sd).epsilon(1e-8));
    CHECK(b.mu == Approx(mb.mean).epsilon(1e-8));
    CHECK(b.sigma == Approx(mb.sd).epsilon(1e-8));
  }
  SUBCASE("draw case") {
    const auto [a, b] = trueskill::update_ratings(ra, rb, MatchOutcome::Tie, params);
    const auto ma = oracles::posterior_moments(ra.mu, sa, rb.mu, sb, params.beta, eps,
                                               oracles::OutcomeKind::Draw);
    const auto mb = oracles::posterior_moments(rb.mu, sb, ra.mu, sa, params.beta, eps,
                                               oracles::OutcomeKind::Draw);
    CHECK(a.mu == Approx(ma.mean).epsilon(1e-8));
    CHECK(a.sigma == Approx(ma.sd).epsilon(1e-8));
    CHECK(b.mu == Approx(mb.mean).epsilon(1e-8));
    CHECK(b.sigma == Approx(mb.sd).epsilon(1e-8));
  }
}

TEST_CASE("label swap symmetry: B winning mirrors A winning with roles swapped") {
  const TrueSkillParams params;
  const SkillRating ra{27.0, 5.0}, rb{22.0, 8.0};
  const auto [a1, b1] = trueskill::update_ratings(ra, rb, MatchOutcome::BWins, params);
  const auto [b2, a2] = trueskill::update_ratings(rb, ra, MatchOutcome::AWins, params);
  CHECK(a1.mu == Approx(a2.mu).epsilon(1e-14));
  CHECK(a1.sigma == Approx(a2.sigma).epsilon(1e-14));
  CHECK(b1.mu == Approx(b2.mu).epsilon(1e-14));
  CHECK(b1.sigma == Approx(b2.sigma).epsilon(1e-14));
}

TEST_CASE("hazard corrections stay finite with w in (0,1) under extreme inputs") {
  for (double t = -40.0; t <= 40.0; t += 0.5) {
    for (double eps : {0.0, 0.12566134685507403, 1.0}) {
      const double v = trueskill::v_win(t, eps);
      const double w = trueskill::w_win(t, eps);
      CAPTURE(t);
      CAPTURE(eps);
      CHECK(std::isfinite(v));
      CHECK(w > 0.0);
      CHECK(w < 1.0);
      if (eps > 0.0) {
        const double vd = trueskill::v_draw(t, eps);
        const double wd = trueskill::w_draw(t, eps);
        CHECK(std::isfinite(vd));
        CHECK(wd > 0.0);
        CHECK(wd < 1.0);
      }
    }
  }
}

TEST_CASE("random matches: winner rises, loser falls, uncertainty shrinks") {
  const TrueSkillParams params;
  SmallRng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const SkillRating ra{20.0 + 10.0 * rng.next_double(), 1.0 + 8.0 * rng.next_double()};
    const SkillRating rb{20.0 + 10.0 * rng.next_double(), 1.0 + 8.0 * rng.next_double()};
    const auto [a, b] = trueskill::update_ratings(ra, rb, MatchOutcome::AWins, params);
    CAPTURE(i);
    CHECK(a.mu > ra.mu);
    CHECK(b.mu < rb.mu);
    const double cap_a = std::sqrt(ra.sigma * ra.sigma + params.tau * params.tau);
    const double cap_b = std::sqrt(rb.sigma * rb.sigma + params.tau * params.tau);
    CHECK(a.sigma > 0.0);
    CHECK(b.sigma > 0.0);
    CHECK(a.sigma <= cap_a + 1e-12);
    CHECK(b.sigma <= cap_b + 1e-12);
  }
}

TEST_CASE("inverse normal cdf") {
  CHECK(trueskill::normal_inverse_cdf(0.5) == Approx(0.0).epsilon(1e-14));
  CHECK(trueskill::normal_inverse_cdf(0.975) ==
        Approx(1.959963984540054).epsilon(1e-12));
  CHECK(trueskill::normal_inverse_cdf(0.55) ==
        Approx(0.12566134685507403).epsilon(1e-12));
  // Symmetry and round trip through the tail function.
  for (double p : {0.01, 0.2, 0.4, 0.6, 0.8, 0.99}) {
    const double z = trueskill::normal_inverse_cdf(p);
    CHECK(z == Approx(-trueskill::normal_inverse_cdf(1.0 - p)).epsilon(1e-10));
    CHECK(0.5 * std::erfc(-z / std::sqrt(2.0)) == Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(trueskill::normal_inverse_cdf(0.0), trueskill::RatingError);
  CHECK_THROWS_AS(trueskill::normal_inverse_cdf(1.0), trueskill::RatingError);
}

TEST_CASE("draw margin scales with c and matches the 10 percent default") {
  const double c = 13.176683953104438;
  CHECK(trueskill::draw_margin(0.10, c) == Approx(1.6557998526307449).epsilon(1e-12));
  CHECK(trueskill::draw_margin(0.10, 2.0 * c) ==
        Approx(2.0 * 1.6557998526307449).epsilon(1e-12));
}

TEST_CASE("conservative rating subtracts k sigmas") {
  CHECK(trueskill::conservative_rating({25.0, 25.0 / 3.0}, 3.0) == Approx(0.0));
  CHECK(trueskill::conservative_rating({30.0, 2.0}, 3.0) == Approx(24.0));
}

TEST_CASE("invalid ratings are rejected") {
  const TrueSkillParams params;
  CHECK_THROWS_AS(trueskill::update_ratings({25.0, 0.0}, params.initial(),
                                            MatchOutcome::AWins, params),
                  trueskill::RatingError);
  CHECK_THROWS_AS(trueskill::update_ratings({std::nan(""), 8.0}, params.initial(),
                                            MatchOutcome::AWins, params),
                  trueskill::RatingError);
}
