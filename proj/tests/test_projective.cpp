#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmg/errors.hpp"
#include "qmg/projective.hpp"
#include "support/oracles.hpp"

using namespace qmg::projective;
using qmg::DegenerateError;
using qmg::DomainError;

TEST_CASE("demand and supply profits are log quotations") {
  CHECK(demand_profit(1.0, 1.0) == 0.0);
  CHECK(demand_profit(std::numbers::e, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // ln(2/4), mpmath to 40 digits.
  CHECK(demand_profit(2.0, 4.0) == doctest::Approx(-0.6931471805599453).epsilon(1e-15));

  CHECK(supply_profit(1.0, 1.0) == 0.0);
  CHECK(supply_profit(1.0, std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-15));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amount(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v_asset = amount(rng), v_money = amount(rng);
    CHECK(supply_profit(v_asset, v_money) == -demand_profit(v_money, v_asset));
  }

  CHECK_THROWS_AS(demand_profit(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(demand_profit(1.0, -2.0), DomainError);
  CHECK_THROWS_AS(supply_profit(-1.0, 1.0), DomainError);
}

TEST_CASE("portfolio points compare projectively") {
  const PortfolioPoint v({1.0, -2.0, 0.5});
  CHECK(v == PortfolioPoint({3.0, -6.0, 1.5}));
  CHECK(v == PortfolioPoint({-1.0, 2.0, -0.5}));
  CHECK_FALSE(v == PortfolioPoint({1.0, -2.0, 0.6}));
  CHECK_FALSE(v == PortfolioPoint({1.0, -2.0}));
  CHECK_THROWS_AS(PortfolioPoint({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(PortfolioPoint(std::vector<double>{}), DomainError);

  const auto n = PortfolioPoint({2.0, -8.0}).normalized();
  CHECK(n[0] == doctest::Approx(-0.25));
  CHECK(n[1] == doctest::Approx(1.0));
}

TEST_CASE("cycle points") {
  auto [u_q, u_p] = build_cycle_points(0.0, 0.0, 1.0, 1.0);
  CHECK(u_q[kAsset] == 1.0);
  CHECK(u_q[kMoney] == 1.0);
  CHECK(u_p[kAsset] == 1.0);
  CHECK(u_p[kMoney] == 1.0);

  // exp(0.3) and 2 exp(0.5), mpmath.
  std::tie(u_q, u_p) = build_cycle_points(0.5, 0.3, 1.0, 2.0);
  CHECK(u_q[kAsset] == doctest::Approx(1.3498588075760032).epsilon(1e-15));
  CHECK(u_q[kMoney] == 1.0);
  CHECK(u_p[kAsset] == 2.0);
  CHECK(u_p[kMoney] == doctest::Approx(3.2974425414002564).epsilon(1e-15));

  std::tie(u_q, u_p) = build_cycle_points(0.1, -0.7, 3.0, 0.4, 2);
  CHECK(u_q.size() == 4);
  CHECK(u_q[kAsset] / u_q[kMoney] == doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
  CHECK(u_q[2] == 0.0);
  CHECK(u_p[3] == 0.0);

  CHECK_THROWS_AS(build_cycle_points(0.0, 0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(build_cycle_points(0.0, 0.0, 1.0, -1.0), DomainError);
}

TEST_CASE("line through two points") {
  const PortfolioPoint u_q({2.0, 0.0});
  const PortfolioPoint u_p({0.0, 2.0});
  CHECK(line_point(u_q, u_p, 1.0) == u_q);
  CHECK(line_point(u_q, u_p, 0.0) == u_p);
  const auto mid = line_point(u_q, u_p, 0.5);
  CHECK(mid[0] == 1.0);
  CHECK(mid[1] == 1.0);
  CHECK_THROWS_AS(line_point(u_q, PortfolioPoint({4.0, 0.0}), 0.3), DegenerateError);
}

TEST_CASE("intersection parameters") {
  for (double s : {-1.0, 0.0, 0.8, 3.0}) {
    CHECK(intersection_lambdas(s, 0.0, 1.0, 2.0).money == 2.0);
  }
  // 2 / (2 - exp(-0.8)), mpmath.
  CHECK(intersection_lambdas(0.5, 0.3, 1.0, 2.0).asset == doctest::Approx(1.2897642077008448).epsilon(1e-15));
  CHECK_THROWS_AS(intersection_lambdas(0.0, 0.0, 1.0, 1.0), DegenerateError);
  CHECK_THROWS_AS(intersection_lambdas(0.3, -0.1, 1.5, 1.5), DegenerateError);
  CHECK_THROWS_AS(intersection_lambdas(std::log(2.0), 0.0, 2.0, 1.0), DegenerateError);

  // The coordinates of the line vanish at the returned parameters, for
  // explicit representatives too.
  const auto [u_q, u_p] = build_cycle_points(0.5, 0.3, 1.0, 2.0);
  const auto lam = intersection_lambdas(u_q, u_p);
  CHECK(std::abs(line_point(u_q, u_p, lam.money)[kAsset]) < 1e-14);
  CHECK(std::abs(line_point(u_q, u_p, lam.asset)[kMoney]) < 1e-14);
}

TEST_CASE("cross ratio") {
  using qmg::testing::Rational;
  const auto exact = qmg::testing::rational_cross_ratio(0, 1, 2, 3);
  CHECK(exact == Rational(4));
  CHECK(cross_ratio(0.0, 1.0, 2.0, 3.0) == doctest::Approx(exact.to_double()).epsilon(1e-15));

  const auto exact2 = qmg::testing::rational_cross_ratio(Rational(-3, 7), Rational(5, 2), 11, Rational(1, 3));
  CHECK(cross_ratio(-3.0 / 7.0, 2.5, 11.0, 1.0 / 3.0) == doctest::Approx(exact2.to_double()).epsilon(1e-14));

  // exp(0.8), mpmath.
  CHECK(cross_ratio(1.2897642077008448, 1.0, 0.0, 2.0) == doctest::Approx(2.2255409284924676).epsilon(1e-14));

  CHECK_THROWS_AS(cross_ratio(0.0, 1.0, 1.0, 3.0), DegenerateError);
  CHECK_THROWS_AS(cross_ratio(2.0, 2.0, 1.0, 3.0), DegenerateError);
  CHECK_THROWS_AS(cross_ratio(LineParam::infinity(), 1.0, 0.0, LineParam::infinity()), DegenerateError);
  CHECK_THROWS_AS(cross_ratio(0.5, 1.0, 0.0, 0.0), DegenerateError);
  CHECK_THROWS_AS(cross_ratio(0.5, 1.0, 0.0, 1.0), DegenerateError);
  // A = D and A = C leave every denominator non-zero.
  CHECK(cross_ratio(1.5, 1.0, 0.0, 1.5) == 1.0);
  CHECK(cross_ratio(0.0, 1.0, 0.0, 2.0) == 0.0);

  SUBCASE("infinite argument is the limit of large finite ones") {
    const double big = 1e12;
    CHECK(cross_ratio(LineParam::infinity(), 1.0, 0.0, 2.0) ==
          doctest::Approx(cross_ratio(big, 1.0, 0.0, 2.0)).epsilon(1e-10));
    CHECK(cross_ratio(0.5, LineParam::infinity(), 0.0, 2.0) ==
          doctest::Approx(cross_ratio(0.5, -big, 0.0, 2.0)).epsilon(1e-10));
    CHECK(cross_ratio(0.5, 1.0, LineParam::infinity(), 2.0) ==
          doctest::Approx(cross_ratio(0.5, 1.0, big, 2.0)).epsilon(1e-10));
    CHECK(cross_ratio(0.5, 1.0, 0.0, LineParam::infinity()) ==
          doctest::Approx(cross_ratio(0.5, 1.0, 0.0, -big)).epsilon(1e-10));
  }
}

TEST_CASE("log cross ratio of a cycle is p + q") {
  CHECK(cycle_log_cross_ratio(0.5, 0.3, 1.0, 2.0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(std::abs(cycle_log_cross_ratio(0.0, 0.0, 1.0, 3.0)) < 1e-15);
  CHECK(cycle_log_cross_ratio(1.7, -0.4, 0.2, 5.0) == doctest::Approx(1.3).epsilon(1e-14));
  CHECK_THROWS_AS(cycle_log_cross_ratio(0.0, 0.0, 1.0, 1.0), DegenerateError);
  CHECK_THROWS_AS(cycle_log_cross_ratio(0.2, 0.1, 2.0, 2.0), DegenerateError);
  CHECK(cycle_log_cross_ratio(-0.7, 0.7, 1.0, 3.0) == 0.0);

  // An intersection parameter within 1e-6 of U_q keeps full accuracy.
  CHECK(std::abs(cycle_log_cross_ratio(2.0, 1.5, 1e-6, 1.0) - 3.5) < 1e-14);
  const auto [near_q, near_p] = build_cycle_points(2.0, 1.5, 1e-6, 1.0);
  CHECK(std::abs(log_cross_ratio(near_q, near_p) - 3.5) < 1e-14);

  const auto [u_q, u_p] = build_cycle_points(1.7, -0.4, 0.2, 5.0);
  CHECK(log_cross_ratio(u_q, u_p) == doctest::Approx(1.3).epsilon(1e-14));
}

TEST_CASE("unit rescaling") {
  const PortfolioPoint v({1.0, 2.0});
  CHECK(rescale_units(v, std::vector<double>{1.0, 1.0}) == v);
  const auto scaled = rescale_units(v, std::vector<double>{2.0, 1.0});
  CHECK(scaled[0] == 2.0);
  CHECK(scaled[1] == 2.0);
  CHECK_THROWS_AS(rescale_units(v, std::vector<double>{1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(rescale_units(v, std::vector<double>{1.0}), DomainError);
}

namespace {

struct Cycle {
  double p, q, upsilon, w;
};

// Tuples away from the two degeneracies of the closed form and of the
// explicit-representative lambdas.
Cycle random_cycle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> profit(-2.0, 2.0);
  std::uniform_real_distribution<double> log_scale(std::log(0.2), std::log(5.0));
  for (;;) {
    const Cycle c{profit(rng), profit(rng), std::exp(log_scale(rng)), std::exp(log_scale(rng))};
    const double gaps[] = {c.w - c.upsilon, c.w - c.upsilon * std::exp(-(c.p + c.q)),
                           c.w - c.upsilon * std::exp(c.q), c.w * std::exp(c.p) - c.upsilon};
    bool ok = true;
    for (double g : gaps) ok = ok && std::abs(g) > 1e-3;
    if (ok) return c;
  }
}

}  // namespace

TEST_CASE("property: additivity over composed cycles") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const auto c1 = random_cycle(rng);
    const auto c2 = random_cycle(rng);
    const double upsilon = 1.0, w = 3.0;
    const double sum = cycle_log_cross_ratio(c1.p, c1.q, upsilon, w) + cycle_log_cross_ratio(c2.p, c2.q, upsilon, w);
    const double composite = cycle_log_cross_ratio(c1.p + c2.p, c1.q + c2.q, upsilon, w);
    CHECK(std::abs(sum - composite) < 1e-12);
  }
}

TEST_CASE("property: unit and representative invariance") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_unit(-3.0, 3.0);
  std::uniform_real_distribution<double> log_rep(-0.5, 0.5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = random_cycle(rng);
    const auto [u_q, u_p] = build_cycle_points(c.p, c.q, c.upsilon, c.w);
    const std::vector<double> units = {std::exp(log_unit(rng)), std::exp(log_unit(rng))};
    const double rq = std::exp(log_rep(rng)), rp = std::exp(log_rep(rng));
    const auto sq = rescale_units(rescale_units(u_q, units), std::vector<double>{rq, rq});
    const auto sp = rescale_units(rescale_units(u_p, units), std::vector<double>{rp, rp});
    worst = std::max(worst, std::abs(log_cross_ratio(sq, sp) - (c.p + c.q)));
    worst = std::max(worst, std::abs(cycle_log_cross_ratio(c.p, c.q, c.upsilon, c.w) - (c.p + c.q)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("property: cross ratio is invariant under affine reparametrization") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> param(-5.0, 5.0);
  std::uniform_real_distribution<double> alpha(0.2, 5.0);
  for (int i = 0; i < 1000; ++i) {
    double l[4];
    for (auto& x : l) x = param(rng);
    bool spread = true;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) spread = spread && std::abs(l[a] - l[b]) > 0.05;
    if (!spread) continue;
    const double al = (i % 2 == 0 ? 1.0 : -1.0) * alpha(rng), be = param(rng);
    const double base = cross_ratio(l[0], l[1], l[2], l[3]);
    const double moved = cross_ratio(al * l[0] + be, al * l[1] + be, al * l[2] + be, al * l[3] + be);
    CHECK(std::abs(moved - base) <= 1e-12 * std::max(1.0, std::abs(base)));
  }
}

TEST_CASE("property: antisymmetry under reversing the cycle") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto c = random_cycle(rng);
    const double fwd = cycle_log_cross_ratio(c.p, c.q, 1.0, 2.5);
    const double back = cycle_log_cross_ratio(-c.q, -c.p, 1.0, 2.5);
    CHECK(std::abs(fwd + back) < 1e-12);
  }
}
