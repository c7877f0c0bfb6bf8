#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <sstream>

#include "qmg/errors.hpp"
#include "qmg/market_sim.hpp"
#include "qmg/profit_intensity.hpp"
#include "qmg/random.hpp"

using namespace qmg::sim;
using qmg::random::CounterStream;

namespace {

constexpr double kAmax = 0.27602980479814329697;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

GameConfig fixed_config(double a, std::uint64_t cycles, BuyLeg leg = BuyLeg::zero, std::uint64_t seed = 7) {
  GameConfig c;
  c.m = 1.0;
  c.seed = seed;
  c.cycles = cycles;
  c.policy = FixedPolicy{a};
  c.buy_leg = leg;
  return c;
}

GameConfig adaptive_config(double a1, std::uint64_t cycles, std::uint64_t seed, BuyLeg leg = BuyLeg::draw_from_rw) {
  GameConfig c;
  c.m = 1.0;
  c.seed = seed;
  c.cycles = cycles;
  c.policy = AdaptivePolicy{a1};
  c.buy_leg = leg;
  return c;
}

}  // namespace

TEST_CASE("inverse normal cdf matches boost quantile") {
  const boost::math::normal_distribution<double> normal;
  for (double u : {1e-300, 1e-20, 1e-10, 1e-5, 0.001, 0.02425, 0.075, 0.3, 0.5, 0.5 + 1e-12, 0.7, 0.925, 0.97575,
                   0.999, 1.0 - 1e-10}) {
    CAPTURE(u);
    const double ref = boost::math::quantile(normal, u);
    CHECK(std::abs(qmg::random::inverse_normal_cdf(u) - ref) <= 1e-14 * std::max(1.0, std::abs(ref)));
  }
  CHECK(qmg::random::inverse_normal_cdf(0.5) == 0.0);
  CHECK_THROWS_AS(qmg::random::inverse_normal_cdf(0.0), qmg::DomainError);
  CHECK_THROWS_AS(qmg::random::inverse_normal_cdf(1.0), qmg::DomainError);
}

TEST_CASE("counter stream") {
  CounterStream a(42, 1), b(42, 1), other_stream(42, 2), other_seed(43, 1);
  bool differ_stream = false, differ_seed = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next_uniform();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    CHECK(x == b.next_uniform());
    differ_stream = differ_stream || x != other_stream.next_uniform();
    differ_seed = differ_seed || x != other_seed.next_uniform();
  }
  CHECK(differ_stream);
  CHECK(differ_seed);
  CHECK(a.position() == 1000);
}

TEST_CASE("quote draws have the RW moments") {
  constexpr int kN = 1000000;
  CounterStream unit(2024, kSellStream);
  double sum = 0.0;
  for (int i = 0; i < kN; ++i) sum += draw_quote(unit, 1.0);
  CHECK(std::abs(sum / kN) < 0.004);

  CounterStream four(99, kSellStream);
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double q = draw_quote(four, 4.0);
    s1 += q;
    s2 += q * q;
  }
  const double mean = s1 / kN;
  const double var = s2 / kN - mean * mean;
  CHECK(std::abs(var - 0.25) < 0.002);
}

TEST_CASE("cycle rules") {
  const auto sold = play_cycle(0.276, 0.0, 0.5);
  CHECK(sold.sold);
  CHECK(sold.profit == 0.5);
  CHECK(sold.duration == 2);

  const auto kept = play_cycle(0.276, 0.0, 0.1);
  CHECK_FALSE(kept.sold);
  CHECK(kept.profit == 0.0);
  CHECK(kept.duration == 1);

  CHECK_FALSE(play_cycle(0.3, 0.0, 0.3).sold);

  const auto with_buy = play_cycle(-1.0, 0.25, -0.5);
  CHECK(with_buy.sold);
  CHECK(with_buy.profit == -0.25);
  CHECK(with_buy.p_buy == 0.25);
}

TEST_CASE("config validation") {
  auto c = fixed_config(0.0, 10);
  c.m = 0.0;
  CHECK_THROWS_AS(run_fixed(c), qmg::DomainError);
  c = fixed_config(0.0, 0);
  CHECK_THROWS_AS(run_fixed(c), qmg::DomainError);
  c = fixed_config(std::nan(""), 10);
  CHECK_THROWS_AS(run_fixed(c), qmg::DomainError);
  CHECK_THROWS_AS(run_adaptive(fixed_config(0.0, 10)), qmg::DomainError);
  CHECK_THROWS_AS(run_fixed(adaptive_config(0.0, 10, 1)), qmg::DomainError);
}

TEST_CASE("single cycle run") {
  const auto r = run_fixed(fixed_config(0.0, 1));
  CHECK(r.cycles_run == 1);
  CHECK(std::isfinite(r.empirical_intensity));
  CHECK(std::isnan(r.std_error));
  const auto j = to_json(fixed_config(0.0, 1), r);
  CHECK(j["std_error"].is_null());
  CHECK(j["cycles_run"] == 1);
}

TEST_CASE("determinism") {
  const auto c = adaptive_config(0.5, 20000, 3);
  const auto r1 = run_adaptive(c);
  const auto r2 = run_adaptive(c);
  CHECK(r1.empirical_intensity == r2.empirical_intensity);
  CHECK(r1.std_error == r2.std_error);
  CHECK(r1.trajectory == r2.trajectory);
  CHECK(to_json(c, r1).dump() == to_json(c, r2).dump());
}

TEST_CASE("renewal-reward consistency of the fixed game") {
  for (double a : {-1.0, 0.0, 0.27603, 1.0}) {
    CAPTURE(a);
    const auto cfg = fixed_config(a, 10000000, BuyLeg::zero, 11);
    const auto r = run_fixed(cfg);
    const double expected = qmg::intensity::rho(a, qmg::intensity::RWQuoteModel(1.0));
    CHECK(std::abs(r.empirical_intensity - expected) <= 4.0 * r.std_error);
    CHECK(r.std_error < 1e-3);

    const double n = static_cast<double>(r.cycles_run);
    const double p_sell = 1.0 - std_normal_cdf(a);
    const double frac = static_cast<double>(r.sales) / n;
    CHECK(std::abs(frac - p_sell) <= 4.0 * std::sqrt(p_sell * (1.0 - p_sell) / n));
    // Duration is 1 + Bernoulli(p_sell).
    const double mean_tau = r.total_duration / n;
    CHECK(std::abs(mean_tau - (2.0 - std_normal_cdf(a))) <= 4.0 * std::sqrt(p_sell * (1.0 - p_sell) / n));
  }
}

TEST_CASE("drawing the buy leg is a zero-mean perturbation") {
  const auto zero = run_fixed(fixed_config(0.0, 2000000, BuyLeg::zero, 5));
  const auto draw = run_fixed(fixed_config(0.0, 2000000, BuyLeg::draw_from_rw, 5));
  const double combined = std::hypot(zero.std_error, draw.std_error);
  CHECK(std::abs(draw.empirical_intensity - zero.empirical_intensity) <= 4.0 * combined);
  // Seed-matched: the sell decisions coincide, only the buy-leg profit moves.
  CHECK(zero.total_duration == draw.total_duration);
  CHECK(zero.sales == draw.sales);
}

TEST_CASE("adaptive tactic") {
  SUBCASE("starting at the fixed point stays there") {
    const auto r = run_adaptive(adaptive_config(kAmax, 1000000, 21));
    REQUIRE(r.final_a);
    CHECK(std::abs(*r.final_a - kAmax) <= 0.01);
  }
  SUBCASE("converges from far starts and stays confined") {
    for (double a1 : {-2.0, 0.0, 2.0}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        CAPTURE(a1);
        CAPTURE(seed);
        const auto r = run_adaptive(adaptive_config(a1, 1000000, seed));
        REQUIRE(r.final_a);
        CHECK(std::abs(*r.final_a - 0.27603) <= 0.01);
        REQUIRE(r.trajectory.size() == r.cycles_run);
        CHECK(r.trajectory.front() == a1);
        bool confined = true;
        for (std::size_t n = 1000; n < r.trajectory.size(); ++n) {
          confined = confined && r.trajectory[n] > 0.0 && r.trajectory[n] < 0.5;
        }
        CHECK(confined);
      }
    }
  }
  SUBCASE("cumulative-ratio identity") {
    std::vector<TrajectoryPoint> points;
    const auto r = run_adaptive(adaptive_config(0.0, 5000, 8), [&](const TrajectoryPoint& p) { points.push_back(p); });
    REQUIRE(points.size() == 5000);
    for (std::size_t n = 0; n + 1 < points.size(); ++n) {
      const double next_a = points[n + 1].a_n;
      CHECK(std::abs(next_a * points[n].cum_tau - points[n].cum_profit) <=
            1e-9 * std::max(1.0, std::abs(points[n].cum_profit)));
    }
    CHECK(*r.final_a * points.back().cum_tau == doctest::Approx(points.back().cum_profit).epsilon(1e-12));
    CHECK(points.front().n == 1);
  }
}

TEST_CASE("reversed game") {
  SUBCASE("seed-matched sums are identical") {
    for (auto leg : {BuyLeg::zero, BuyLeg::draw_from_rw}) {
      const auto cfg = fixed_config(0.27603, 200000, leg, 13);
      const auto direct = run_fixed(cfg);
      const auto reversed = run_reversed(cfg);
      CHECK(direct.total_profit == reversed.total_profit);
      CHECK(direct.total_duration == reversed.total_duration);
      CHECK(direct.sales == reversed.sales);
    }
  }
  SUBCASE("reversed fixed game reproduces rho at the fixed point") {
    const auto r = run_reversed(fixed_config(0.27603, 10000000, BuyLeg::zero, 17));
    CHECK(std::abs(r.empirical_intensity - 0.27603) <= 4.0 * r.std_error);
  }
  SUBCASE("reversed adaptive converges") {
    const auto r = run_reversed(adaptive_config(1.0, 1000000, 19));
    REQUIRE(r.final_a);
    CHECK(std::abs(*r.final_a - 0.27603) <= 0.01);
    CHECK(to_json(adaptive_config(1.0, 10, 19), r, true)["config"]["game"] == "reversed");
  }
}

TEST_CASE("serialization") {
  const auto cfg = adaptive_config(0.0, 300, 4);
  const auto r = run_adaptive(cfg);
  const auto j = to_json(cfg, r, false, std::string("traj.csv"));
  CHECK(j["config"]["policy"]["kind"] == "adaptive");
  CHECK(j["config"]["buy_leg"] == "draw");
  CHECK(j["config"]["generator"] == std::string(qmg::random::kGeneratorName));
  CHECK(j["trajectory_csv"] == "traj.csv");
  CHECK(j["empirical_intensity"].get<double>() == r.empirical_intensity);
  CHECK(j.contains("std_error"));

  std::ostringstream csv;
  write_trajectory_header(csv);
  write_trajectory_row(csv, TrajectoryPoint{1, 0.5, 0.25, 2.0});
  CHECK(csv.str() == "n,a_n,cum_profit,cum_tau\n1,0.5,0.25,2\n");
}
