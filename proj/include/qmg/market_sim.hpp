#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qmg/random.hpp"

namespace qmg::sim {

// Alice holds withdrawal level a for every cycle.
struct FixedPolicy {
  double a = 0.0;
};

// Alice starts at a1 and moves to the running profit intensity
//   a_{n+1} = sum_k (p + q)_k / sum_k tau_k
// after each cycle.
struct AdaptivePolicy {
  double a1 = 0.0;
};

using Policy = std::variant<FixedPolicy, AdaptivePolicy>;

// Log-profit of the unconditional leg: a fresh RW draw (mean zero), or
// exactly zero for variance-reduced checks of rho.
enum class BuyLeg { draw_from_rw, zero };

struct GameConfig {
  double m = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t cycles = 1;
  Policy policy = FixedPolicy{};
  BuyLeg buy_leg = BuyLeg::draw_from_rw;

  // Throws DomainError unless m > 0 is finite, cycles >= 1 and the policy
  // level is finite.
  void validate() const;
};

struct CycleOutcome {
  double q_sell = 0.0;
  double p_buy = 0.0;
  bool sold = false;
  double profit = 0.0;
  int duration = 1;
};

// One cycle at withdrawal level a: the buy leg always executes (1 time
// unit, profit p_buy); the sale happens iff q_sell > a (1 more unit, profit
// q_sell). A tie gives up.
CycleOutcome play_cycle(double a, double p_buy, double q_sell);

// Number of equal batches behind std_error.
inline constexpr std::size_t kBatches = 100;

struct SimResult {
  double empirical_intensity = 0.0;  // sum profit / sum duration
  // Batch-means standard error of the ratio estimator; NaN with fewer than
  // two batches.
  double std_error = 0.0;
  std::uint64_t cycles_run = 0;
  double total_profit = 0.0;
  double total_duration = 0.0;
  std::uint64_t sales = 0;
  // Adaptive runs: a_n used in cycle n, n = 1..cycles_run.
  std::vector<double> trajectory;
  // Adaptive runs: the level a_{n+1} after the last cycle.
  std::optional<double> final_a;
};

struct TrajectoryPoint {
  std::uint64_t n = 0;
  double a_n = 0.0;
  double cum_profit = 0.0;
  double cum_tau = 0.0;
};

using TrajectorySink = std::function<void(const TrajectoryPoint&)>;

// Quote log-profit q ~ Normal(0, 1/m); the offered price is e^{-q}.
double draw_quote(random::CounterStream& stream, double m);

// Stream identifiers derived from the run seed.
inline constexpr std::uint64_t kSellStream = 1;
inline constexpr std::uint64_t kBuyStream = 2;

// Fixed-policy run. Throws DomainError for an adaptive config.
SimResult run_fixed(const GameConfig& config);

// Adaptive run; std_error covers the tail half of the run. `sink`, when
// set, receives one point per cycle. Throws DomainError for a fixed config.
SimResult run_adaptive(const GameConfig& config, const TrajectorySink& sink = {});

// Buying and selling roles swapped: the sell leg is unconditional and the
// buy leg is rational with withdrawal level a. Quotes are the negated
// (antithetic) draws of the direct game under the same seed, so the sums
// coincide with run_fixed / run_adaptive draw for draw.
SimResult run_reversed(const GameConfig& config, const TrajectorySink& sink = {});

// Dispatches on the policy.
SimResult run(const GameConfig& config, const TrajectorySink& sink = {});

nlohmann::json to_json(const GameConfig& config, bool reversed = false);
// {"config":{...},"empirical_intensity":..,"std_error":..,"cycles_run":..,
//  "trajectory_csv":<path or null>, ...}
nlohmann::json to_json(const GameConfig& config, const SimResult& result, bool reversed = false,
                       const std::optional<std::string>& trajectory_csv = std::nullopt);

// CSV `n,a_n,cum_profit,cum_tau`.
void write_trajectory_header(std::ostream& out);
void write_trajectory_row(std::ostream& out, const TrajectoryPoint& point);

}  // namespace qmg::sim
