#include "qmg/market_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include "qmg/errors.hpp"

namespace qmg::sim {

namespace {

// Ratio-estimator batch means over `count` consecutive cycles split into
// min(kBatches, count) equal batches (the last absorbs the remainder).
class RatioBatchMeans {
public:
  explicit RatioBatchMeans(std::uint64_t count)
      : batches_(static_cast<std::size_t>(std::min<std::uint64_t>(kBatches, std::max<std::uint64_t>(count, 1)))),
        batch_size_(std::max<std::uint64_t>(count / batches_, 1)),
        profit_(batches_, 0.0),
        duration_(batches_, 0.0) {}

  void add(double profit, double duration) {
    const auto b = static_cast<std::size_t>(std::min<std::uint64_t>(seen_ / batch_size_, batches_ - 1));
    profit_[b] += profit;
    duration_[b] += duration;
    ++seen_;
  }

  double std_error() const {
    if (batches_ < 2) return std::numeric_limits<double>::quiet_NaN();
    double total_p = 0.0, total_t = 0.0;
    for (std::size_t b = 0; b < batches_; ++b) {
      total_p += profit_[b];
      total_t += duration_[b];
    }
    const double ratio = total_p / total_t;
    double ss = 0.0;
    for (std::size_t b = 0; b < batches_; ++b) {
      const double d = profit_[b] - ratio * duration_[b];
      ss += d * d;
    }
    const auto nb = static_cast<double>(batches_);
    const double mean_t = total_t / nb;
    return std::sqrt(ss / (nb * (nb - 1.0))) / mean_t;
  }

private:
  std::size_t batches_;
  std::uint64_t batch_size_;
  std::vector<double> profit_;
  std::vector<double> duration_;
  std::uint64_t seen_ = 0;
};

// Rational buy leg against quote buy_quote (Alice's log-profit -buy_quote,
// taken iff it exceeds a), unconditional sell leg with log-profit
// -sell_quote.
CycleOutcome play_reversed_cycle(double a, double sell_quote, double buy_quote) {
  CycleOutcome out = play_cycle(a, -sell_quote, -buy_quote);
  out.q_sell = sell_quote;
  out.p_buy = buy_quote;
  return out;
}

SimResult simulate(const GameConfig& config, bool reversed, const TrajectorySink& sink) {
  config.validate();
  const bool adaptive = std::holds_alternative<AdaptivePolicy>(config.policy);
  double a = adaptive ? std::get<AdaptivePolicy>(config.policy).a1 : std::get<FixedPolicy>(config.policy).a;

  random::CounterStream rational_leg(config.seed, kSellStream);
  random::CounterStream other_leg(config.seed, kBuyStream);

  const std::uint64_t tail_start = adaptive ? config.cycles / 2 : 0;
  RatioBatchMeans batches(config.cycles - tail_start);

  SimResult result;
  if (adaptive) result.trajectory.reserve(static_cast<std::size_t>(config.cycles));
  double cum_profit = 0.0;
  double cum_tau = 0.0;
  for (std::uint64_t n = 0; n < config.cycles; ++n) {
    const double quote = draw_quote(rational_leg, config.m);
    const double other = config.buy_leg == BuyLeg::zero ? 0.0 : draw_quote(other_leg, config.m);
    const CycleOutcome c = reversed ? play_reversed_cycle(a, -other, -quote) : play_cycle(a, other, quote);

    cum_profit += c.profit;
    cum_tau += c.duration;
    result.sales += c.sold ? 1 : 0;
    if (n >= tail_start) batches.add(c.profit, c.duration);
    if (adaptive) {
      result.trajectory.push_back(a);
      if (sink) sink(TrajectoryPoint{n + 1, a, cum_profit, cum_tau});
      a = cum_profit / cum_tau;
    }
  }

  result.cycles_run = config.cycles;
  result.total_profit = cum_profit;
  result.total_duration = cum_tau;
  result.empirical_intensity = cum_profit / cum_tau;
  result.std_error = batches.std_error();
  if (adaptive) result.final_a = a;
  return result;
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

void GameConfig::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("GameConfig: m must be positive and finite");
  if (cycles < 1) throw DomainError("GameConfig: cycles must be >= 1");
  const double level = std::visit(
      [](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, FixedPolicy>) {
          return p.a;
        } else {
          return p.a1;
        }
      },
      policy);
  if (!std::isfinite(level)) throw DomainError("GameConfig: policy level must be finite");
}

CycleOutcome play_cycle(double a, double p_buy, double q_sell) {
  CycleOutcome out;
  out.q_sell = q_sell;
  out.p_buy = p_buy;
  out.sold = q_sell > a;
  out.profit = out.sold ? p_buy + q_sell : p_buy;
  out.duration = out.sold ? 2 : 1;
  return out;
}

double draw_quote(random::CounterStream& stream, double m) { return stream.next_standard_normal() / std::sqrt(m); }

SimResult run_fixed(const GameConfig& config) {
  if (!std::holds_alternative<FixedPolicy>(config.policy)) throw DomainError("run_fixed: policy is not fixed");
  return simulate(config, false, {});
}

SimResult run_adaptive(const GameConfig& config, const TrajectorySink& sink) {
  if (!std::holds_alternative<AdaptivePolicy>(config.policy)) {
    throw DomainError("run_adaptive: policy is not adaptive");
  }
  return simulate(config, false, sink);
}

SimResult run_reversed(const GameConfig& config, const TrajectorySink& sink) { return simulate(config, true, sink); }

SimResult run(const GameConfig& config, const TrajectorySink& sink) { return simulate(config, false, sink); }

nlohmann::json to_json(const GameConfig& config, bool reversed) {
  nlohmann::json policy;
  if (const auto* fixed = std::get_if<FixedPolicy>(&config.policy)) {
    policy = {{"kind", "fixed"}, {"a", fixed->a}};
  } else {
    policy = {{"kind", "adaptive"}, {"a1", std::get<AdaptivePolicy>(config.policy).a1}};
  }
  return {{"m", config.m},
          {"seed", config.seed},
          {"cycles", config.cycles},
          {"policy", policy},
          {"buy_leg", config.buy_leg == BuyLeg::zero ? "zero" : "draw"},
          {"game", reversed ? "reversed" : "direct"},
          {"generator", std::string(random::kGeneratorName)}};
}

nlohmann::json to_json(const GameConfig& config, const SimResult& result, bool reversed,
                       const std::optional<std::string>& trajectory_csv) {
  nlohmann::json out;
  out["config"] = to_json(config, reversed);
  out["empirical_intensity"] = finite_or_null(result.empirical_intensity);
  out["std_error"] = finite_or_null(result.std_error);
  out["cycles_run"] = result.cycles_run;
  out["total_profit"] = result.total_profit;
  out["total_duration"] = result.total_duration;
  out["sales"] = result.sales;
  out["final_a"] = result.final_a ? finite_or_null(*result.final_a) : nlohmann::json(nullptr);
  out["trajectory_csv"] = trajectory_csv ? nlohmann::json(*trajectory_csv) : nlohmann::json(nullptr);
  return out;
}

void write_trajectory_header(std::ostream& out) {
  out.precision(17);
  out << "n,a_n,cum_profit,cum_tau\n";
}

void write_trajectory_row(std::ostream& out, const TrajectoryPoint& point) {
  out << point.n << ',' << point.a_n << ',' << point.cum_profit << ',' << point.cum_tau << '\n';
}

}  // namespace qmg::sim
