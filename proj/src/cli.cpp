#include "qmg/cli.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "qmg/errors.hpp"
#include "qmg/market_sim.hpp"
#include "qmg/profit_intensity.hpp"
#include "qmg/projective.hpp"
#include "qmg/strategy.hpp"

#ifndef QMG_VERSION
#define QMG_VERSION "0.0.0"
#endif

namespace qmg::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Output file written through a sibling temporary and renamed on commit.
class AtomicFile {
public:
  explicit AtomicFile(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".tmp." + std::to_string(::getpid())), stream_(tmp_) {
    if (!stream_) throw IoError("cannot open " + path_ + " for writing");
    stream_.precision(17);
  }
  ~AtomicFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return stream_; }

  void commit() {
    stream_.close();
    if (!stream_) throw IoError("failed writing " + path_);
    std::error_code ec;
    std::filesystem::rename(tmp_, path_, ec);
    if (ec) throw IoError("cannot move output into place at " + path_ + ": " + ec.message());
    committed_ = true;
  }

private:
  std::string path_;
  std::string tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void print_json(std::ostream& out, const json& doc) { out << doc.dump() << '\n'; }

// --- rho-curve -------------------------------------------------------------

struct RhoCurveArgs {
  double m = 1.0;
  double a_min = -1.0;
  double a_max = 1.5;
  std::size_t steps = 2501;
  std::string out;
};

int cmd_rho_curve(const RhoCurveArgs& args, std::ostream& out) {
  const auto start = Clock::now();
  const intensity::RWQuoteModel model(args.m);
  const auto curve = intensity::rho_curve(model, args.a_min, args.a_max, args.steps);
  AtomicFile file(args.out);
  intensity::write_rho_csv(file.stream(), curve);
  file.commit();

  RunManifest manifest;
  manifest.command = "rho-curve";
  manifest.parameters = {{"m", args.m}, {"a_min", args.a_min}, {"a_max", args.a_max}, {"steps", args.steps}};
  manifest.version = version();
  manifest.outputs = {args.out};
  manifest.wall_clock_seconds = seconds_since(start);
  print_json(out, manifest.to_json());
  return kExitOk;
}

// --- fixed-point -----------------------------------------------------------

struct FixedPointArgs {
  double m = 1.0;
  double tol = intensity::kDefaultFixedPointTol;
  std::string method = "iteration";
};

int cmd_fixed_point(const FixedPointArgs& args, std::ostream& out) {
  intensity::FixedPointMethod method = intensity::FixedPointMethod::iteration;
  if (args.method == "bisection") {
    method = intensity::FixedPointMethod::bisection;
  } else if (args.method == "maximization") {
    method = intensity::FixedPointMethod::maximization;
  } else if (args.method != "iteration") {
    throw UsageError("unknown --method '" + args.method + "'");
  }
  const intensity::RWQuoteModel model(args.m);
  const auto result = intensity::fixed_point(model, args.tol, method);
  print_json(out, {{"m", args.m},
                   {"a_max", result.a_max},
                   {"rho", result.rho_at_max},
                   {"iterations", result.iterations},
                   {"method", std::string(intensity::to_string(result.method))}});
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  double m = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t cycles = 1000000;
  std::string policy = "adaptive:0";
  std::string buy_leg = "draw";
  std::string game = "direct";
  std::string out;
  std::string trajectory;
};

double parse_real(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(value)) {
    throw UsageError("cannot parse " + what + " from '" + text + "'");
  }
  return value;
}

sim::Policy parse_policy(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--policy must be fixed:<a> or adaptive:<a1>");
  const auto kind = text.substr(0, colon);
  const double level = parse_real(text.substr(colon + 1), "policy level");
  if (kind == "fixed") return sim::FixedPolicy{level};
  if (kind == "adaptive") return sim::AdaptivePolicy{level};
  throw UsageError("--policy kind must be 'fixed' or 'adaptive', got '" + kind + "'");
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const auto start = Clock::now();
  sim::GameConfig config;
  config.m = args.m;
  config.seed = args.seed;
  config.cycles = args.cycles;
  config.policy = parse_policy(args.policy);
  if (args.buy_leg == "draw") {
    config.buy_leg = sim::BuyLeg::draw_from_rw;
  } else if (args.buy_leg == "zero") {
    config.buy_leg = sim::BuyLeg::zero;
  } else {
    throw UsageError("--buy-leg must be 'draw' or 'zero'");
  }
  if (args.game != "direct" && args.game != "reversed") throw UsageError("--game must be 'direct' or 'reversed'");
  const bool reversed = args.game == "reversed";
  const bool adaptive = std::holds_alternative<sim::AdaptivePolicy>(config.policy);
  if (!args.trajectory.empty() && !adaptive) throw UsageError("--trajectory needs an adaptive policy");
  try {
    config.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  std::optional<AtomicFile> trajectory_file;
  sim::TrajectorySink sink;
  if (!args.trajectory.empty()) {
    trajectory_file.emplace(args.trajectory);
    sim::write_trajectory_header(trajectory_file->stream());
    sink = [&](const sim::TrajectoryPoint& p) { sim::write_trajectory_row(trajectory_file->stream(), p); };
  }

  const auto result = reversed ? sim::run_reversed(config, sink) : sim::run(config, sink);
  if (!std::isfinite(result.empirical_intensity)) throw NumericError("simulation produced a non-finite intensity");

  std::optional<std::string> trajectory_path;
  if (trajectory_file) {
    trajectory_file->commit();
    trajectory_path = args.trajectory;
  }
  json doc = sim::to_json(config, result, reversed, trajectory_path);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.parameters = {{"m", args.m},       {"cycles", args.cycles}, {"policy", args.policy},
                         {"buy_leg", args.buy_leg}, {"game", args.game}};
  manifest.seed = args.seed;
  manifest.version = version();
  if (!args.out.empty()) manifest.outputs.push_back(args.out);
  if (trajectory_path) manifest.outputs.push_back(*trajectory_path);

  if (!args.out.empty()) {
    AtomicFile file(args.out);
    file.stream() << doc.dump(2) << '\n';
    file.commit();
    manifest.wall_clock_seconds = seconds_since(start);
    print_json(out, manifest.to_json());
  } else {
    manifest.wall_clock_seconds = seconds_since(start);
    doc["manifest"] = manifest.to_json();
    print_json(out, doc);
  }
  return kExitOk;
}

// --- invariance ------------------------------------------------------------

struct InvarianceArgs {
  double p = 0.0;
  double q = 0.0;
  double upsilon = 1.0;
  double w = 1.0;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
};

int cmd_invariance(const InvarianceArgs& args, std::ostream& out) {
  using namespace projective;
  if (!(args.upsilon > 0.0) || !(args.w > 0.0)) throw UsageError("--upsilon and --w must be positive");
  if (args.trials < 1) throw UsageError("--trials must be >= 1");
  const double expected = args.p + args.q;
  // Degeneracies surface here as DegenerateError (exit 3).
  double max_dev = std::abs(cycle_log_cross_ratio(args.p, args.q, args.upsilon, args.w) - expected);
  const auto [u_q, u_p] = build_cycle_points(args.p, args.q, args.upsilon, args.w);

  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> log_unit(-3.0, 3.0);
  std::uniform_real_distribution<double> log_rep(-0.5, 0.5);
  for (std::size_t t = 0; t < args.trials; ++t) {
    const std::vector<double> units = {std::exp(log_unit(rng)), std::exp(log_unit(rng))};
    const double rep_q = std::exp(log_rep(rng));
    const double rep_p = std::exp(log_rep(rng));
    const auto scaled_q = rescale_units(rescale_units(u_q, units), std::vector<double>{rep_q, rep_q});
    const auto scaled_p = rescale_units(rescale_units(u_p, units), std::vector<double>{rep_p, rep_p});
    max_dev = std::max(max_dev, std::abs(log_cross_ratio(scaled_q, scaled_p) - expected));
  }
  const bool pass = max_dev < kProjectiveTol;
  print_json(out, {{"p", args.p},
                   {"q", args.q},
                   {"upsilon", args.upsilon},
                   {"w", args.w},
                   {"trials", args.trials},
                   {"seed", args.seed},
                   {"expected", expected},
                   {"max_deviation", max_dev},
                   {"tolerance", kProjectiveTol},
                   {"pass", pass}});
  return pass ? kExitOk : kExitNumeric;
}

// --- strategy --------------------------------------------------------------

struct StrategyArgs {
  double a = 0.0;
  double width = 1.0;
  double hbar = strategy::kDefaultHbar;
  double risk_m = 1.0;
  std::string kind;
  std::string out;
  std::size_t points = 401;
};

int cmd_strategy(const StrategyArgs& args, std::ostream& out) {
  using namespace strategy;
  const auto start = Clock::now();
  if (args.kind != "density" && args.kind != "supply" && args.kind != "dual" && args.kind != "risk") {
    throw UsageError("--kind must be one of density, supply, dual, risk");
  }
  std::optional<GaussianStrategy> s;
  try {
    s.emplace(args.a, args.width);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (!(args.hbar > 0.0)) throw UsageError("--hbar must be positive");

  if (args.kind == "risk") {
    if (!(args.risk_m > 0.0)) throw UsageError("--risk-m must be positive");
    print_json(out, {{"risk", risk_expectation(*s, args.risk_m, args.hbar)}});
    return kExitOk;
  }
  if (args.out.empty()) throw UsageError("--out is required for kind " + args.kind);

  std::vector<CurveSample> curve;
  const double half = 6.0 * std::sqrt(args.width);
  if (args.kind == "density") {
    curve = sample_density(*s, args.a - half, args.a + half, args.points);
  } else if (args.kind == "supply") {
    curve = sample_supply_curve(*s, args.a - half, args.a + half, args.points);
  } else {
    curve = dual_modulus(fourier_dual(GridWavefunction::sample(*s, args.hbar)));
  }
  AtomicFile file(args.out);
  file.stream() << "x,value\n";
  for (const auto& c : curve) file.stream() << c.x << ',' << c.value << '\n';
  file.commit();

  RunManifest manifest;
  manifest.command = "strategy";
  manifest.parameters = {{"a", args.a},     {"width", args.width}, {"hbar", args.hbar},
                         {"kind", args.kind}, {"points", args.points}};
  manifest.version = version();
  manifest.outputs = {args.out};
  manifest.wall_clock_seconds = seconds_since(start);
  print_json(out, manifest.to_json());
  return kExitOk;
}

}  // namespace

json RunManifest::to_json() const {
  return {{"command", command},
          {"parameters", parameters},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"version", version},
          {"outputs", outputs},
          {"wall_clock_seconds", wall_clock_seconds}};
}

std::string version() { return QMG_VERSION; }

void write_file_atomic(const std::string& path, const std::string& contents) {
  AtomicFile file(path);
  file.stream() << contents;
  file.commit();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum market game laboratory: profit intensity, fixed point, strategies, simulation",
               args.empty() ? "qmg" : args.front()};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  RhoCurveArgs rho_args;
  auto* rho_cmd = app.add_subcommand("rho-curve", "Sample rho(a) to a CSV with header a,rho");
  rho_cmd->add_option("--m", rho_args.m, "RW inverse variance")->capture_default_str();
  rho_cmd->add_option("--a-min", rho_args.a_min, "First withdrawal level")->capture_default_str();
  rho_cmd->add_option("--a-max", rho_args.a_max, "Last withdrawal level")->capture_default_str();
  rho_cmd->add_option("--steps", rho_args.steps, "Number of samples (>= 2)")->capture_default_str();
  rho_cmd->add_option("--out", rho_args.out, "Output CSV path")->required();

  FixedPointArgs fp_args;
  auto* fp_cmd = app.add_subcommand("fixed-point", "Solve rho(a) = a and print JSON");
  fp_cmd->add_option("--m", fp_args.m, "RW inverse variance")->capture_default_str();
  fp_cmd->add_option("--tol", fp_args.tol, "Tolerance on |rho(a) - a| (>= 1e-14)")->capture_default_str();
  fp_cmd->add_option("--method", fp_args.method, "iteration | bisection | maximization")->capture_default_str();

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of the buying-selling game");
  sim_cmd->add_option("--m", sim_args.m, "RW inverse variance")->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->required();
  sim_cmd->add_option("--cycles", sim_args.cycles, "Number of cycles (>= 1)")->capture_default_str();
  sim_cmd->add_option("--policy", sim_args.policy, "fixed:<a> or adaptive:<a1>")->capture_default_str();
  sim_cmd->add_option("--buy-leg", sim_args.buy_leg, "draw | zero")->capture_default_str();
  sim_cmd->add_option("--game", sim_args.game, "direct | reversed")->capture_default_str();
  sim_cmd->add_option("--out", sim_args.out, "Write the result JSON here instead of standard output");
  sim_cmd->add_option("--trajectory", sim_args.trajectory, "Adaptive trajectory CSV path");

  InvarianceArgs inv_args;
  auto* inv_cmd = app.add_subcommand("invariance", "Check ln cross ratio = p + q under unit changes");
  inv_cmd->add_option("--p", inv_args.p, "Demand profit")->required();
  inv_cmd->add_option("--q", inv_args.q, "Supply profit")->required();
  inv_cmd->add_option("--upsilon", inv_args.upsilon, "Scale of U_q")->required();
  inv_cmd->add_option("--w", inv_args.w, "Scale of U_p")->required();
  inv_cmd->add_option("--trials", inv_args.trials, "Random rescalings")->capture_default_str();
  inv_cmd->add_option("--seed", inv_args.seed, "Random seed for the rescalings")->capture_default_str();

  StrategyArgs st_args;
  auto* st_cmd = app.add_subcommand("strategy", "Export Gaussian strategy curves as x,value CSV");
  st_cmd->add_option("--a", st_args.a, "Mean log-profit")->capture_default_str();
  st_cmd->add_option("--width", st_args.width, "Variance of the decision density")->capture_default_str();
  st_cmd->add_option("--hbar", st_args.hbar, "Economic constant hbar_E")->capture_default_str();
  st_cmd->add_option("--risk-m", st_args.risk_m, "Risk asymmetry for kind=risk")->capture_default_str();
  st_cmd->add_option("--kind", st_args.kind, "density | supply | dual | risk")->required();
  st_cmd->add_option("--out", st_args.out, "Output CSV path");
  st_cmd->add_option("--points", st_args.points, "Samples for density/supply")->capture_default_str();

  std::vector<std::string> reversed_args(args.rbegin(), args.rend());
  if (!reversed_args.empty()) reversed_args.pop_back();
  try {
    app.parse(reversed_args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (rho_cmd->parsed()) return cmd_rho_curve(rho_args, out);
    if (fp_cmd->parsed()) return cmd_fixed_point(fp_args, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args, out);
    if (inv_cmd->parsed()) return cmd_invariance(inv_args, out);
    if (st_cmd->parsed()) return cmd_strategy(st_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateError& e) {
    err << "degenerate input: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ContractViolation& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace qmg::cli
