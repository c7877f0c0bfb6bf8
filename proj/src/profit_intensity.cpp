#include "qmg/profit_intensity.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "qmg/errors.hpp"

namespace qmg::intensity {

namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// 2 - Phi(z) = 1 + Q(z), with the upper tail Q from erfc.
double one_plus_upper_tail(double z) { return 1.0 + 0.5 * std::erfc(z / std::numbers::sqrt2); }

void require_tol(double tol, double floor, const char* what) {
  if (!(tol >= floor) || !std::isfinite(tol)) {
    throw DomainError(std::string(what) + ": tolerance must be finite and >= " + std::to_string(floor));
  }
}

}  // namespace

RWQuoteModel::RWQuoteModel(double m) : m_(m) {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("RWQuoteModel: m must be positive and finite");
}

double RWQuoteModel::dispersion() const { return 1.0 / std::sqrt(m_); }

double RWQuoteModel::density(double q) const {
  return std::sqrt(m_) * kInvSqrt2Pi * std::exp(-0.5 * m_ * q * q);
}

std::string_view to_string(FixedPointMethod method) {
  switch (method) {
    case FixedPointMethod::iteration:
      return "iteration";
    case FixedPointMethod::bisection:
      return "bisection";
    case FixedPointMethod::maximization:
      return "maximization";
  }
  return "unknown";
}

double rho(double a, const RWQuoteModel& model) {
  const double root_m = std::sqrt(model.m());
  const double z = a * root_m;
  return std_normal_pdf(z) / (root_m * one_plus_upper_tail(z));
}

double rho_quadrature(double a, const RWQuoteModel& model) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double cut = kTailSigmas * model.dispersion();
  const double lo = std::max(a, -cut);
  if (lo >= cut) return 0.0;

  constexpr unsigned kMaxDepth = 20;
  constexpr double kRelTol = 1e-14;
  constexpr double kAbsErrLimit = 1e-11;
  double err_num = 0.0, err_mass = 0.0;
  const double numerator = Integrator::integrate([&](double q) { return q * model.density(q); }, lo, cut,
                                                 kMaxDepth, kRelTol, &err_num);
  const double mass = Integrator::integrate([&](double q) { return model.density(q); }, lo, cut, kMaxDepth,
                                            kRelTol, &err_mass);
  if (!(err_num <= kAbsErrLimit) || !(err_mass <= kAbsErrLimit)) {
    std::ostringstream msg;
    msg << "rho_quadrature: no convergence at a=" << a << " m=" << model.m() << " (numerator error "
        << err_num << ", mass error " << err_mass << ")";
    throw NumericError(msg.str());
  }
  return numerator / (1.0 + mass);
}

namespace {

FixedPointResult bisect_fixed_point(const RWQuoteModel& model, double tol, std::size_t prior_iterations) {
  double lo = 0.0;                   // a - rho(a) < 0
  double hi = model.dispersion();    // a - rho(a) > 0
  for (std::size_t k = 1; k <= kMaxIterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double r = rho(mid, model);
    if (std::abs(r - mid) <= tol) {
      return {mid, r, prior_iterations + k, FixedPointMethod::bisection};
    }
    if (mid - r < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  throw NumericError("fixed_point: bisection did not reach tolerance " + std::to_string(tol));
}

}  // namespace

FixedPointResult fixed_point(const RWQuoteModel& model, double tol, FixedPointMethod method) {
  require_tol(tol, 1e-14, "fixed_point");
  if (method == FixedPointMethod::bisection) return bisect_fixed_point(model, tol, 0);
  if (method == FixedPointMethod::maximization) {
    const double a = maximize_rho(model, std::max(tol, 1e-12));
    return {a, rho(a, model), 0, FixedPointMethod::maximization};
  }

  // The fixed point is superattracting (rho' vanishes there), so plain
  // iteration from 0 converges quadratically; bisection covers the rest.
  const double upper = model.dispersion();
  double a = 0.0;
  for (std::size_t k = 1; k <= kMaxIterations; ++k) {
    const double r = rho(a, model);
    if (std::abs(r - a) <= tol) return {a, r, k, FixedPointMethod::iteration};
    if (!std::isfinite(r) || r <= 0.0 || r > upper || k > 100) {
      return bisect_fixed_point(model, tol, k);
    }
    a = r;
  }
  throw NumericError("fixed_point: iteration cap exceeded");
}

double maximize_rho(const RWQuoteModel& model, double tol) {
  require_tol(tol, 1e-12, "maximize_rho");
  const double sd = model.dispersion();
  auto f = [&](double a) { return rho(a, model); };

  // Coarse scan over +-6 sd.
  constexpr int kScan = 240;
  const double scan_lo = -6.0 * sd;
  const double scan_step = 12.0 * sd / kScan;
  int best = 0;
  double best_value = f(scan_lo);
  for (int i = 1; i <= kScan; ++i) {
    const double v = f(scan_lo + i * scan_step);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == 0 || best == kScan) throw NumericError("maximize_rho: no interior maximum in the scan range");
  double lo = scan_lo + (best - 1) * scan_step;
  double hi = scan_lo + (best + 1) * scan_step;

  // Golden section.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > std::max(tol, 1e-4 * sd)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  double x = 0.5 * (lo + hi);

  // A peak is flat to second order, so comparisons alone stall near
  // sqrt(eps). Vertices of symmetric three-point parabolas with shrinking
  // spacing recover the remaining digits.
  for (double h : {1e-3 * sd, 1e-4 * sd, 1e-5 * sd}) {
    for (int pass = 0; pass < 2; ++pass) {
      const double fm = f(x - h), f0 = f(x), fp = f(x + h);
      const double curvature = fp - 2.0 * f0 + fm;
      if (!(curvature < 0.0)) break;
      const double step = -0.5 * h * (fp - fm) / curvature;
      if (std::abs(step) > h) break;
      x += step;
      if (std::abs(step) <= tol) break;
    }
  }
  return x;
}

std::vector<double> iterate_map(double a0, const RWQuoteModel& model, std::size_t steps) {
  if (steps < 1) throw DomainError("iterate_map: steps must be >= 1");
  std::vector<double> orbit;
  orbit.reserve(steps + 1);
  orbit.push_back(a0);
  for (std::size_t k = 0; k < steps; ++k) orbit.push_back(rho(orbit.back(), model));
  return orbit;
}

std::vector<RhoSample> rho_curve(const RWQuoteModel& model, double a_lo, double a_hi, std::size_t steps) {
  if (steps < 2) throw DomainError("rho_curve: steps must be >= 2");
  if (!(a_lo < a_hi) || !std::isfinite(a_lo) || !std::isfinite(a_hi)) {
    throw DomainError("rho_curve: need finite a_min < a_max");
  }
  std::vector<RhoSample> out(steps);
  const double step = (a_hi - a_lo) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const double a = i + 1 == steps ? a_hi : a_lo + static_cast<double>(i) * step;
    out[i] = {a, rho(a, model)};
  }
  return out;
}

void write_rho_csv(std::ostream& out, const std::vector<RhoSample>& curve) {
  out << "a,rho\n";
  out.precision(17);
  for (const auto& s : curve) out << s.a << ',' << s.rho << '\n';
}

double round5(double x) { return std::round(x * 1e5) / 1e5; }

}  // namespace qmg::intensity
