#include "qmg/projective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmg/errors.hpp"

namespace qmg::projective {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be a positive finite amount");
  }
}

double safe_inverse_denominator(double numerator, double denominator, const char* what) {
  if (denominator == 0.0 || !std::isfinite(numerator / denominator)) {
    throw DegenerateError(std::string(what) + " is undefined: the line is parallel to the hypersurface");
  }
  return numerator / denominator;
}

}  // namespace

PortfolioPoint::PortfolioPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DomainError("PortfolioPoint needs at least one coordinate");
  bool any_nonzero = false;
  for (double c : coords_) {
    if (!std::isfinite(c)) throw DomainError("PortfolioPoint coordinates must be finite");
    any_nonzero = any_nonzero || c != 0.0;
  }
  if (!any_nonzero) throw DomainError("PortfolioPoint must have a nonzero coordinate");
}

std::vector<double> PortfolioPoint::normalized() const {
  const auto pivot = *std::max_element(coords_.begin(), coords_.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::vector<double> out(coords_.size());
  std::transform(coords_.begin(), coords_.end(), out.begin(), [pivot](double c) { return c / pivot; });
  return out;
}

bool operator==(const PortfolioPoint& lhs, const PortfolioPoint& rhs) {
  if (lhs.size() != rhs.size()) return false;
  const auto a = lhs.normalized();
  const auto b = rhs.normalized();
  // Pivots may differ in position when two coordinates tie in magnitude, so
  // compare the normalized vectors up to sign as well.
  auto close = [&](double sign) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - sign * b[i]) > kProjectiveTol) return false;
    }
    return true;
  };
  return close(1.0) || close(-1.0);
}

double demand_profit(double money_amount, double asset_amount) {
  require_positive(money_amount, "money amount");
  require_positive(asset_amount, "asset amount");
  return std::log(money_amount) - std::log(asset_amount);
}

double supply_profit(double asset_amount, double money_amount) {
  require_positive(asset_amount, "asset amount");
  require_positive(money_amount, "money amount");
  return std::log(asset_amount) - std::log(money_amount);
}

std::pair<PortfolioPoint, PortfolioPoint> build_cycle_points(double p, double q, double upsilon,
                                                             double w, std::size_t extra) {
  require_positive(upsilon, "upsilon");
  require_positive(w, "w");
  std::vector<double> u_q(2 + extra, 0.0);
  std::vector<double> u_p(2 + extra, 0.0);
  u_q[kAsset] = upsilon * std::exp(q);
  u_q[kMoney] = upsilon;
  u_p[kAsset] = w;
  u_p[kMoney] = w * std::exp(p);
  return {PortfolioPoint(std::move(u_q)), PortfolioPoint(std::move(u_p))};
}

PortfolioPoint line_point(const PortfolioPoint& u_q, const PortfolioPoint& u_p, double lambda) {
  if (u_q.size() != u_p.size()) throw DomainError("line_point: points differ in dimension");
  if (u_q == u_p) throw DegenerateError("line_point: points are projectively equal, no unique line");
  std::vector<double> out(u_q.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = lambda * u_q[i] + (1.0 - lambda) * u_p[i];
  }
  return PortfolioPoint(std::move(out));
}

IntersectionLambdas intersection_lambdas(double p, double q, double upsilon, double w) {
  require_positive(upsilon, "upsilon");
  require_positive(w, "w");
  IntersectionLambdas out;
  out.money = safe_inverse_denominator(w, w - upsilon, "lambda_money");
  out.asset = safe_inverse_denominator(w, w - upsilon * std::exp(-(p + q)), "lambda_asset");
  return out;
}

IntersectionLambdas intersection_lambdas(const PortfolioPoint& u_q, const PortfolioPoint& u_p) {
  if (u_q.size() != u_p.size() || u_q.size() < 2) {
    throw DomainError("intersection_lambdas: points need matching dimension >= 2");
  }
  if (u_q == u_p) throw DegenerateError("intersection_lambdas: points are projectively equal");
  // u_i(lambda) = lambda * U_q[i] + (1 - lambda) * U_p[i] = 0
  IntersectionLambdas out;
  out.money = safe_inverse_denominator(u_p[kAsset], u_p[kAsset] - u_q[kAsset], "lambda_money");
  out.asset = safe_inverse_denominator(u_p[kMoney], u_p[kMoney] - u_q[kMoney], "lambda_asset");
  return out;
}

double cross_ratio(LineParam a, LineParam b, LineParam c, LineParam d) {
  if (a.is_infinite() + b.is_infinite() + c.is_infinite() + d.is_infinite() > 1) {
    throw DegenerateError("cross_ratio: more than one point at infinity");
  }
  auto same = [](LineParam x, LineParam y) {
    return !x.is_infinite() && !y.is_infinite() && x.value() == y.value();
  };
  // B = C leaves no frame; the other pairs zero a denominator. A = D and
  // A = C are allowed (ratio 1 and 0).
  if (same(b, c)) throw DegenerateError("cross_ratio: coincident reference points");
  if (same(b, a) || same(c, d) || same(b, d)) throw DegenerateError("cross_ratio: coincident points");
  // ((C - A)(B - D)) / ((B - A)(C - D)); an infinite point cancels its two
  // factors.
  const double av = a.value(), bv = b.value(), cv = c.value(), dv = d.value();
  if (a.is_infinite()) return (bv - dv) / (cv - dv);
  if (b.is_infinite()) return (cv - av) / (cv - dv);
  if (c.is_infinite()) return (bv - dv) / (bv - av);
  if (d.is_infinite()) return (cv - av) / (bv - av);
  return ((cv - av) / (bv - av)) / ((cv - dv) / (bv - dv));
}

namespace {

// Cross ratio of (Theta, U_q, U_p, $) in the coordinate mu = lambda / (1 - lambda),
// which sends U_q (lambda = 1) to infinity and U_p (lambda = 0) to zero.
// A parameter lambda = y / (y - x) becomes mu = -y / x, a single quotient, so
// intersections close to U_q cost no precision.
double cycle_ratio(double x_money, double y_money, double x_asset, double y_asset) {
  if (x_money == 0.0 || x_asset == 0.0) throw DegenerateError("cross_ratio: intersection coincides with U_q");
  const double mu_theta = -y_money / x_money;
  const double mu_money = -y_asset / x_asset;
  return cross_ratio(mu_theta, LineParam::infinity(), 0.0, mu_money);
}

}  // namespace

double cycle_log_cross_ratio(double p, double q, double upsilon, double w) {
  // Propagates the degeneracies of the closed-form parameters.
  (void)intersection_lambdas(p, q, upsilon, w);
  // The representatives behind the closed form: U_q ~ (v, v e^{-(p+q)}), U_p ~ (w, w).
  return std::log(cycle_ratio(upsilon * std::exp(-(p + q)), w, upsilon, w));
}

double log_cross_ratio(const PortfolioPoint& u_q, const PortfolioPoint& u_p) {
  (void)intersection_lambdas(u_q, u_p);
  const double ratio = cycle_ratio(u_q[kMoney], u_p[kMoney], u_q[kAsset], u_p[kAsset]);
  if (!(ratio > 0.0)) throw DegenerateError("log_cross_ratio: non-positive cross ratio");
  return std::log(ratio);
}

PortfolioPoint rescale_units(const PortfolioPoint& point, std::span<const double> scales) {
  if (scales.size() != point.size()) {
    throw DomainError("rescale_units: one scale per coordinate required");
  }
  std::vector<double> out(point.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i])) {
      throw DomainError("rescale_units: scales must be positive and finite");
    }
    out[i] = point[i] * scales[i];
  }
  return PortfolioPoint(std::move(out));
}

}  // namespace qmg::projective
