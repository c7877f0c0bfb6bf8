#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace qmg::projective {

// Coordinate slots of a two-good market. Coordinate 0 carries the asset,
// coordinate 1 the money; further coordinates are other goods.
inline constexpr std::size_t kAsset = 0;
inline constexpr std::size_t kMoney = 1;

// Relative tolerance for projective identity checks.
inline constexpr double kProjectiveTol = 1e-12;

// A portfolio up to non-zero rescaling: an element of RP^N stored as an
// unnormalized representative with N+1 homogeneous coordinates.
class PortfolioPoint {
public:
  // Throws DomainError when empty or when every coordinate is zero.
  explicit PortfolioPoint(std::vector<double> coords);

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

  // Representative scaled so that the largest-magnitude coordinate is +1.
  std::vector<double> normalized() const;

  // Same projective point: normalized representatives agree to kProjectiveTol.
  // Points of different dimension are never equal.
  friend bool operator==(const PortfolioPoint& lhs, const PortfolioPoint& rhs);

private:
  std::vector<double> coords_;
};

struct ProfitPair {
  double p = 0.0;  // demand (selling) log-profit
  double q = 0.0;  // supply (buying) log-profit
};

// ln(money) - ln(asset). Throws DomainError on non-positive amounts.
double demand_profit(double money_amount, double asset_amount);

// ln(asset) - ln(money). Throws DomainError on non-positive amounts.
double supply_profit(double asset_amount, double money_amount);

// The two portfolio points spanned by one buying-selling cycle:
//   U_q = (v e^q, v, 0...),  U_p = (w, w e^p, 0...)
// `extra` appends that many zero coordinates for other goods.
std::pair<PortfolioPoint, PortfolioPoint> build_cycle_points(double p, double q, double upsilon,
                                                             double w, std::size_t extra = 0);

// lambda * U_q + (1 - lambda) * U_p. Throws DegenerateError when U_q and U_p
// are the same projective point (no line through them).
PortfolioPoint line_point(const PortfolioPoint& u_q, const PortfolioPoint& u_p, double lambda);

// Line parameters at which the line U_q U_p meets the single-good
// hypersurfaces: `money` is where the asset coordinate vanishes (the pure
// money portfolio), `asset` where the money coordinate vanishes.
struct IntersectionLambdas {
  double money = 0.0;
  double asset = 0.0;
};

// Closed form for the canonical cycle representatives
//   money = w / (w - v),  asset = w / (w - v e^{-(p+q)}).
// Throws DegenerateError when either denominator vanishes.
IntersectionLambdas intersection_lambdas(double p, double q, double upsilon, double w);

// Same parameters solved from arbitrary representatives of U_q and U_p.
// Throws DegenerateError when the line is parallel to a hypersurface or the
// points coincide.
IntersectionLambdas intersection_lambdas(const PortfolioPoint& u_q, const PortfolioPoint& u_p);

// A line parameter, possibly the point at infinity.
class LineParam {
public:
  constexpr LineParam(double value) : value_(value), infinite_(false) {}  // NOLINT
  static constexpr LineParam infinity() { return LineParam(); }

  constexpr bool is_infinite() const { return infinite_; }
  // Finite value; meaningless when is_infinite().
  constexpr double value() const { return value_; }

private:
  constexpr LineParam() : value_(0.0), infinite_(true) {}
  double value_;
  bool infinite_;
};

// Anharmonic ratio [A, B, C, D] = (AC/AB) : (DC/DB) of four collinear points
// given by their line parameters. At most one may be infinite. Throws
// DegenerateError when B = C or a denominator vanishes (A = B, C = D, B = D).
double cross_ratio(LineParam a, LineParam b, LineParam c, LineParam d);

// ln [Theta, U_q, U_p, $] for the cycle; equals p + q. Degeneracies are
// those of the closed-form intersection parameters.
double cycle_log_cross_ratio(double p, double q, double upsilon, double w);

// ln [Theta, U_q, U_p, $] computed from explicit point representatives:
// U_q and U_p sit at parameters 1 and 0.
double log_cross_ratio(const PortfolioPoint& u_q, const PortfolioPoint& u_p);

// Change of measurement units: coordinate i is multiplied by scales[i].
// Throws DomainError on a non-positive scale or length mismatch.
PortfolioPoint rescale_units(const PortfolioPoint& point, std::span<const double> scales);

}  // namespace qmg::projective
