#pragma once

#include <cstddef>
#include <ostream>
#include <string_view>
#include <vector>

namespace qmg::intensity {

// Rest-of-World quote model: the offered log-profit q is Normal(0, 1/m),
//   f(q) = sqrt(m / 2 pi) exp(-m q^2 / 2),
// and the proposed price is e^{-q}.
class RWQuoteModel {
public:
  // Throws DomainError unless m is positive and finite.
  explicit RWQuoteModel(double m);

  double m() const { return m_; }
  // Standard deviation 1/sqrt(m) of the quote distribution.
  double dispersion() const;
  double density(double q) const;

private:
  double m_;
};

enum class FixedPointMethod { iteration, bisection, maximization };

std::string_view to_string(FixedPointMethod method);

struct FixedPointResult {
  double a_max = 0.0;
  double rho_at_max = 0.0;
  std::size_t iterations = 0;
  FixedPointMethod method = FixedPointMethod::iteration;
};

inline constexpr double kDefaultFixedPointTol = 1e-12;
inline constexpr std::size_t kMaxIterations = 1000;
// Quadrature tails are cut this many standard deviations from the mean.
inline constexpr double kTailSigmas = 12.0;

// Profit intensity of a withdrawal level a against the RW quote model:
//   rho(a) = int_a^inf q f(q) dq / (1 + int_a^inf f(q) dq)
//          = phi(z) / (sqrt(m) (2 - Phi(z))),  z = a sqrt(m).
double rho(double a, const RWQuoteModel& model);

// Same functional with both integrals done by adaptive Gauss-Kronrod
// quadrature on [max(a, -12 sd), 12 sd]. Independent of rho(); throws
// NumericError when the quadrature error estimate exceeds its target.
double rho_quadrature(double a, const RWQuoteModel& model);

// Solves rho(a) = a. `iteration` runs a_{k+1} = rho(a_k) from 0 and falls
// back to bisection of a - rho(a) on [0, 1/sqrt(m)] if the orbit misbehaves;
// `maximization` reports maximize_rho's argmax. Requires tol >= 1e-14;
// throws NumericError past kMaxIterations.
FixedPointResult fixed_point(const RWQuoteModel& model, double tol = kDefaultFixedPointTol,
                             FixedPointMethod method = FixedPointMethod::iteration);

// Argmax of rho by function values only: a coarse scan brackets the peak,
// golden-section search narrows it, and symmetric three-point parabolic
// steps polish it. Requires tol >= 1e-12; the achievable accuracy in double
// precision is about 1e-10 / sqrt(m).
double maximize_rho(const RWQuoteModel& model, double tol = 1e-12);

// Orbit a0, rho(a0), rho(rho(a0)), ... with steps + 1 entries.
std::vector<double> iterate_map(double a0, const RWQuoteModel& model, std::size_t steps);

struct RhoSample {
  double a = 0.0;
  double rho = 0.0;
};

// `steps` equispaced samples over [a_lo, a_hi] inclusive; steps >= 2.
std::vector<RhoSample> rho_curve(const RWQuoteModel& model, double a_lo, double a_hi, std::size_t steps);

// CSV with header `a,rho`.
void write_rho_csv(std::ostream& out, const std::vector<RhoSample>& curve);

// Rounds to five decimals, the precision the fixed point is quoted at.
double round5(double x);

}  // namespace qmg::intensity
