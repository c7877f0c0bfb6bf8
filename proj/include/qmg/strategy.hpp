#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qmg::strategy {

using Complex = std::complex<double>;

inline constexpr double kDefaultHbar = 1.0;
inline constexpr std::size_t kDefaultGridPoints = 4096;
// Grid half-width in units of the amplitude's own standard deviation
// sqrt(2 * width); the amplitude at the edge is exp(-50) of its peak.
inline constexpr double kGridHalfWidthSigmas = 10.0;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kBoundaryTol = 1e-12;

// Pure Gaussian strategy
//   psi(p) = (2 pi m)^{-1/4} exp(-(p - a)^2 / (4 m)),
// where `width` is m, the variance of the decision density |psi|^2.
struct GaussianStrategy {
  double a = 0.0;
  double width = 1.0;

  // Throws DomainError unless width > 0 and both fields are finite.
  GaussianStrategy(double mean, double width_variance);
};

// Zero-width limit: the player sells only above the withdrawal price e^a.
struct DiracStrategy {
  double a = 0.0;

  explicit DiracStrategy(double withdrawal_log_profit);

  double withdrawal_price() const;
  // Step function: 0 below a, 1 at and above a.
  double supply_curve(double p) const;
  // Analytic dual amplitude (2 pi hbar)^{-1/2} exp(-i a q / hbar); constant modulus.
  Complex dual_amplitude(double q, double hbar_e = kDefaultHbar) const;
};

double amplitude(const GaussianStrategy& s, double p);
double density(const GaussianStrategy& s, double p);
// Cumulative distribution of the decision density, via erfc.
double supply_curve(const GaussianStrategy& s, double p);

// Complex amplitudes on the uniform grid x_i = grid_min + i * grid_step.
// The size is a power of two.
class GridWavefunction {
public:
  GridWavefunction(std::vector<Complex> samples, double grid_min, double grid_step,
                   double hbar_e = kDefaultHbar);

  // Samples the Gaussian amplitude on `points` nodes centred on the lattice
  // point nearest `s.a`, spanning kGridHalfWidthSigmas amplitude deviations
  // either side.
  static GridWavefunction sample(const GaussianStrategy& s, double hbar_e = kDefaultHbar,
                                 std::size_t points = kDefaultGridPoints);
  // Samples on an explicit grid; normalizes the result.
  static GridWavefunction sample(const GaussianStrategy& s, double grid_min, double grid_step,
                                 std::size_t points, double hbar_e = kDefaultHbar);

  std::size_t size() const { return samples_.size(); }
  const std::vector<Complex>& samples() const { return samples_; }
  double grid_min() const { return grid_min_; }
  double grid_step() const { return grid_step_; }
  double hbar_e() const { return hbar_; }
  double x(std::size_t i) const { return grid_min_ + static_cast<double>(i) * grid_step_; }

  // sum |psi_i|^2 * step
  double norm_squared() const;
  GridWavefunction normalized() const;
  bool is_normalized(double tol = kNormTol) const;

  // Moments of the density |psi|^2 (assumed normalized).
  double mean() const;
  double variance() const;

  // <phi|psi> = sum conj(phi_i) psi_i * step. Grids must match.
  Complex inner(const GridWavefunction& psi) const;

  // Largest boundary modulus relative to the peak modulus.
  double boundary_mass() const;

private:
  std::vector<Complex> samples_;
  double grid_min_;
  double grid_step_;
  double hbar_;
};

// Selling -> buying representation:
//   psi~(q) = (2 pi hbar)^{-1/2} integral exp(-i p q / hbar) psi(p) dp
// evaluated on the dual grid with step 2 pi hbar / (N step) centred on zero.
// Unitary on the grid; applying it twice gives psi(-p).
// Throws ContractViolation when the input is not normalized.
GridWavefunction fourier_dual(const GridWavefunction& psi);
// Conjugate kernel; inverse of fourier_dual onto a grid with given origin.
GridWavefunction inverse_fourier_dual(const GridWavefunction& psi_dual, double target_grid_min);

// The continuous transform evaluated at an arbitrary q by direct summation.
Complex dual_at(const GridWavefunction& psi, double q);

// Closed form of <psi| P^2/(2 risk_m) + risk_m Q^2 / 2 |psi>:
//   (a^2 + m) / (2 risk_m) + risk_m hbar^2 / (8 m).
// Throws DomainError for non-positive risk_m or hbar_e.
double risk_expectation(const GaussianStrategy& s, double risk_m, double hbar_e = kDefaultHbar);

enum class Derivative { spectral, central_difference };

// R psi = p^2 psi / (2 risk_m) + (risk_m / 2) (i hbar d/dp)^2 psi.
// Throws ContractViolation when the boundary modulus exceeds kBoundaryTol of
// the peak (the grid is too narrow for the operator to be meaningful).
GridWavefunction apply_risk_operator(const GridWavefunction& psi, double risk_m,
                                     Derivative scheme = Derivative::spectral);

// Re <psi|R psi> on the grid.
double risk_expectation(const GridWavefunction& psi, double risk_m,
                        Derivative scheme = Derivative::spectral);

struct CurveSample {
  double x = 0.0;
  double value = 0.0;
};

// Uniform samples of density / supply_curve over [lo, hi], `points` >= 2.
std::vector<CurveSample> sample_density(const GaussianStrategy& s, double lo, double hi,
                                        std::size_t points);
std::vector<CurveSample> sample_supply_curve(const GaussianStrategy& s, double lo, double hi,
                                             std::size_t points);
// |psi~(q)| on the dual grid.
std::vector<CurveSample> dual_modulus(const GridWavefunction& psi_dual);

}  // namespace qmg::strategy
