#include "qmg/strategy.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "qmg/errors.hpp"

namespace qmg::strategy {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
}

// FFTW planning is not thread-safe; execution on plan-local buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// In-place unnormalized DFT: out_k = sum_j exp(sign 2 pi i j k / N) in_j.
void dft(std::vector<Complex>& values, int sign) {
  const auto n = values.size();
  FftwBuffer buf(n);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data,
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf.data[i][0] = values[i].real();
    buf.data[i][1] = values[i].imag();
  }
  fftw_execute(plan);
  for (std::size_t i = 0; i < n; ++i) values[i] = Complex(buf.data[i][0], buf.data[i][1]);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

// out_k = (dx / sqrt(2 pi hbar)) sum_j exp(sign i x_j y_k / hbar) in_j
// with x_j = x0 + j dx, y_k = y0 + k dy and dx dy = 2 pi hbar / N, so the
// bilinear phase splits into two diagonal twiddles around one DFT.
std::vector<Complex> scaled_transform(const std::vector<Complex>& in, double x0, double dx,
                                      double y0, double dy, double hbar, int sign) {
  const auto n = in.size();
  const double s = static_cast<double>(sign);
  std::vector<Complex> work(n);
  // With y0 = -N/2 dy the inner twiddle is exactly (-1)^j.
  const bool centred = y0 == -0.5 * static_cast<double>(n) * dy;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex twiddle =
        centred ? Complex((j % 2 == 0) ? 1.0 : -1.0, 0.0)
                : std::polar(1.0, s * static_cast<double>(j) * dx * y0 / hbar);
    work[j] = twiddle * in[j];
  }
  dft(work, sign);
  const double scale = dx / std::sqrt(2.0 * kPi * hbar);
  for (std::size_t k = 0; k < n; ++k) {
    const double yk = y0 + static_cast<double>(k) * dy;
    work[k] *= scale * std::polar(1.0, s * x0 * yk / hbar);
  }
  return work;
}

double dual_step(const GridWavefunction& psi) {
  return 2.0 * kPi * psi.hbar_e() / (static_cast<double>(psi.size()) * psi.grid_step());
}

GridWavefunction forward_unchecked(const GridWavefunction& psi) {
  const double dq = dual_step(psi);
  const double q0 = -0.5 * static_cast<double>(psi.size()) * dq;
  return GridWavefunction(
      scaled_transform(psi.samples(), psi.grid_min(), psi.grid_step(), q0, dq, psi.hbar_e(), -1), q0, dq,
      psi.hbar_e());
}

GridWavefunction inverse_unchecked(const GridWavefunction& psi_dual, double target_grid_min) {
  const double dp = dual_step(psi_dual);
  return GridWavefunction(scaled_transform(psi_dual.samples(), psi_dual.grid_min(), psi_dual.grid_step(),
                                           target_grid_min, dp, psi_dual.hbar_e(), +1),
                          target_grid_min, dp, psi_dual.hbar_e());
}

// (i hbar d/dp)^2 psi = -hbar^2 psi''.
std::vector<Complex> momentum_squared(const GridWavefunction& psi, Derivative scheme) {
  const auto n = psi.size();
  const double hbar = psi.hbar_e();
  if (scheme == Derivative::spectral) {
    auto dual = forward_unchecked(psi);
    std::vector<Complex> weighted(dual.samples());
    for (std::size_t k = 0; k < n; ++k) weighted[k] *= dual.x(k) * dual.x(k);
    GridWavefunction shaped(std::move(weighted), dual.grid_min(), dual.grid_step(), hbar);
    return inverse_unchecked(shaped, psi.grid_min()).samples();
  }
  const auto& v = psi.samples();
  const double h2 = psi.grid_step() * psi.grid_step();
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex left = i > 0 ? v[i - 1] : Complex{};
    const Complex right = i + 1 < n ? v[i + 1] : Complex{};
    out[i] = -hbar * hbar * (right - 2.0 * v[i] + left) / h2;
  }
  return out;
}

}  // namespace

GaussianStrategy::GaussianStrategy(double mean, double width_variance) : a(mean), width(width_variance) {
  if (!std::isfinite(a)) throw DomainError("GaussianStrategy: mean must be finite");
  require_positive(width, "GaussianStrategy width");
}

DiracStrategy::DiracStrategy(double withdrawal_log_profit) : a(withdrawal_log_profit) {
  if (!std::isfinite(a)) throw DomainError("DiracStrategy: withdrawal log-profit must be finite");
}

double DiracStrategy::withdrawal_price() const { return std::exp(a); }

double DiracStrategy::supply_curve(double p) const { return p < a ? 0.0 : 1.0; }

Complex DiracStrategy::dual_amplitude(double q, double hbar_e) const {
  require_positive(hbar_e, "hbar_e");
  return std::polar(1.0 / std::sqrt(2.0 * kPi * hbar_e), -a * q / hbar_e);
}

double amplitude(const GaussianStrategy& s, double p) {
  const double d = p - s.a;
  return std::pow(2.0 * kPi * s.width, -0.25) * std::exp(-d * d / (4.0 * s.width));
}

double density(const GaussianStrategy& s, double p) {
  const double d = p - s.a;
  return std::exp(-d * d / (2.0 * s.width)) / std::sqrt(2.0 * kPi * s.width);
}

double supply_curve(const GaussianStrategy& s, double p) {
  return 0.5 * std::erfc(-(p - s.a) / std::sqrt(2.0 * s.width));
}

GridWavefunction::GridWavefunction(std::vector<Complex> samples, double grid_min, double grid_step,
                                   double hbar_e)
    : samples_(std::move(samples)), grid_min_(grid_min), grid_step_(grid_step), hbar_(hbar_e) {
  if (!is_power_of_two(samples_.size())) {
    throw DomainError("GridWavefunction: grid length must be a power of two");
  }
  require_positive(grid_step_, "grid step");
  require_positive(hbar_, "hbar_e");
  if (!std::isfinite(grid_min_)) throw DomainError("GridWavefunction: grid origin must be finite");
}

GridWavefunction GridWavefunction::sample(const GaussianStrategy& s, double hbar_e, std::size_t points) {
  if (!is_power_of_two(points)) throw DomainError("GridWavefunction: grid length must be a power of two");
  const double half_width = kGridHalfWidthSigmas * std::sqrt(2.0 * s.width);
  const double step = 2.0 * half_width / static_cast<double>(points);
  const double centre = std::round(s.a / step) * step;
  return sample(s, centre - 0.5 * static_cast<double>(points) * step, step, points, hbar_e);
}

GridWavefunction GridWavefunction::sample(const GaussianStrategy& s, double grid_min, double grid_step,
                                          std::size_t points, double hbar_e) {
  std::vector<Complex> values(points);
  for (std::size_t i = 0; i < points; ++i) {
    values[i] = amplitude(s, grid_min + static_cast<double>(i) * grid_step);
  }
  return GridWavefunction(std::move(values), grid_min, grid_step, hbar_e).normalized();
}

double GridWavefunction::norm_squared() const {
  double sum = 0.0;
  for (const auto& v : samples_) sum += std::norm(v);
  return sum * grid_step_;
}

GridWavefunction GridWavefunction::normalized() const {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw ContractViolation("GridWavefunction: cannot normalize a zero function");
  const double scale = 1.0 / std::sqrt(n2);
  std::vector<Complex> out(samples_);
  for (auto& v : out) v *= scale;
  return GridWavefunction(std::move(out), grid_min_, grid_step_, hbar_);
}

bool GridWavefunction::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

double GridWavefunction::mean() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += x(i) * std::norm(samples_[i]);
  return sum * grid_step_ / norm_squared();
}

double GridWavefunction::variance() const {
  const double mu = mean();
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = x(i) - mu;
    sum += d * d * std::norm(samples_[i]);
  }
  return sum * grid_step_ / norm_squared();
}

Complex GridWavefunction::inner(const GridWavefunction& psi) const {
  if (psi.size() != size() || psi.grid_min_ != grid_min_ || psi.grid_step_ != grid_step_) {
    throw DomainError("GridWavefunction::inner: grids differ");
  }
  Complex sum{};
  for (std::size_t i = 0; i < size(); ++i) sum += std::conj(samples_[i]) * psi.samples_[i];
  return sum * grid_step_;
}

double GridWavefunction::boundary_mass() const {
  double peak = 0.0;
  for (const auto& v : samples_) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(samples_.front()), std::abs(samples_.back())) / peak;
}

GridWavefunction fourier_dual(const GridWavefunction& psi) {
  if (!psi.is_normalized()) {
    throw ContractViolation("fourier_dual: input wavefunction is not normalized (norm^2 = " +
                            std::to_string(psi.norm_squared()) + ")");
  }
  return forward_unchecked(psi);
}

GridWavefunction inverse_fourier_dual(const GridWavefunction& psi_dual, double target_grid_min) {
  if (!psi_dual.is_normalized()) {
    throw ContractViolation("inverse_fourier_dual: input wavefunction is not normalized");
  }
  return inverse_unchecked(psi_dual, target_grid_min);
}

Complex dual_at(const GridWavefunction& psi, double q) {
  Complex sum{};
  const double hbar = psi.hbar_e();
  for (std::size_t j = 0; j < psi.size(); ++j) {
    sum += std::polar(1.0, -psi.x(j) * q / hbar) * psi.samples()[j];
  }
  return sum * psi.grid_step() / std::sqrt(2.0 * kPi * hbar);
}

double risk_expectation(const GaussianStrategy& s, double risk_m, double hbar_e) {
  require_positive(risk_m, "risk_m");
  require_positive(hbar_e, "hbar_e");
  return (s.a * s.a + s.width) / (2.0 * risk_m) + risk_m * hbar_e * hbar_e / (8.0 * s.width);
}

GridWavefunction apply_risk_operator(const GridWavefunction& psi, double risk_m, Derivative scheme) {
  require_positive(risk_m, "risk_m");
  if (psi.boundary_mass() >= kBoundaryTol) {
    throw ContractViolation("apply_risk_operator: boundary amplitude " + std::to_string(psi.boundary_mass()) +
                            " of peak; widen the grid");
  }
  auto q2 = momentum_squared(psi, scheme);
  std::vector<Complex> out(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double p = psi.x(i);
    out[i] = p * p * psi.samples()[i] / (2.0 * risk_m) + 0.5 * risk_m * q2[i];
  }
  return GridWavefunction(std::move(out), psi.grid_min(), psi.grid_step(), psi.hbar_e());
}

double risk_expectation(const GridWavefunction& psi, double risk_m, Derivative scheme) {
  return psi.inner(apply_risk_operator(psi, risk_m, scheme)).real() / psi.norm_squared();
}

namespace {

template <class F>
std::vector<CurveSample> sample_uniform(double lo, double hi, std::size_t points, F&& f) {
  if (points < 2 || !(lo < hi)) throw DomainError("curve sampling needs lo < hi and at least two points");
  std::vector<CurveSample> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + static_cast<double>(i) * step;
    out[i] = {x, f(x)};
  }
  return out;
}

}  // namespace

std::vector<CurveSample> sample_density(const GaussianStrategy& s, double lo, double hi, std::size_t points) {
  return sample_uniform(lo, hi, points, [&](double x) { return density(s, x); });
}

std::vector<CurveSample> sample_supply_curve(const GaussianStrategy& s, double lo, double hi,
                                             std::size_t points) {
  return sample_uniform(lo, hi, points, [&](double x) { return supply_curve(s, x); });
}

std::vector<CurveSample> dual_modulus(const GridWavefunction& psi_dual) {
  std::vector<CurveSample> out(psi_dual.size());
  for (std::size_t i = 0; i < psi_dual.size(); ++i) out[i] = {psi_dual.x(i), std::abs(psi_dual.samples()[i])};
  return out;
}

}  // namespace qmg::strategy
