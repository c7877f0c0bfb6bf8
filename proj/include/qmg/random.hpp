#pragma once

#include <cstdint>
#include <string_view>

namespace qmg::random {

// Identifies the sampling scheme in run metadata so that streams can be
// reproduced by other implementations.
inline constexpr std::string_view kGeneratorName = "splitmix64-counter+as241-inverse-cdf";

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Standard normal quantile, Wichura's AS 241 (PPND16); relative accuracy
// about 1e-16 on (0, 1). Throws DomainError outside the open interval.
double inverse_normal_cdf(double u);

// Counter-based stream: draw i of (seed, stream) is a pure function
//   uniform_i = (mix64(key + (i + 1) * gamma) >> 11 + 0.5) / 2^53,
//   key = mix64(mix64(seed) ^ (stream * gamma + offset)),
// so independent streams from one seed never overlap and any draw can be
// recomputed from its index.
class CounterStream {
public:
  CounterStream(std::uint64_t seed, std::uint64_t stream);

  // Uniform on the open interval (0, 1).
  double next_uniform();
  // Standard normal by inverse-CDF transform of next_uniform().
  double next_standard_normal();

  std::uint64_t position() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qmg::random
