#pragma once

// Hadamard-test shot statistics for unit-disk signal values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace prolate {

struct ShotModel {
  std::int64_t shots = 1;
  std::uint64_t seed = 0;
};

/// Estimate of `value` from `shots` Hadamard tests per quadrature. Re and Im
/// are sampled independently as 2 Binomial(M, (1 + x) / 2) / M - 1.
template <class Rng>
std::complex<double> shot_estimate(std::complex<double> value, std::int64_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("shot_estimate: shots must be >= 1");
  if (!(std::abs(value) <= 1.0 + 1e-9)) throw std::domain_error("shot_estimate: |value| > 1");
  auto quadrature = [&](double x) {
    const double p = std::clamp((1.0 + x) / 2.0, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> dist(shots, p);
    return 2.0 * static_cast<double>(dist(rng)) / static_cast<double>(shots) - 1.0;
  };
  const double re = quadrature(value.real());
  const double im = quadrature(value.imag());
  return {re, im};
}

inline std::complex<double> shot_estimate(std::complex<double> value, const ShotModel& model) {
  std::mt19937_64 rng(model.seed);
  return shot_estimate(value, model.shots, rng);
}

}  // namespace prolate
