#pragma once

// Gauss-Legendre rules and normalized Legendre polynomials on [-1, 1].

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace prolate {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]; nodes ascending.
///
/// Newton iteration on the three-term recurrence from the Tricomi initial
/// guess. Converges to full double precision for the orders used here
/// (a few thousand at most).
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // i-th largest root
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::abs(x) + 1e-300) break;
    }
    // derivative at the converged root for the weight
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Values of the L2-normalized Legendre polynomials sqrt(k + 1/2) P_k(x),
/// k = 0..out.size()-1.
inline void normalized_legendre(double x, std::span<double> out) {
  const std::size_t m = out.size();
  if (m == 0) return;
  double p0 = 1.0;
  out[0] = std::sqrt(0.5);
  if (m == 1) return;
  double p1 = x;
  out[1] = std::sqrt(1.5) * x;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double kd = static_cast<double>(k);
    const double p2 = ((2.0 * kd + 1.0) * x * p1 - kd * p0) / (kd + 1.0);
    p0 = p1;
    p1 = p2;
    out[k + 1] = std::sqrt(kd + 1.5) * p2;
  }
}

/// Derivatives of the normalized Legendre polynomials, using
/// P'_{k+1} = P'_{k-1} + (2k+1) P_k, which stays finite at x = +-1.
inline void normalized_legendre_derivative(double x, std::span<double> out) {
  const std::size_t m = out.size();
  if (m == 0) return;
  out[0] = 0.0;
  if (m == 1) return;
  double p_prev = 1.0;  // P_{k-1}
  double p_cur = x;     // P_k
  double d_prev = 0.0;  // P'_{k-1}
  double d_cur = 1.0;   // P'_k
  out[1] = std::sqrt(1.5);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double kd = static_cast<double>(k);
    const double d_next = d_prev + (2.0 * kd + 1.0) * p_cur;
    const double p_next = ((2.0 * kd + 1.0) * x * p_cur - kd * p_prev) / (kd + 1.0);
    d_prev = d_cur;
    d_cur = d_next;
    p_prev = p_cur;
    p_cur = p_next;
    out[k + 1] = std::sqrt(kd + 1.5) * d_next;
  }
}

}  // namespace prolate
