#pragma once

// Prolate spheroidal wave functions psi_n on [-1, 1] for bandwidth parameter
// c, expanded in normalized Legendre polynomials.
//
// The prolate operator L = -d/dx (1 - x^2) d/dx + c^2 x^2 commutes with the
// time/band limiting operator. In the normalized Legendre basis it splits
// into two symmetric tridiagonal matrices (even and odd degrees), whose
// eigenvectors are the expansion coefficients of psi_n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prolate/quadrature.hpp"

namespace prolate {

using cplx = std::complex<double>;

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default Legendre truncation: max(2 n_basis, ceil(2c) + 30).
inline int auto_legendre_order(double c, int n_basis) {
  return std::max(2 * n_basis, static_cast<int>(std::ceil(2.0 * c)) + 30);
}

class PswfBasis {
 public:
  double bandwidth() const { return c_; }
  int size() const { return n_basis_; }
  int legendre_order() const { return m_legendre_; }

  /// Column n holds the normalized-Legendre coefficients of psi_n.
  const Eigen::MatrixXd& legendre_coeffs() const { return coeffs_; }
  const std::vector<double>& chi() const { return chi_; }
  const std::vector<double>& lambda() const { return lambda_; }

  double evaluate(int n, double x) const {
    check_index(n);
    check_point(x);
    Eigen::VectorXd p(m_legendre_);
    normalized_legendre(x, {p.data(), static_cast<std::size_t>(p.size())});
    return coeffs_.col(n).dot(p);
  }

  double evaluate_derivative(int n, double x) const {
    check_index(n);
    check_point(x);
    Eigen::VectorXd p(m_legendre_);
    normalized_legendre_derivative(x, {p.data(), static_cast<std::size_t>(p.size())});
    return coeffs_.col(n).dot(p);
  }

  /// psi_0(x) .. psi_{N-1}(x) in one Legendre sweep.
  Eigen::VectorXd evaluate_all(double x) const {
    check_point(x);
    Eigen::VectorXd p(m_legendre_);
    normalized_legendre(x, {p.data(), static_cast<std::size_t>(p.size())});
    return coeffs_.transpose() * p;
  }

  Eigen::VectorXd evaluate_derivative_all(double x) const {
    check_point(x);
    Eigen::VectorXd p(m_legendre_);
    normalized_legendre_derivative(x, {p.data(), static_cast<std::size_t>(p.size())});
    return coeffs_.transpose() * p;
  }

  double concentration_eigenvalue(int n) const {
    check_index(n);
    return lambda_[n];
  }

  /// Fourier self-reproduction constant mu_n = i^n sqrt(2 pi lambda_n / c).
  /// Undefined (nullopt) in the c = 0 Legendre limit.
  std::optional<cplx> mu(int n) const {
    check_index(n);
    if (c_ == 0.0) return std::nullopt;
    static constexpr cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return powers[n % 4] * std::sqrt(2.0 * std::numbers::pi * lambda_[n] / c_);
  }

  /// Band-limited extension integrals  int_{-1}^{1} psi_n(y) e^{i c s y} dy
  /// for all n, at any real s. Inside [-1, 1] this equals mu_n psi_n(s).
  Eigen::VectorXcd fourier_integrals(double s) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n_basis_);
    const std::size_t q = quad_.size();
    for (std::size_t j = 0; j < q; ++j) {
      const cplx e = std::polar(quad_.weights[j], c_ * s * quad_.nodes[j]);
      out += psi_nodes_.col(static_cast<Eigen::Index>(j)).cast<cplx>() * e;
    }
    return out;
  }

  /// d/ds of fourier_integrals(s):  int psi_n(y) (i c y) e^{i c s y} dy.
  Eigen::VectorXcd fourier_integrals_derivative(double s) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n_basis_);
    const std::size_t q = quad_.size();
    for (std::size_t j = 0; j < q; ++j) {
      const double y = quad_.nodes[j];
      const cplx e = std::polar(quad_.weights[j], c_ * s * y) * cplx(0.0, c_ * y);
      out += psi_nodes_.col(static_cast<Eigen::Index>(j)).cast<cplx>() * e;
    }
    return out;
  }

  /// Internal Gauss-Legendre rule (order 4 m_legendre) and psi_n at its nodes
  /// (N x Q). Exposed for assembly and tests.
  const QuadratureRule& quadrature() const { return quad_; }
  const Eigen::MatrixXd& values_at_nodes() const { return psi_nodes_; }

 private:
  friend PswfBasis build_basis(double c, int n_basis, std::optional<int> m_legendre);

  void check_index(int n) const {
    if (n < 0 || n >= n_basis_)
      throw std::out_of_range("pswf index " + std::to_string(n) + " outside [0, " +
                              std::to_string(n_basis_) + ")");
  }
  static void check_point(double x) {
    if (!(std::abs(x) <= 1.0 + 1e-12))
      throw std::domain_error("pswf evaluation point outside [-1, 1]");
  }

  double c_ = 0.0;
  int n_basis_ = 0;
  int m_legendre_ = 0;
  Eigen::MatrixXd coeffs_;
  std::vector<double> chi_;
  std::vector<double> lambda_;
  QuadratureRule quad_;
  Eigen::MatrixXd psi_nodes_;
};

/// Coefficient-tail threshold for the Legendre truncation check.
inline constexpr double kLegendreTailTolerance = 1e-13;

inline PswfBasis build_basis(double c, int n_basis, std::optional<int> m_legendre = std::nullopt) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::domain_error("build_basis: c must be finite and >= 0");
  if (n_basis < 1) throw std::invalid_argument("build_basis: n_basis must be >= 1");
  const int m = m_legendre.value_or(auto_legendre_order(c, n_basis));
  if (m < n_basis + 2)
    throw std::invalid_argument("build_basis: m_legendre must exceed n_basis by at least 2");

  // Prolate operator in the normalized Legendre basis. Only the entries
  // coupling k and k + 2 are nonzero, so each parity is tridiagonal.
  const double c2 = c * c;
  auto diag = [c2](int k) {
    const double kd = k;
    return kd * (kd + 1.0) + c2 * (2.0 * kd * kd + 2.0 * kd - 1.0) / ((2.0 * kd - 1.0) * (2.0 * kd + 3.0));
  };
  auto offdiag = [c2](int k) {  // couples k and k + 2
    const double kd = k;
    return c2 * (kd + 1.0) * (kd + 2.0) / ((2.0 * kd + 3.0) * std::sqrt((2.0 * kd + 1.0) * (2.0 * kd + 5.0)));
  };

  struct Mode {
    double chi;
    int parity;
    int index;  // within parity block
  };
  std::vector<Mode> modes;
  Eigen::MatrixXd vecs[2];
  for (int parity = 0; parity < 2; ++parity) {
    const int len = (m - parity + 1) / 2;
    Eigen::VectorXd d(len);
    Eigen::VectorXd e(std::max(len - 1, 0));
    for (int i = 0; i < len; ++i) d[i] = diag(parity + 2 * i);
    for (int i = 0; i + 1 < len; ++i) e[i] = offdiag(parity + 2 * i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw ConvergenceError("build_basis: tridiagonal eigensolver failed");
    vecs[parity] = solver.eigenvectors();
    for (int i = 0; i < len; ++i) modes.push_back({solver.eigenvalues()[i], parity, i});
  }
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.chi < b.chi; });

  PswfBasis basis;
  basis.c_ = c;
  basis.n_basis_ = n_basis;
  basis.m_legendre_ = m;
  basis.coeffs_ = Eigen::MatrixXd::Zero(m, n_basis);
  basis.chi_.resize(n_basis);
  for (int n = 0; n < n_basis; ++n) {
    const Mode& mode = modes[n];
    if (mode.parity != n % 2)
      throw ConvergenceError("build_basis: parity interlacing broken; increase m_legendre");
    basis.chi_[n] = mode.chi;
    const auto& v = vecs[mode.parity];
    double at_one = 0.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const int k = mode.parity + 2 * static_cast<int>(i);
      basis.coeffs_(k, n) = v(i, mode.index);
      at_one += v(i, mode.index) * std::sqrt(k + 0.5);
    }
    if (at_one < 0.0) basis.coeffs_.col(n) *= -1.0;
    const double tail = std::max(std::abs(basis.coeffs_(m - 1, n)), std::abs(basis.coeffs_(m - 2, n)));
    if (tail > kLegendreTailTolerance)
      throw ConvergenceError("build_basis: Legendre tail " + std::to_string(tail) + " for n = " +
                             std::to_string(n) + "; increase m_legendre");
  }

  basis.quad_ = gauss_legendre(4 * m);
  const std::size_t q = basis.quad_.size();
  basis.psi_nodes_.resize(n_basis, static_cast<Eigen::Index>(q));
  Eigen::VectorXd p(m);
  for (std::size_t j = 0; j < q; ++j) {
    normalized_legendre(basis.quad_.nodes[j], {p.data(), static_cast<std::size_t>(m)});
    basis.psi_nodes_.col(static_cast<Eigen::Index>(j)) = basis.coeffs_.transpose() * p;
  }

  // Concentration eigenvalues: Rayleigh quotient of the sinc kernel
  //   lambda = int int psi(x) sin(c(x-y)) / (pi (x-y)) psi(y) dy dx,
  // with the kernel written as (c / 2pi) int_{-1}^{1} e^{i c u (x-y)} du so
  // the quadratic form becomes a sum of squares (no cancellation).
  basis.lambda_.assign(n_basis, 0.0);
  if (c > 0.0) {
    const auto& rule = basis.quad_;
    Eigen::MatrixXcd kernel(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j)
        kernel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            std::polar(rule.weights[j], c * rule.nodes[i] * rule.nodes[j]);
    const Eigen::MatrixXcd g = basis.psi_nodes_.cast<cplx>() * kernel;  // N x Q: g_n(u_i)
    for (int n = 0; n < n_basis; ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < q; ++i) acc += rule.weights[i] * std::norm(g(n, static_cast<Eigen::Index>(i)));
      // values within rounding of 1 are pinned just below it
      basis.lambda_[n] = std::min(c / (2.0 * std::numbers::pi) * acc, std::nextafter(1.0, 0.0));
    }
  }
  return basis;
}

}  // namespace prolate
