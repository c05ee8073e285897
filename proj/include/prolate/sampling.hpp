#pragma once

// Reconstruction of band-limited signals from uniform samples: the prolate
// sampling formula (least-squares PSWF fit) and the truncated
// Whittaker-Shannon cardinal series as a baseline.

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "prolate/pswf.hpp"
#include "prolate/signal.hpp"

namespace prolate {

/// Band half-width W (rad/time) and time half-width T; c = W T.
struct BandWindow {
  double W = 1.0;
  double T = 1.0;

  double c() const { return W * T; }
  void validate() const {
    if (!(W > 0.0) || !(T > 0.0)) throw std::invalid_argument("BandWindow: W and T must be positive");
  }
};

/// ceil(2 W T / pi), the sample count the 2WT/pi theorem asks for.
inline int required_sample_count(const BandWindow& win) {
  return static_cast<int>(std::ceil(2.0 * win.c() / std::numbers::pi - 1e-12));
}

/// Default PSWF count for a bandwidth parameter: ceil(2c/pi) + 10.
inline int default_basis_size(double c) {
  return static_cast<int>(std::ceil(2.0 * c / std::numbers::pi - 1e-12)) + 10;
}

/// Band-limited evaluator t -> sum_n a_n phi_n(t - center), with
///   phi_n(t) = int_{-1}^{1} psi_n(y) e^{i W t y} dy,
/// which equals mu_n psi_n(t / T) for |t| <= T. The Fourier transform of
/// every phi_n is supported in [-W, W], so the evaluator is band-limited by
/// construction. Outside [-T, T] it is an extrapolation.
class ProlateInterpolant {
 public:
  ProlateInterpolant(std::shared_ptr<const PswfBasis> basis, BandWindow win, double center,
                     Eigen::VectorXcd coeffs, double condition)
      : basis_(std::move(basis)), win_(win), center_(center), coeffs_(std::move(coeffs)), condition_(condition) {
    psi_coeffs_.resize(coeffs_.size());
    for (Eigen::Index n = 0; n < coeffs_.size(); ++n) psi_coeffs_[n] = coeffs_[n] * *basis_->mu(static_cast<int>(n));
    legendre_series_ = basis_->legendre_coeffs().cast<cplx>() * psi_coeffs_;
    // Plain-Legendre form for the inner loop: fold the sqrt(k + 1/2)
    // normalization in and drop the negligible tail.
    Eigen::Index m = legendre_series_.size();
    const double top = m ? legendre_series_.cwiseAbs().maxCoeff() : 0.0;
    while (m > 2 && std::abs(legendre_series_[m - 1]) <= 1e-17 * top) --m;
    plain_.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) plain_[k] = legendre_series_[k] * std::sqrt(static_cast<double>(k) + 0.5);
  }

  const BandWindow& window() const { return win_; }
  double center() const { return center_; }
  /// Coefficients a_n of the phi_n expansion.
  const Eigen::VectorXcd& coefficients() const { return coeffs_; }
  /// Condition number of the column-normalized design matrix.
  double condition() const { return condition_; }
  const PswfBasis& basis() const { return *basis_; }

  bool is_extrapolation(double t) const { return std::abs(t - center_) > win_.T * (1.0 + 1e-12); }

  cplx value(double t) const {
    const double s = (t - center_) / win_.T;
    if (std::abs(s) <= 1.0) return series(s).first;
    return coeffs_.transpose() * basis_->fourier_integrals(s);
  }

  cplx derivative(double t) const {
    const double s = (t - center_) / win_.T;
    if (std::abs(s) <= 1.0) return series(s).second / win_.T;
    return (coeffs_.transpose() * basis_->fourier_integrals_derivative(s))(0) / win_.T;
  }

  /// Value and derivative together (one Legendre recursion inside the window).
  std::pair<cplx, cplx> value_and_derivative(double t) const {
    const double s = (t - center_) / win_.T;
    if (std::abs(s) <= 1.0) {
      const auto [v, d] = series(s);
      return {v, d / win_.T};
    }
    return {value(t), derivative(t)};
  }

 private:
  std::shared_ptr<const PswfBasis> basis_;
  BandWindow win_;
  double center_ = 0.0;
  Eigen::VectorXcd coeffs_;
  Eigen::VectorXcd psi_coeffs_;
  Eigen::VectorXcd legendre_series_;  // psi-series folded into Legendre coefficients
  Eigen::VectorXcd plain_;            // same, against unnormalized P_k

  // sum_k c_k P_k(s) and its derivative, P'_{k+1} = P'_{k-1} + (2k+1) P_k
  std::pair<cplx, cplx> series(double s) const {
    const Eigen::Index m = plain_.size();
    if (m == 0) return {};
    double vr = plain_[0].real(), vi = plain_[0].imag(), dr = 0.0, di = 0.0;
    if (m == 1) return {{vr, vi}, {0.0, 0.0}};
    double p0 = 1.0, p1 = s, d0 = 0.0, d1 = 1.0;
    vr += plain_[1].real() * p1;
    vi += plain_[1].imag() * p1;
    dr += plain_[1].real();
    di += plain_[1].imag();
    for (Eigen::Index k = 1; k + 1 < m; ++k) {
      const double kd = static_cast<double>(k);
      const double p2 = ((2.0 * kd + 1.0) * s * p1 - kd * p0) / (kd + 1.0);
      const double d2 = d0 + (2.0 * kd + 1.0) * p1;
      const cplx c = plain_[k + 1];
      vr += c.real() * p2;
      vi += c.imag() * p2;
      dr += c.real() * d2;
      di += c.imag() * d2;
      p0 = p1;
      p1 = p2;
      d0 = d1;
      d1 = d2;
    }
    return {{vr, vi}, {dr, di}};
  }
  double condition_ = 1.0;
};

namespace detail {

inline double require_uniform(const SampleRecord& record, const char* who) {
  record.validate();
  if (record.size() < 2) throw std::invalid_argument(std::string(who) + ": need at least two samples");
  const auto h = record.uniform_spacing();
  if (!h) throw std::invalid_argument(std::string(who) + ": non-uniform sample grid");
  return *h;
}

}  // namespace detail

/// Prolate sampling formula: least-squares fit of the band-limited PSWF
/// extensions phi_n to the samples.
///
/// Requirements: uniform grid with spacing h <= pi/W reaching to within h of
/// both ends of [center - T, center + T], at least ceil(2WT/pi) samples, and
/// basis.c == W T.
inline ProlateInterpolant prolate_interpolate(const SampleRecord& record, const BandWindow& win,
                                              std::shared_ptr<const PswfBasis> basis, double center = 0.0,
                                              bool compute_condition = true) {
  win.validate();
  const double h = detail::require_uniform(record, "prolate_interpolate");
  if (std::abs(basis->bandwidth() - win.c()) > 1e-12 * std::max(1.0, win.c()))
    throw std::invalid_argument("prolate_interpolate: basis bandwidth " + std::to_string(basis->bandwidth()) +
                                " does not match W*T = " + std::to_string(win.c()));
  const int need = required_sample_count(win);
  if (static_cast<int>(record.size()) < need)
    throw std::invalid_argument("prolate_interpolate: " + std::to_string(record.size()) + " samples given, at least " +
                                std::to_string(need) + " = ceil(2WT/pi) required");
  if (h > std::numbers::pi / win.W * (1.0 + 1e-9))
    throw std::invalid_argument("prolate_interpolate: sample spacing exceeds the Nyquist spacing pi/W");
  // Each end of [-T, T] must lie within one spacing of the grid; ceil(2WT/pi)
  // samples at exactly pi/W can fall short of the window by up to h.
  const double slack = h * (1.0 + 1e-9);
  if (record.times.front() > center - win.T + slack || record.times.back() < center + win.T - slack)
    throw std::invalid_argument("prolate_interpolate: samples do not cover [-T, T] to within one spacing");

  const int n_basis = basis->size();
  const auto ns = static_cast<Eigen::Index>(record.size());
  Eigen::MatrixXcd design(ns, n_basis);
  for (Eigen::Index j = 0; j < ns; ++j) {
    const double s = (record.times[j] - center) / win.T;
    if (std::abs(s) <= 1.0) {
      const Eigen::VectorXd psi = basis->evaluate_all(s);
      for (int n = 0; n < n_basis; ++n) design(j, n) = *basis->mu(n) * psi[n];
    } else {
      design.row(j) = basis->fourier_integrals(s).transpose();
    }
  }
  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index n = 0; n < scale.size(); ++n)
    if (scale[n] == 0.0) scale[n] = 1.0;
  const Eigen::MatrixXcd normalized = design * scale.cwiseInverse().asDiagonal();
  Eigen::VectorXcd rhs(ns);
  for (Eigen::Index j = 0; j < ns; ++j) rhs[j] = record.values[j];

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(normalized);
  cod.setThreshold(1e-14);
  Eigen::VectorXcd coeffs = cod.solve(rhs);
  coeffs = coeffs.cwiseQuotient(scale.cast<cplx>());

  double cond = 0.0;
  if (compute_condition) {
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(normalized);
    const auto& sv = svd.singularValues();
    cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  }
  return ProlateInterpolant(std::move(basis), win, center, std::move(coeffs), cond);
}

/// Convenience overload building the default basis (ceil(2c/pi) + 10 PSWFs).
inline ProlateInterpolant prolate_interpolate(const SampleRecord& record, const BandWindow& win) {
  win.validate();
  auto basis = std::make_shared<const PswfBasis>(build_basis(win.c(), default_basis_size(win.c())));
  return prolate_interpolate(record, win, std::move(basis));
}

/// Truncated cardinal series  sum_j s_j sinc((t - t_j) / h)  on the given
/// samples. With a single sample the kernel spacing is pi/W.
class SincInterpolant {
 public:
  SincInterpolant(std::vector<double> times, std::vector<cplx> values, double spacing, BandWindow win)
      : times_(std::move(times)), values_(std::move(values)), h_(spacing), win_(win) {}

  bool is_extrapolation(double t) const { return std::abs(t) > win_.T * (1.0 + 1e-12); }

  cplx value(double t) const {
    cplx s{};
    for (std::size_t j = 0; j < times_.size(); ++j) s += values_[j] * kernel((t - times_[j]) / h_);
    return s;
  }

  cplx derivative(double t) const {
    cplx s{};
    for (std::size_t j = 0; j < times_.size(); ++j) s += values_[j] * kernel_derivative((t - times_[j]) / h_);
    return s / h_;
  }

 private:
  static double kernel(double u) {
    if (u == 0.0) return 1.0;
    const double x = std::numbers::pi * u;
    return std::sin(x) / x;
  }
  static double kernel_derivative(double u) {
    if (u == 0.0) return 0.0;
    const double x = std::numbers::pi * u;
    return std::numbers::pi * (x * std::cos(x) - std::sin(x)) / (x * x);
  }

  std::vector<double> times_;
  std::vector<cplx> values_;
  double h_;
  BandWindow win_;
};

inline SincInterpolant sinc_interpolate(const SampleRecord& record, const BandWindow& win) {
  win.validate();
  record.validate();
  if (record.size() == 0) throw std::invalid_argument("sinc_interpolate: empty record");
  double h = std::numbers::pi / win.W;
  if (record.size() >= 2) h = detail::require_uniform(record, "sinc_interpolate");
  return SincInterpolant(record.times, record.values, h, win);
}

}  // namespace prolate
