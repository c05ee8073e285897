#pragma once

// Galerkin reduction of  -i d/dt (S * f)(t) = omega (S * f)(t)  over
// time-limited PSWF test functions on [-T, T]:
//
//   B_mn = T  int int psi_m(x) S0(T(x - y)) psi_n(y) dy dx
//   A_mn = T  int int psi_m(x) (-i S0')(T(x - y)) psi_n(y) dy dx
//
// with S0(t) = S(t) e^{-i omega0 t}. For S = sum alpha_k e^{i omega_k t} this
// factors as B = T V^H D_alpha V, A = T V^H D_{nu alpha} V with
// V_kn = int psi_n(y) e^{-i nu_k T y} dy and nu_k = omega_k - omega0, so the
// pencil (A, B) has eigenvalues nu_k on the range of V^H.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prolate/pswf.hpp"
#include "prolate/quadrature.hpp"
#include "prolate/sampling.hpp"
#include "prolate/signal.hpp"

namespace prolate {

struct ObservationWindow {
  double T = 1.0;
  double omega0 = 0.0;
  double W = 1.0;

  double c() const { return W * T; }
  /// T / pi: the largest spectral density delta_eff the window can resolve.
  double capacity() const { return T / std::numbers::pi; }
  void validate() const {
    if (!(T > 0.0) || !(W > 0.0) || !std::isfinite(omega0))
      throw std::invalid_argument("ObservationWindow: T and W must be positive, omega0 finite");
  }
};

/// Default basis size ceil(2c/pi) + 10.
inline int default_nbasis(const ObservationWindow& win) { return default_basis_size(win.c()); }

enum class Assembly { analytic_derivative, interpolated_derivative };

inline const char* to_string(Assembly a) {
  return a == Assembly::analytic_derivative ? "analytic_derivative" : "interpolated_derivative";
}

struct SpectralProblem {
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd B;
  ObservationWindow window;
  std::shared_ptr<const PswfBasis> basis;
  std::string basis_id;
  Assembly assembly = Assembly::analytic_derivative;
  int quadrature_order = 0;
  bool noisy = false;  // source carried a noise model or visibly noisy samples

  // record path only
  double noise_rms = 0.0;   // per-sample noise estimated from the fit residual
  double noise_norm = 0.0;  // ||B|| of a synthetic noise-only record, 0 if not computed
  double interp_band = 0.0;
  int interp_basis_size = 0;
  double interp_condition = 0.0;

  int size() const { return static_cast<int>(B.rows()); }

  static double hermitian_defect(const Eigen::MatrixXcd& M) {
    const double n = M.norm();
    return n == 0.0 ? 0.0 : (M - M.adjoint()).norm() / n;
  }
};

struct AssemblyOptions {
  std::optional<int> quadrature_order;
  /// Record path: band half-width of the interpolant of the demodulated
  /// samples. Default pi/(2h), i.e. records are assumed 2x oversampled.
  std::optional<double> interp_band;
};

namespace detail {

inline std::string basis_tag(const PswfBasis& b) {
  std::ostringstream os;
  os.precision(17);
  os << "pswf(c=" << b.bandwidth() << ",N=" << b.size() << ",m=" << b.legendre_order() << ")";
  return os.str();
}

inline void check_basis(const PswfBasis& basis, const ObservationWindow& win) {
  win.validate();
  if (std::abs(basis.bandwidth() - win.c()) > 1e-12 * std::max(1.0, win.c()))
    throw std::invalid_argument("assemble: basis c = " + std::to_string(basis.bandwidth()) +
                                " does not match W*T = " + std::to_string(win.c()));
}

/// Gauss-Legendre order for integrands of bandwidth c + nu_max T in x.
inline int quadrature_order_for(const PswfBasis& basis, const ObservationWindow& win, double nu_max,
                                std::optional<int> requested) {
  const int n = basis.size();
  if (requested) {
    if (*requested < 2 * n)
      throw std::invalid_argument("assemble: quadrature order " + std::to_string(*requested) + " below 2*n_basis");
    return *requested;
  }
  const double kappa = win.c() + nu_max * win.T;
  return std::max(4 * n, static_cast<int>(std::ceil(0.6 * kappa)) + 24);
}

// PSWF bases depend only on (c, N); records on a common grid reuse them.
inline std::shared_ptr<const PswfBasis> cached_basis(double c, int n) {
  static std::mutex mu;
  static std::vector<std::pair<std::pair<double, int>, std::shared_ptr<const PswfBasis>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  for (const auto& [key, b] : cache)
    if (key.first == c && key.second == n) return b;
  auto b = std::make_shared<const PswfBasis>(build_basis(c, n));
  if (cache.size() >= 32) cache.erase(cache.begin());
  cache.push_back({{c, n}, b});
  return b;
}

/// Core tensor quadrature. kernel(tau) returns {S0(tau), -i S0'(tau)}.
template <class Kernel>
void assemble_tensor(SpectralProblem& p, int q, const Kernel& kernel) {
  const auto& basis = *p.basis;
  const int n = basis.size();
  const double T = p.window.T;
  const QuadratureRule rule = gauss_legendre(q);

  Eigen::MatrixXd psi(n, q);  // psi_n(x_i) w_i
  for (int i = 0; i < q; ++i) psi.col(i) = basis.evaluate_all(rule.nodes[i]) * rule.weights[i];

  Eigen::MatrixXcd ks(q, q), kd(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const auto [s, d] = kernel(T * (rule.nodes[i] - rule.nodes[j]));
      ks(i, j) = s;
      kd(i, j) = d;
    }
  const Eigen::MatrixXcd pc = psi.cast<cplx>();
  p.B = T * (pc * ks * pc.transpose());
  p.A = T * (pc * kd * pc.transpose());
  p.quadrature_order = q;
}

}  // namespace detail

/// Analytic assembly from any source with an exact derivative.
template <SignalSource Source>
SpectralProblem assemble(const Source& source, const ObservationWindow& win, std::shared_ptr<const PswfBasis> basis,
                         const AssemblyOptions& opt = {}, double nu_max = -1.0) {
  detail::check_basis(*basis, win);
  SpectralProblem p;
  p.window = win;
  p.basis = basis;
  p.basis_id = detail::basis_tag(*basis);
  p.assembly = Assembly::analytic_derivative;
  if (nu_max < 0.0) nu_max = win.W;
  const int q = detail::quadrature_order_for(*basis, win, nu_max, opt.quadrature_order);
  const double w0 = win.omega0;
  detail::assemble_tensor(p, q, [&](double tau) {
    const cplx rot = std::polar(1.0, -w0 * tau);
    const cplx s = source.value(tau);
    const cplx ds = source.derivative(tau);
    return std::pair<cplx, cplx>{s * rot, (cplx(0.0, -1.0) * ds - w0 * s) * rot};
  });
  return p;
}

/// LineSpectrum overload: the quadrature order follows the largest demodulated
/// frequency, and the Hermitian structure of nonnegative-amplitude signals is
/// checked.
inline SpectralProblem assemble(const LineSpectrum& spec, const ObservationWindow& win,
                                std::shared_ptr<const PswfBasis> basis, const AssemblyOptions& opt = {}) {
  double nu_max = 0.0;
  bool nonneg = true;
  for (const auto& l : spec.lines()) {
    nu_max = std::max(nu_max, std::abs(l.omega - win.omega0));
    nonneg = nonneg && l.alpha.imag() == 0.0 && l.alpha.real() >= 0.0;
  }
  auto p = assemble<LineSpectrum>(spec, win, std::move(basis), opt, nu_max);
  if (nonneg && !spec.empty()) {
    const double hb = SpectralProblem::hermitian_defect(p.B), ha = SpectralProblem::hermitian_defect(p.A);
    if (hb > 1e-10 || ha > 1e-10)
      throw std::logic_error("assemble: nonnegative-amplitude signal produced a non-Hermitian pencil (" +
                             std::to_string(hb) + ", " + std::to_string(ha) + ")");
  }
  return p;
}

/// Record path: demodulate the samples, fit a prolate interpolant on the whole
/// record, and take S0 and S0' from it (band-limited differentiation).
inline SpectralProblem assemble(const SampleRecord& record, const ObservationWindow& win,
                                std::shared_ptr<const PswfBasis> basis, const AssemblyOptions& opt = {}) {
  detail::check_basis(*basis, win);
  const double h = detail::require_uniform(record, "assemble");
  const double t0 = record.times.front(), t1 = record.times.back();
  const double slack = 1e-9 * (t1 - t0);
  if (t0 > -2.0 * win.T + slack || t1 < 2.0 * win.T - slack)
    throw std::invalid_argument("assemble: samples span [" + std::to_string(t0) + ", " + std::to_string(t1) +
                                "] but must cover [-2T, 2T] = [" + std::to_string(-2 * win.T) + ", " +
                                std::to_string(2 * win.T) + "]");

  const double wi = opt.interp_band.value_or(std::numbers::pi / (2.0 * h));
  if (!(wi > 0.0) || wi > std::numbers::pi / h * (1.0 + 1e-9))
    throw std::invalid_argument("assemble: interpolation band must lie in (0, pi/h]");
  if (wi < win.W * (1.0 - 1e-12))
    throw std::invalid_argument("assemble: record spacing too coarse for the band; need an interpolation band >= W "
                                "(spacing <= pi/(2W) with the default)");

  SampleRecord demod = record;
  demod.derivative_values.reset();
  for (std::size_t j = 0; j < demod.size(); ++j) demod.values[j] *= std::polar(1.0, -win.omega0 * demod.times[j]);

  const BandWindow iw{wi, 0.5 * (t1 - t0)};
  const double center = 0.5 * (t0 + t1);
  const int nb = std::min(static_cast<int>(record.size()),
                          static_cast<int>(std::ceil(2.0 * iw.c() / std::numbers::pi)) + 20);
  auto ibasis = detail::cached_basis(iw.c(), nb);
  const auto interp = prolate_interpolate(demod, iw, ibasis, center);

  SpectralProblem p;
  p.window = win;
  p.basis = basis;
  p.basis_id = detail::basis_tag(*basis);
  p.assembly = Assembly::interpolated_derivative;
  p.interp_band = wi;
  p.interp_basis_size = nb;
  p.interp_condition = interp.condition();

  // noise level from the least-squares residual (ns - nb degrees of freedom)
  double res2 = 0.0, sig2 = 0.0;
  for (std::size_t j = 0; j < demod.size(); ++j) {
    res2 += std::norm(demod.values[j] - interp.value(demod.times[j]));
    sig2 += std::norm(demod.values[j]);
  }
  const auto dof = static_cast<double>(demod.size()) - nb;
  p.noise_rms = dof >= 8.0 ? std::sqrt(res2 / dof) : 0.0;
  p.noisy = !record.noise.is_none() || p.noise_rms > 1e-7 * std::sqrt(sig2 / static_cast<double>(demod.size()));

  const int q = detail::quadrature_order_for(*basis, win, wi, opt.quadrature_order);
  detail::assemble_tensor(p, q, [&](double tau) {
    const auto [v, d] = interp.value_and_derivative(tau);
    return std::pair<cplx, cplx>{v, cplx(0.0, -1.0) * d};
  });

  if (p.noisy && p.noise_rms > 0.0) {
    // Propagate white noise of the estimated size through the same chain.
    SampleRecord sim = demod;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> g(0.0, p.noise_rms / std::sqrt(2.0));
    for (auto& v : sim.values) v = {g(rng), g(rng)};
    const auto ni = prolate_interpolate(sim, iw, ibasis, center, false);
    SpectralProblem np;
    np.window = win;
    np.basis = basis;
    detail::assemble_tensor(np, q, [&](double tau) { return std::pair<cplx, cplx>{ni.value(tau), 0.0}; });
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(np.B);
    p.noise_norm = svd.singularValues()[0];
  }
  return p;
}

/// Rows V_k = int psi_n(y) e^{-i nu_k T y} dy of the rank factorization.
inline Eigen::MatrixXcd exponential_overlaps(const PswfBasis& basis, const ObservationWindow& win,
                                             const std::vector<double>& omegas) {
  Eigen::MatrixXcd V(static_cast<Eigen::Index>(omegas.size()), basis.size());
  for (std::size_t k = 0; k < omegas.size(); ++k)
    V.row(static_cast<Eigen::Index>(k)) = basis.fourier_integrals(-(omegas[k] - win.omega0) / win.W).transpose();
  return V;
}

// Dimension detection ---------------------------------------------------------

struct RankPolicy {
  std::optional<double> noise_floor;  // absolute singular-value threshold
  std::optional<bool> noisy;          // default: problem.noisy
  double eps_rel = 1e-10;
  double kappa = 5.0;
  std::optional<int> fixed_rank;
};

/// RMS of the trailing (high-order) block of B. Signal energy there is of
/// order lambda_n, so for noisy records it is dominated by the noise.
inline double estimate_noise_level(const SpectralProblem& p) {
  const int n = p.size();
  if (n == 0) return 0.0;
  const int tail = std::max(2, n / 4);
  const auto blk = p.B.bottomRightCorner(std::min(tail, n), std::min(tail, n));
  return blk.norm() / static_cast<double>(blk.rows());
}

/// Spectral-norm scale of the noise part of B: the synthetic-record estimate
/// when the record path computed one, else the trailing-block RMS times sqrt(N).
inline double noise_scale(const SpectralProblem& p) {
  if (p.noise_norm > 0.0) return p.noise_norm;
  return estimate_noise_level(p) * std::sqrt(static_cast<double>(p.size()));
}

inline double rank_threshold(const SpectralProblem& p, const Eigen::VectorXd& sv, const RankPolicy& pol) {
  if (pol.noise_floor) return *pol.noise_floor;
  const bool noisy = pol.noisy.value_or(p.noisy);
  const double smax = sv.size() ? sv[0] : 0.0;
  if (!noisy) return pol.eps_rel * smax;
  return std::max(pol.kappa * noise_scale(p), pol.eps_rel * smax);
}

inline int detect_dimension(const SpectralProblem& p, std::optional<double> noise_floor = std::nullopt) {
  if (p.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(p.B);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv[0] == 0.0) return 0;
  RankPolicy pol;
  pol.noise_floor = noise_floor;
  const double tau = rank_threshold(p, sv, pol);
  return static_cast<int>((sv.array() > tau).count());
}

// Solve ----------------------------------------------------------------------

struct SolveOptions {
  RankPolicy rank;
  std::optional<double> im_tol;        // |Im nu| <= im_tol * W; default 1e-6 or noise-scaled
  std::optional<double> res_tol;       // residual <= res_tol * W; default 1e-6 or noise-scaled
  double merge_tol = 1e-9;             // near duplicates within merge_tol * W
};

struct DiscardedEigenvalue {
  cplx omega;  // band-absolute
  double residual = 0.0;
  std::string reason;
};

struct RecoveredSpectrum {
  int rank = 0;
  std::vector<double> omegas;
  std::vector<Eigen::VectorXcd> coeff_vectors;
  std::vector<cplx> alphas;
  std::vector<double> residuals;
  std::vector<bool> merged;
  double delta_eff_est = 0.0;
  double capacity = 0.0;  // T / pi

  // diagnostics
  std::vector<DiscardedEigenvalue> discarded;
  Eigen::VectorXd singular_values;
  double threshold = 0.0;
  double residual_tolerance = 0.0;
  double projected_condition = 0.0;  // sigma_1 / sigma_r
  double amplitude_condition = 0.0;

  std::size_t size() const { return omegas.size(); }

  LineSpectrum to_line_spectrum() const {
    std::vector<Line> lines;
    for (std::size_t k = 0; k < omegas.size(); ++k) lines.push_back({omegas[k], alphas[k]});
    return LineSpectrum(std::move(lines));
  }
};

/// F(omega) = sum_n v_n int psi_n(y) e^{-i (omega - omega0) T y} dy; for
/// |omega - omega0| <= W this is sum_n v_n conj(mu_n) psi_n((omega - omega0)/W).
/// (S * f)(t) = sum_k alpha_k F(omega_k) e^{i omega_k t}, so an eigenvector
/// for omega_j has F(omega_k) = 0 at the other lines.
inline std::function<cplx(double)> eigenvector_profile(const SpectralProblem& p, const Eigen::VectorXcd& v) {
  auto basis = p.basis;
  const ObservationWindow win = p.window;
  if (v.size() != basis->size()) throw std::invalid_argument("eigenvector_profile: vector length mismatch");
  return [basis, win, v](double omega) -> cplx {
    return (basis->fourier_integrals(-(omega - win.omega0) / win.W).transpose() * v)(0);
  };
}

/// Amplitudes from the pencil itself: least squares  B ~ T sum_k alpha_k V_k^H V_k.
inline std::vector<cplx> pencil_amplitudes(const SpectralProblem& p, const std::vector<double>& omegas,
                                           double* condition = nullptr) {
  if (omegas.empty()) return {};
  const int n = p.size();
  const Eigen::MatrixXcd V = exponential_overlaps(*p.basis, p.window, omegas);
  Eigen::MatrixXcd G(static_cast<Eigen::Index>(n) * n, static_cast<Eigen::Index>(omegas.size()));
  for (Eigen::Index k = 0; k < V.rows(); ++k) {
    const Eigen::MatrixXcd outer = p.window.T * (V.row(k).adjoint() * V.row(k));
    G.col(k) = Eigen::Map<const Eigen::VectorXcd>(outer.data(), outer.size());
  }
  const Eigen::Map<const Eigen::VectorXcd> b(p.B.data(), p.B.size());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(G);
  const Eigen::VectorXcd a = cod.solve(b);
  if (condition) {
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
    const auto& s = svd.singularValues();
    *condition = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : INFINITY;
  }
  return {a.data(), a.data() + a.size()};
}

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline RecoveredSpectrum solve(const SpectralProblem& p, const SolveOptions& opt = {}) {
  const ObservationWindow& win = p.window;
  RecoveredSpectrum out;
  out.capacity = win.capacity();
  const int n = p.size();
  if (n == 0) return out;

  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(p.B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  out.singular_values = sv;
  if (sv[0] == 0.0) return out;

  out.threshold = rank_threshold(p, sv, opt.rank);
  int r = opt.rank.fixed_rank ? std::clamp(*opt.rank.fixed_rank, 0, n)
                              : static_cast<int>((sv.array() > out.threshold).count());
  out.rank = r;
  if (r == 0) return out;
  out.projected_condition = sv[0] / sv[r - 1];

  const bool noisy = opt.rank.noisy.value_or(p.noisy) || opt.rank.noise_floor.has_value();
  // Noise-scaled residual tolerance: perturbations of size ~tau in B move the
  // residual by roughly (band ratio) * tau / sigma_r relative to W.
  double res_tol = opt.res_tol.value_or(1e-6);
  if (!opt.res_tol && noisy) {
    const double band_ratio = p.interp_band > 0.0 ? 1.0 + p.interp_band / win.W : 2.0;
    res_tol = std::max(1e-6, 10.0 * band_ratio * out.threshold / sv[r - 1]);
  }
  out.residual_tolerance = res_tol;
  const double im_tol = opt.im_tol.value_or(noisy ? res_tol : 1e-6);

  const Eigen::MatrixXcd Ur = svd.matrixU().leftCols(r);
  const Eigen::MatrixXcd Wr = svd.matrixV().leftCols(r);
  const Eigen::MatrixXcd Ar = Ur.adjoint() * p.A * Wr;
  const Eigen::MatrixXcd M = sv.head(r).cwiseInverse().asDiagonal() * Ar;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "solve: eigensolver failed (rank " << r << ", cond(B_r) = " << out.projected_condition << ")";
    throw SolverError(os.str());
  }

  struct Cand {
    double omega;
    Eigen::VectorXcd v;
    double residual;
  };
  std::vector<Cand> kept;
  for (int k = 0; k < r; ++k) {
    const cplx nu = es.eigenvalues()[k];
    Eigen::VectorXcd v = Wr * es.eigenvectors().col(k);
    v.normalize();
    const Eigen::VectorXcd bv = p.B * v;
    const double bn = bv.norm();
    const double res = bn > 0.0 ? (p.A * v - nu * bv).norm() / bn : INFINITY;
    const cplx omega = nu + win.omega0;
    if (std::abs(nu.imag()) > im_tol * win.W)
      out.discarded.push_back({omega, res, "imaginary part"});
    else if (!(res <= res_tol * win.W))
      out.discarded.push_back({omega, res, "residual"});
    else if (std::abs(nu.real()) > 1.1 * win.W)
      out.discarded.push_back({omega, res, "out of band"});
    else
      kept.push_back({omega.real(), std::move(v), res});
  }
  std::sort(kept.begin(), kept.end(), [](const Cand& a, const Cand& b) { return a.omega < b.omega; });

  // merge near duplicates
  for (std::size_t i = 0; i < kept.size();) {
    std::size_t j = i + 1;
    while (j < kept.size() && kept[j].omega - kept[j - 1].omega <= opt.merge_tol * win.W) ++j;
    double w = 0.0, res = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      w += kept[k].omega;
      res = std::max(res, kept[k].residual);
    }
    out.omegas.push_back(w / static_cast<double>(j - i));
    out.coeff_vectors.push_back(kept[i].v);
    out.residuals.push_back(res);
    out.merged.push_back(j - i > 1);
    i = j;
  }
  out.alphas = pencil_amplitudes(p, out.omegas, &out.amplitude_condition);
  out.delta_eff_est = static_cast<double>(out.rank) / (2.0 * win.W);
  return out;
}

// Amplitudes from samples -------------------------------------------------------

struct AmplitudeFit {
  std::vector<cplx> alphas;
  double condition = 0.0;
  bool ill_conditioned = false;  // condition > 1e12
};

/// alpha = argmin sum_j |s_j - sum_k alpha_k e^{i omega_k t_j}|^2 (rank-revealing LS).
inline AmplitudeFit recover_amplitudes(const SampleRecord& record, const std::vector<double>& omegas) {
  record.validate();
  AmplitudeFit fit;
  if (omegas.empty()) return fit;
  if (record.size() < omegas.size())
    throw std::invalid_argument("recover_amplitudes: fewer samples than frequencies");
  const auto ns = static_cast<Eigen::Index>(record.size());
  const auto k = static_cast<Eigen::Index>(omegas.size());
  Eigen::MatrixXcd E(ns, k);
  Eigen::VectorXcd s(ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    s[j] = record.values[j];
    for (Eigen::Index i = 0; i < k; ++i) E(j, i) = std::polar(1.0, omegas[i] * record.times[j]);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(E);
  const Eigen::VectorXcd a = cod.solve(s);
  fit.alphas.assign(a.data(), a.data() + a.size());
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(E);
  const auto& sv = svd.singularValues();
  fit.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  fit.ill_conditioned = fit.condition > 1e12;
  return fit;
}

// Line matching -----------------------------------------------------------------

/// Greedy one-to-one assignment by ascending distance: for each true
/// frequency the index of its partner in `found`, or -1.
inline std::vector<int> greedy_match(const std::vector<double>& truth, const std::vector<double>& found) {
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(truth.size() * found.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < found.size(); ++j) pairs.push_back({std::abs(truth[i] - found[j]), i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
  std::vector<int> out(truth.size(), -1);
  std::vector<bool> used(found.size(), false);
  for (const auto& p : pairs)
    if (out[p.i] < 0 && !used[p.j]) {
      out[p.i] = static_cast<int>(p.j);
      used[p.j] = true;
    }
  return out;
}

}  // namespace prolate
