#pragma once

// Desk-scale quantum harness: small Hamiltonians, exact time evolution through
// the eigen-decomposition, autocorrelation / observable signals, and the
// hybrid pipeline (simulated device samples -> prolate solver).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prolate/shot_noise.hpp"
#include "prolate/signal.hpp"
#include "prolate/solver.hpp"

namespace prolate {

class Hamiltonian {
 public:
  Hamiltonian(Eigen::MatrixXcd h, std::string tag) : h_(std::move(h)), tag_(std::move(tag)) {
    if (h_.rows() != h_.cols() || h_.rows() == 0) throw std::invalid_argument("Hamiltonian: matrix must be square");
    const double defect = (h_ - h_.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * std::max(1.0, h_.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("Hamiltonian: matrix is not Hermitian (max |H - H^H| = " + std::to_string(defect) +
                                  ")");
    h_ = 0.5 * (h_ + h_.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_);
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  int dim() const { return static_cast<int>(h_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return h_; }
  /// E_0 <= E_1 <= ...
  const Eigen::VectorXd& energies() const { return energies_; }
  /// Column n is phi_n.
  const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }
  const std::string& tag() const { return tag_; }

 private:
  Eigen::MatrixXcd h_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
  std::string tag_;
};

struct QuantumState {
  Eigen::VectorXcd psi;

  explicit QuantumState(Eigen::VectorXcd v) : psi(std::move(v)) {
    if (psi.size() == 0) throw std::invalid_argument("QuantumState: empty vector");
    if (std::abs(psi.norm() - 1.0) > 1e-12) throw std::invalid_argument("QuantumState: vector not normalized");
  }
  static QuantumState normalized(Eigen::VectorXcd v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("QuantumState: zero vector");
    return QuantumState(v / n);
  }
  int dim() const { return static_cast<int>(psi.size()); }
};

// Construction ---------------------------------------------------------------

/// GUE-type matrix (A + A^H) / (2 sqrt(d)) with iid standard complex Gaussian
/// A; the spectrum fills roughly [-2, 2].
inline Hamiltonian random_hamiltonian(int d, std::uint64_t seed) {
  if (d < 1 || d > 2048) throw std::invalid_argument("random_hamiltonian: need 1 <= d <= 2048");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd a(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) a(i, j) = {g(rng), g(rng)};
  Eigen::MatrixXcd h = (a + a.adjoint()) / (2.0 * std::sqrt(static_cast<double>(d)));
  return Hamiltonian(h, "random:" + std::to_string(d) + ":seed" + std::to_string(seed));
}

/// Open chain H = J sum_i S_i . S_{i+1} + h sum_i S^z_i, spin-1/2 operators
/// with eigenvalues +-1/2. Basis state bit i = 1 means site i is down.
inline Hamiltonian heisenberg_chain(int n_sites, double J, double field) {
  if (n_sites < 1 || n_sites > 12) throw std::invalid_argument("heisenberg_chain: need 1 <= n_sites <= 12");
  const int d = 1 << n_sites;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  auto sz = [](int state, int site) { return (state >> site & 1) ? -0.5 : 0.5; };
  for (int s = 0; s < d; ++s) {
    for (int i = 0; i < n_sites; ++i) h(s, s) += field * sz(s, i);
    for (int i = 0; i + 1 < n_sites; ++i) {
      h(s, s) += J * sz(s, i) * sz(s, i + 1);
      // S^+S^- + S^-S^+ = 2 (SxSx + SySy): flips antiparallel pairs with weight 1/2
      if ((s >> i & 1) != (s >> (i + 1) & 1)) {
        const int f = s ^ (1 << i) ^ (1 << (i + 1));
        h(f, s) += 0.5 * J;
      }
    }
  }
  std::ostringstream tag;
  tag << "heis:" << n_sites << ":J=" << J << ":h=" << field;
  return Hamiltonian(h, tag.str());
}

/// Whitespace/comma separated list of 2 d^2 reals, row-major (re, im) pairs.
inline Hamiltonian hamiltonian_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    std::stringstream ss(tok);
    std::string cell;
    while (std::getline(ss, cell, ','))
      if (!cell.empty()) vals.push_back(std::stod(cell));
  }
  const auto d = static_cast<int>(std::lround(std::sqrt(vals.size() / 2.0)));
  if (d < 1 || static_cast<std::size_t>(2 * d * d) != vals.size())
    throw std::invalid_argument("hamiltonian file: expected 2 d^2 reals, got " + std::to_string(vals.size()));
  Eigen::MatrixXcd h(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h(i, j) = {vals[2 * (i * d + j)], vals[2 * (i * d + j) + 1]};
  return Hamiltonian(h, "file:" + path);
}

inline void write_hamiltonian_file(const std::string& path, const Eigen::MatrixXcd& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[64];
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", j ? "," : "", h(i, j).real(), h(i, j).imag());
      out << buf;
    }
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

inline std::uint64_t parse_seed(const std::string& s) {
  if (s.rfind("seed", 0) != 0) throw std::invalid_argument("expected seedN, got '" + s + "'");
  return std::stoull(s.substr(4));
}

}  // namespace detail

/// "random:16:seed7" | "heis:8:J=1:h=0.5" | "file:h.csv"
inline Hamiltonian build_hamiltonian(const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw std::invalid_argument("empty Hamiltonian spec");
  if (parts[0] == "random") {
    if (parts.size() != 3) throw std::invalid_argument("random Hamiltonian spec is random:<d>:seed<N>");
    return random_hamiltonian(std::stoi(parts[1]), detail::parse_seed(parts[2]));
  }
  if (parts[0] == "heis") {
    if (parts.size() < 2) throw std::invalid_argument("heisenberg spec is heis:<n>[:J=..][:h=..]");
    double J = 1.0, field = 0.0;
    for (std::size_t i = 2; i < parts.size(); ++i) {
      if (parts[i].rfind("J=", 0) == 0) J = std::stod(parts[i].substr(2));
      else if (parts[i].rfind("h=", 0) == 0) field = std::stod(parts[i].substr(2));
      else throw std::invalid_argument("unknown heisenberg parameter '" + parts[i] + "'");
    }
    return heisenberg_chain(std::stoi(parts[1]), J, field);
  }
  if (parts[0] == "file") return hamiltonian_from_file(spec.substr(5));
  throw std::invalid_argument("unknown Hamiltonian kind '" + parts[0] + "'");
}

/// "random:seed3" | "basis:k" | "eigen:k"
inline QuantumState build_state(const std::string& spec, const Hamiltonian& h) {
  const auto parts = detail::split(spec, ':');
  const int d = h.dim();
  if (parts.size() == 2 && parts[0] == "random") {
    std::mt19937_64 rng(detail::parse_seed(parts[1]));
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v[i] = {g(rng), g(rng)};
    return QuantumState::normalized(v);
  }
  if (parts.size() == 2 && (parts[0] == "basis" || parts[0] == "eigen")) {
    const int k = std::stoi(parts[1]);
    if (k < 0 || k >= d) throw std::out_of_range("state index out of range");
    if (parts[0] == "eigen") return QuantumState::normalized(h.eigenvectors().col(k));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    v[k] = 1.0;
    return QuantumState(v);
  }
  throw std::invalid_argument("unknown state spec '" + spec + "'");
}

// Evolution and signals -----------------------------------------------------------

namespace detail {
inline void check_dims(const Hamiltonian& h, const QuantumState& s) {
  if (h.dim() != s.dim())
    throw std::invalid_argument("dimension mismatch: H is " + std::to_string(h.dim()) + ", state is " +
                                std::to_string(s.dim()));
}
}  // namespace detail

/// Psi(t) = sum_n e^{-i E_n t} <phi_n, Psi0> phi_n.
inline Eigen::VectorXcd evolve(const Hamiltonian& h, const QuantumState& psi0, double t) {
  detail::check_dims(h, psi0);
  Eigen::VectorXcd c = h.eigenvectors().adjoint() * psi0.psi;
  for (int n = 0; n < h.dim(); ++n) c[n] *= std::polar(1.0, -h.energies()[n] * t);
  return h.eigenvectors() * c;
}

/// S(t) = <Psi(t), Psi(0)> as a line spectrum: frequencies E_n with weights
/// |<phi_n, Psi0>|^2 (exactly degenerate levels merge).
inline LineSpectrum autocorrelation_spectrum(const Hamiltonian& h, const QuantumState& psi0) {
  detail::check_dims(h, psi0);
  const Eigen::VectorXcd c = h.eigenvectors().adjoint() * psi0.psi;
  std::vector<Line> lines;
  for (int n = 0; n < h.dim(); ++n) lines.push_back({h.energies()[n], std::norm(c[n])});
  return LineSpectrum(std::move(lines));
}

inline cplx autocorrelation(const Hamiltonian& h, const QuantumState& psi0, double t) {
  detail::check_dims(h, psi0);
  const Eigen::VectorXcd c = h.eigenvectors().adjoint() * psi0.psi;
  cplx s{};
  for (int n = 0; n < h.dim(); ++n) s += std::norm(c[n]) * std::polar(1.0, h.energies()[n] * t);
  return s;
}

/// S(t) = <Psi(t), O Psi(t)> = sum_kl alpha_kl e^{i (E_k - E_l) t} with
/// alpha_kl = <Psi0, phi_k> <phi_k, O phi_l> <phi_l, Psi0>.
inline LineSpectrum observable_spectrum(const Hamiltonian& h, const QuantumState& psi0, const Eigen::MatrixXcd& O) {
  detail::check_dims(h, psi0);
  if (O.rows() != h.dim() || O.cols() != h.dim()) throw std::invalid_argument("observable: dimension mismatch");
  if ((O - O.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("observable: O is not Hermitian");
  const Eigen::MatrixXcd& phi = h.eigenvectors();
  const Eigen::VectorXcd c = phi.adjoint() * psi0.psi;
  const Eigen::MatrixXcd o = phi.adjoint() * O * phi;
  std::vector<Line> lines;
  lines.reserve(static_cast<std::size_t>(h.dim()) * h.dim());
  for (int k = 0; k < h.dim(); ++k)
    for (int l = 0; l < h.dim(); ++l)
      lines.push_back({h.energies()[k] - h.energies()[l], std::conj(c[k]) * o(k, l) * c[l]});
  return LineSpectrum(std::move(lines));
}

inline cplx observable_signal(const Hamiltonian& h, const QuantumState& psi0, const Eigen::MatrixXcd& O, double t) {
  if ((O - O.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("observable: O is not Hermitian");
  const Eigen::VectorXcd psi = evolve(h, psi0, t);
  return psi.dot(O * psi);
}

// Pipeline ---------------------------------------------------------------------

struct QpdConfig {
  std::string hamiltonian = "random:8:seed1";
  std::string psi0 = "random:seed1";
  double omega0 = 0.0;
  double W = 2.5;
  double T = 10.0;
  /// Samples on the symmetric grid [-span T, span T]; span >= 2.
  double span = 2.5;
  /// 0 -> spacing pi / (3W) (interpolation band 1.5 W).
  int n_samples = 0;
  std::optional<ShotModel> shots;
  /// Optional growing envelope ("imperfect time evolution") on top.
  std::optional<GrowingGaussian> drift;
  std::uint64_t noise_seed = 0;
  std::optional<int> n_basis;
  double alpha_min = 1e-6;  // true lines below this weight are not scored
};

struct QpdLine {
  double energy = 0.0;
  double weight = 0.0;
  std::optional<double> recovered;  // nullopt = unresolved
  double error() const { return recovered ? std::abs(*recovered - energy) : INFINITY; }
};

struct QpdReport {
  std::vector<double> omegas;
  std::vector<cplx> alphas;
  std::vector<double> residuals;
  std::vector<QpdLine> truth;  // in-band eigenvalues with weight >= alpha_min
  int rank = 0;
  int n_samples = 0;
  double total_time = 0.0;  // sum |t_j|
  std::string hamiltonian_tag;
  std::size_t discarded = 0;

  double max_error() const {
    double e = 0.0;
    for (const auto& l : truth) e = std::max(e, l.error());
    return e;
  }
  /// Median over scored lines; unresolved lines count as infinite.
  double median_error() const {
    if (truth.empty()) return 0.0;
    std::vector<double> e;
    for (const auto& l : truth) e.push_back(l.error());
    std::sort(e.begin(), e.end());
    const std::size_t m = e.size() / 2;
    return e.size() % 2 ? e[m] : 0.5 * (e[m - 1] + e[m]);
  }
};

inline QpdReport qpd_pipeline(const Hamiltonian& h, const QuantumState& psi0, const QpdConfig& cfg) {
  if (!(cfg.span >= 2.0)) throw std::invalid_argument("qpd: span must be >= 2 (samples must cover [-2T, 2T])");
  const ObservationWindow win{cfg.T, cfg.omega0, cfg.W};
  win.validate();
  const LineSpectrum exact = autocorrelation_spectrum(h, psi0);

  int n = cfg.n_samples;
  if (n <= 0) n = static_cast<int>(std::ceil(2.0 * cfg.span * cfg.T / (std::numbers::pi / (3.0 * cfg.W)))) + 1;
  const auto grid = uniform_grid(-cfg.span * cfg.T, cfg.span * cfg.T, n);

  QpdReport rep;
  rep.hamiltonian_tag = h.tag();
  rep.n_samples = n;
  for (double t : grid) rep.total_time += std::abs(t);

  const auto basis = detail::cached_basis(win.c(), cfg.n_basis.value_or(default_nbasis(win)));
  SpectralProblem prob;
  if (!cfg.shots && !cfg.drift) {
    // noiseless: the harness signal has an exact derivative
    prob = assemble(exact, win, basis);
  } else {
    SampleRecord rec;
    rec.times = grid;
    rec.values.resize(grid.size());
    std::mt19937_64 rng(cfg.noise_seed);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      cplx v = exact.value(grid[j]);
      if (cfg.shots) v = shot_estimate(v, cfg.shots->shots, rng);
      rec.values[j] = v;
    }
    if (cfg.shots) rec.noise = NoiseModel{ShotNoise{cfg.shots->shots}, cfg.noise_seed};
    if (cfg.drift) {
      std::normal_distribution<double> g(0.0, 1.0);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double s = cfg.drift->sigma * (1.0 + cfg.drift->rate * std::abs(grid[j]));
        rec.values[j] += s * cplx(g(rng), g(rng));
      }
      rec.noise = NoiseModel{*cfg.drift, cfg.noise_seed};
    }
    prob = assemble(rec, win, basis);
  }

  const auto rs = solve(prob);
  rep.omegas = rs.omegas;
  rep.alphas = rs.alphas;
  rep.residuals = rs.residuals;
  rep.rank = rs.rank;
  rep.discarded = rs.discarded.size();

  std::vector<double> tw;
  for (const auto& l : exact.lines())
    if (std::abs(l.omega - cfg.omega0) <= cfg.W && l.alpha.real() >= cfg.alpha_min) {
      rep.truth.push_back({l.omega, l.alpha.real(), std::nullopt});
      tw.push_back(l.omega);
    }
  const auto m = greedy_match(tw, rs.omegas);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] >= 0) rep.truth[i].recovered = rs.omegas[static_cast<std::size_t>(m[i])];
  return rep;
}

inline QpdReport qpd_pipeline(const QpdConfig& cfg) {
  const Hamiltonian h = build_hamiltonian(cfg.hamiltonian);
  return qpd_pipeline(h, build_state(cfg.psi0, h), cfg);
}

}  // namespace prolate
