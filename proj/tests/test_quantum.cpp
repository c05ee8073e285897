#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "prolate/quantum.hpp"

using namespace prolate;

namespace {

// Random Hermitian observable, independent of the Hamiltonian builder.
Eigen::MatrixXcd random_observable(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = {u(rng), u(rng)};
  return 0.5 * (a + a.adjoint());
}

// Dense matrix exponential via the eigen-decomposition of the raw matrix;
// used as an oracle for evolve().
Eigen::VectorXcd brute_evolve(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi, double t) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::VectorXcd ph(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ph[i] = std::exp(cplx(0.0, -t) * es.eigenvalues()[i]);
  return v * ph.asDiagonal() * v.inverse() * psi;
}

double slope(double x0, double y0, double x1, double y1) { return (std::log10(y1) - std::log10(y0)) / (std::log10(x1) - std::log10(x0)); }

}  // namespace

TEST_CASE("two-site Heisenberg chain: singlet and triplet", "[quantum]") {
  for (double J : {1.0, 2.5}) {
    const auto h = heisenberg_chain(2, J, 0.0);
    REQUIRE(h.dim() == 4);
    const auto& e = h.energies();
    CHECK(std::abs(e[0] + 0.75 * J) <= 1e-14);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(e[k] - 0.25 * J) <= 1e-14);
  }
  // field only: Zeeman levels -h, 0, 0, h with spin-1/2 operators
  const auto z = heisenberg_chain(2, 0.0, 1.0);
  CHECK(std::abs(z.energies()[0] + 1.0) <= 1e-14);
  CHECK(std::abs(z.energies()[3] - 1.0) <= 1e-14);
  CHECK(build_hamiltonian("heis:3:J=1:h=0.5").dim() == 8);
}

TEST_CASE("Hamiltonian construction", "[quantum]") {
  const auto a = build_hamiltonian("random:16:seed7");
  const auto b = build_hamiltonian("random:16:seed7");
  CHECK(a.matrix() == b.matrix());
  CHECK(a.matrix() != build_hamiltonian("random:16:seed8").matrix());
  CHECK((a.matrix() - a.matrix().adjoint()).cwiseAbs().maxCoeff() == 0.0);

  const auto path = (std::filesystem::temp_directory_path() / "prolate_test_h.csv").string();
  write_hamiltonian_file(path, a.matrix());
  const auto c = build_hamiltonian("file:" + path);
  CHECK(c.matrix() == a.matrix());

  Eigen::MatrixXcd bad = a.matrix();
  bad(0, 1) += 0.1;
  write_hamiltonian_file(path, bad);
  CHECK_THROWS_AS(build_hamiltonian("file:" + path), std::invalid_argument);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(build_hamiltonian("cube:3"), std::invalid_argument);
  CHECK_THROWS_AS(build_state("basis:16", a), std::out_of_range);
  CHECK_THROWS_AS(QuantumState(Eigen::VectorXcd::Ones(3)), std::invalid_argument);
}

TEST_CASE("evolution is unitary and matches a dense exponential", "[quantum]") {
  const auto h = build_hamiltonian("random:12:seed2");
  const auto s = build_state("random:seed5", h);
  for (double t : {-7.0, 0.0, 0.3, 25.0, 400.0}) {
    const auto psi = evolve(h, s, t);
    CHECK(std::abs(psi.squaredNorm() - 1.0) <= 1e-12);
    if (std::abs(t) < 30.0) CHECK((psi - brute_evolve(h.matrix(), s.psi, t)).norm() <= 1e-10);
  }
}

TEST_CASE("autocorrelation structure", "[quantum]") {
  SECTION("two-level system: S(t) = cos t") {
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    const Hamiltonian h(x, "sigma_x");
    Eigen::VectorXcd up(2);
    up << 1, 0;
    const QuantumState s(up);
    for (double t : {-2.0, 0.0, 0.7, 3.0, 11.0}) CHECK(std::abs(autocorrelation(h, s, t) - std::cos(t)) <= 1e-14);
  }
  SECTION("stationary state") {
    const auto h = build_hamiltonian("random:8:seed4");
    const auto s = build_state("eigen:3", h);
    for (double t : {0.5, 9.0, -40.0}) {
      const cplx v = autocorrelation(h, s, t);
      CHECK(std::abs(std::abs(v) - 1.0) <= 1e-13);
      CHECK(std::abs(v - std::polar(1.0, h.energies()[3] * t)) <= 1e-12);
    }
  }
  SECTION("normalization, weights and time symmetry") {
    const auto h = build_hamiltonian("random:16:seed7");
    const auto s = build_state("random:seed3", h);
    CHECK(std::abs(autocorrelation(h, s, 0.0) - 1.0) <= 1e-13);
    const auto spec = autocorrelation_spectrum(h, s);
    double total = 0.0;
    for (const auto& l : spec.lines()) {
      CHECK(l.alpha.real() >= 0.0);
      CHECK(l.alpha.imag() == 0.0);
      total += l.alpha.real();
    }
    CHECK(std::abs(total - 1.0) <= 1e-13);
    for (double t : {0.3, 4.0, 17.5}) {
      CHECK(std::abs(autocorrelation(h, s, -t) - std::conj(autocorrelation(h, s, t))) <= 1e-13);
      // direct inner product <Psi(t), Psi(0)>
      CHECK(std::abs(evolve(h, s, t).dot(s.psi) - autocorrelation(h, s, t)) <= 1e-13);
    }
    // the assembled B is Hermitian PSD for autocorrelations
    const ObservationWindow win{8.0, 0.0, 2.5};
    const auto p = assemble(spec, win, detail::cached_basis(win.c(), default_nbasis(win)));
    CHECK(SpectralProblem::hermitian_defect(p.B) <= 1e-10 * p.B.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (p.B + p.B.adjoint())).eigenvalues().minCoeff() >=
          -1e-10 * p.B.norm());
  }
  SECTION("dimension mismatch") {
    const auto h = build_hamiltonian("random:4:seed1");
    CHECK_THROWS_AS(autocorrelation(h, QuantumState::normalized(Eigen::VectorXcd::Ones(3)), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("observable signals", "[quantum]") {
  const auto h = build_hamiltonian("random:8:seed11");
  const auto s = build_state("random:seed12", h);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(8, 8);
  const double e_mean = s.psi.dot(h.matrix() * s.psi).real();
  for (double t : {0.0, 1.3, -6.0, 30.0}) {
    CHECK(std::abs(observable_signal(h, s, id, t) - 1.0) <= 1e-13);
    CHECK(std::abs(observable_signal(h, s, h.matrix(), t) - e_mean) <= 1e-13);
  }
  Eigen::MatrixXcd bad = id;
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(observable_signal(h, s, bad, 0.0), std::invalid_argument);

  const Eigen::MatrixXcd O = random_observable(8, 99);
  const auto spec = observable_spectrum(h, s, O);
  for (double t : {0.4, 3.0}) {
    const cplx direct = observable_signal(h, s, O, t);
    CHECK(std::abs(direct.imag()) <= 1e-13);
    CHECK(std::abs(spec.value(t) - direct) <= 1e-12);
  }
}

TEST_CASE("solver recovers the difference spectrum of an observable", "[quantum][solver]") {
  const auto h = build_hamiltonian("random:8:seed11");
  const auto s = build_state("random:seed12", h);
  const Eigen::MatrixXcd O = random_observable(8, 99);

  // oracle: differences E_k - E_l with |alpha_kl| > 1e-3, from exact diagonalization
  const auto& e = h.energies();
  const Eigen::MatrixXcd phi = h.eigenvectors();
  const Eigen::VectorXcd c = phi.adjoint() * s.psi;
  const Eigen::MatrixXcd o = phi.adjoint() * O * phi;
  std::vector<double> want;
  cplx zero_weight{};
  for (int k = 0; k < 8; ++k)
    for (int l = 0; l < 8; ++l) {
      const cplx a = std::conj(c[k]) * o(k, l) * c[l];
      if (k == l) zero_weight += a;
      else if (std::abs(a) > 1e-3) want.push_back(e[k] - e[l]);
    }
  if (std::abs(zero_weight) > 1e-3) want.push_back(0.0);
  const double span = e[7] - e[0];

  const ObservationWindow win{60.0, 0.0, 1.05 * span};
  const auto spec = observable_spectrum(h, s, O);
  const auto p = assemble(spec, win, detail::cached_basis(win.c(), default_nbasis(win)));
  const auto r = solve(p);
  INFO("rank " << r.rank << " recovered " << r.size() << " wanted " << want.size());
  for (double w : want) {
    double best = INFINITY;
    for (double x : r.omegas) best = std::min(best, std::abs(x - w));
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("shot estimator", "[quantum][noise]") {
  SECTION("certain outcome") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CHECK(shot_estimate(1.0, ShotModel{1, seed}).real() == 1.0);
      CHECK(shot_estimate(1.0, ShotModel{1000, seed}).real() == 1.0);
      CHECK(shot_estimate(cplx(0.0, -1.0), ShotModel{50, seed}).imag() == -1.0);
    }
  }
  SECTION("reproducible") {
    CHECK(shot_estimate(cplx(0.2, 0.1), ShotModel{1000, 5}) == shot_estimate(cplx(0.2, 0.1), ShotModel{1000, 5}));
  }
  SECTION("3/sqrt(M) envelope at zero") {
    double mean_abs = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) mean_abs += std::abs(shot_estimate(0.0, ShotModel{1000000, seed}));
    mean_abs /= 100.0;
    CHECK(mean_abs <= 3e-3);
  }
  SECTION("unbiased within four standard errors") {
    const cplx x(0.3, -0.4);
    const std::int64_t m = 64;
    const int trials = 10000;
    cplx mean{};
    for (int i = 0; i < trials; ++i) mean += shot_estimate(x, ShotModel{m, static_cast<std::uint64_t>(i)});
    mean /= static_cast<double>(trials);
    const double se_re = std::sqrt((1 - x.real() * x.real()) / m / trials);
    const double se_im = std::sqrt((1 - x.imag() * x.imag()) / m / trials);
    CHECK(std::abs(mean.real() - x.real()) <= 4 * se_re);
    CHECK(std::abs(mean.imag() - x.imag()) <= 4 * se_im);
  }
  SECTION("domain") {
    CHECK_THROWS_AS(shot_estimate(cplx(1.0, 0.1), ShotModel{10, 1}), std::domain_error);
    CHECK_THROWS_AS(shot_estimate(0.5, ShotModel{0, 1}), std::invalid_argument);
  }
}

TEST_CASE("QPD noiseless", "[quantum][qpd]") {
  SECTION("two-level cos t") {
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    const Hamiltonian h(x, "sigma_x");
    Eigen::VectorXcd up(2);
    up << 1, 0;
    QpdConfig cfg;
    const auto rep = qpd_pipeline(h, QuantumState(up), cfg);
    REQUIRE(rep.truth.size() == 2);
    CHECK(rep.max_error() <= 1e-10);
    REQUIRE(rep.omegas.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(std::abs(rep.omegas[k]) - 1.0) <= 1e-10);
      CHECK(std::abs(rep.alphas[k] - 0.5) <= 1e-8);
    }
    CHECK(rep.total_time > 0.0);
  }
  for (const char* ham : {"random:8:seed1", "random:16:seed7"}) {
    DYNAMIC_SECTION(ham) {
      QpdConfig cfg;
      cfg.hamiltonian = ham;
      cfg.psi0 = "random:seed3";
      cfg.T = 40.0;
      const auto rep = qpd_pipeline(cfg);
      const auto h = build_hamiltonian(ham);
      std::size_t expected = 0;
      const auto spec = autocorrelation_spectrum(h, build_state(cfg.psi0, h));
      for (const auto& l : spec.lines()) expected += std::abs(l.omega) <= cfg.W && l.alpha.real() > 1e-6;
      CHECK(rep.truth.size() == expected);
      CHECK(rep.max_error() <= 1e-6);
    }
  }
}

TEST_CASE("QPD shot-noise scaling", "[quantum][qpd][noise]") {
  // Smaller Monte Carlo than the acceptance run: 6 seeds, two shot counts.
  QpdConfig cfg;
  cfg.hamiltonian = "random:16:seed7";
  cfg.psi0 = "random:seed3";
  cfg.T = 40.0;
  cfg.alpha_min = 1e-2;
  const auto h = build_hamiltonian(cfg.hamiltonian);
  const auto s = build_state(cfg.psi0, h);
  std::vector<double> med;
  for (std::int64_t m : {10000, 1000000}) {
    std::vector<double> per_seed;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      cfg.shots = ShotModel{m, seed};
      cfg.noise_seed = seed;
      per_seed.push_back(qpd_pipeline(h, s, cfg).median_error());
    }
    std::sort(per_seed.begin(), per_seed.end());
    med.push_back(0.5 * (per_seed[2] + per_seed[3]));
  }
  const double k = slope(1e4, med[0], 1e6, med[1]);
  INFO("median errors " << med[0] << " " << med[1] << " slope " << k);
  CHECK(std::isfinite(k));
  CHECK(std::abs(k + 0.5) <= 0.2);
}
