#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <fftw3.h>

#include "prolate/sampling.hpp"

using namespace prolate;
using std::numbers::pi;

namespace {

// Sum of sinc pulses sin(W(t - tau)) / (W(t - tau)); exactly band-limited to
// [-W, W]. Centers are off the sample grid so the cardinal series is not exact.
struct PulseTrain {
  double W;
  std::vector<double> centers;
  std::vector<cplx> amps;

  static double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }
  static double dsinc(double x) { return x == 0.0 ? 0.0 : (x * std::cos(x) - std::sin(x)) / (x * x); }

  cplx value(double t) const {
    cplx s{};
    for (std::size_t k = 0; k < centers.size(); ++k) s += amps[k] * sinc(W * (t - centers[k]));
    return s;
  }
  cplx derivative(double t) const {
    cplx s{};
    for (std::size_t k = 0; k < centers.size(); ++k) s += amps[k] * W * dsinc(W * (t - centers[k]));
    return s;
  }
};

PulseTrain random_pulses(double W, double T, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-0.5 * T, 0.5 * T), amp(-1.0, 1.0);
  PulseTrain p{W, {}, {}};
  for (int i = 0; i < k; ++i) {
    p.centers.push_back(pos(rng));
    p.amps.emplace_back(amp(rng), amp(rng));
  }
  return p;
}

// Nyquist grid centered on 0 with n points.
std::vector<double> nyquist_grid(double W, int n) { return centered_grid(n, pi / W); }

template <class F, class G>
double max_error(const F& approx, const G& exact, double a, double b, int n = 2001) {
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = a + (b - a) * i / (n - 1.0);
    e = std::max(e, std::abs(approx.value(t) - exact.value(t)));
  }
  return e;
}

template <class G>
double sup_norm(const G& f, double a, double b, int n = 2001) {
  double e = 0.0;
  for (int i = 0; i < n; ++i) e = std::max(e, std::abs(f.value(a + (b - a) * i / (n - 1.0))));
  return e;
}

}  // namespace

TEST_CASE("zero signal gives the zero evaluator", "[sampling]") {
  const BandWindow win{10.0, 1.0};
  const int n = required_sample_count(win) + 10;
  const auto rec = sample(LineSpectrum{}, nyquist_grid(win.W, n));
  const auto s = prolate_interpolate(rec, win);
  for (double t : {-0.9, -0.3, 0.0, 0.55, 1.0, 2.5}) CHECK(s.value(t) == cplx(0.0, 0.0));
  CHECK(s.coefficients().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("count law: prolate reconstruction at ceil(2WT/pi)+10 samples", "[sampling]") {
  for (double c : {10.0, 12.0, 25.0}) {
    const BandWindow win{c, 1.0};
    const int n = required_sample_count(win) + 10;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto sig = random_pulses(win.W, win.T, 3, seed + 100 * static_cast<std::uint64_t>(c));
      const auto rec = sample(sig, nyquist_grid(win.W, n));
      const auto pro = prolate_interpolate(rec, win);
      const auto snc = sinc_interpolate(rec, win);
      const double norm = sup_norm(sig, -0.9, 0.9);
      const double ep = max_error(pro, sig, -0.9, 0.9) / norm;
      const double es = max_error(snc, sig, -0.9, 0.9) / norm;
      INFO("c=" << c << " seed=" << seed << " prolate=" << ep << " sinc=" << es);
      CHECK(ep <= 1e-4);
      CHECK(es >= 10.0 * ep);
    }
  }
}

TEST_CASE("both evaluators reproduce the samples", "[sampling]") {
  const BandWindow win{12.0, 1.0};
  const int n = required_sample_count(win) + 10;
  const auto sig = random_pulses(win.W, win.T, 4, 77);
  const auto rec = sample(sig, nyquist_grid(win.W, n));
  const auto pro = prolate_interpolate(rec, win);
  const auto snc = sinc_interpolate(rec, win);
  const double norm = sup_norm(sig, rec.times.front(), rec.times.back());
  for (std::size_t j = 0; j < rec.size(); ++j) {
    CHECK(std::abs(pro.value(rec.times[j]) - rec.values[j]) <= 1e-10 * norm);
    CHECK(std::abs(snc.value(rec.times[j]) - rec.values[j]) <= 1e-10 * norm);
  }
}

TEST_CASE("prolate evaluator is band-limited", "[sampling]") {
  // Long Blackman-Harris-windowed record of the evaluator; the window's
  // sidelobes sit near -92 dB, so leakage does not mask the band edge.
  const BandWindow win{12.0, 1.0};
  const int n = required_sample_count(win) + 10;
  const auto sig = random_pulses(win.W, win.T, 3, 5);
  const auto pro = prolate_interpolate(sample(sig, nyquist_grid(win.W, n)), win);

  const int L = 4096;
  const double span = 80.0 * win.T;
  const double h = span / L;
  fftw_complex* buf = fftw_alloc_complex(L);
  fftw_plan plan = fftw_plan_dft_1d(L, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  for (int j = 0; j < L; ++j) {
    const double t = -span / 2 + j * h;
    const double u = 2 * pi * j / L;
    const double w = 0.35875 - 0.48829 * std::cos(u) + 0.14128 * std::cos(2 * u) - 0.01168 * std::cos(3 * u);
    const cplx v = w * pro.value(t);
    buf[j][0] = v.real();
    buf[j][1] = v.imag();
  }
  fftw_execute(plan);
  double inside = 0, outside = 0;
  for (int k = 0; k < L; ++k) {
    const int kk = k <= L / 2 ? k : k - L;
    const double omega = 2 * pi * kk / span;
    const double e = buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    (std::abs(omega) <= 1.05 * win.W ? inside : outside) += e;
  }
  fftw_destroy_plan(plan);
  fftw_free(buf);
  CHECK(outside / (inside + outside) <= 1e-6);
  CHECK(pro.is_extrapolation(1.5));
  CHECK_FALSE(pro.is_extrapolation(-0.99));
}

// A single tone is not time-concentrated, and ceil(2c/pi)+10 samples at exact
// Nyquist spacing do not determine it on [-T, T] to 1e-4; the least-squares
// PSWF fit ends up worse than the cardinal series here. Kept as a known
// failure so a change in behaviour is noticed.
TEST_CASE("pure tone at exact Nyquist spacing", "[sampling][!shouldfail]") {
  const BandWindow win{12.0, 1.0};
  const int n = required_sample_count(win) + 10;
  const LineSpectrum tone({{0.5 * win.W, 1.0}});
  const auto rec = sample(tone, nyquist_grid(win.W, n));
  const double ep = max_error(prolate_interpolate(rec, win), tone, -0.9, 0.9);
  const double es = max_error(sinc_interpolate(rec, win), tone, -0.9, 0.9);
  INFO("prolate=" << ep << " sinc=" << es);
  CHECK(ep <= 1e-4);
  CHECK(es >= 10.0 * ep);
}

TEST_CASE("sinc interpolation", "[sampling]") {
  const BandWindow win{3.0, 2.0};
  SampleRecord one;
  one.times = {0.0};
  one.values = {1.0};
  const auto s = sinc_interpolate(one, win);
  for (double t : {-1.3, 0.0, 0.4, 2.0}) {
    const double expect = t == 0.0 ? 1.0 : std::sin(win.W * t) / (win.W * t);
    CHECK(std::abs(s.value(t) - expect) <= 1e-15);
  }

  // convergence for a tone at mid-grid points as the record grows
  const LineSpectrum tone({{0.7 * win.W, 1.0}});
  double prev = INFINITY;
  for (int n : {21, 81, 321, 1281}) {
    const auto rec = sample(tone, nyquist_grid(win.W, n));
    const auto si = sinc_interpolate(rec, win);
    double e = 0;
    for (int j = -3; j <= 3; ++j) {
      const double t = (j + 0.5) * pi / win.W;
      e = std::max(e, std::abs(si.value(t) - tone.value(t)));
    }
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("interpolation preconditions", "[sampling]") {
  const BandWindow win{10.0, 1.0};
  const int need = required_sample_count(win);
  CHECK(need == 7);
  const LineSpectrum tone({{1.0, 1.0}});

  SECTION("too few samples names the required count") {
    const auto rec = sample(tone, uniform_grid(-1.0, 1.0, need - 1));
    CHECK_THROWS_WITH(prolate_interpolate(rec, win), Catch::Matchers::ContainsSubstring("at least 7"));
  }
  SECTION("non-uniform grid") {
    auto grid = nyquist_grid(win.W, need + 10);
    grid[3] += 1e-3;
    CHECK_THROWS_AS(prolate_interpolate(sample(tone, grid), win), std::invalid_argument);
    CHECK_THROWS_AS(sinc_interpolate(sample(tone, grid), win), std::invalid_argument);
  }
  SECTION("spacing coarser than pi/W") {
    CHECK_THROWS_AS(prolate_interpolate(sample(tone, centered_grid(40, 1.2 * pi / win.W)), win),
                    std::invalid_argument);
  }
  SECTION("grid not covering the window") {
    CHECK_THROWS_AS(prolate_interpolate(sample(tone, uniform_grid(-0.5, 3.0, 40)), win), std::invalid_argument);
  }
  SECTION("basis bandwidth mismatch") {
    auto basis = std::make_shared<const PswfBasis>(build_basis(9.0, 17));
    CHECK_THROWS_AS(prolate_interpolate(sample(tone, nyquist_grid(win.W, 17)), win, basis), std::invalid_argument);
  }
  CHECK_THROWS_AS((BandWindow{0.0, 1.0}.validate()), std::invalid_argument);
}
