#pragma once

// Line-spectrum signals S(t) = sum_k alpha_k e^{i omega_k t}, sampling, and
// additive noise models.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <initializer_list>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "prolate/shot_noise.hpp"

namespace prolate {

using cplx = std::complex<double>;

/// Anything that can be evaluated together with its exact time derivative.
template <class S>
concept SignalSource = requires(const S& s, double t) {
  { s.value(t) } -> std::convertible_to<cplx>;
  { s.derivative(t) } -> std::convertible_to<cplx>;
};

struct Line {
  double omega = 0.0;
  cplx alpha{};

  friend bool operator==(const Line&, const Line&) = default;
};

class LineSpectrum {
 public:
  LineSpectrum() = default;

  /// Lines sharing an exactly equal frequency are merged by adding amplitudes.
  explicit LineSpectrum(std::vector<Line> lines) : lines_(std::move(lines)) {
    for (const auto& l : lines_)
      if (!std::isfinite(l.omega)) throw std::invalid_argument("LineSpectrum: non-finite frequency");
    std::stable_sort(lines_.begin(), lines_.end(), [](const Line& a, const Line& b) { return a.omega < b.omega; });
    std::vector<Line> merged;
    for (const auto& l : lines_) {
      if (!merged.empty() && merged.back().omega == l.omega)
        merged.back().alpha += l.alpha;
      else
        merged.push_back(l);
    }
    lines_ = std::move(merged);
  }
  LineSpectrum(std::initializer_list<Line> lines) : LineSpectrum(std::vector<Line>(lines)) {}

  const std::vector<Line>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  bool empty() const { return lines_.empty(); }

  cplx value(double t) const {
    cplx s{};
    for (const auto& l : lines_) s += l.alpha * std::polar(1.0, l.omega * t);
    return s;
  }

  cplx derivative(double t) const {
    cplx s{};
    for (const auto& l : lines_) s += cplx(0.0, l.omega) * l.alpha * std::polar(1.0, l.omega * t);
    return s;
  }

  /// sum |alpha_k|, an upper bound on |S(t)|.
  double amplitude_norm() const {
    double s = 0.0;
    for (const auto& l : lines_) s += std::abs(l.alpha);
    return s;
  }

  std::vector<double> frequencies() const {
    std::vector<double> w;
    for (const auto& l : lines_) w.push_back(l.omega);
    return w;
  }

  friend LineSpectrum operator*(cplx gamma, const LineSpectrum& s) {
    std::vector<Line> out = s.lines_;
    for (auto& l : out) l.alpha *= gamma;
    return LineSpectrum(std::move(out));
  }

  friend LineSpectrum operator+(const LineSpectrum& a, const LineSpectrum& b) {
    std::vector<Line> out = a.lines_;
    out.insert(out.end(), b.lines_.begin(), b.lines_.end());
    return LineSpectrum(std::move(out));
  }

  friend bool operator==(const LineSpectrum&, const LineSpectrum&) = default;

 private:
  std::vector<Line> lines_;
};

inline cplx eval_signal(const LineSpectrum& spec, double t) { return spec.value(t); }
inline cplx eval_derivative(const LineSpectrum& spec, double t) { return spec.derivative(t); }

// Noise models -------------------------------------------------------------

struct NoNoise {
  friend bool operator==(const NoNoise&, const NoNoise&) = default;
};
struct IidGaussian {
  double sigma = 0.0;
  friend bool operator==(const IidGaussian&, const IidGaussian&) = default;
};
/// Envelope sigma(t) = sigma (1 + rate |t|).
struct GrowingGaussian {
  double sigma = 0.0;
  double rate = 0.0;
  friend bool operator==(const GrowingGaussian&, const GrowingGaussian&) = default;
};
struct ShotNoise {
  std::int64_t shots = 1;
  friend bool operator==(const ShotNoise&, const ShotNoise&) = default;
};

struct NoiseModel {
  std::variant<NoNoise, IidGaussian, GrowingGaussian, ShotNoise> kind{NoNoise{}};
  std::uint64_t seed = 0;

  bool is_none() const { return std::holds_alternative<NoNoise>(kind); }

  void validate() const {
    std::visit(
        [](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, IidGaussian>) {
            if (!(k.sigma >= 0.0)) throw std::invalid_argument("noise: sigma must be >= 0");
          } else if constexpr (std::is_same_v<K, GrowingGaussian>) {
            if (!(k.sigma >= 0.0) || !(k.rate >= 0.0)) throw std::invalid_argument("noise: sigma, rate must be >= 0");
          } else if constexpr (std::is_same_v<K, ShotNoise>) {
            if (k.shots < 1) throw std::invalid_argument("noise: shots must be >= 1");
          }
        },
        kind);
  }

  /// Short tag with parameters, e.g. "iid_gaussian(sigma=0.001)".
  std::string describe() const;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

inline std::string NoiseModel::describe() const {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  return std::visit(
      [&](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NoNoise>) return "none";
        else if constexpr (std::is_same_v<K, IidGaussian>) return "iid_gaussian(sigma=" + num(k.sigma) + ")";
        else if constexpr (std::is_same_v<K, GrowingGaussian>)
          return "growing(sigma=" + num(k.sigma) + ",rate=" + num(k.rate) + ")";
        else return "shot(M=" + std::to_string(k.shots) + ")";
      },
      kind);
}

struct SampleRecord {
  std::vector<double> times;
  std::vector<cplx> values;
  std::optional<std::vector<cplx>> derivative_values;
  NoiseModel noise;

  std::size_t size() const { return times.size(); }

  void validate() const {
    if (values.size() != times.size()) throw std::invalid_argument("SampleRecord: values/times length mismatch");
    if (derivative_values && derivative_values->size() != times.size())
      throw std::invalid_argument("SampleRecord: derivative length mismatch");
    for (std::size_t j = 1; j < times.size(); ++j)
      if (!(times[j] > times[j - 1])) throw std::invalid_argument("SampleRecord: times must be strictly increasing");
  }

  /// Uniform spacing if the grid is uniform to `rel_tol`, else nullopt.
  std::optional<double> uniform_spacing(double rel_tol = 1e-9) const {
    if (times.size() < 2) return std::nullopt;
    const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t j = 1; j < times.size(); ++j)
      if (std::abs((times[j] - times[j - 1]) - h) > rel_tol * h) return std::nullopt;
    return h;
  }

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// n points t_j = tmin + j (tmax - tmin) / (n - 1).
inline std::vector<double> uniform_grid(double tmin, double tmax, int n) {
  if (n < 1) throw std::invalid_argument("uniform_grid: n must be >= 1");
  if (n == 1) return {tmin};
  if (!(tmax > tmin)) throw std::invalid_argument("uniform_grid: tmax must exceed tmin");
  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) g[j] = tmin + (tmax - tmin) * j / (n - 1.0);
  return g;
}

/// n points with spacing h, symmetric about t = 0.
inline std::vector<double> centered_grid(int n, double h) {
  if (n < 1 || !(h > 0.0)) throw std::invalid_argument("centered_grid: need n >= 1 and h > 0");
  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) g[j] = (j - (n - 1) / 2.0) * h;
  return g;
}

/// Samples source(t_j) + n(t_j). Noise draws come from the model's seed only,
/// so identical inputs give identical records.
template <SignalSource Source>
SampleRecord sample(const Source& source, const std::vector<double>& grid, const NoiseModel& noise = {}) {
  noise.validate();
  SampleRecord rec;
  rec.times = grid;
  rec.noise = noise;
  rec.values.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) rec.values[j] = source.value(grid[j]);
  rec.validate();

  std::mt19937_64 rng(noise.seed);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NoNoise>) {
          std::vector<cplx> d(grid.size());
          for (std::size_t j = 0; j < grid.size(); ++j) d[j] = source.derivative(grid[j]);
          rec.derivative_values = std::move(d);
        } else if constexpr (std::is_same_v<K, IidGaussian> || std::is_same_v<K, GrowingGaussian>) {
          std::normal_distribution<double> gauss(0.0, 1.0);
          for (std::size_t j = 0; j < grid.size(); ++j) {
            double s = k.sigma;
            if constexpr (std::is_same_v<K, GrowingGaussian>) s *= 1.0 + k.rate * std::abs(grid[j]);
            const double re = gauss(rng);
            const double im = gauss(rng);
            rec.values[j] += s * cplx(re, im);
          }
        } else {
          for (auto& v : rec.values) v = shot_estimate(v, k.shots, rng);
        }
      },
      noise.kind);
  return rec;
}

}  // namespace prolate
