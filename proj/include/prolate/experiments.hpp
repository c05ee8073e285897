#pragma once

// Reproducible parameter scans (accuracy transition, sampling formula,
// noise sweeps) and a periodogram baseline.
//
// A scan is the cartesian product of its axes times `trials`. Every cell gets
// a seed hashed from the base seed, the axis values and the trial index, so
// results do not depend on scheduling. Rows are sorted before writing and
// runtime is only emitted on request, which keeps the CSV byte-identical
// across runs. Completed cells are appended to "<out>.partial" as they finish;
// a rerun skips every cell already present in <out> or <out>.partial.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <fftw3.h>
#include <json.hpp>

#include "prolate/io.hpp"
#include "prolate/sampling.hpp"
#include "prolate/solver.hpp"

namespace prolate {

inline constexpr const char* kArtifactVersion = "1.0.0";

// FFT baseline --------------------------------------------------------------

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftOptions {
  int zero_pad = 8;        // transform length >= zero_pad * n
  double rel_floor = 1e-2;  // peaks below rel_floor * max power are dropped
};

/// Hann-windowed periodogram, local maxima inside [omega0 - W, omega0 + W]
/// above the floor, parabolic refinement of each peak. Amplitudes are the
/// windowed DTFT at the refined frequency divided by the window sum.
inline LineSpectrum baseline_fft(const SampleRecord& record, const ObservationWindow& win, const FftOptions& opt = {}) {
  const double h = detail::require_uniform(record, "baseline_fft");
  const int n = static_cast<int>(record.size());
  int L = 1;
  while (L < opt.zero_pad * n) L *= 2;

  std::vector<double> w(n);
  double wsum = 0.0;
  for (int j = 0; j < n; ++j) {
    w[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (j + 1) / (n + 1.0));
    wsum += w[j];
  }

  fftw_complex* buf = fftw_alloc_complex(L);
  fftw_plan plan;
  {
    // planner calls are not thread-safe
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(L, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int j = 0; j < L; ++j) buf[j][0] = buf[j][1] = 0.0;
  for (int j = 0; j < n; ++j) {
    buf[j][0] = w[j] * record.values[j].real();
    buf[j][1] = w[j] * record.values[j].imag();
  }
  fftw_execute(plan);
  std::vector<double> mag(L);
  for (int k = 0; k < L; ++k) mag[k] = std::hypot(buf[k][0], buf[k][1]);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);

  const double dw = 2.0 * std::numbers::pi / (L * h);
  auto omega_of = [&](int k) { return (k <= L / 2 ? k : k - L) * dw; };
  double top = 0.0;
  for (int k = 0; k < L; ++k)
    if (std::abs(omega_of(k) - win.omega0) <= win.W) top = std::max(top, mag[k]);
  if (!(top > 0.0)) return {};

  auto dtft = [&](double omega) {
    cplx s{};
    for (int j = 0; j < n; ++j) s += w[j] * record.values[j] * std::polar(1.0, -omega * record.times[j]);
    return s / wsum;
  };

  std::vector<Line> lines;
  for (int k = 0; k < L; ++k) {
    const double a = mag[(k + L - 1) % L], b = mag[k], c = mag[(k + 1) % L];
    if (!(b > a && b >= c) || b * b < opt.rel_floor * top * top) continue;
    const double denom = a - 2.0 * b + c;
    const double delta = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
    const double omega = omega_of(k) + delta * dw;
    if (std::abs(omega - win.omega0) > win.W) continue;
    lines.push_back({omega, dtft(omega)});
  }
  return LineSpectrum(std::move(lines));
}

// Signals used by the scans ---------------------------------------------------

/// Sum of sinc pulses a_k sin(W(t - tau_k)) / (W(t - tau_k)); band-limited to
/// [-W, W] and concentrated around the pulse centers.
struct SincPulses {
  double W = 1.0;
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

/// k pulses with centers uniform in [-T/2, T/2] and amplitudes uniform in the
/// unit square.
inline SincPulses random_pulses(double W, double T, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-0.5 * T, 0.5 * T), amp(-1.0, 1.0);
  SincPulses p{W, {}, {}};
  for (int i = 0; i < k; ++i) {
    p.centers.push_back(pos(rng));
    p.amps.emplace_back(amp(rng), amp(rng));
  }
  return p;
}

/// K lines equispaced in [-W, W] (cell centers, spacing 2W/K) with unit
/// magnitude and random phases. offband_span > 1 continues the comb at the
/// same spacing out to |omega| <= offband_span * W.
inline LineSpectrum equispaced_comb(double W, int K, double offband_span, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("equispaced_comb: K must be >= 1");
  if (!(offband_span >= 1.0)) throw std::invalid_argument("equispaced_comb: offband_span must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  const double d = 2.0 * W / K;
  const double reach = offband_span * W * (1.0 + 1e-12);
  std::vector<Line> lines;
  const int extra = static_cast<int>(std::ceil((offband_span - 1.0) * W / d)) + 1;
  for (int k = -extra; k < K + extra; ++k) {
    const double omega = -W + (k + 0.5) * d;
    if (std::abs(omega) > reach) continue;
    lines.push_back({omega, std::polar(1.0, ph(rng))});
  }
  return LineSpectrum(std::move(lines));
}

// Matching ---------------------------------------------------------------------

struct MatchStats {
  std::optional<double> max_error;     // nullopt when any true line is unmatched
  std::optional<double> median_error;  // unmatched lines count as infinite
  int unmatched_true = 0;
  int unmatched_found = 0;
};

inline MatchStats match_stats(const std::vector<double>& truth, const std::vector<double>& found) {
  MatchStats s;
  const auto m = greedy_match(truth, found);
  std::vector<double> err;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] < 0) {
      ++s.unmatched_true;
      err.push_back(INFINITY);
    } else {
      err.push_back(std::abs(found[static_cast<std::size_t>(m[i])] - truth[i]));
    }
  }
  s.unmatched_found = static_cast<int>(found.size()) - (static_cast<int>(truth.size()) - s.unmatched_true);
  if (err.empty()) {
    s.max_error = s.median_error = 0.0;
    return s;
  }
  std::sort(err.begin(), err.end());
  if (std::isfinite(err.back())) s.max_error = err.back();
  const std::size_t k = err.size() / 2;
  const double med = err.size() % 2 ? err[k] : 0.5 * (err[k - 1] + err[k]);
  if (std::isfinite(med)) s.median_error = med;
  return s;
}

// Scan configuration and results ---------------------------------------------------

struct ScanConfig {
  std::string experiment;  // transition | sampling | noise
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  int trials = 1;
  std::uint64_t base_seed = 1;
  std::string output;                    // empty: keep in memory only
  std::map<std::string, double> params;  // unset entries take experiment defaults
  bool timing = false;                   // add a runtime column (breaks byte-reproducibility)

  const std::vector<double>* axis(const std::string& name) const {
    for (const auto& [n, v] : axes)
      if (n == name) return &v;
    return nullptr;
  }

  void validate() const {
    if (axes.empty()) throw std::invalid_argument("scan: no axes");
    std::set<std::string> seen;
    for (const auto& [n, v] : axes) {
      if (v.empty()) throw std::invalid_argument("scan: axis '" + n + "' is empty");
      if (!seen.insert(n).second) throw std::invalid_argument("scan: duplicate axis '" + n + "'");
      for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("scan: non-finite value on axis '" + n + "'");
    }
    if (trials < 1) throw std::invalid_argument("scan: trials must be >= 1");
  }
};

/// A metric value or a sentinel such as "unresolved" / "refused".
struct Metric {
  double value = 0.0;
  std::string sentinel;

  static Metric of(double v) { return {v, {}}; }
  static Metric of(const std::optional<double>& v, const char* sentinel) {
    return v ? Metric{*v, {}} : Metric{0.0, sentinel};
  }
  bool ok() const { return sentinel.empty(); }
  std::string str() const { return ok() ? format_double(value) : sentinel; }
  friend bool operator==(const Metric&, const Metric&) = default;
};

struct ScanRow {
  std::vector<double> axis_values;
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<Metric> metrics;
  std::string status;  // ok | unresolved | refused | failed
  double runtime = 0.0;
};

struct ScanResult {
  ScanConfig config;  // params resolved to concrete values
  std::vector<std::string> axis_names;
  std::vector<std::string> metric_names;
  std::vector<ScanRow> rows;
  std::string version = kArtifactVersion;
  std::size_t resumed = 0;  // cells taken from an earlier run

  std::size_t column(const std::string& metric) const {
    for (std::size_t i = 0; i < metric_names.size(); ++i)
      if (metric_names[i] == metric) return i;
    throw std::out_of_range("scan: no metric '" + metric + "'");
  }
  std::size_t axis_index(const std::string& name) const {
    for (std::size_t i = 0; i < axis_names.size(); ++i)
      if (axis_names[i] == name) return i;
    throw std::out_of_range("scan: no axis '" + name + "'");
  }

  std::string csv_header() const {
    std::string s;
    for (const auto& a : axis_names) s += a + ",";
    s += "trial,seed";
    for (const auto& m : metric_names) s += "," + m;
    s += ",status";
    if (config.timing) s += ",runtime_s";
    return s;
  }

  std::string csv_line(const ScanRow& r) const {
    std::string s;
    for (double v : r.axis_values) s += format_double(v) + ",";
    s += std::to_string(r.trial) + "," + std::to_string(r.seed);
    for (const auto& m : r.metrics) s += "," + m.str();
    s += "," + r.status;
    if (config.timing) s += "," + format_double(r.runtime);
    return s;
  }

  void write_csv(std::ostream& out) const {
    out << csv_header() << '\n';
    for (const auto& r : rows) out << csv_line(r) << '\n';
  }

  nlohmann::json config_echo() const {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& [n, v] : config.axes) axes.push_back({{"name", n}, {"values", v}});
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : config.params) params[k] = v;
    return {{"experiment", config.experiment},
            {"axes", axes},
            {"trials", config.trials},
            {"seed", config.base_seed},
            {"params", params},
            {"timing", config.timing},
            {"metrics", metric_names},
            {"rows", rows.size()},
            {"version", version}};
  }
};

/// JSON config: {"experiment": .., "axes": {"T": [..]} or [{"name":..,"values":..}],
/// "trials": .., "seed": .., "params": {..}, "timing": false}.
inline ScanConfig scan_config_from_json(const nlohmann::json& j) {
  ScanConfig c;
  c.experiment = j.value("experiment", std::string{});
  const auto& ax = j.at("axes");
  if (ax.is_object()) {
    for (const auto& [k, v] : ax.items()) c.axes.emplace_back(k, v.get<std::vector<double>>());
  } else {
    for (const auto& e : ax) c.axes.emplace_back(e.at("name").get<std::string>(), e.at("values").get<std::vector<double>>());
  }
  c.trials = j.value("trials", 1);
  c.base_seed = j.value("seed", std::uint64_t{1});
  c.timing = j.value("timing", false);
  if (j.contains("params"))
    for (const auto& [k, v] : j["params"].items()) c.params[k] = v.get<double>();
  if (j.contains("output")) c.output = j["output"].get<std::string>();
  return c;
}

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t cell_seed(std::uint64_t base, const std::vector<double>& values, int trial) {
  std::uint64_t h = splitmix(base);
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = splitmix(h ^ bits);
  }
  return splitmix(h ^ static_cast<std::uint64_t>(trial));
}

struct CellOutcome {
  std::vector<Metric> metrics;
  std::string status = "ok";
};

using CellFn = std::function<CellOutcome(const std::map<std::string, double>& cell, std::uint64_t seed)>;

struct Experiment {
  std::vector<std::string> metrics;
  CellFn run;
};

inline double param(const ScanConfig& c, const std::string& k) {
  const auto it = c.params.find(k);
  if (it == c.params.end()) throw std::logic_error("scan: parameter '" + k + "' not resolved");
  return it->second;
}

inline double cell_or(const std::map<std::string, double>& cell, const std::string& k, double fallback) {
  const auto it = cell.find(k);
  return it == cell.end() ? fallback : it->second;
}

inline void fill_defaults(ScanConfig& c, const std::map<std::string, double>& defaults) {
  for (const auto& [k, v] : c.params)
    if (!defaults.count(k)) throw std::invalid_argument("scan: unknown parameter '" + k + "' for " + c.experiment);
  for (const auto& [k, v] : defaults) c.params.emplace(k, v);
}

inline void require_axes(const ScanConfig& c, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> allowed) {
  for (const char* r : required)
    if (!c.axis(r)) throw std::invalid_argument("scan " + c.experiment + ": axis '" + r + "' is required");
  for (const auto& [n, v] : c.axes) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || n == a;
    if (!ok) throw std::invalid_argument("scan " + c.experiment + ": unknown axis '" + n + "'");
  }
}

// -- transition
inline Experiment transition_experiment(ScanConfig& c) {
  if (!c.axis("T") && !c.axis("T_pi")) throw std::invalid_argument("scan transition: axis 'T' or 'T_pi' is required");
  if (c.axis("T") && c.axis("T_pi")) throw std::invalid_argument("scan transition: give only one of 'T', 'T_pi'");
  require_axes(c, {"K"}, {"T", "T_pi", "K", "W"});
  fill_defaults(c, {{"W", 4.0}, {"offband_span", 1.0}, {"basis_extra", 10.0}});
  const ScanConfig cfg = c;
  return {{"max_error", "median_error", "raw_max_error", "rank", "n_recovered", "n_true"},
          [cfg](const std::map<std::string, double>& cell, std::uint64_t seed) {
            const double W = cell_or(cell, "W", param(cfg, "W"));
            const double T = cell.count("T") ? cell.at("T") : cell.at("T_pi") * std::numbers::pi;
            const int K = static_cast<int>(std::lround(cell.at("K")));
            const auto spec = equispaced_comb(W, K, param(cfg, "offband_span"), seed);
            const ObservationWindow win{T, 0.0, W};
            const int nb = static_cast<int>(std::ceil(2.0 * win.c() / std::numbers::pi - 1e-12)) +
                           static_cast<int>(param(cfg, "basis_extra"));
            const auto p = assemble(spec, win, cached_basis(win.c(), nb));
            const auto r = solve(p);
            std::vector<double> truth;
            for (const auto& l : spec.lines())
              if (std::abs(l.omega) <= W) truth.push_back(l.omega);
            const auto st = match_stats(truth, r.omegas);
            // accuracy of the eigenvalues themselves, before the admissibility filters
            std::vector<double> all = r.omegas;
            for (const auto& d : r.discarded) all.push_back(d.omega.real());
            const auto raw = match_stats(truth, all);
            CellOutcome out;
            out.metrics = {Metric::of(st.max_error, "unresolved"), Metric::of(st.median_error, "unresolved"),
                           Metric::of(raw.max_error, "unresolved"), Metric::of(r.rank), Metric::of(static_cast<double>(r.size())),
                           Metric::of(static_cast<double>(truth.size()))};
            if (!st.max_error) out.status = "unresolved";
            return out;
          }};
}

// -- sampling
inline Experiment sampling_experiment(ScanConfig& c) {
  if (!c.axis("c") && !c.axis("W")) throw std::invalid_argument("scan sampling: axis 'c' or 'W' is required");
  if (c.axis("c") && c.axis("W")) throw std::invalid_argument("scan sampling: give only one of 'c', 'W'");
  require_axes(c, {"extra"}, {"c", "W", "extra"});
  fill_defaults(c, {{"T", 1.0}, {"pulses", 3.0}, {"eval_points", 2001.0}, {"eval_fraction", 0.9}});
  const ScanConfig cfg = c;
  return {{"prolate_error", "sinc_error", "n_samples", "required"},
          [cfg](const std::map<std::string, double>& cell, std::uint64_t seed) {
            const double T = param(cfg, "T");
            const double W = cell.count("W") ? cell.at("W") : cell.at("c") / T;
            const BandWindow win{W, T};
            const int need = required_sample_count(win);
            const int n = need + static_cast<int>(std::lround(cell.at("extra")));
            CellOutcome out;
            if (n < 1) {
              out.metrics = {Metric{0.0, "refused"}, Metric{0.0, "refused"}, Metric::of(n), Metric::of(need)};
              out.status = "refused";
              return out;
            }
            const auto sig = random_pulses(W, T, static_cast<int>(param(cfg, "pulses")), seed);
            const auto rec = sample(sig, centered_grid(n, std::numbers::pi / W));
            const int m = static_cast<int>(param(cfg, "eval_points"));
            const double a = param(cfg, "eval_fraction") * T;
            auto err = [&](const auto& f) {
              double e = 0.0, norm = 0.0;
              for (int i = 0; i < m; ++i) {
                const double t = -a + 2.0 * a * i / (m - 1.0);
                const cplx v = sig.value(t);
                norm = std::max(norm, std::abs(v));
                e = std::max(e, std::abs(f.value(t) - v));
              }
              return norm > 0.0 ? e / norm : e;
            };
            const double es = err(sinc_interpolate(rec, win));
            Metric mp;
            try {
              const auto basis = cached_basis(win.c(), default_basis_size(win.c()));
              mp = Metric::of(err(prolate_interpolate(rec, win, basis)));
            } catch (const std::invalid_argument&) {
              mp = {0.0, "refused"};
              out.status = "refused";
            }
            out.metrics = {mp, Metric::of(es), Metric::of(n), Metric::of(need)};
            return out;
          }};
}

// -- noise
inline Experiment noise_experiment(ScanConfig& c) {
  if (!c.axis("sigma") && !c.axis("M")) throw std::invalid_argument("scan noise: axis 'sigma' or 'M' is required");
  if (c.axis("sigma") && c.axis("M")) throw std::invalid_argument("scan noise: give only one of 'sigma', 'M'");
  require_axes(c, {}, {"sigma", "M", "K", "margin"});
  fill_defaults(c, {{"W", 3.0}, {"T", 4.0}, {"K", 3.0}, {"margin", 2.0}, {"h", 0.25}, {"span", 2.5}, {"kappa", 5.0}});
  const ScanConfig cfg = c;
  return {{"max_error", "median_error", "rank", "rank_ok", "n_recovered", "spurious"},
          [cfg](const std::map<std::string, double>& cell, std::uint64_t seed) {
            const double W = param(cfg, "W"), T = param(cfg, "T");
            const int K = static_cast<int>(std::lround(cell_or(cell, "K", param(cfg, "K"))));
            const double sep = cell_or(cell, "margin", param(cfg, "margin")) * std::numbers::pi / T;
            const bool shots = cell.count("M") > 0;
            // shot noise needs |S| <= 1
            const double amp = shots ? 1.0 / K : 1.0;
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
            std::vector<Line> lines;
            for (int k = 0; k < K; ++k) lines.push_back({(k - 0.5 * (K - 1)) * sep, std::polar(amp, ph(rng))});
            const LineSpectrum spec(lines);
            for (const auto& l : spec.lines())
              if (std::abs(l.omega) > W) throw std::invalid_argument("scan noise: lines do not fit in the band");

            NoiseModel noise;
            noise.seed = splitmix(seed ^ 0x5eedull);
            if (shots) {
              noise.kind = ShotNoise{static_cast<std::int64_t>(std::llround(cell.at("M")))};
            } else if (cell.at("sigma") > 0.0) {
              noise.kind = IidGaussian{cell.at("sigma")};
            }
            const double span = param(cfg, "span") * T;
            const int n = static_cast<int>(std::lround(2.0 * span / param(cfg, "h"))) + 1;
            const auto rec = sample(spec, uniform_grid(-span, span, n), noise);
            const ObservationWindow win{T, 0.0, W};
            const auto p = assemble(rec, win, cached_basis(win.c(), default_nbasis(win)));
            SolveOptions so;
            so.rank.kappa = param(cfg, "kappa");
            const auto r = solve(p, so);
            std::vector<double> truth;
            for (const auto& l : spec.lines()) truth.push_back(l.omega);
            const auto st = match_stats(truth, r.omegas);
            CellOutcome out;
            out.metrics = {Metric::of(st.max_error, "unresolved"),
                           Metric::of(st.median_error, "unresolved"),
                           Metric::of(r.rank),
                           Metric::of(r.rank == K ? 1.0 : 0.0),
                           Metric::of(static_cast<double>(r.size())),
                           Metric::of(static_cast<double>(st.unmatched_found))};
            if (!st.max_error) out.status = "unresolved";
            return out;
          }};
}

inline Experiment make_experiment(ScanConfig& c) {
  if (c.experiment == "transition") return transition_experiment(c);
  if (c.experiment == "sampling") return sampling_experiment(c);
  if (c.experiment == "noise") return noise_experiment(c);
  throw std::invalid_argument("scan: unknown experiment '" + c.experiment + "'");
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

inline std::string row_key(const std::vector<double>& values, std::uint64_t seed) {
  std::string k;
  for (double v : values) k += format_double(v) + ",";
  return k + std::to_string(seed);
}

/// Rows of an earlier run with the same header; anything else is ignored.
inline void load_rows(const std::string& path, const ScanResult& shape, std::map<std::string, ScanRow>& into) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  if (!std::getline(in, line) || line != shape.csv_header()) return;
  const std::size_t na = shape.axis_names.size(), nm = shape.metric_names.size();
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    if (cells.size() != na + 2 + nm + 1 + (shape.config.timing ? 1 : 0)) continue;  // torn write
    try {
      ScanRow r;
      for (std::size_t i = 0; i < na; ++i) r.axis_values.push_back(std::stod(cells[i]));
      r.trial = std::stoi(cells[na]);
      r.seed = std::stoull(cells[na + 1]);
      for (std::size_t i = 0; i < nm; ++i) {
        const auto& s = cells[na + 2 + i];
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        r.metrics.push_back(end && *end == '\0' && !s.empty() ? Metric::of(v) : Metric{0.0, s});
      }
      r.status = cells[na + 2 + nm];
      if (shape.config.timing) r.runtime = std::stod(cells.back());
      into[row_key(r.axis_values, r.seed)] = std::move(r);
    } catch (const std::exception&) {
    }
  }
}

}  // namespace detail

/// Thread count: PROLATE_THREADS if set and positive, else hardware concurrency.
inline int scan_threads() {
  if (const char* e = std::getenv("PROLATE_THREADS")) {
    const int n = std::atoi(e);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs (or resumes) a scan. Cells that throw are recorded with status
/// "failed" and sentinel metrics; only I/O problems throw out of here.
inline ScanResult run_scan(ScanConfig cfg) {
  cfg.validate();
  auto exp = detail::make_experiment(cfg);

  ScanResult res;
  res.config = cfg;
  for (const auto& [n, v] : cfg.axes) res.axis_names.push_back(n);
  res.metric_names = exp.metrics;

  // cartesian product x trials
  struct Cell {
    std::vector<double> values;
    int trial;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> idx(cfg.axes.size(), 0);
  for (;;) {
    std::vector<double> v;
    for (std::size_t a = 0; a < cfg.axes.size(); ++a) v.push_back(cfg.axes[a].second[idx[a]]);
    for (int t = 0; t < cfg.trials; ++t) cells.push_back({v, t, detail::cell_seed(cfg.base_seed, v, t)});
    std::size_t a = 0;
    while (a < idx.size() && ++idx[a] == cfg.axes[a].second.size()) idx[a++] = 0;
    if (a == idx.size()) break;
  }

  std::map<std::string, ScanRow> done;
  const std::string partial = cfg.output.empty() ? std::string{} : cfg.output + ".partial";
  if (!cfg.output.empty()) {
    detail::load_rows(cfg.output, res, done);
    detail::load_rows(partial, res, done);
  }
  std::vector<ScanRow> rows;
  std::vector<const Cell*> todo;
  for (const auto& c : cells) {
    const auto it = done.find(detail::row_key(c.values, c.seed));
    if (it != done.end() && it->second.trial == c.trial) {
      rows.push_back(it->second);
      ++res.resumed;
    } else {
      todo.push_back(&c);
    }
  }

  std::ofstream progress;
  if (!partial.empty() && !todo.empty()) {
    const bool fresh = !std::filesystem::exists(partial) || res.resumed == 0;
    progress.open(partial, fresh ? std::ios::trunc : std::ios::app);
    if (!progress) throw std::runtime_error("cannot open " + partial + " for writing");
    if (fresh) progress << res.csv_header() << '\n' << std::flush;
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const Cell& c = *todo[i];
      std::map<std::string, double> named;
      for (std::size_t a = 0; a < c.values.size(); ++a) named[res.axis_names[a]] = c.values[a];
      ScanRow r{c.values, c.trial, c.seed, {}, "ok", 0.0};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        auto o = exp.run(named, c.seed);
        r.metrics = std::move(o.metrics);
        r.status = std::move(o.status);
      } catch (const std::exception&) {
        r.metrics.assign(res.metric_names.size(), Metric{0.0, "failed"});
        r.status = "failed";
      }
      r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard lock(mu);
      if (progress.is_open()) progress << res.csv_line(r) << '\n' << std::flush;
      rows.push_back(std::move(r));
    }
  };
  const int nt = std::min<int>(scan_threads(), static_cast<int>(std::max<std::size_t>(todo.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) {
    if (a.axis_values != b.axis_values) return a.axis_values < b.axis_values;
    return a.trial < b.trial;
  });
  res.rows = std::move(rows);

  if (!cfg.output.empty()) {
    {
      std::ofstream out(cfg.output);
      if (!out) throw std::runtime_error("cannot open " + cfg.output + " for writing");
      res.write_csv(out);
      if (!out) throw std::runtime_error("write failed: " + cfg.output);
    }
    write_json_file(cfg.output + ".json", res.config_echo());
    progress.close();
    std::error_code ec;
    std::filesystem::remove(partial, ec);
  }
  return res;
}

inline ScanResult scan_transition(ScanConfig cfg) {
  cfg.experiment = "transition";
  return run_scan(std::move(cfg));
}
inline ScanResult scan_sampling(ScanConfig cfg) {
  cfg.experiment = "sampling";
  return run_scan(std::move(cfg));
}
inline ScanResult scan_noise(ScanConfig cfg) {
  cfg.experiment = "noise";
  return run_scan(std::move(cfg));
}

}  // namespace prolate
