// prolate: command-line front end.
//
//   prolate pswf   --c 10 --n 12 [--dump table.csv]
//   prolate synth  --spec spec.json --tmin -8 --tmax 8 --n 200 [--noise gaussian:1e-3] [--seed 1] --out s.csv
//   prolate interp --method prolate|sinc --samples s.csv --W 4 --T 2 --eval-grid out.csv
//   prolate solve  (--samples s.csv | --spec spec.json) --W 4 --T 2 [--omega0 0] --out spectrum.json
//   prolate qpd    --ham random:16:seed7 --psi0 random:seed3 --W 2.5 --T 40 [--shots M] --out report.json
//   prolate scan   transition|sampling|noise --config scan.json --out results.csv

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "prolate/experiments.hpp"
#include "prolate/io.hpp"
#include "prolate/quantum.hpp"

using namespace prolate;

namespace {

// "none" | "gaussian:<sigma>" | "growing:<sigma>:<rate>" | "shots:<M>"
NoiseModel parse_noise(const std::string& s, std::uint64_t seed) {
  NoiseModel m;
  m.seed = seed;
  const auto p = detail::split(s, ':');
  if (p.empty() || p[0] == "none") return m;
  if (p[0] == "gaussian" && p.size() == 2) m.kind = IidGaussian{std::stod(p[1])};
  else if (p[0] == "growing" && p.size() == 3) m.kind = GrowingGaussian{std::stod(p[1]), std::stod(p[2])};
  else if (p[0] == "shots" && p.size() == 2) m.kind = ShotNoise{std::stoll(p[1])};
  else throw std::invalid_argument("bad --noise '" + s + "' (none | gaussian:s | growing:s:r | shots:M)");
  m.validate();
  return m;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  return file;
}

void emit_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f;
  open_out(path, f) << j.dump(2) << '\n';
}

nlohmann::json lines_json(const std::vector<double>& omegas, const std::vector<cplx>& alphas,
                          const std::vector<double>& residuals) {
  auto arr = nlohmann::json::array();
  for (std::size_t k = 0; k < omegas.size(); ++k)
    arr.push_back({{"omega", omegas[k]}, {"re", alphas[k].real()}, {"im", alphas[k].imag()}, {"residual", residuals[k]}});
  return arr;
}

nlohmann::json discarded_json(const std::vector<DiscardedEigenvalue>& d) {
  auto arr = nlohmann::json::array();
  for (const auto& x : d)
    arr.push_back({{"omega_re", x.omega.real()}, {"omega_im", x.omega.imag()}, {"residual", x.residual}, {"reason", x.reason}});
  return arr;
}

// --- pswf
int run_pswf(double c, int n, int points, const std::string& dump) {
  const auto b = build_basis(c, n);
  std::ofstream f;
  auto& out = open_out(dump, f);
  out << "n,chi,lambda";
  std::vector<double> xs;
  for (int i = 0; i < points; ++i) {
    xs.push_back(points == 1 ? 0.0 : -1.0 + 2.0 * i / (points - 1.0));
    out << ",x=" << format_double(xs.back());
  }
  out << '\n';
  for (int k = 0; k < n; ++k) {
    out << k << ',' << format_double(b.chi()[k]) << ',' << format_double(b.lambda()[k]);
    for (double x : xs) out << ',' << format_double(b.evaluate(k, x));
    out << '\n';
  }
  return 0;
}

// --- synth
int run_synth(const std::string& spec_path, double tmin, double tmax, int n, const std::string& noise,
              std::uint64_t seed, const std::string& out_path) {
  const auto spec = line_spectrum_from_json(read_json_file(spec_path));
  const auto rec = sample(spec, uniform_grid(tmin, tmax, n), parse_noise(noise, seed));
  std::ofstream f;
  write_samples_csv(open_out(out_path, f), rec);
  return 0;
}

// --- interp
struct InterpArgs {
  std::string method = "prolate", samples, out;
  double W = 0, T = 0, center = 0;
  int eval_n = 201;
  std::optional<double> eval_min, eval_max;
};

int run_interp(const InterpArgs& a) {
  const auto rec = read_samples_csv(a.samples);
  const BandWindow win{a.W, a.T};
  const double lo = a.eval_min.value_or(a.center - a.T), hi = a.eval_max.value_or(a.center + a.T);
  const auto grid = uniform_grid(lo, hi, a.eval_n);
  std::ofstream f;
  auto& out = open_out(a.out, f);
  out << "t,re,im,extrapolated\n";
  auto write = [&](const auto& interp) {
    for (double t : grid) {
      const cplx v = interp.value(t);
      out << format_double(t) << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << ','
          << (interp.is_extrapolation(t) ? 1 : 0) << '\n';
    }
  };
  if (a.method == "prolate") {
    auto basis = std::make_shared<const PswfBasis>(build_basis(win.c(), default_basis_size(win.c())));
    const auto p = prolate_interpolate(rec, win, basis, a.center);
    std::cerr << "prolate fit: " << basis->size() << " PSWFs, condition " << p.condition() << '\n';
    write(p);
  } else if (a.method == "sinc") {
    write(sinc_interpolate(rec, win));
  } else {
    throw std::invalid_argument("--method must be prolate or sinc");
  }
  return 0;
}

// --- solve
struct SolveArgs {
  std::string samples, spec, out;
  double W = 0, T = 0, omega0 = 0;
  std::optional<int> nbasis;
  std::optional<double> noise_floor, interp_band;
  bool noisy = false;
};

int run_solve(const SolveArgs& a) {
  const ObservationWindow win{a.T, a.omega0, a.W};
  win.validate();
  const auto basis = detail::cached_basis(win.c(), a.nbasis.value_or(default_nbasis(win)));
  SpectralProblem p;
  std::optional<SampleRecord> rec;
  if (!a.samples.empty()) {
    rec = read_samples_csv(a.samples);
    AssemblyOptions opt;
    opt.interp_band = a.interp_band;
    p = assemble(*rec, win, basis, opt);
    if (a.noisy) p.noisy = true;
  } else {
    p = assemble(line_spectrum_from_json(read_json_file(a.spec)), win, basis);
  }
  SolveOptions so;
  so.rank.noise_floor = a.noise_floor;
  if (a.noisy) so.rank.noisy = true;
  const auto r = solve(p, so);

  nlohmann::json j;
  j["rank"] = r.rank;
  j["lines"] = lines_json(r.omegas, r.alphas, r.residuals);
  j["discarded"] = discarded_json(r.discarded);
  j["delta_eff"] = r.delta_eff_est;
  j["capacity_T_over_pi"] = r.capacity;
  j["threshold"] = r.threshold;
  j["residual_tolerance"] = r.residual_tolerance;
  j["basis"] = p.basis_id;
  j["assembly"] = to_string(p.assembly);
  j["noisy"] = p.noisy;
  auto sv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) sv.push_back(r.singular_values[i]);
  j["singular_values"] = sv;
  if (rec && !r.omegas.empty()) {
    // sample-based amplitudes alongside the pencil ones
    const auto fit = recover_amplitudes(*rec, r.omegas);
    auto amps = nlohmann::json::array();
    for (const auto& x : fit.alphas) amps.push_back({{"re", x.real()}, {"im", x.imag()}});
    j["sample_fit_amplitudes"] = amps;
    j["sample_fit_condition"] = fit.condition;
  }
  emit_json(a.out, j);
  return 0;
}

// --- qpd
int run_qpd(const QpdConfig& cfg, const std::string& out) {
  const auto h = build_hamiltonian(cfg.hamiltonian);
  const auto s = build_state(cfg.psi0, h);
  const auto rep = qpd_pipeline(h, s, cfg);
  nlohmann::json j;
  j["hamiltonian"] = cfg.hamiltonian;
  j["psi0"] = cfg.psi0;
  j["omega0"] = cfg.omega0;
  j["W"] = cfg.W;
  j["T"] = cfg.T;
  j["n_samples"] = rep.n_samples;
  j["shots"] = cfg.shots ? nlohmann::json(cfg.shots->shots) : nlohmann::json(nullptr);
  j["total_time"] = rep.total_time;
  j["rank"] = rep.rank;
  j["discarded"] = rep.discarded;
  j["lines"] = lines_json(rep.omegas, rep.alphas, rep.residuals);
  auto truth = nlohmann::json::array();
  for (const auto& l : rep.truth) {
    nlohmann::json e = {{"energy", l.energy}, {"weight", l.weight}};
    if (l.recovered) {
      e["recovered"] = *l.recovered;
      e["error"] = l.error();
    } else {
      e["recovered"] = "unresolved";
      e["error"] = "unresolved";
    }
    truth.push_back(e);
  }
  j["truth"] = truth;
  const double mx = rep.max_error(), md = rep.median_error();
  j["max_error"] = std::isfinite(mx) ? nlohmann::json(mx) : nlohmann::json("unresolved");
  j["median_error"] = std::isfinite(md) ? nlohmann::json(md) : nlohmann::json("unresolved");
  emit_json(out, j);
  return 0;
}

// --- scan
int run_scan_cmd(const std::string& experiment, const std::string& config, const std::string& out) {
  auto cfg = scan_config_from_json(read_json_file(config));
  if (!cfg.experiment.empty() && cfg.experiment != experiment)
    throw std::invalid_argument("config is for experiment '" + cfg.experiment + "', not '" + experiment + "'");
  cfg.experiment = experiment;
  if (!out.empty()) cfg.output = out;
  if (cfg.output.empty()) throw std::invalid_argument("scan: --out is required");
  const auto r = run_scan(cfg);
  std::size_t failed = 0, unresolved = 0, refused = 0;
  for (const auto& row : r.rows) {
    failed += row.status == "failed";
    unresolved += row.status == "unresolved";
    refused += row.status == "refused";
  }
  std::cerr << "scan " << experiment << ": " << r.rows.size() << " rows (" << r.resumed << " resumed), " << unresolved
            << " unresolved, " << refused << " refused, " << failed << " failed -> " << cfg.output << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prolate spectral estimation toolkit"};
  app.require_subcommand(1);

  // pswf
  double c = 0;
  int n = 0, points = 21;
  std::string dump;
  auto* pswf = app.add_subcommand("pswf", "PSWF table: n, chi, lambda, psi_n on an x grid");
  pswf->add_option("--c", c, "bandwidth parameter c")->required();
  pswf->add_option("--n", n, "number of functions")->required();
  pswf->add_option("--points", points, "x grid points on [-1, 1]");
  pswf->add_option("--dump", dump, "CSV output (default stdout)");

  // synth
  std::string spec_path, noise = "none", out;
  double tmin = 0, tmax = 0;
  int ns = 0;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "sample a line spectrum");
  synth->add_option("--spec", spec_path, "spectrum JSON")->required();
  synth->add_option("--tmin", tmin)->required();
  synth->add_option("--tmax", tmax)->required();
  synth->add_option("--n", ns, "number of samples")->required();
  synth->add_option("--noise", noise, "none | gaussian:s | growing:s:r | shots:M");
  synth->add_option("--seed", seed);
  synth->add_option("--out", out, "samples CSV (default stdout)");

  // interp
  InterpArgs ia;
  auto* interp = app.add_subcommand("interp", "reconstruct a band-limited signal from samples");
  interp->add_option("--method", ia.method)->check(CLI::IsMember({"prolate", "sinc"}));
  interp->add_option("--samples", ia.samples)->required();
  interp->add_option("--W", ia.W)->required();
  interp->add_option("--T", ia.T)->required();
  interp->add_option("--center", ia.center);
  interp->add_option("--eval-grid", ia.out, "output CSV t,re,im,extrapolated (default stdout)");
  interp->add_option("--eval-n", ia.eval_n);
  interp->add_option("--eval-min", ia.eval_min);
  interp->add_option("--eval-max", ia.eval_max);

  // solve
  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "recover frequencies and amplitudes");
  auto* o_samples = solve_cmd->add_option("--samples", sa.samples, "samples CSV");
  auto* o_spec = solve_cmd->add_option("--spec", sa.spec, "spectrum JSON (analytic assembly)");
  o_samples->excludes(o_spec);
  solve_cmd->add_option("--omega0", sa.omega0);
  solve_cmd->add_option("--W", sa.W)->required();
  solve_cmd->add_option("--T", sa.T)->required();
  solve_cmd->add_option("--nbasis", sa.nbasis);
  solve_cmd->add_option("--noise-floor", sa.noise_floor, "absolute singular-value threshold");
  solve_cmd->add_option("--interp-band", sa.interp_band, "record-path interpolation band (default pi/(2h))");
  solve_cmd->add_flag("--noisy", sa.noisy, "treat input as noisy (noise-scaled rank and filters)");
  solve_cmd->add_option("--out", sa.out, "spectrum JSON (default stdout)");

  // qpd
  QpdConfig qc;
  std::optional<std::int64_t> shots;
  std::string qout;
  auto* qpd = app.add_subcommand("qpd", "quantum prolate diagonalization on a simulated system");
  qpd->add_option("--ham", qc.hamiltonian, "random:d:seedN | heis:n:J=..:h=.. | file:path");
  qpd->add_option("--psi0", qc.psi0, "random:seedN | basis:k | eigen:k");
  qpd->add_option("--omega0", qc.omega0);
  qpd->add_option("--W", qc.W);
  qpd->add_option("--T", qc.T);
  qpd->add_option("--span", qc.span, "record covers [-span T, span T]");
  qpd->add_option("--n-samples", qc.n_samples, "0: spacing pi/(3W)");
  qpd->add_option("--shots", shots, "Hadamard-test shots per time point");
  qpd->add_option("--seed", qc.noise_seed);
  qpd->add_option("--alpha-min", qc.alpha_min, "lines below this weight are not scored");
  qpd->add_option("--out", qout, "report JSON (default stdout)");

  // scan
  std::string experiment, config, sout;
  auto* scan = app.add_subcommand("scan", "parameter scans; thread count from PROLATE_THREADS");
  scan->add_option("experiment", experiment)->required()->check(CLI::IsMember({"transition", "sampling", "noise"}));
  scan->add_option("--config", config)->required();
  scan->add_option("--out", sout, "results CSV (config echo goes to <out>.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pswf) return run_pswf(c, n, points, dump);
    if (*synth) return run_synth(spec_path, tmin, tmax, ns, noise, seed, out);
    if (*interp) return run_interp(ia);
    if (*solve_cmd) {
      if (sa.samples.empty() == sa.spec.empty()) throw std::invalid_argument("solve: give exactly one of --samples, --spec");
      return run_solve(sa);
    }
    if (*qpd) {
      if (shots) qc.shots = ShotModel{*shots, qc.noise_seed};
      return run_qpd(qc, qout);
    }
    if (*scan) return run_scan_cmd(experiment, config, sout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
