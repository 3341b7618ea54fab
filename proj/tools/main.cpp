#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pencil/asymptotics.hpp"
#include "pencil/forward.hpp"
#include "pencil/inverse.hpp"
#include "pencil/model.hpp"
#include "pencil/spectrum.hpp"
#include "pencil/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pencil;

namespace {

constexpr const char* kVersion = "pencilspec 0.1.0";
constexpr const char* kManifestName = "run_manifest.json";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// write-temp-then-rename so partial outputs never appear under their final name
void write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
  const fs::path tmp = dir / (".tmp." + name);
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParseError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, dir / name);
}

struct RunContext {
  fs::path out_dir;
  json manifest;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  RunContext(const std::string& out, json args) {
    out_dir = out;
    fs::create_directories(out_dir);
    manifest["tool"] = kVersion;
    manifest["invocation"] = std::move(args);
  }

  void emit(const std::string& name, const std::string& content) {
    std::string body = "# manifest: " + std::string(kManifestName) + "\n" + content;
    write_atomic(out_dir, name, body);
    outputs.push_back(name);
  }

  void finish() {
    manifest["outputs"] = outputs;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_atomic(out_dir, kManifestName, manifest.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  std::string config, out;
  int nmax = 10;
  double tol = 1e-11;
  bool complex_probe = false;
  bool no_audit = false;
};

int run_spectrum(const SpectrumArgs& a, const IntegratorSettings& fwd) {
  RunContext ctx(a.out, {{"command", "spectrum"},
                         {"config", a.config},
                         {"nmax", a.nmax},
                         {"tol", a.tol},
                         {"complex_probe", a.complex_probe},
                         {"audit", !a.no_audit},
                         {"rtol", fwd.rtol},
                         {"atol", fwd.atol},
                         {"max_step", fwd.max_step}});
  const auto spec = load_problem(a.config);
  SpectrumOptions opts;
  opts.fwd = fwd;
  opts.force_complex_probe = a.complex_probe;
  opts.audit = !a.no_audit;
  const auto sp = compute_spectrum(spec, a.nmax, a.tol, opts);

  std::ostringstream csv;
  csv << "n,re_lambda,im_lambda,residual,iterations,flags\n";
  for (const auto& e : sp.entries)
    csv << e.n << ',' << fmt(e.lambda.real()) << ',' << fmt(e.lambda.imag()) << ','
        << fmt(e.residual) << ',' << e.iterations << ','
        << (e.flags.empty() ? "ok" : e.flags) << '\n';
  ctx.emit("spectrum.csv", csv.str());
  ctx.manifest["complete"] = sp.complete;
  ctx.manifest["notes"] = sp.notes;
  ctx.finish();
  if (!sp.complete) {
    std::cerr << "ERROR 3 IncompleteSpectrum: found " << sp.entries.size() << " of " << a.nmax
              << " eigenvalues\n";
    return 3;
  }
  return 0;
}

// ------------------------------------------------------------------ charfn

struct CharfnArgs {
  std::string config, out;
  double lmin = 0.0, lmax = 10.0, im = 0.0;
  int samples = 101;
};

int run_charfn(const CharfnArgs& a, const IntegratorSettings& fwd) {
  if (a.samples < 2) throw ValidationError("charfn needs at least 2 samples");
  if (!(a.lmax > a.lmin)) throw ValidationError("charfn needs lmax > lmin");
  RunContext ctx(a.out, {{"command", "charfn"},
                         {"config", a.config},
                         {"lmin", a.lmin},
                         {"lmax", a.lmax},
                         {"samples", a.samples},
                         {"im", a.im},
                         {"rtol", fwd.rtol},
                         {"atol", fwd.atol}});
  const auto spec = load_problem(a.config);
  std::ostringstream csv;
  csv << "lambda,re_delta,im_delta,re_delta0,im_delta0\n";
  for (int i = 0; i < a.samples; ++i) {
    const double re = a.lmin + (a.lmax - a.lmin) * i / (a.samples - 1);
    const Complex lam(re, a.im);
    const Complex d = char_fn(spec, lam, fwd);
    const Complex d0 = char_fn0(spec, lam);
    csv << fmt(re) << ',' << fmt(d.real()) << ',' << fmt(d.imag()) << ',' << fmt(d0.real())
        << ',' << fmt(d0.imag()) << '\n';
  }
  ctx.emit("charfn.csv", csv.str());
  ctx.finish();
  return 0;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string config, config_b, out, suite = "all";
  int quad_n = 400;
};

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

void green_suite(const ProblemSpec& a, const ProblemSpec& b, int quad_n,
                 const IntegratorSettings& fwd, std::vector<CheckLine>& checks, RunContext& ctx) {
  std::ostringstream csv;
  csv << "re_lambda,im_lambda,residual\n";
  bool ok = true;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double re = 0.5 + (10.0 - 0.5) * i / 4.0;
      const double im = 0.5 * j / 4.0;
      const double r = green_identity_residual(a, b, Complex(re, im), quad_n, fwd);
      const double tol = 1e-7 * std::exp(im * kPi);
      csv << fmt(re) << ',' << fmt(im) << ',' << fmt(r) << '\n';
      worst = std::max(worst, r / tol);
      ok = ok && r <= tol;
    }
  }
  ctx.emit("green.csv", csv.str());
  checks.push_back({"green identity residual over the 5x5 lambda grid", ok,
                    "worst residual/tolerance = " + fmt(worst)});
}

void asymptotic_suite(const ProblemSpec& spec, const IntegratorSettings& fwd,
                      std::vector<CheckLine>& checks, RunContext& ctx) {
  const auto maps = PhaseMaps::of(spec);
  const auto co = AsymptoticCoefficients::of(spec);
  const bool pins = maps.k_plus(maps.a2) == maps.xi_plus(maps.a2) &&
                    maps.s_minus(maps.a2) == maps.xi_minus(maps.a2) &&
                    maps.xi_plus(maps.a2) + maps.beta * (kPi - maps.a2) == maps.k_plus(kPi);
  checks.push_back({"phase map pinning identities", pins, ""});
  const double sum_err = std::abs(co.beta1_plus + co.beta1_minus - spec.jump(0).alpha) +
                         std::abs(co.beta2_plus + co.beta2_minus - spec.jump(1).alpha);
  checks.push_back({"asymptotic coefficient sums", sum_err <= 1e-14, "error " + fmt(sum_err)});

  const double bound = std::abs(co.beta2_plus + co.gamma2_shift) +
                       std::abs(co.beta2_minus + co.gamma2_shift) +
                       std::abs(co.beta2_minus - co.gamma2_shift) +
                       std::abs(co.beta2_plus - co.gamma2_shift);
  bool growth_ok = true;
  for (double l = 0.0; l <= 60.0; l += 0.5)
    growth_ok = growth_ok && std::abs(char_fn0(spec, Complex(l))) <= bound + 1e-12;
  checks.push_back({"Delta0 growth bound on the real axis", growth_ok, ""});

  std::vector<double> ls;
  for (double l = 10.0; l <= 200.0; l += 10.0) ls.push_back(l);
  const auto rows = remainder_report(spec, ls, fwd);
  std::ostringstream csv;
  csv << "lambda,abs_diff,scaled_diff\n";
  for (const auto& r : rows)
    csv << fmt(r.lambda) << ',' << fmt(r.abs_diff) << ',' << fmt(r.scaled_diff) << '\n';
  ctx.emit("remainder.csv", csv.str());
  checks.push_back({"remainder report emitted (diagnostic, no threshold)", true,
                    std::to_string(rows.size()) + " rows"});
}

void volterra_suite(std::vector<CheckLine>& checks, RunContext& ctx) {
  VolterraProblem scalar;
  scalar.dimension = 1;
  scalar.grid_n = 1601;
  scalar.kernel = [](double, double, std::span<double> k) { k[0] = 1.0; };
  const auto res =
      volterra_trivial_check(scalar, [](double) { return std::vector<double>{1.0}; }, 20);
  bool ok = true;
  std::ostringstream csv;
  csv << "k,norm,bound\n";
  double bound = 1.0;
  for (int k = 0; k <= 20; ++k) {
    ok = ok && res.norm_history[static_cast<size_t>(k)] <= bound + 1e-12;
    csv << k << ',' << fmt(res.norm_history[static_cast<size_t>(k)]) << ',' << fmt(bound) << '\n';
    bound *= kHalfPi / (k + 1);
  }
  checks.push_back({"scalar unit kernel within (pi/2)^k/k! + 1e-12 for k <= 20", ok, ""});

  std::mt19937 rng(7);
  std::vector<double> table(9 * 64);
  for (auto& v : table) v = -0.25 + 0.5 * (static_cast<double>(rng()) / 4294967296.0);
  VolterraProblem mat;
  mat.dimension = 3;
  mat.grid_n = 401;
  mat.kernel = [table](double x, double t, std::span<double> k) {
    const auto ix = static_cast<size_t>(std::fmod(std::abs(x) * 31.0 + std::abs(t) * 17.0, 64.0));
    for (size_t j = 0; j < 9; ++j) k[j] = table[ix * 9 + j];
  };
  const auto r3 = volterra_trivial_check(
      mat, [](double) { return std::vector<double>{1.0, 1.0, 1.0}; }, 15);
  checks.push_back({"random bounded 3x3 kernel (seed 7) decays below 1e-10 in 15 iterations",
                    r3.final_norm < 1e-10, "final norm " + fmt(r3.final_norm)});
  ctx.emit("volterra.csv", csv.str());
}

int run_verify(const VerifyArgs& a, const IntegratorSettings& fwd) {
  RunContext ctx(a.out, {{"command", "verify"},
                         {"config", a.config},
                         {"config_b", a.config_b},
                         {"suite", a.suite},
                         {"quad_n", a.quad_n},
                         {"rtol", fwd.rtol},
                         {"atol", fwd.atol}});
  const auto spec = load_problem(a.config);
  const auto spec_b = a.config_b.empty() ? spec : load_problem(a.config_b);

  std::vector<CheckLine> checks;
  if (a.suite == "green" || a.suite == "all") green_suite(spec, spec_b, a.quad_n, fwd, checks, ctx);
  if (a.suite == "asymptotic" || a.suite == "all") asymptotic_suite(spec, fwd, checks, ctx);
  if (a.suite == "volterra" || a.suite == "all") volterra_suite(checks, ctx);

  bool all_ok = true;
  json report = json::array();
  for (const auto& c : checks) {
    all_ok = all_ok && c.pass;
    std::printf("%s  %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : "  -- ", c.detail.c_str());
    report.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  ctx.manifest["checks"] = report;
  ctx.finish();
  if (!all_ok) {
    std::cerr << "ERROR 4 SuiteFailure: one or more verify checks failed\n";
    return 4;
  }
  return 0;
}

// -------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string config, spectrum_csv, out;
  int basis_dim = 6;
  int n_eigen = 24;
  int multistart = 1;
  unsigned int seed = 42;
  double reg = 1e-8;
  double penalty = 0.0;
  int max_iter = 100;
  bool landscape = false;
};

Spectrum read_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spectrum file: " + path);
  Spectrum sp;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 4) throw ParseError("malformed spectrum row: " + line);
    SpectrumEntry e;
    try {
      e.n = std::stoi(fields[0]);
      e.lambda = Complex(std::stod(fields[1]), std::stod(fields[2]));
      e.residual = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw ParseError("malformed spectrum row: " + line);
    }
    sp.entries.push_back(e);
  }
  return sp;
}

int run_reconstruct(const ReconstructArgs& a, const IntegratorSettings& fwd) {
  RunContext ctx(a.out, {{"command", "reconstruct"},
                         {"config", a.config},
                         {"spectrum", a.spectrum_csv},
                         {"basis_dim", a.basis_dim},
                         {"n_eigen", a.n_eigen},
                         {"multistart", a.multistart},
                         {"seed", a.seed},
                         {"regularization", a.reg},
                         {"max_iter", a.max_iter},
                         {"rtol", fwd.rtol},
                         {"atol", fwd.atol}});
  const auto spec = load_problem(a.config);
  const auto target = read_spectrum_csv(a.spectrum_csv);

  ReconstructionConfig cfg;
  cfg.basis_dim = a.basis_dim;
  cfg.n_eigen = a.n_eigen;
  cfg.multistart = a.multistart;
  cfg.seed = a.seed;
  cfg.regularization = a.reg;
  cfg.continuity_penalty = a.penalty;
  cfg.max_iter = a.max_iter;
  cfg.forward = fwd;

  const ReconstructionReport rep =
      a.multistart >= 2 ? uniqueness_probe(spec.potentials(), spec, target, cfg)
                        : reconstruct(spec.potentials(), spec, target, cfg);

  if (a.landscape) {
    const auto scans = constants_probe(spec, target, 41, 0.2, fwd);
    std::ostringstream land;
    land << "axis,offset,objective\n";
    for (const auto& sc : scans)
      for (size_t i = 0; i < sc.offsets.size(); ++i)
        land << sc.axis << ',' << fmt(sc.offsets[i]) << ',' << fmt(sc.objective[i]) << '\n';
    ctx.emit("landscape.csv", land.str());
  }

  std::ostringstream coeffs;
  coeffs << "k,p_coeff,q_coeff\n";
  for (size_t k = 0; k < rep.p_coeffs.size(); ++k)
    coeffs << k << ',' << fmt(rep.p_coeffs[k]) << ',' << fmt(rep.q_coeffs[k]) << '\n';
  ctx.emit("recovered.csv", coeffs.str());

  if (a.multistart >= 2) {
    std::ostringstream dist;
    for (const auto& row : rep.multistart_distances) {
      for (size_t j = 0; j < row.size(); ++j) dist << (j ? "," : "") << fmt(row[j]);
      dist << '\n';
    }
    ctx.emit("distances.csv", dist.str());
  }

  json report;
  report["manifest"] = kManifestName;
  report["converged"] = rep.converged;
  report["final_residual"] = rep.final_residual;
  report["iterations"] = rep.iterations;
  report["jacobian_condition"] = rep.jacobian_condition;
  report["ill_conditioned"] = rep.ill_conditioned;
  report["hit_max_iterations"] = rep.hit_max_iterations;
  report["seed"] = rep.seed;
  report["objective_history"] = rep.objective_history;
  write_atomic(ctx.out_dir, "report.json", report.dump(2) + "\n");
  ctx.outputs.push_back("report.json");
  ctx.finish();

  if (!rep.converged) {
    std::cerr << "ERROR 5 NonConvergence: reconstruction did not converge\n";
    return 5;
  }
  return 0;
}

int classify_error(const Error& e) {
  const std::string& k = e.kind();
  if (k == "ParseError" || k == "ValidationError" || k == "SpecMismatch") return 1;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - spectral toolkit for a diffusion pencil with spectral-parameter jumps"};
  app.require_subcommand(1);

  SpectrumArgs sa;
  auto* sp = app.add_subcommand("spectrum", "enumerate eigenvalues");
  sp->add_option("--config", sa.config, "problem file")->required();
  sp->add_option("--nmax", sa.nmax, "number of eigenvalues")->required();
  sp->add_option("--tol", sa.tol, "refinement tolerance");
  sp->add_flag("--complex-probe", sa.complex_probe, "probe off-axis starts even when gamma = 0");
  sp->add_flag("--no-audit", sa.no_audit, "skip the argument-principle completeness audit");
  sp->add_option("--out", sa.out, "output directory")->required();
  IntegratorSettings sp_fwd{1e-12, 1e-14, kPi / 8.0};
  sp->add_option("--rtol", sp_fwd.rtol, "relative integrator tolerance");
  sp->add_option("--atol", sp_fwd.atol, "absolute integrator tolerance");
  sp->add_option("--max-step", sp_fwd.max_step, "integrator step ceiling");

  CharfnArgs ca;
  auto* cf = app.add_subcommand("charfn", "sample Delta and Delta0 on a lambda segment");
  cf->add_option("--config", ca.config)->required();
  cf->add_option("--lmin", ca.lmin)->required();
  cf->add_option("--lmax", ca.lmax)->required();
  cf->add_option("--samples", ca.samples)->required();
  cf->add_option("--im", ca.im, "imaginary part of the sweep line");
  cf->add_option("--out", ca.out)->required();
  IntegratorSettings cf_fwd;
  cf->add_option("--rtol", cf_fwd.rtol);
  cf->add_option("--atol", cf_fwd.atol);

  VerifyArgs va;
  auto* vf = app.add_subcommand("verify", "run the identity/asymptotic/volterra suites");
  vf->add_option("--config", va.config)->required();
  vf->add_option("--config-b", va.config_b, "second problem for the green suite");
  vf->add_option("--suite", va.suite)
      ->check(CLI::IsMember({"green", "asymptotic", "volterra", "all"}));
  vf->add_option("--quad-n", va.quad_n);
  vf->add_option("--out", va.out)->required();
  IntegratorSettings vf_fwd{1e-11, 1e-13, kPi / 8.0};
  vf->add_option("--rtol", vf_fwd.rtol);
  vf->add_option("--atol", vf_fwd.atol);

  ReconstructArgs ra;
  auto* rc = app.add_subcommand("reconstruct", "half-inverse recovery of the left potentials");
  rc->add_option("--config", ra.config)->required();
  rc->add_option("--spectrum", ra.spectrum_csv, "target spectrum CSV")->required();
  rc->add_option("--basis-dim", ra.basis_dim)->required();
  rc->add_option("--n-eigen", ra.n_eigen)->required();
  rc->add_option("--multistart", ra.multistart);
  rc->add_option("--seed", ra.seed);
  rc->add_option("--reg", ra.reg, "Tikhonov weight");
  rc->add_option("--penalty", ra.penalty, "continuity penalty at pi/2 (default off)");
  rc->add_option("--max-iter", ra.max_iter);
  rc->add_flag("--landscape", ra.landscape, "also scan the constants landscape");
  rc->add_option("--out", ra.out)->required();
  IntegratorSettings rc_fwd;
  rc->add_option("--rtol", rc_fwd.rtol);
  rc->add_option("--atol", rc_fwd.atol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help path
    std::cerr << "ERROR 1 UsageError: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*sp) return run_spectrum(sa, sp_fwd);
    if (*cf) return run_charfn(ca, cf_fwd);
    if (*vf) return run_verify(va, vf_fwd);
    if (*rc) return run_reconstruct(ra, rc_fwd);
  } catch (const Error& e) {
    const int code = classify_error(e);
    std::cerr << "ERROR " << code << " " << e.kind() << ": " << e.what() << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "ERROR 2 InternalError: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
