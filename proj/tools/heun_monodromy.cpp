// heun-monodromy: solver, polynomial builder and verification front end.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rsjm/report.hpp"

namespace {

using rsjm::ExitCode;
using json = nlohmann::ordered_json;

struct Options {
  double ell = 2.0, mu = 0.3, omega = 1.0, phi0 = 0.5, tol = 1e-12;
  std::size_t grid = 1001;
  std::vector<double> rhos{0.8, 1.25};
  std::string out;
  std::vector<std::string> checks;
  // sweep
  std::vector<double> ells, mus, omegas, phi0s;
  // solve
  std::string circle_out;
  // poly
  bool check = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file '" + path + "'");
  f << text;
}

rsjm::RunConfig config_of(const Options& o) {
  rsjm::RunConfig c;
  c.ell = o.ell;
  c.mu = o.mu;
  c.omega = o.omega;
  c.phi0 = o.phi0;
  c.tol = o.tol;
  c.grid_size = o.grid;
  c.rhos = o.rhos;
  if (!o.checks.empty()) c.checks = {o.checks.begin(), o.checks.end()};
  c.validate();
  return c;
}

void add_point_flags(CLI::App* app, Options& o) {
  app->add_option("--ell", o.ell, "Order ell = B/omega");
  app->add_option("--mu", o.mu, "mu = A/(2 omega)");
  app->add_option("--omega", o.omega, "Drive frequency (> 0)");
  app->add_option("--phi0", o.phi0, "Initial phase phi(0)");
}

void add_run_flags(CLI::App* app, Options& o) {
  app->add_option("--tol", o.tol, "Phase tolerance in [1e-14, 1e-4]");
  app->add_option("--grid", o.grid, "Circle grid size (>= 101)");
  app->add_option("--rhos", o.rhos, "Ray radii in [0.2, 5]")->delimiter(',');
  app->add_option("--out", o.out, "Output file (default stdout)");
}

int cmd_solve(const Options& o) {
  const auto c = config_of(o);
  const auto path = rsjm::solve_phase(c.params(), c.phi0, c.tol);
  std::ostringstream csv;
  csv << "t,phi,P\n";
  const std::size_t n = c.grid_size;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = path.t_min() + (path.t_max() - path.t_min()) * static_cast<double>(i) / static_cast<double>(n - 1);
    const auto s = path.eval(t);
    csv << fmt(t) << ',' << fmt(s.phi) << ',' << fmt(s.P) << '\n';
  }
  if (!o.circle_out.empty()) {
    const auto th = rsjm::theta_pair_solve(path, std::max(c.tol, 1e-13));
    std::ostringstream cc;
    cc << "t,re_Phi,im_Phi,Psi,re_Theta,im_Theta,re_Theta_tilde,im_Theta_tilde\n";
    for (double t : rsjm::circle_grid(c.params().period(), n)) {
      const auto s = path.eval(t);
      const auto [a, b] = th.eval(t);
      const auto Phi = std::polar(1.0, s.phi);
      cc << fmt(t) << ',' << fmt(Phi.real()) << ',' << fmt(Phi.imag()) << ',' << fmt(std::exp(s.P)) << ',' << fmt(a.real())
         << ',' << fmt(a.imag()) << ',' << fmt(b.real()) << ',' << fmt(b.imag()) << '\n';
    }
    emit(cc.str(), o.circle_out);
  }
  emit(csv.str(), o.out);
  if (!o.out.empty()) {
    json s;
    json p;
    to_json(p, c.params());
    s["params"] = p;
    s["phi0"] = c.phi0;
    s["tol"] = c.tol;
    s["window"] = {path.t_min(), path.t_max()};
    s["err_est"] = path.err_est();
    s["accepted_steps"] = path.accepted_steps();
    s["phi_T"] = path.eval(c.params().period()).phi;
    s["rows"] = n;
    std::cout << s.dump(2) << '\n';
  }
  return 0;
}

int cmd_poly(const Options& o) {
  const double ell = o.ell;
  if (!(ell >= 1 && ell <= rsjm::max_order) || ell != std::floor(ell)) {
    throw UsageError("--ell must be an integer in [1, " + std::to_string(rsjm::max_order) + "]");
  }
  const auto d = rsjm::diagonal(static_cast<int>(ell));
  std::string text = rsjm::to_text(d);
  json j = rsjm::to_json(d);
  int code = 0;
  if (o.check) {
    const auto b = rsjm::poly_battery(static_cast<int>(ell));
    j["check"] = rsjm::to_json(b);
    code = b.passed() ? 0 : 1;
  }
  emit(text + j.dump(2) + "\n", o.out);
  return code;
}

int finish(const rsjm::RunOutcome& r, const std::string& out) {
  emit(r.report.dump(2) + "\n", out);
  return static_cast<int>(r.code);
}

int cmd_verify(const Options& o) { return finish(rsjm::run_checks(config_of(o)), o.out); }

// One battery, reported through its own schema (the battery detail) plus the
// point, pass flags and status.
int cmd_single(const Options& o, const char* check) {
  Options p = o;
  p.checks = {check};
  auto r = rsjm::run_checks(config_of(p));
  if (r.report["checks"].empty()) return finish(r, o.out);
  const auto& b = r.report["checks"][0];
  json j;
  j["params"] = r.report["params"];
  j["phi0"] = r.report["phi0"];
  j["tol"] = r.report["tol"];
  for (auto it = b["detail"].begin(); it != b["detail"].end(); ++it) j[it.key()] = it.value();
  j["measurements"] = b["measurements"];
  j["status"] = r.report["status"];
  emit(j.dump(2) + "\n", o.out);
  return static_cast<int>(r.code);
}

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HEUN_MONODROMY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw UsageError("HEUN_MONODROMY_THREADS must be a positive integer");
    n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

int cmd_sweep(const Options& o) {
  auto list = [](const std::vector<double>& v, double d) { return v.empty() ? std::vector<double>{d} : v; };
  std::vector<rsjm::RunConfig> points;
  for (double ell : list(o.ells, o.ell))
    for (double mu : list(o.mus, o.mu))
      for (double omega : list(o.omegas, o.omega))
        for (double phi0 : list(o.phi0s, o.phi0)) {
          Options p = o;
          p.ell = ell;
          p.mu = mu;
          p.omega = omega;
          p.phi0 = phi0;
          points.push_back(config_of(p));
        }

  std::vector<rsjm::RunOutcome> results(points.size());
  std::vector<std::string> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      try {
        results[i] = rsjm::run_checks(points[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned n = std::min<unsigned>(thread_cap(), static_cast<unsigned>(points.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  json arr = json::array();
  bool any_failed = false, any_excluded = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) throw UsageError(errors[i]);
    any_failed = any_failed || results[i].code == ExitCode::tolerance_failure;
    any_excluded = any_excluded || results[i].code == ExitCode::excluded_point;
    arr.push_back(results[i].report);
  }
  json j;
  j["points"] = arr;
  j["count"] = points.size();
  emit(j.dump(2) + "\n", o.out);
  if (any_failed) return 1;
  return any_excluded ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSJ phase equation: Riccati lift, monodromy and Heun-basis checks"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "Solve the phase equation; CSV t,phi,P");
  add_point_flags(solve, o);
  add_run_flags(solve, o);
  solve->add_option("--circle", o.circle_out, "Also write circle functions to this CSV");

  auto* poly = app.add_subcommand("poly", "Diagonal polynomial quadruple as canonical text and JSON");
  poly->add_option("--ell", o.ell, "Order (1..32)")->required();
  poly->add_option("--out", o.out, "Output file (default stdout)");
  poly->add_flag("--check", o.check, "Run the exact identity checks");

  auto* verify = app.add_subcommand("verify", "Run verification batteries");
  add_point_flags(verify, o);
  add_run_flags(verify, o);
  verify->add_option("--checks", o.checks, "Subset of ode,monodromy,poly-exact,heun,theorem2")->delimiter(',');

  auto* mono = app.add_subcommand("monodromy", "Monodromy formula against the period shift");
  add_point_flags(mono, o);
  add_run_flags(mono, o);

  auto* sqrtm = app.add_subcommand("sqrt-monodromy", "Square-root-of-monodromy transform checks");
  add_point_flags(sqrtm, o);
  add_run_flags(sqrtm, o);

  auto* sweep = app.add_subcommand("sweep", "Verify a grid of parameter points in parallel");
  sweep->add_option("--ell", o.ells, "Comma-separated values")->delimiter(',');
  sweep->add_option("--mu", o.mus, "Comma-separated values")->delimiter(',');
  sweep->add_option("--omega", o.omegas, "Comma-separated values")->delimiter(',');
  sweep->add_option("--phi0", o.phi0s, "Comma-separated values")->delimiter(',');
  add_run_flags(sweep, o);
  sweep->add_option("--checks", o.checks, "Subset of ode,monodromy,poly-exact,heun,theorem2")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::usage);
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*poly) return cmd_poly(o);
    if (*verify) return cmd_verify(o);
    if (*mono) return cmd_single(o, "monodromy");
    if (*sqrtm) return cmd_single(o, "theorem2");
    if (*sweep) return cmd_sweep(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const rsjm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.is_excluded_point()) return static_cast<int>(ExitCode::excluded_point);
    if (e.code() == rsjm::ErrorCode::tolerance_not_met) return static_cast<int>(ExitCode::tolerance_failure);
    return static_cast<int>(ExitCode::usage);
  }
  return static_cast<int>(ExitCode::usage);
}
