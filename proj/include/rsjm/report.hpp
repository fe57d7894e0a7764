#pragma once

// Verification batteries shared by the command-line front end and the
// acceptance suite. Each check carries its own budget; reports are ordered
// JSON with round-trip floats.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsjm/circle.hpp"
#include "rsjm/continuation.hpp"
#include "rsjm/heun_poly.hpp"
#include "rsjm/heun_transform.hpp"
#include "rsjm/monodromy.hpp"
#include "rsjm/phase.hpp"
#include "rsjm/sqrt_monodromy.hpp"

namespace rsjm {

enum class ExitCode : int { ok = 0, tolerance_failure = 1, excluded_point = 2, usage = 3 };

inline constexpr std::array<const char*, 5> check_names{"ode", "monodromy", "poly-exact", "heun", "theorem2"};

struct RunConfig {
  double ell = 2.0;
  double mu = 0.3;
  double omega = 1.0;
  double phi0 = 0.5;
  double tol = 1e-12;
  std::size_t grid_size = 1001;
  std::vector<double> rhos{0.8, 1.25};
  std::set<std::string> checks{check_names.begin(), check_names.end()};

  ModelParams params() const { return ModelParams::from_chart(ell, mu, omega); }

  void validate() const {
    if (!(tol >= min_phase_tol && tol <= max_phase_tol)) fail(ErrorCode::invalid_argument, "tol must lie in [1e-14, 1e-4]");
    if (grid_size < 101) fail(ErrorCode::invalid_argument, "grid must be at least 101");
    if (!std::isfinite(phi0)) fail(ErrorCode::invalid_argument, "phi0 must be finite");
    for (double r : rhos) {
      if (!(r >= 0.2 && r <= 5.0)) fail(ErrorCode::invalid_argument, "rhos must lie in [0.2, 5]");
    }
    for (const auto& c : checks) {
      if (std::find(check_names.begin(), check_names.end(), c) == check_names.end()) {
        fail(ErrorCode::invalid_argument, "unknown check '" + c + "'");
      }
    }
    (void)params();
  }
};

/// One budgeted scalar. `upper` means value ≤ budget passes; otherwise value ≥ budget.
struct Measurement {
  std::string name;
  double value = 0.0;
  double budget = 0.0;
  bool upper = true;
  bool passed() const { return std::isfinite(value) && (upper ? value <= budget : value >= budget); }
};

inline nlohmann::ordered_json to_json(const Measurement& m) {
  return {{"name", m.name}, {"value", m.value}, {"budget", m.budget},
          {"kind", m.upper ? "max" : "min"}, {"passed", m.passed()}};
}

struct Battery {
  std::string name;
  std::vector<Measurement> items;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();

  void add(std::string n, double v, double budget, bool upper = true) { items.push_back({std::move(n), v, budget, upper}); }
  bool passed() const {
    return std::all_of(items.begin(), items.end(), [](const Measurement& m) { return m.passed(); });
  }
};

inline nlohmann::ordered_json to_json(const Battery& b) {
  nlohmann::ordered_json j;
  j["name"] = b.name;
  j["passed"] = b.passed();
  auto a = nlohmann::ordered_json::array();
  for (const auto& m : b.items) a.push_back(to_json(m));
  j["measurements"] = a;
  if (!b.detail.empty()) j["detail"] = b.detail;
  return j;
}

// ---------------------------------------------------------------- batteries

inline Battery ode_battery(const PhasePath& path, std::size_t grid_size) {
  Battery b{"ode", {}, {}};
  const auto& m = path.params();
  const double T = m.period();
  double resid = 0.0, shifted = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = path.t_min() + (path.t_max() - path.t_min()) * static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const auto s = path.eval(t);
    resid = std::max(resid, std::abs(path.interpolant_derivative(t).phi - m.phase_rhs(t, s.phi)));
  }
  // φ(t + T) solves the same equation.
  for (double t : lifted_grid(T, grid_size)) {
    const auto s = path.eval(t + T);
    const double dphi = path.interpolant_derivative(t + T).phi;
    shifted = std::max(shifted, std::abs(dphi - m.phase_rhs(t, s.phi)));
  }
  b.add("err_est", path.err_est(), 1e3 * path.tol());
  b.add("interpolant_residual", resid, 10.0 * path.tol());
  b.add("time_translated_residual", shifted, 10.0 * path.tol());
  b.detail["phi_T"] = path.eval(T).phi;
  b.detail["P_T"] = path.eval(T).P;
  b.detail["accepted_steps"] = path.accepted_steps();
  return b;
}

inline Battery monodromy_battery(const PhasePath& path, std::size_t grid_size, const std::vector<double>& rhos) {
  Battery b{"monodromy", {}, {}};
  const auto rep = verify_monodromy(path, grid_size, rhos);
  b.add("sup_residual_circle", rep.sup_residual_circle, 1e-8);
  b.add("boundary_residual", rep.boundary_residual, 1e-8);
  b.add("unimodularity", rep.unimodularity, 1e-9);
  b.add("riccati_residual", rep.riccati_residual, 1e-7);
  for (const auto& r : rep.ray_residuals) {
    b.add("ray_residual_rho_" + nlohmann::json(r.rho).dump(), r.analytic ? r.residual : std::nan(""), 1e-7);
  }
  nlohmann::ordered_json j;
  to_json(j, rep);
  b.detail = j;
  return b;
}

inline Battery poly_battery(int ell) {
  Battery b{"poly-exact", {}, {}};
  const auto d = diagonal(ell);
  const auto par = check_parity(d);
  const auto ode = check_ode_system(d);
  b.add("parity_failures", static_cast<double>(par.identities.size()) - static_cast<double>(std::count_if(
      par.identities.begin(), par.identities.end(), [](const IdentityResult& r) { return r.holds; })), 0.0);
  b.add("ode_system_failures", static_cast<double>(ode.identities.size()) - static_cast<double>(std::count_if(
      ode.identities.begin(), ode.identities.end(), [](const IdentityResult& r) { return r.holds; })), 0.0);
  double fi_fail = 0.0;
  BivariateCoeff D;
  try {
    D = first_integral(d);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::not_constant) throw;
    fi_fail = 1.0;
  }
  b.add("first_integral_not_constant", fi_fail, 0.0);
  b.add("first_integral_at_one_mismatch", check_first_integral_at_one(d).holds ? 0.0 : 1.0, 0.0);
  b.detail["D"] = fi_fail == 0.0 ? D.to_string() : std::string("not constant");
  b.detail["parity"] = to_json(par);
  b.detail["ode_system"] = to_json(ode);
  return b;
}

inline Battery heun_battery(const PhasePath& path, std::size_t grid_size) {
  Battery b{"heun", {}, {}};
  const auto& m = path.params();
  const double T = m.period();
  const int ell = m.require_integer_order();
  const auto d = diagonal(ell);
  const auto dpm = d_plus_minus(d, m);
  const auto E = build_E(path);
  const auto lg = lifted_grid(T, 2 * grid_size - 1);
  const auto cg = circle_grid(T, grid_size);

  b.add("pair_ode_residual", pair_ode_residual(E, lg), 1e-8);
  b.add("dche_residual", dche_residual(E, lg), 1e-7);
  b.add("E_at_one_gap", std::max(std::abs(E.value(+1, 0.0).real() - E.expected_at_one(+1)),
                                 std::abs(E.value(-1, 0.0).real() - E.expected_at_one(-1))), 1e-10);
  b.add("E_at_one_imag", std::max(std::abs(E.value(+1, 0.0).imag()), std::abs(E.value(-1, 0.0).imag())), 1e-10);
  b.add("wronskian_at_one", std::abs(wronskian_at_one(E)), 1e-6, false);

  double identity = 0.0, unimod = 0.0, ric = 0.0;
  for (double alpha : {0.0, 0.7, 0.5 * std::numbers::pi, 2.1}) {
    const auto pa = phi_alpha(E, alpha);
    for (double t : cg) {
      const CJet j = pa.jet(t);
      unimod = std::max(unimod, std::abs(std::abs(j.v) - 1.0));
      ric = std::max(ric, riccati_residual(m, t, j.v, j.d1));
      if (alpha == 0.5 * std::numbers::pi) identity = std::max(identity, std::abs(j.v - std::polar(1.0, path.eval(t).phi)));
    }
  }
  b.add("phi_alpha_identity", identity, 1e-9);
  b.add("phi_alpha_unimodularity", unimod, 1e-8);
  b.add("phi_alpha_riccati_residual", ric, 1e-7);

  double two_route = 0.0;
  for (double theta : {0.3, 2.0, -1.2}) {
    const auto v = riccati_continue_ray(path, theta, 1.1, 1e-12);
    two_route = std::max(two_route, std::abs(v.phi() - phi_alpha_off_circle(E, 0.5 * std::numbers::pi, theta, 1.1)));
  }
  b.add("two_route_rho_1.1", two_route, 1e-7);

  const BOperator op(m, d);
  b.add("operator_dche_residual", std::max(dche_residual(E.equation(), m.omega(), op.apply(E.E_plus()), cg),
                                           dche_residual(E.equation(), m.omega(), op.apply(E.E_minus()), cg)), 1e-6);
  const auto B = build_matrix_B(boundary_values(path), d, m);
  b.add("matrix_action_relative", matrix_action_residual(E, op, B, cg), 1e-6);
  const double Dv = dpm.D;
  b.add("det_modulus_gap", std::abs(std::abs(B.det()) - std::abs(Dv)), 1e-5);
  b.add("det_squared_relative", std::abs(B.det() * B.det() - Dv * Dv) / (Dv * Dv), 1e-6);
  const auto sq = check_B_squared(E, d, cg);
  b.add("b_squared_relative", sq.sup_relative, 1e-6);
  b.add("D_relative_gap", sq.D_relative_gap, 1e-12);

  b.detail["convention_used"] = {{"minus_z_lift", std::string(to_string(sq.lift))}, {"matrix", "rows-are-images"},
                                 {"matrix_scale", B.scale}, {"shortcut_mapping", "u/v/w-default"}};
  b.detail["D"] = Dv;
  b.detail["D_plus"] = dpm.D_plus;
  b.detail["D_minus"] = dpm.D_minus;
  b.detail["det_B"] = {B.det().real(), B.det().imag()};
  return b;
}

inline Battery theorem2_battery(const PhasePath& path, std::size_t grid_size) {
  Battery b{"theorem2", {}, {}};
  const int ell = path.params().require_integer_order();
  const auto r = verify_theorem2(path, diagonal(ell), grid_size);
  b.add("phi_B_unimodularity", r.phi_B_unimodularity, Theorem2Report::unimodularity_budget);
  b.add("phi_B_at_one_modulus_gap", r.phi_B_at_one_modulus_gap, 1e-9);
  b.add("phi_B_riccati_residual", r.phi_B_riccati_residual, Theorem2Report::riccati_budget);
  b.add("phase_B_residual", r.phase_B_residual, 1e-6);
  b.add("psi_B_at_one", r.psi_at_one_residual, Theorem2Report::at_one_budget);
  b.add("psi_B_equation_residual", r.psi_equation_residual, Theorem2Report::psi_equation_budget);
  b.add("theta_B_at_one", r.theta_at_one_residual, Theorem2Report::at_one_budget);
  b.add("theta_system_residual", r.theta_system_residual, Theorem2Report::theta_budget);
  b.add("b_squared_residual", r.b_squared_residual, Theorem2Report::b_squared_budget);
  b.detail = to_json(r);
  return b;
}

// ---------------------------------------------------------------- runner

struct RunOutcome {
  nlohmann::ordered_json report;
  ExitCode code = ExitCode::ok;
};

/// Runs the requested batteries. Excluded parameter points (genericity,
/// cos φ(0) = 0) stop the run with exit code 2 and a reason; budget misses
/// give exit code 1. Exclusion takes precedence over a budget miss.
inline RunOutcome run_checks(const RunConfig& cfg) {
  cfg.validate();
  const auto m = cfg.params();
  RunOutcome out;
  nlohmann::ordered_json params;
  to_json(params, m);
  out.report["params"] = params;
  out.report["phi0"] = cfg.phi0;
  out.report["tol"] = cfg.tol;
  out.report["grid_size"] = cfg.grid_size;
  auto results = nlohmann::ordered_json::array();
  bool all_passed = true;
  try {
    if (cfg.checks.contains("heun") || cfg.checks.contains("theorem2")) {
      const int ell = m.require_integer_order();
      if (std::abs(std::cos(cfg.phi0)) < degeneracy_threshold) {
        fail(ErrorCode::degenerate_at_one, "cos phi(0) vanishes: E+ and E- are dependent");
      }
      (void)d_plus_minus(diagonal(ell), m);
    }
    std::optional<PhasePath> path;
    auto need_path = [&]() -> const PhasePath& {
      if (!path) path = solve_phase(m, cfg.phi0, cfg.tol);
      return *path;
    };
    auto need_order = [&] { return m.require_integer_order(); };
    for (const char* name : check_names) {
      if (!cfg.checks.contains(name)) continue;
      const std::string n = name;
      Battery b;
      if (n == "ode") b = ode_battery(need_path(), cfg.grid_size);
      if (n == "monodromy") b = monodromy_battery(need_path(), cfg.grid_size, cfg.rhos);
      if (n == "poly-exact") b = poly_battery(need_order());
      if (n == "heun") {
        need_order();
        b = heun_battery(need_path(), cfg.grid_size);
      }
      if (n == "theorem2") {
        need_order();
        b = theorem2_battery(need_path(), cfg.grid_size);
      }
      all_passed = all_passed && b.passed();
      results.push_back(to_json(b));
    }
  } catch (const Error& e) {
    out.report["checks"] = results;
    if (e.is_excluded_point()) {
      out.report["status"] = "excluded";
      out.report["reason"] = std::string(to_string(e.code()) == "genericity_violated" ? "genericity" : "degeneracy");
      out.report["message"] = e.what();
      out.code = ExitCode::excluded_point;
      return out;
    }
    if (e.code() == ErrorCode::tolerance_not_met || e.code() == ErrorCode::denominator_vanished ||
        e.code() == ErrorCode::non_analytic_on_ray) {
      out.report["status"] = "failed";
      out.report["message"] = e.what();
      out.code = ExitCode::tolerance_failure;
      return out;
    }
    throw;
  }
  out.report["checks"] = results;
  out.report["status"] = all_passed ? "passed" : "failed";
  out.code = all_passed ? ExitCode::ok : ExitCode::tolerance_failure;
  return out;
}

/// True if any number in the report is NaN or infinite.
inline bool has_non_finite(const nlohmann::ordered_json& j) {
  if (j.is_number_float()) return !std::isfinite(j.get<double>());
  if (j.is_structured()) {
    for (const auto& x : j) {
      if (has_non_finite(x)) return true;
    }
  }
  return false;
}

}  // namespace rsjm
