#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsjm/circle.hpp"
#include "rsjm/continuation.hpp"
#include "rsjm/error.hpp"
#include "rsjm/phase.hpp"

namespace rsjm {

inline constexpr double denominator_floor = 1e-10;

/// Φ_M(e^{iωt}) = e^{iφ(t+T)} on (-T/2, T/2).
inline CircleFunction monodromy_direct(const PhasePath& path) {
  const double T = path.params().period();
  if (path.t_min() > -0.5 * T || path.t_max() < 1.5 * T) {
    fail(ErrorCode::window_too_small, "period shift needs the window [-T/2, 3T/2]");
  }
  return CircleFunction(CircleKind::phi, path.params().omega(), -0.5 * T, 0.5 * T,
                        [path, T](double t) { return std::polar(1.0, path.eval(t + T).phi); });
}

/// Coefficient of the leading products in the closed-form monodromy.
///   corrected:  cos φ(T/2), the value forced by Φ_M(e^{-iπ}) = Φ(e^{iπ})
///   as_printed: cos ½φ(T/2)
enum class MonodromyVariant { corrected, as_printed };

constexpr std::string_view to_string(MonodromyVariant v) {
  return v == MonodromyVariant::as_printed ? "as_printed" : "corrected";
}

/// Closed-form Φ_M built from Ψ^{1/2}Φ^{±1/2} at z and 1/z and the boundary
/// data at e^{±iπ}.
template <PhaseSource S>
class AlgebraicMonodromy {
 public:
  AlgebraicMonodromy(S src, MonodromyVariant variant = MonodromyVariant::corrected) : src_(std::move(src)), variant_(variant) {
    const auto bv = boundary_values(src_);
    a_ = bv.sqrt_Psi_plus();
    b_ = bv.sqrt_Psi_minus();
    K_ = variant_ == MonodromyVariant::corrected ? std::cos(bv.phase_plus) : std::cos(0.5 * bv.phase_plus);
    S_ = std::sin(0.5 * (bv.phase_plus - bv.phase_minus));
  }

  MonodromyVariant variant() const noexcept { return variant_; }

  CJet numerator(double t) const {
    const auto h = half_powers(src_, t);
    return (a_ * K_) * h.F1 + (I * b_ * S_) * h.G1m;
  }
  CJet denominator(double t) const {
    const auto h = half_powers(src_, t);
    return (a_ * K_) * h.F1m - (I * b_ * S_) * h.G1;
  }
  /// Φ_M(e^{iωt}) with its t-derivatives.
  CJet jet(double t) const {
    const auto d = denominator(t);
    if (std::abs(d.v) < denominator_floor) {
      fail(ErrorCode::denominator_vanished, "monodromy denominator vanishes at t = " + std::to_string(t));
    }
    return numerator(t) / d;
  }
  cplx operator()(double t) const { return jet(t).v; }

 private:
  S src_;
  MonodromyVariant variant_;
  double a_ = 1, b_ = 1, K_ = 1, S_ = 0;
};

template <PhaseSource S>
AlgebraicMonodromy<S> monodromy_algebraic(const S& src, MonodromyVariant v = MonodromyVariant::corrected) {
  return AlgebraicMonodromy<S>(src, v);
}

inline std::vector<double> circle_grid(double T, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = -0.5 * T + T * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

struct RayResidual {
  double rho = 0.0;
  double residual = 0.0;
  bool analytic = true;
  std::string note;
};

struct MonodromyReport {
  double sup_residual_circle = 0.0;
  double boundary_residual = 0.0;
  std::vector<RayResidual> ray_residuals;
  std::size_t grid_size = 0;
  double unimodularity = 0.0;
  double riccati_residual = 0.0;
  double phase_err_est = 0.0;
  MonodromyVariant variant = MonodromyVariant::corrected;
};

/// Φ(ρe^{iπ}) against Φ_M(ρe^{-iπ}): both start at z = 1 (Φ(1) = e^{iφ0},
/// Φ_M(1) = e^{iφ(T)}), go out radially to ρ and then along the arc, the
/// first counter-clockwise to θ = π and the second clockwise to θ = -π.
inline RayResidual ray_monodromy_residual(const PhasePath& path, double rho, double tol = 1e-12) {
  const auto& m = path.params();
  const double T = m.period();
  RayResidual out;
  out.rho = rho;
  try {
    const ChartValue a0{Chart::phi, std::polar(1.0, path.eval(0.0).phi), 0};
    const ChartValue b0{Chart::phi, std::polar(1.0, path.eval(T).phi), 0};
    const auto a = riccati_continue(m, a0, {Radial{0.0, 1.0, rho}, Arc{rho, 0.0, std::numbers::pi}}, tol);
    const auto b = riccati_continue(m, b0, {Radial{0.0, 1.0, rho}, Arc{rho, 0.0, -std::numbers::pi}}, tol);
    // Compare in a chart where both values are bounded.
    const cplx pa = a.phi(), pb = b.phi();
    out.residual = std::abs(pa) <= 1.0 ? std::abs(pa - pb) : std::abs(1.0 / pa - 1.0 / pb);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::non_analytic_on_ray) throw;
    out.analytic = false;
    out.note = e.what();
  }
  return out;
}

inline MonodromyReport verify_monodromy(const PhasePath& path, std::size_t grid_size = 1001,
                                        const std::vector<double>& rhos = {},
                                        MonodromyVariant variant = MonodromyVariant::corrected) {
  if (grid_size < 101) fail(ErrorCode::invalid_argument, "grid_size must be at least 101");
  const auto& m = path.params();
  const double T = m.period();
  const auto direct = monodromy_direct(path);
  const auto alg = monodromy_algebraic(path, variant);

  MonodromyReport rep;
  rep.grid_size = grid_size;
  rep.variant = variant;
  rep.phase_err_est = path.err_est();
  for (double t : circle_grid(T, grid_size)) {
    const CJet j = alg.jet(t);
    rep.sup_residual_circle = std::max(rep.sup_residual_circle, std::abs(j.v - direct(t)));
    rep.unimodularity = std::max(rep.unimodularity, std::abs(std::abs(j.v) - 1.0));
    rep.riccati_residual = std::max(rep.riccati_residual, riccati_residual(m, t, j.v, j.d1));
  }
  rep.boundary_residual = std::abs(alg(-0.5 * T) - std::polar(1.0, path.eval(0.5 * T).phi));
  for (double rho : rhos) rep.ray_residuals.push_back(ray_monodromy_residual(path, rho));
  return rep;
}

inline void to_json(nlohmann::ordered_json& j, const MonodromyReport& r) {
  j = nlohmann::ordered_json::object();
  j["sup_residual_circle"] = r.sup_residual_circle;
  j["boundary_residual"] = r.boundary_residual;
  auto rays = nlohmann::ordered_json::array();
  for (const auto& x : r.ray_residuals) {
    if (x.analytic) {
      rays.push_back({x.rho, x.residual});
    } else {
      rays.push_back({x.rho, nullptr});
    }
  }
  j["ray_residuals"] = rays;
  j["grid_size"] = r.grid_size;
  j["unimodularity"] = r.unimodularity;
  j["riccati_residual"] = r.riccati_residual;
  j["phase_err_est"] = r.phase_err_est;
  j["variant"] = std::string(to_string(r.variant));
}

}  // namespace rsjm
