#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsjm/circle.hpp"
#include "rsjm/error.hpp"
#include "rsjm/heun_poly.hpp"
#include "rsjm/heun_transform.hpp"
#include "rsjm/monodromy.hpp"
#include "rsjm/phase.hpp"

namespace rsjm {

/// The B-transformed quadruple (Φ_B, Θ_B, Θ̃_B, Ψ_B) of a phase source, on the circle.
template <PhaseSource S>
class BTransform {
 public:
  BTransform(S src, const DPlusMinus& dpm) : src_(std::move(src)) {
    const auto& m = src_.params();
    const int ell = m.require_integer_order();
    const auto bv = boundary_values(src_);
    s0_ = std::sin(bv.phase_at_1);
    c0_ = std::cos(bv.phase_at_1);
    if (std::abs(c0_) < degeneracy_threshold) fail(ErrorCode::degenerate_at_one, "cos phi(0) vanishes");
    sc_ = build_shortcuts(bv, dpm, ell);

    const double a = sc_.a, b = sc_.b, Dp = sc_.D_plus, Dm = sc_.D_minus;
    const cplx up = sc_.u_plus, um = sc_.u_minus, vp = sc_.v_plus, vm = sc_.v_minus;
    const cplx wp = sc_.w_plus, wm = sc_.w_minus;
    const double s0 = s0_;
    c1_ = 2.0 * I * a * (Dp * wm * um + Dm * wp * up);
    c2_ = -Dp * wm * (a * um + b * vm) + Dm * wp * (a * up + b * vp);
    n1_ = -I * (Dm * wp * ((2 * s0 - 1) * a * up - b * vp) + Dp * wm * ((2 * s0 + 1) * a * um + b * vm));
    n2_ = -Dm * wp * ((s0 - 2) * a * up + s0 * b * vp) + Dp * wm * ((s0 + 2) * a * um + s0 * b * vm);
    m1_ = I * (-Dm * wp * (-(2 * s0 - 1) * a * up + b * vp) + Dp * wm * ((2 * s0 + 1) * a * um + b * vm));
  }

  const S& source() const noexcept { return src_; }
  const ShortcutSet& shortcuts() const noexcept { return sc_; }

  CJet phi_B(double t) const {
    const auto h = half_powers(src_, t);
    const CJet den = (-c1_) * h.F1m + c2_ * h.G1;
    check(den, t);
    return (-1.0) * (c1_ * h.F1 + c2_ * h.G1m) / den;
  }
  CJet theta_B(double t) const {
    const auto h = half_powers(src_, t);
    const CJet den = (-c1_) * h.F1m + c2_ * h.G1;
    check(den, t);
    return (1.0 / c0_) * ((n1_ * h.F1m + n2_ * h.G1) / den);
  }
  CJet theta_tilde_B(double t) const {
    const auto h = half_powers(src_, t);
    const CJet den = c1_ * h.F1 + c2_ * h.G1m;
    check(den, t);
    return (1.0 / c0_) * ((m1_ * h.F1 + n2_ * h.G1m) / den);
  }
  /// (Θ_B - Θ̃_B)/2i.
  CJet psi_B(double t) const { return (1.0 / (2.0 * I)) * (theta_B(t) - theta_tilde_B(t)); }

 private:
  static void check(const CJet& den, double t) {
    if (std::abs(den.v) < denominator_floor) {
      fail(ErrorCode::denominator_vanished, "B-transform denominator vanishes at t = " + std::to_string(t));
    }
  }

  S src_;
  ShortcutSet sc_;
  double s0_ = 0.0, c0_ = 1.0;
  cplx c1_, c2_, n1_, n2_, m1_;
};

/// Real phase recovered from a unimodular circle function Φ_B: φ_B is the
/// continuous argument anchored at the principal value at t = 0, P_B its
/// quadrature. Defined on [-T/2, T/2].
class ReconstructedPhase {
 public:
  template <PhaseSource S>
  ReconstructedPhase(const BTransform<S>& B, std::size_t intervals = 2048) : impl_(std::make_shared<Impl>()) {
    auto& d = *impl_;
    d.params = B.source().params();
    const double T = d.params.period();
    d.t_min = -0.5 * T;
    d.t_max = 0.5 * T;
    d.h = T / static_cast<double>(intervals);
    d.eval = [B](double t) { return B.phi_B(t); };
    const std::size_t half = intervals / 2;
    d.nodes.assign(intervals + 1, {});
    // Nodes k = 0..intervals at t_k = -T/2 + k h; node `half` is t = 0.
    d.nodes[half] = {std::arg(d.eval(0.0).v), 0.0};
    for (std::size_t k = half; k < intervals; ++k) d.nodes[k + 1] = d.advance(d.time(k), d.nodes[k], d.time(k + 1));
    for (std::size_t k = half; k > 0; --k) d.nodes[k - 1] = d.advance(d.time(k), d.nodes[k], d.time(k - 1));
  }

  const ModelParams& params() const noexcept { return impl_->params; }
  double t_min() const noexcept { return impl_->t_min; }
  double t_max() const noexcept { return impl_->t_max; }
  double phi0() const { return impl_->nodes[impl_->nodes.size() / 2].phi; }

  PhaseJet jet(double t) const {
    const auto& d = *impl_;
    if (t < d.t_min - 1e-12 * d.h || t > d.t_max + 1e-12 * d.h) fail(ErrorCode::out_of_window, "reconstructed phase is defined on [-T/2, T/2]");
    const double x = (t - d.t_min) / d.h;
    const std::size_t last = d.nodes.size() - 1;
    const std::size_t half = last / 2;
    // Integrate from the node on the t = 0 side so quadrature never crosses the anchor.
    std::size_t k = t >= 0.0 ? static_cast<std::size_t>(std::floor(x)) : static_cast<std::size_t>(std::ceil(x));
    k = std::min(k, last);
    if (t >= 0.0 && k < half) k = half;
    if (t < 0.0 && k > half) k = half;
    const auto s = d.advance(d.time(k), d.nodes[k], t);
    const CJet F = d.eval(t);
    PhaseJet j;
    j.phi = s.phi;
    j.P = s.P;
    const cplx L1 = F.d1 / F.v;
    const cplx L2 = (F.d2 * F.v - F.d1 * F.d1) / (F.v * F.v);
    j.phi_dot = L1.imag();
    j.phi_ddot = L2.imag();
    j.P_dot = std::cos(j.phi);
    j.P_ddot = -std::sin(j.phi) * j.phi_dot;
    return j;
  }

 private:
  struct Node {
    double phi = 0.0;
    double P = 0.0;
  };
  struct Impl {
    ModelParams params;
    double t_min = 0.0, t_max = 0.0, h = 1.0;
    std::function<CJet(double)> eval;
    std::vector<Node> nodes;

    double time(std::size_t k) const { return t_min + h * static_cast<double>(k); }

    double unwrap_near(double t, double ref) const {
      const double a = std::arg(eval(t).v);
      return a + 2.0 * std::numbers::pi * std::round((ref - a) / (2.0 * std::numbers::pi));
    }

    // Carries (φ, P) from t0 to t1 (|t1 - t0| ≤ h) with 16-point Gauss-Legendre.
    Node advance(double t0, const Node& n, double t1) const {
      if (t1 == t0) return n;
      static constexpr std::array<double, 8> x{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                               0.9445750230732326, 0.9894009349916499};
      static constexpr std::array<double, 8> w{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                               0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                               0.0622535239386479, 0.0271524594117541};
      const double c = 0.5 * (t0 + t1), r = 0.5 * (t1 - t0);
      double sum = 0.0;
      double ref = n.phi;
      // Sample in increasing distance from t0 so each unwrap stays close to its neighbour.
      std::array<double, 16> ts{}, ph{};
      for (std::size_t i = 0; i < 8; ++i) {
        ts[i] = c - r * x[7 - i];
        ts[15 - i] = c + r * x[7 - i];
      }
      for (std::size_t i = 0; i < 16; ++i) {
        ph[i] = unwrap_near(ts[i], ref);
        ref = ph[i];
      }
      for (std::size_t i = 0; i < 8; ++i) sum += w[7 - i] * (std::cos(ph[i]) + std::cos(ph[15 - i]));
      const double phi1 = unwrap_near(t1, ref);
      return {phi1, n.P + r * sum};
    }
  };
  std::shared_ptr<Impl> impl_;
};

struct Theorem2Report {
  ModelParams params;
  std::size_t grid_size = 0;
  // Single application.
  double phi_B_unimodularity = 0.0;
  double phi_B_at_one_modulus_gap = 0.0;
  double phi_B_riccati_residual = 0.0;
  double phase_B_residual = 0.0;
  double theta_system_residual = 0.0;
  double theta_system_residual_quadrature_orientation = 0.0;
  double theta_at_one_residual = 0.0;
  double psi_at_one_residual = 0.0;
  double psi_equation_residual = 0.0;
  /// Same equation applied to 1/Ψ_B.
  double inverse_psi_equation_residual = 0.0;
  // Double application.
  double b_squared_residual = 0.0;
  double e_level_b_squared_residual = 0.0;
  MinusZLift lift = MinusZLift::plus_half_period;

  // Budgets.
  static constexpr double unimodularity_budget = 1e-8;
  static constexpr double riccati_budget = 1e-7;
  static constexpr double theta_budget = 1e-6;
  static constexpr double at_one_budget = 1e-8;
  static constexpr double psi_equation_budget = 1e-6;
  static constexpr double b_squared_budget = 1e-6;

  bool phi_B_ok() const {
    return phi_B_unimodularity <= unimodularity_budget && phi_B_riccati_residual <= riccati_budget &&
           phi_B_at_one_modulus_gap <= 1e-9;
  }
  bool psi_B_ok() const { return psi_equation_residual <= psi_equation_budget && psi_at_one_residual <= at_one_budget; }
  bool theta_ok() const { return theta_system_residual <= theta_budget && theta_at_one_residual <= at_one_budget; }
  bool b_squared_ok() const { return b_squared_residual <= b_squared_budget; }
  bool ok() const { return phi_B_ok() && psi_B_ok() && theta_ok() && b_squared_ok(); }
};

/// Single and double application of B on the circle grid, checked against
/// the equations and against the period shift.
inline Theorem2Report verify_theorem2(const PhasePath& path, const PolyQuadruple& d, std::size_t grid_size = 1001) {
  const auto& m = path.params();
  const double T = m.period();
  if (path.t_min() > -1.5 * T || path.t_max() < 1.5 * T) fail(ErrorCode::window_too_small, "needs the window [-3T/2, 3T/2]");
  if (grid_size < 101) fail(ErrorCode::invalid_argument, "grid_size must be at least 101");
  const auto dpm = d_plus_minus(d, m);
  const BTransform<PhasePath> B(path, dpm);

  Theorem2Report r;
  r.params = m;
  r.grid_size = grid_size;
  const auto grid = circle_grid(T, grid_size);
  for (double t : grid) {
    const CJet F = B.phi_B(t), Th = B.theta_B(t), Tt = B.theta_tilde_B(t);
    const CJet Ps = (1.0 / (2.0 * I)) * (Th - Tt);
    r.phi_B_unimodularity = std::max(r.phi_B_unimodularity, std::abs(std::abs(F.v) - 1.0));
    r.phi_B_riccati_residual = std::max(r.phi_B_riccati_residual, riccati_residual(m, t, F.v, F.d1));
    const auto [e1, e2] = theta_system_residual(F.v, Th.v, Tt.v, Th.d1, Tt.d1, ThetaOrientation::as_printed);
    r.theta_system_residual = std::max({r.theta_system_residual, e1, e2});
    const auto [q1, q2] = theta_system_residual(F.v, Th.v, Tt.v, Th.d1, Tt.d1, ThetaOrientation::quadrature_consistent);
    r.theta_system_residual_quadrature_orientation = std::max({r.theta_system_residual_quadrature_orientation, q1, q2});
    r.psi_equation_residual = std::max(r.psi_equation_residual, psi_residual(F.v, Ps.v, Ps.d1));
    const cplx inv = 1.0 / Ps.v, inv_dot = -Ps.d1 / (Ps.v * Ps.v);
    r.inverse_psi_equation_residual = std::max(r.inverse_psi_equation_residual, psi_residual(F.v, inv, inv_dot));
  }
  r.phi_B_at_one_modulus_gap = std::abs(std::abs(B.phi_B(0.0).v) - 1.0);
  r.theta_at_one_residual = std::max(std::abs(B.theta_B(0.0).v - I), std::abs(B.theta_tilde_B(0.0).v + I));
  r.psi_at_one_residual = std::abs(B.psi_B(0.0).v - 1.0);

  const ReconstructedPhase phiB(B);
  for (double t : grid) {
    const auto j = phiB.jet(t);
    r.phase_B_residual = std::max(r.phase_B_residual, std::abs(j.phi_dot - m.phase_rhs(t, j.phi)));
  }
  const BTransform<ReconstructedPhase> BB(phiB, dpm);
  for (double t : grid) {
    r.b_squared_residual = std::max(r.b_squared_residual, std::abs(BB.phi_B(t).v - std::polar(1.0, path.eval(t + T).phi)));
  }

  const auto E = build_E(path);
  r.e_level_b_squared_residual = check_B_squared(E, d, grid).sup_relative;
  return r;
}

inline nlohmann::ordered_json to_json(const Theorem2Report& r) {
  nlohmann::ordered_json t;
  t["sup_phi_residual"] = r.phi_B_riccati_residual;
  t["theta_system_residual"] = r.theta_system_residual;
  t["b_squared_residual"] = r.b_squared_residual;
  t["conventions"] = {{"minus_z_lift", std::string(to_string(r.lift))}, {"shortcut_mapping", "u/v/w-default"},
                      {"theta_orientation", "as_printed"}, {"monodromy", "t+T"}};
  t["phi_B_unimodularity"] = r.phi_B_unimodularity;
  t["phi_B_at_one_modulus_gap"] = r.phi_B_at_one_modulus_gap;
  t["phase_B_residual"] = r.phase_B_residual;
  t["theta_at_one_residual"] = r.theta_at_one_residual;
  t["theta_system_residual_quadrature_orientation"] = r.theta_system_residual_quadrature_orientation;
  t["psi_at_one_residual"] = r.psi_at_one_residual;
  t["psi_equation_residual"] = r.psi_equation_residual;
  t["inverse_psi_equation_residual"] = r.inverse_psi_equation_residual;
  t["e_level_b_squared_residual"] = r.e_level_b_squared_residual;
  t["grid_size"] = r.grid_size;
  t["passed"] = {{"phi_B", r.phi_B_ok()}, {"psi_B", r.psi_B_ok()}, {"theta_B", r.theta_ok()}, {"b_squared", r.b_squared_ok()}};
  nlohmann::ordered_json j;
  j["theorem2"] = t;
  return j;
}

}  // namespace rsjm
