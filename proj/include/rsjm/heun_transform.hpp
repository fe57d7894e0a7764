#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsjm/circle.hpp"
#include "rsjm/dop853.hpp"
#include "rsjm/error.hpp"
#include "rsjm/heun_poly.hpp"
#include "rsjm/monodromy.hpp"
#include "rsjm/phase.hpp"

namespace rsjm {

/// Value and first three z-derivatives of a function at a lifted point.
struct ZJet {
  cplx v{};
  cplx d1{};
  cplx d2{};
  cplx d3{};
};

inline ZJet operator+(const ZJet& a, const ZJet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3}; }
inline ZJet operator*(cplx c, const ZJet& a) { return {c * a.v, c * a.d1, c * a.d2, c * a.d3}; }

/// A function on the lifted circle t ↦ z = e^{iωt}, returned with its z-jet.
using HeunFunction = std::function<ZJet(double)>;

/// Coefficients of z²E'' + a(z)E' + b(z)E = 0.
struct Dche {
  int ell = 1;
  double mu = 0.0;
  double lambda = 0.0;

  cplx a(cplx z) const { return (ell + 1.0) * z + mu * (1.0 - z * z); }
  cplx b(cplx z) const { return -mu * (ell + 1.0) * z + lambda; }
  cplx residual(cplx z, cplx E, cplx E1, cplx E2) const { return z * z * E2 + a(z) * E1 + b(z) * E; }
  /// E'' from the equation.
  cplx second(cplx z, cplx E, cplx E1) const { return -(a(z) * E1 + b(z) * E) / (z * z); }
  /// E''' from the differentiated equation.
  cplx third(cplx z, cplx E, cplx E1, cplx E2) const {
    const cplx da = (ell + 1.0) - 2.0 * mu * z;
    const cplx db = -mu * (ell + 1.0);
    return -(2.0 * z * E2 + da * E1 + a(z) * E2 + db * E + b(z) * E1) / (z * z);
  }
};

inline Dche dche_of(const ModelParams& m) { return {m.require_integer_order(), m.mu(), m.lambda()}; }

/// z-jet from a t-jet on the circle; the third derivative comes from the DCHE.
inline ZJet z_jet(const Dche& eq, double omega, double t, const CJet& j) {
  const cplx z = std::polar(1.0, omega * t);
  const cplx izw = I * omega * z;
  ZJet out;
  out.v = j.v;
  out.d1 = j.d1 / izw;
  out.d2 = j.d2 / (izw * izw) - j.d1 / (I * omega * z * z);
  out.d3 = eq.third(z, out.v, out.d1, out.d2);
  return out;
}

inline constexpr double degeneracy_threshold = 1e-8;

/// The basis E± built from (Φ, Ψ) of a phase path.
class HeunBasis {
 public:
  HeunBasis(PhasePath path) : path_(std::move(path)), m_(path_.params()), eq_(dche_of(m_)) {
    const double c0 = std::cos(path_.phi0());
    if (std::abs(c0) < degeneracy_threshold) {
      fail(ErrorCode::degenerate_at_one, "cos phi(0) = " + std::to_string(c0) + ": Phi(1)^2 = -1, E+ and E- are dependent");
    }
  }

  const PhasePath& path() const noexcept { return path_; }
  const ModelParams& params() const noexcept { return m_; }
  const Dche& equation() const noexcept { return eq_; }

  /// t-jet of E₊ (sign = +1) or E₋ (sign = -1) at z = e^{iωt}.
  CJet t_jet(int sign, double t) const {
    const double w = m_.omega(), mu = m_.mu(), ell = m_.ell();
    const CJet pref = exp_jet(cplx(mu * (std::cos(w * t) - 1.0) + std::log(0.5), -0.5 * ell * w * t),
                              cplx(-mu * w * std::sin(w * t), -0.5 * ell * w), cplx(-mu * w * w * std::cos(w * t), 0.0));
    const double r = std::numbers::sqrt2 / 2.0;
    const cplx c1 = r * cplx(1.0, sign), c2 = r * cplx(1.0, -sign);
    const auto h = half_powers(path_, t);
    return pref * (c1 * h.F1 + c2 * h.G1m);
  }

  ZJet jet(int sign, double t) const { return z_jet(eq_, m_.omega(), t, t_jet(sign, t)); }
  cplx value(int sign, double t) const { return t_jet(sign, t).v; }

  HeunFunction E_plus() const {
    auto self = *this;
    return [self](double t) { return self.jet(+1, t); };
  }
  HeunFunction E_minus() const {
    auto self = *this;
    return [self](double t) { return self.jet(-1, t); };
  }

  /// ∓sin(½(φ(0) ∓ π/2)).
  double expected_at_one(int sign) const {
    return -sign * std::sin(0.5 * (path_.phi0() - sign * 0.5 * std::numbers::pi));
  }

 private:
  PhasePath path_;
  ModelParams m_;
  Dche eq_;
};

inline HeunBasis build_E(const PhasePath& path) { return HeunBasis(path); }

/// sup over the grid of |E±' ∓ (2ω)⁻¹z^{-ℓ-1}E±(1/z) - μE±(z)| for both signs.
inline double pair_ode_residual(const HeunBasis& E, const std::vector<double>& grid) {
  const auto& m = E.params();
  const double w = m.omega();
  double sup = 0.0;
  for (int sign : {+1, -1}) {
    for (double t : grid) {
      const ZJet j = E.jet(sign, t);
      const cplx zpow = std::polar(1.0, -(m.ell() + 1.0) * w * t);
      const cplx res = j.d1 - sign / (2.0 * w) * zpow * E.value(sign, -t) - m.mu() * j.v;
      sup = std::max(sup, std::abs(res));
    }
  }
  return sup;
}

inline double dche_residual(const Dche& eq, double omega, const HeunFunction& f, const std::vector<double>& grid) {
  double sup = 0.0;
  for (double t : grid) {
    const ZJet j = f(t);
    sup = std::max(sup, std::abs(eq.residual(std::polar(1.0, omega * t), j.v, j.d1, j.d2)));
  }
  return sup;
}

inline double dche_residual(const HeunBasis& E, const std::vector<double>& grid) {
  return std::max(dche_residual(E.equation(), E.params().omega(), E.E_plus(), grid),
                  dche_residual(E.equation(), E.params().omega(), E.E_minus(), grid));
}

/// Wronskian E₊(1)E₋'(1) - E₋(1)E₊'(1).
inline cplx wronskian_at_one(const HeunBasis& E) {
  const ZJet a = E.jet(+1, 0.0), b = E.jet(-1, 0.0);
  return a.v * b.d1 - b.v * a.d1;
}

/// Φ^(α)(z) = -i z^ℓ (c E₊(z) + i s E₋(z)) / (c E₊(1/z) - i s E₋(1/z)), c = cos α/2, s = sin α/2.
class PhiAlpha {
 public:
  PhiAlpha(HeunBasis E, double alpha) : E_(std::move(E)), c_(std::cos(0.5 * alpha)), s_(std::sin(0.5 * alpha)) {}

  /// Value and t-derivative on the circle.
  CJet jet(double t) const {
    const double w = E_.params().omega(), ell = E_.params().ell();
    const CJet zl = exp_jet(cplx(0.0, ell * w * t), cplx(0.0, ell * w), cplx(-ell * ell * w * w, 0.0));
    const CJet num = c_ * E_.t_jet(+1, t) + (I * s_) * E_.t_jet(-1, t);
    CJet den = c_ * E_.t_jet(+1, -t) - (I * s_) * E_.t_jet(-1, -t);
    den.d1 = -den.d1;  // d/dt of f(-t)
    if (std::abs(den.v) < denominator_floor) {
      fail(ErrorCode::denominator_vanished, "Phi^(alpha) denominator vanishes at t = " + std::to_string(t));
    }
    return (-I) * (zl * num) / den;
  }
  cplx operator()(double t) const { return jet(t).v; }

  /// Off the circle at ρe^{iθ}, from radially continued E± at z and 1/z.
  cplx at(cplx Ep_z, cplx Em_z, cplx Ep_inv, cplx Em_inv, double rho, double theta) const {
    const double ell = E_.params().ell();
    const cplx zl = std::polar(std::pow(rho, ell), ell * theta);
    return -I * zl * (c_ * Ep_z + I * s_ * Em_z) / (c_ * Ep_inv - I * s_ * Em_inv);
  }

 private:
  HeunBasis E_;
  double c_, s_;
};

inline PhiAlpha phi_alpha(const HeunBasis& E, double alpha) { return PhiAlpha(E, alpha); }

/// Values of (E₊, E₊', E₋, E₋') along the ray ρe^{iθ}.
struct RadialE {
  double theta = 0.0;
  std::vector<double> rho;
  std::vector<std::array<cplx, 4>> values;
};

/// Integrates the DCHE as a first-order system along the ray from e^{iθ};
/// initial derivatives from the closed form on the circle.
inline RadialE radial_continue_E(const HeunBasis& E, double theta, std::vector<double> rho_grid, double tol = 1e-12) {
  const auto& m = E.params();
  const auto& eq = E.equation();
  const double t = theta / m.omega();
  if (t < E.path().t_min() || t > E.path().t_max()) fail(ErrorCode::out_of_window, "theta outside the lifted window");
  for (double r : rho_grid)
    if (!(r >= 0.2 && r <= 5.0)) fail(ErrorCode::invalid_argument, "rho must lie in [0.2, 5]");
  const ZJet a = E.jet(+1, t), b = E.jet(-1, t);
  using St = ode::State<cplx, 4>;
  auto rhs = [&eq, theta](double s, const St& y) -> St {
    const cplx z = std::polar(std::exp(s), theta);
    return {z * y[1], z * eq.second(z, y[0], y[1]), z * y[3], z * eq.second(z, y[2], y[3])};
  };
  ode::Dop853Options opt;
  opt.rtol = opt.atol = std::max(tol * 1e-2, 1e-15);
  opt.max_step = 0.05;
  const St y0{a.v, a.d1, b.v, b.d1};
  // Continue outward and inward separately so evaluation is dense on both sides of ρ = 1.
  double lo = 0.0, hi = 0.0;
  for (double r : rho_grid) {
    lo = std::min(lo, std::log(r));
    hi = std::max(hi, std::log(r));
  }
  const auto up = ode::integrate_dop853<cplx, 4>(rhs, 0.0, y0, hi, opt);
  const auto dn = ode::integrate_dop853<cplx, 4>(rhs, 0.0, y0, lo, opt);
  if (!up.ok() || !dn.ok()) fail(ErrorCode::tolerance_not_met, "radial DCHE integration failed");
  RadialE out;
  out.theta = theta;
  for (double r : rho_grid) {
    const double s = std::log(r);
    const St y = s >= 0.0 ? up.dense.eval(s) : dn.dense.eval(s);
    out.rho.push_back(r);
    out.values.push_back(y);
  }
  return out;
}

/// Φ^(α) at ρe^{iθ} from E± continued radially at θ (to ρ) and at -θ (to 1/ρ).
inline cplx phi_alpha_off_circle(const HeunBasis& E, double alpha, double theta, double rho, double tol = 1e-12) {
  const auto out = radial_continue_E(E, theta, {rho}, tol);
  const auto in = radial_continue_E(E, -theta, {1.0 / rho}, tol);
  return PhiAlpha(E, alpha).at(out.values[0][0], out.values[0][2], in.values[0][0], in.values[0][2], rho, theta);
}

/// Lift of -z on the cover used by the operator.
enum class MinusZLift { plus_half_period, minus_half_period };

constexpr std::string_view to_string(MinusZLift l) { return l == MinusZLift::plus_half_period ? "t+T/2" : "t-T/2"; }

/// Numeric diagonal polynomials with the derivatives the operator needs.
struct OperatorPolys {
  NumericLaurent r, dr, ddr, s, ds, dds;
};

inline OperatorPolys operator_polys(const PolyQuadruple& d, const ModelParams& m) {
  const double lam = m.lambda(), mu = m.mu();
  return {NumericLaurent(d.r, lam, mu),
          NumericLaurent(d.r.derivative(), lam, mu),
          NumericLaurent(d.r.derivative().derivative(), lam, mu),
          NumericLaurent(d.s, lam, mu),
          NumericLaurent(d.s.derivative(), lam, mu),
          NumericLaurent(d.s.derivative().derivative(), lam, mu)};
}

/// 𝔏_B[E](z) = (-1)^ℓ 2ω z^{1-ℓ} e^{μ(z+1/z)} (z²𝔯(-z)E'(-z) + 𝔰(-z)E(-z)).
class BOperator {
 public:
  BOperator(const ModelParams& m, const PolyQuadruple& d, MinusZLift lift = MinusZLift::plus_half_period)
      : m_(m), eq_(dche_of(m)), polys_(operator_polys(d, m)), lift_(lift) {
    if (d.ell != eq_.ell) fail(ErrorCode::invalid_argument, "quadruple order does not match params");
    dpm_ = d_plus_minus(d, m);
  }

  MinusZLift lift() const noexcept { return lift_; }
  const DPlusMinus& d_plus_minus_values() const noexcept { return dpm_; }
  double shift() const { return (lift_ == MinusZLift::plus_half_period ? 0.5 : -0.5) * m_.period(); }

  ZJet apply_at(const HeunFunction& E, double t) const {
    const double w = m_.omega();
    const int ell = eq_.ell;
    const cplx z = std::polar(1.0, w * t);
    const cplx y = std::polar(1.0, w * (t + shift()));
    const ZJet e = E(t + shift());

    const cplx r = polys_.r(y), r1 = polys_.dr(y), r2 = polys_.ddr(y);
    const cplx s = polys_.s(y), s1 = polys_.ds(y), s2 = polys_.dds(y);
    const cplx k = y * y * r * e.d1 + s * e.v;
    const cplx k1 = 2.0 * y * r * e.d1 + y * y * r1 * e.d1 + y * y * r * e.d2 + s1 * e.v + s * e.d1;
    const cplx k2 = 2.0 * r * e.d1 + 4.0 * y * r1 * e.d1 + 4.0 * y * r * e.d2 + y * y * r2 * e.d1 +
                    2.0 * y * y * r1 * e.d2 + y * y * r * e.d3 + s2 * e.v + 2.0 * s1 * e.d1 + s * e.d2;
    // K(z) = k(y) with y = -z, so K' = -k'(y), K'' = k''(y).
    const cplx K = k, K1 = -k1, K2 = k2;

    const double sign = ell % 2 == 0 ? 1.0 : -1.0;
    const cplx C = sign * 2.0 * w * std::polar(1.0, (1.0 - ell) * w * t) * std::exp(m_.mu() * (z + 1.0 / z));
    const cplx c1 = (1.0 - ell) / z + m_.mu() * (1.0 - 1.0 / (z * z));
    const cplx c1p = -(1.0 - ell) / (z * z) + 2.0 * m_.mu() / (z * z * z);
    const cplx C1 = C * c1, C2 = C * (c1 * c1 + c1p);

    ZJet out;
    out.v = C * K;
    out.d1 = C1 * K + C * K1;
    out.d2 = C2 * K + 2.0 * C1 * K1 + C * K2;
    out.d3 = eq_.third(z, out.v, out.d1, out.d2);
    return out;
  }

  HeunFunction apply(HeunFunction E) const {
    auto self = *this;
    return [self, E = std::move(E)](double t) { return self.apply_at(E, t); };
  }

 private:
  ModelParams m_;
  Dche eq_;
  OperatorPolys polys_;
  MinusZLift lift_;
  DPlusMinus dpm_;
};

/// 2×2 matrix of the operator in the (E₊, E₋) basis: 𝔏_B E₊ = B00 E₊ + B01 E₋,
/// 𝔏_B E₋ = B10 E₊ + B11 E₋. Factors are kept separately for audit.
struct BMatrix {
  cplx prefactor{};
  /// Overall normalisation relative to the closed form printed with
  /// prefactor i^ℓ(2ω)⁻¹e^{-P(0)/2}; the operator's action requires 1/4.
  double scale = 0.25;
  std::array<cplx, 2> diagonal{};
  std::array<std::array<cplx, 2>, 2> block{};

  cplx entry(int i, int j) const { return prefactor * scale * diagonal[i] * block[i][j]; }
  cplx literal_entry(int i, int j) const { return prefactor * diagonal[i] * block[i][j]; }
  cplx det() const { return entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0); }
};

/// u±, v±, w± and the boundary factors e^{½P(±T/2)}.
struct ShortcutSet {
  cplx u_plus, u_minus, v_plus, v_minus, w_plus, w_minus;
  double D_plus = 0.0, D_minus = 0.0;
  double a = 1.0;  // e^{½P(T/2)}
  double b = 1.0;  // e^{½P(-T/2)}

  cplx u(int sign) const { return sign > 0 ? u_plus : u_minus; }
  cplx v(int sign) const { return sign > 0 ? v_plus : v_minus; }
  cplx w(int sign) const { return sign > 0 ? w_plus : w_minus; }
};

inline ShortcutSet build_shortcuts(const BoundaryValues& bv, const DPlusMinus& dpm, int ell) {
  if (!dpm.generic) fail(ErrorCode::genericity_violated, "D+ or D- vanishes");
  const double sg = ell % 2 == 0 ? 1.0 : -1.0;
  const cplx ep = std::polar(1.0, 0.5 * bv.phase_plus), em = std::polar(1.0, 0.5 * bv.phase_minus);
  const cplx e0 = std::polar(1.0, 0.5 * bv.phase_at_1);
  ShortcutSet s;
  s.u_plus = sg * ep + I / ep;
  s.u_minus = sg * ep - I / ep;
  s.v_plus = em + I * sg / em;
  s.v_minus = em - I * sg / em;
  s.w_plus = e0 + I / e0;
  s.w_minus = e0 - I / e0;
  s.D_plus = dpm.D_plus;
  s.D_minus = dpm.D_minus;
  s.a = bv.sqrt_Psi_plus();
  s.b = bv.sqrt_Psi_minus();
  return s;
}

inline BMatrix build_matrix_B(const BoundaryValues& bv, const PolyQuadruple& d, const ModelParams& m) {
  const int ell = m.require_integer_order();
  const double phi0 = bv.phase_at_1;
  if (std::abs(std::cos(phi0)) < degeneracy_threshold) fail(ErrorCode::degenerate_at_one, "cos phi(0) vanishes");
  const auto dpm = d_plus_minus(d, m);
  const auto sc = build_shortcuts(bv, dpm, ell);
  const double pi = std::numbers::pi;
  BMatrix B;
  B.prefactor = std::pow(I, ell) / (2.0 * m.omega()) * std::exp(-0.5 * bv.P_at_1);
  B.diagonal = {-std::polar(1.0, -pi / 4) * dpm.D_plus / std::cos(0.5 * (phi0 - pi / 2)),
                std::polar(1.0, pi / 4) * dpm.D_minus / std::cos(0.5 * (phi0 + pi / 2))};
  const double a = sc.a, b = sc.b;
  B.block = {{{a * sc.u_minus - b * sc.v_minus, I * (a * sc.u_minus + b * sc.v_minus)},
              {I * (a * sc.u_plus + b * sc.v_plus), -a * sc.u_plus + b * sc.v_plus}}};
  return B;
}

struct HeunCheck {
  std::string check;
  double sup_residual = 0.0;
  std::size_t grid = 0;
  std::string convention_used;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

inline nlohmann::ordered_json to_json(const HeunCheck& c, const ModelParams& m) {
  nlohmann::ordered_json j;
  j["check"] = c.check;
  nlohmann::ordered_json p;
  to_json(p, m);
  j["params"] = p;
  j["grid"] = c.grid;
  j["sup_residual"] = c.sup_residual;
  j["convention_used"] = c.convention_used;
  for (auto it = c.extra.begin(); it != c.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

/// Uniform grid on [-T, T] (the lifted circle used by the Heun checks).
inline std::vector<double> lifted_grid(double T, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = -T + 2.0 * T * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

/// sup |𝔏_B E - (row of B)·(E₊, E₋)| / sup |𝔏_B E| over both basis elements.
inline double matrix_action_residual(const HeunBasis& E, const BOperator& op, const BMatrix& B, const std::vector<double>& grid) {
  const auto Ep = E.E_plus(), Em = E.E_minus();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto img = op.apply(i == 0 ? Ep : Em);
    for (double t : grid) {
      const cplx lhs = img(t).v;
      const cplx rhs = B.entry(i, 0) * E.value(+1, t) + B.entry(i, 1) * E.value(-1, t);
      num = std::max(num, std::abs(lhs - rhs));
      den = std::max(den, std::abs(lhs));
    }
  }
  return num / den;
}

struct BSquaredReport {
  double sup_relative = 0.0;
  double D_exact = 0.0;
  double D_numeric = 0.0;
  double D_relative_gap = 0.0;
  MinusZLift lift = MinusZLift::plus_half_period;
  double monodromy_shift = 0.0;  // t ↦ t + monodromy_shift
};

/// 𝔏_B∘𝔏_B E± against 𝔇·E±(t + T), the monodromy lift for the t+T/2 convention
/// (t - T for the opposite lift).
inline BSquaredReport check_B_squared(const HeunBasis& E, const PolyQuadruple& d, const std::vector<double>& grid,
                                      MinusZLift lift = MinusZLift::plus_half_period) {
  const auto& m = E.params();
  const double T = m.period();
  if (E.path().t_min() > -1.5 * T || E.path().t_max() < 1.5 * T) {
    fail(ErrorCode::window_too_small, "composition needs the window [-3T/2, 3T/2]");
  }
  const BOperator op(m, d, lift);
  BSquaredReport rep;
  rep.lift = lift;
  rep.monodromy_shift = lift == MinusZLift::plus_half_period ? T : -T;
  const auto dpm = op.d_plus_minus_values();
  rep.D_exact = dpm.D;
  rep.D_numeric = dpm.D_plus * dpm.D_minus / std::pow(2.0 * m.omega(), 2);
  rep.D_relative_gap = std::abs(rep.D_exact - rep.D_numeric) / std::max(std::abs(rep.D_exact), 1e-300);
  double num = 0.0, den = 0.0;
  for (int sign : {+1, -1}) {
    const auto twice = op.apply(op.apply(sign > 0 ? E.E_plus() : E.E_minus()));
    for (double t : grid) {
      const cplx target = rep.D_exact * E.value(sign, t + rep.monodromy_shift);
      num = std::max(num, std::abs(twice(t).v - target));
      den = std::max(den, std::abs(target));
    }
  }
  rep.sup_relative = num / den;
  return rep;
}

}  // namespace rsjm
