#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "rsjm/dop853.hpp"
#include "rsjm/error.hpp"
#include "rsjm/phase.hpp"

namespace rsjm {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

/// Point on the cover of the punctured plane; theta is never reduced mod 2π.
struct CoverPoint {
  double rho = 1.0;
  double theta = 0.0;
  cplx z() const { return std::polar(rho, theta); }
};

/// A complex function of t together with its first two t-derivatives.
struct CJet {
  cplx v{};
  cplx d1{};
  cplx d2{};
};

inline CJet operator*(const CJet& a, const CJet& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline CJet operator+(const CJet& a, const CJet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline CJet operator-(const CJet& a, const CJet& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline CJet operator*(cplx c, const CJet& a) { return {c * a.v, c * a.d1, c * a.d2}; }
inline CJet operator/(const CJet& a, const CJet& b) {
  const cplx q = a.v / b.v;
  const cplx q1 = (a.d1 - q * b.d1) / b.v;
  const cplx q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
  return {q, q1, q2};
}

/// e^{g} for g given with its first two derivatives.
inline CJet exp_jet(cplx g, cplx g1, cplx g2) {
  const cplx v = std::exp(g);
  return {v, v * g1, v * (g1 * g1 + g2)};
}

/// The four half-power products on the circle at t, with the reciprocal point
/// 1/z realised as -t:
///   F1  = Ψ^{1/2}Φ^{1/2}(z),        F1m = Ψ^{1/2}Φ^{-1/2}(z),
///   G1  = Ψ^{1/2}Φ^{1/2}(1/z),      G1m = Ψ^{1/2}Φ^{-1/2}(1/z).
struct HalfPowers {
  CJet F1, F1m, G1, G1m;
};

template <PhaseSource S>
HalfPowers half_powers(const S& src, double t) {
  const PhaseJet a = src.jet(t);
  const PhaseJet b = src.jet(-t);
  HalfPowers h;
  h.F1 = exp_jet(0.5 * cplx(a.P, a.phi), 0.5 * cplx(a.P_dot, a.phi_dot), 0.5 * cplx(a.P_ddot, a.phi_ddot));
  h.F1m = exp_jet(0.5 * cplx(a.P, -a.phi), 0.5 * cplx(a.P_dot, -a.phi_dot), 0.5 * cplx(a.P_ddot, -a.phi_ddot));
  h.G1 = exp_jet(0.5 * cplx(b.P, b.phi), -0.5 * cplx(b.P_dot, b.phi_dot), 0.5 * cplx(b.P_ddot, b.phi_ddot));
  h.G1m = exp_jet(0.5 * cplx(b.P, -b.phi), -0.5 * cplx(b.P_dot, -b.phi_dot), 0.5 * cplx(b.P_ddot, -b.phi_ddot));
  return h;
}

enum class CircleKind { phi, psi, phi_sqrt, phi_inv_sqrt, psi_sqrt, theta, theta_tilde };

constexpr std::string_view to_string(CircleKind k) {
  switch (k) {
    case CircleKind::phi: return "Phi";
    case CircleKind::psi: return "Psi";
    case CircleKind::phi_sqrt: return "PhiSqrt";
    case CircleKind::phi_inv_sqrt: return "PhiInvSqrt";
    case CircleKind::psi_sqrt: return "PsiSqrt";
    case CircleKind::theta: return "Theta";
    case CircleKind::theta_tilde: return "ThetaTilde";
  }
  return "?";
}

/// A function on a neighbourhood of the punctured circle, sampled through
/// the parametrisation z = e^{iωt}.
class CircleFunction {
 public:
  CircleFunction(CircleKind kind, double omega, double t_min, double t_max, std::function<cplx(double)> f)
      : kind_(kind), omega_(omega), t_min_(t_min), t_max_(t_max), f_(std::move(f)) {}

  CircleKind kind() const noexcept { return kind_; }
  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  cplx z(double t) const { return std::polar(1.0, omega_ * t); }
  cplx operator()(double t) const { return f_(t); }

 private:
  CircleKind kind_;
  double omega_;
  double t_min_, t_max_;
  std::function<cplx(double)> f_;
};

template <PhaseSource S>
CircleFunction circle_function(const S& src, CircleKind kind) {
  const double w = src.params().omega();
  std::function<cplx(double)> f;
  switch (kind) {
    case CircleKind::phi: f = [src](double t) { return std::polar(1.0, src.jet(t).phi); }; break;
    case CircleKind::psi: f = [src](double t) { return cplx(std::exp(src.jet(t).P), 0.0); }; break;
    case CircleKind::phi_sqrt: f = [src](double t) { return std::polar(1.0, 0.5 * src.jet(t).phi); }; break;
    case CircleKind::phi_inv_sqrt: f = [src](double t) { return std::polar(1.0, -0.5 * src.jet(t).phi); }; break;
    case CircleKind::psi_sqrt: f = [src](double t) { return cplx(std::exp(0.5 * src.jet(t).P), 0.0); }; break;
    default: fail(ErrorCode::invalid_argument, "Theta kinds come from theta_pair_solve");
  }
  return CircleFunction(kind, w, src.t_min(), src.t_max(), std::move(f));
}

template <PhaseSource S>
CircleFunction phi_on_circle(const S& src) {
  return circle_function(src, CircleKind::phi);
}

template <PhaseSource S>
CircleFunction psi_on_circle(const S& src) {
  return circle_function(src, CircleKind::psi);
}

/// Values at z = e^{±iπ} (t = ±T/2) and z = 1, on the continuous branches.
struct BoundaryValues {
  double phase_plus = 0.0;   // φ(T/2)
  double phase_minus = 0.0;  // φ(-T/2)
  double phase_at_1 = 0.0;   // φ(0)
  double P_plus = 0.0;
  double P_minus = 0.0;
  double P_at_1 = 0.0;

  cplx Phi_plus() const { return std::polar(1.0, phase_plus); }
  cplx Phi_minus() const { return std::polar(1.0, phase_minus); }
  cplx Phi_at_1() const { return std::polar(1.0, phase_at_1); }
  double Psi_plus() const { return std::exp(P_plus); }
  double Psi_minus() const { return std::exp(P_minus); }
  cplx sqrt_Phi_plus() const { return std::polar(1.0, 0.5 * phase_plus); }
  cplx sqrt_Phi_minus() const { return std::polar(1.0, 0.5 * phase_minus); }
  double sqrt_Psi_plus() const { return std::exp(0.5 * P_plus); }
  double sqrt_Psi_minus() const { return std::exp(0.5 * P_minus); }
};

template <PhaseSource S>
BoundaryValues boundary_values(const S& src) {
  const double h = 0.5 * src.params().period();
  if (src.t_min() > -h || src.t_max() < h) fail(ErrorCode::window_too_small, "window must contain ±T/2");
  const auto p = src.jet(h), m = src.jet(-h), o = src.jet(0.0);
  return {p.phi, m.phi, o.phi, p.P, m.P, o.P};
}

/// |Φ' - (2iωz)⁻¹(1-Φ²) - (ℓ/z + μ(1+z⁻²))Φ| on the circle, Φ' from the t-derivative.
inline double riccati_residual(const ModelParams& m, double t, cplx Phi, cplx Phi_dot) {
  const double w = m.omega();
  const cplx z = std::polar(1.0, w * t);
  const cplx dz = Phi_dot / (I * w * z);
  const cplx rhs = (1.0 - Phi * Phi) / (2.0 * I * w * z) + (m.ell() / z + m.mu() * (1.0 + 1.0 / (z * z))) * Phi;
  return std::abs(dz - rhs);
}

/// |2iωzΨ' - (Φ + Φ⁻¹)Ψ| on the circle, Ψ' from the t-derivative.
inline double psi_residual(cplx Phi, cplx Psi, cplx Psi_dot) {
  return std::abs(2.0 * Psi_dot - (Phi + 1.0 / Phi) * Psi);
}

/// Sign convention for the (Θ, Θ̃) system along the circle.
///   quadrature_consistent:  2Θ̇ = +Φ(Θ-Θ̃),  2Θ̃̇ = -Φ⁻¹(Θ-Θ̃)
///   as_printed:             2Θ̇ = -Φ(Θ-Θ̃),  2Θ̃̇ = +Φ⁻¹(Θ-Θ̃)
/// Only the first makes (Θ-Θ̃)/2i reproduce e^{P(t)}; the second gives e^{-P(t)}.
enum class ThetaOrientation { quadrature_consistent, as_printed };

constexpr std::string_view to_string(ThetaOrientation o) {
  return o == ThetaOrientation::as_printed ? "as_printed" : "quadrature_consistent";
}

constexpr double theta_sign(ThetaOrientation o) { return o == ThetaOrientation::as_printed ? -1.0 : 1.0; }

/// Residuals (t-form) of the Θ system for given values and t-derivatives.
inline std::pair<double, double> theta_system_residual(cplx Phi, cplx Th, cplx Tht, cplx Th_dot, cplx Tht_dot,
                                                       ThetaOrientation o) {
  const double s = theta_sign(o);
  const cplx d = Th - Tht;
  return {std::abs(2.0 * Th_dot - s * Phi * d), std::abs(2.0 * Tht_dot + s * d / Phi)};
}

class ThetaPair;

template <PhaseSource S>
ThetaPair theta_pair_solve(const S& src, double tol = 1e-12,
                           ThetaOrientation orientation = ThetaOrientation::quadrature_consistent);

class ThetaPair {
 public:
  using Dense = ode::DenseSolution<cplx, 2>;

  ThetaOrientation orientation() const noexcept { return impl_->orientation; }
  double t_min() const noexcept { return impl_->t_min; }
  double t_max() const noexcept { return impl_->t_max; }
  double err_est() const noexcept { return impl_->err_est; }

  std::pair<cplx, cplx> eval(double t) const {
    if (t < t_min() || t > t_max()) fail(ErrorCode::out_of_window, "Theta evaluated outside its window");
    const auto y = t >= 0.0 ? impl_->fw.eval(t) : impl_->bw.eval(t);
    return {y[0], y[1]};
  }

  /// (Θ - Θ̃)/2i.
  cplx psi(double t) const {
    const auto [a, b] = eval(t);
    return (a - b) / (2.0 * I);
  }

  CircleFunction theta() const {
    auto self = *this;
    return CircleFunction(CircleKind::theta, impl_->omega, t_min(), t_max(), [self](double t) { return self.eval(t).first; });
  }
  CircleFunction theta_tilde() const {
    auto self = *this;
    return CircleFunction(CircleKind::theta_tilde, impl_->omega, t_min(), t_max(),
                          [self](double t) { return self.eval(t).second; });
  }

 private:
  struct Impl {
    ThetaOrientation orientation{};
    double omega = 1.0;
    double t_min = 0.0, t_max = 0.0;
    double err_est = 0.0;
    Dense fw, bw;
  };
  explicit ThetaPair(std::shared_ptr<const Impl> p) : impl_(std::move(p)) {}
  std::shared_ptr<const Impl> impl_;

  template <PhaseSource S>
  friend ThetaPair theta_pair_solve(const S&, double, ThetaOrientation);
};

/// Integrates the Θ system from Θ(1) = i, Θ̃(1) = -i in both directions.
template <PhaseSource S>
ThetaPair theta_pair_solve(const S& src, double tol, ThetaOrientation orientation) {
  if (!(tol >= min_phase_tol && tol <= max_phase_tol)) fail(ErrorCode::invalid_argument, "tol must lie in [1e-14, 1e-4]");
  const double s = theta_sign(orientation);
  auto rhs = [&src, s](double t, const ode::State<cplx, 2>& y) -> ode::State<cplx, 2> {
    const cplx Phi = std::polar(1.0, src.jet(t).phi);
    const cplx d = y[0] - y[1];
    return {0.5 * s * Phi * d, -0.5 * s * d / Phi};
  };
  const ode::State<cplx, 2> y0{I, -I};
  auto run = [&](double t_end, double rtol) {
    ode::Dop853Options opt;
    opt.rtol = opt.atol = rtol;
    opt.max_step = src.params().period() / 16.0;
    auto r = ode::integrate_dop853<cplx, 2>(rhs, 0.0, y0, t_end, opt);
    if (!r.ok()) fail(ErrorCode::tolerance_not_met, "Theta integration did not reach the window end");
    return std::move(r.dense);
  };
  auto impl = std::make_shared<ThetaPair::Impl>();
  impl->orientation = orientation;
  impl->omega = src.params().omega();
  impl->t_min = src.t_min();
  impl->t_max = src.t_max();
  const double rtol = detail::internal_rtol(tol);
  impl->fw = run(impl->t_max, rtol);
  impl->bw = run(impl->t_min, rtol);

  const auto fw2 = run(impl->t_max, std::max(rtol * 1e-2, 2e-16));
  const auto bw2 = run(impl->t_min, std::max(rtol * 1e-2, 2e-16));
  double err = 0.0;
  for (const auto* pair : {&impl->fw, &impl->bw}) {
    const auto& fine = pair == &impl->fw ? fw2 : bw2;
    for (const auto& st : pair->steps()) {
      const double t = st.t0 + 0.5 * st.h;
      const auto a = pair->eval(t), b = fine.eval(t);
      const double scale = std::max(1.0, std::abs(b[0] - b[1]));
      err = std::max({err, std::abs(a[0] - b[0]) / scale, std::abs(a[1] - b[1]) / scale});
    }
  }
  impl->err_est = err;
  if (err > 1e3 * tol) fail(ErrorCode::tolerance_not_met, "Theta refinement disagreement " + std::to_string(err));
  return ThetaPair(std::move(impl));
}

}  // namespace rsjm
