#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "rsjm/dop853.hpp"
#include "rsjm/error.hpp"
#include "rsjm/model.hpp"

namespace rsjm {

struct PhaseSample {
  double phi = 0.0;
  double P = 0.0;
};

/// Value of (phi, P) with first and second time derivatives obtained from the
/// equations of motion, never from differencing the interpolant.
struct PhaseJet {
  double phi = 0.0;
  double P = 0.0;
  double phi_dot = 0.0;
  double P_dot = 0.0;
  double phi_ddot = 0.0;
  double P_ddot = 0.0;
};

inline PhaseJet make_jet(const ModelParams& m, double t, double phi, double P) {
  PhaseJet j;
  j.phi = phi;
  j.P = P;
  j.phi_dot = m.phase_rhs(t, phi);
  j.P_dot = std::cos(phi);
  j.phi_ddot = -m.A() * m.omega() * std::sin(m.omega() * t) - std::cos(phi) * j.phi_dot;
  j.P_ddot = -std::sin(phi) * j.phi_dot;
  return j;
}

/// Anything that supplies a real phase and its quadrature on a time window.
template <class S>
concept PhaseSource = requires(const S& s, double t) {
  { s.params() } -> std::convertible_to<const ModelParams&>;
  { s.jet(t) } -> std::same_as<PhaseJet>;
  { s.t_min() } -> std::convertible_to<double>;
  { s.t_max() } -> std::convertible_to<double>;
};

inline constexpr double min_phase_tol = 1e-14;
inline constexpr double max_phase_tol = 1e-4;

/// Window used when the caller does not ask for one: symmetric, two and a
/// quarter periods on each side.
inline std::pair<double, double> default_window(const ModelParams& m) {
  const double T = m.period();
  return {-2.25 * T, 2.25 * T};
}

class PhasePath {
 public:
  using Dense = ode::DenseSolution<double, 2>;

  const ModelParams& params() const noexcept { return impl_->params; }
  double phi0() const noexcept { return impl_->phi0; }
  double t_min() const noexcept { return impl_->t_min; }
  double t_max() const noexcept { return impl_->t_max; }
  double tol() const noexcept { return impl_->tol; }
  double err_est() const noexcept { return impl_->err_est; }
  const Dense& forward() const noexcept { return impl_->fw; }
  const Dense& backward() const noexcept { return impl_->bw; }

  bool contains(double t) const noexcept { return t >= t_min() - slack(t) && t <= t_max() + slack(t); }

  PhaseSample eval(double t) const {
    if (!contains(t)) {
      fail(ErrorCode::out_of_window,
           "t = " + std::to_string(t) + " outside [" + std::to_string(t_min()) + ", " + std::to_string(t_max()) + "]");
    }
    t = std::clamp(t, t_min(), t_max());
    const auto y = t >= 0.0 ? impl_->fw.eval(t) : impl_->bw.eval(t);
    return {y[0], y[1]};
  }

  PhaseJet jet(double t) const {
    const auto s = eval(t);
    return make_jet(params(), std::clamp(t, t_min(), t_max()), s.phi, s.P);
  }

  /// Derivative of the dense interpolant itself (used for residual audits).
  PhaseSample interpolant_derivative(double t) const {
    t = std::clamp(t, t_min(), t_max());
    const auto d = t >= 0.0 ? impl_->fw.derivative(t) : impl_->bw.derivative(t);
    return {d[0], d[1]};
  }

  std::size_t accepted_steps() const noexcept { return impl_->fw.size() + impl_->bw.size(); }

 private:
  struct Impl {
    ModelParams params;
    double phi0 = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    double tol = 0.0;
    double err_est = 0.0;
    Dense fw;
    Dense bw;
  };

  static double slack(double t) noexcept { return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)); }

  explicit PhasePath(std::shared_ptr<const Impl> p) : impl_(std::move(p)) {}
  std::shared_ptr<const Impl> impl_;

  friend PhasePath solve_phase(const ModelParams&, double, double, double, double);
};

namespace detail {

inline double internal_rtol(double tol) { return std::max(tol * 1e-2, 1e-15); }

inline double interpolant_residual(const ModelParams& m, const ode::DenseSolution<double, 2>& sol) {
  double sup = 0.0;
  for (const auto& st : sol.steps()) {
    for (double s : {0.25, 0.5, 0.75}) {
      const double t = st.t0 + s * st.h;
      const auto y = st.eval(t);
      const auto d = st.derivative(t);
      sup = std::max({sup, std::abs(d[0] - m.phase_rhs(t, y[0])), std::abs(d[1] - std::cos(y[0]))});
    }
  }
  return sup;
}

// The step cap is halved until the interpolant's own derivative satisfies the
// equations to within residual_target (or the cap gets absurdly small).
inline ode::DenseSolution<double, 2> integrate_phase(const ModelParams& m, double phi0, double t_end, double rtol,
                                                     double residual_target) {
  auto rhs = [&m](double t, const ode::State<double, 2>& y) -> ode::State<double, 2> {
    return {m.phase_rhs(t, y[0]), std::cos(y[0])};
  };
  ode::Dop853Options opt;
  opt.rtol = rtol;
  opt.atol = rtol;
  opt.max_step = m.period() / 8.0;
  ode::DenseSolution<double, 2> best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 10; ++attempt) {
    auto res = ode::integrate_dop853<double, 2>(rhs, 0.0, ode::State<double, 2>{phi0, 0.0}, t_end, opt);
    if (!res.ok()) fail(ErrorCode::tolerance_not_met, "phase integration did not reach the window end");
    const double r = interpolant_residual(m, res.dense);
    if (r < best_res) {
      best_res = r;
      best = std::move(res.dense);
    }
    if (r <= residual_target) break;
    opt.max_step *= 0.5;
  }
  return best;
}

inline double sup_difference(const ode::DenseSolution<double, 2>& coarse, const ode::DenseSolution<double, 2>& fine) {
  double sup = 0.0;
  auto probe = [&](double t) {
    const auto a = coarse.eval(t);
    const auto b = fine.eval(t);
    sup = std::max({sup, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
  };
  for (const auto& st : coarse.steps()) {
    probe(st.t0);
    probe(st.t0 + 0.5 * st.h);
  }
  if (!coarse.empty()) probe(coarse.t_end());
  return sup;
}

}  // namespace detail

/// Integrates phi' = B + A cos(wt) - sin(phi), P' = cos(phi) with
/// phi(0) = phi0, P(0) = 0 forward and backward from t = 0.
inline PhasePath solve_phase(const ModelParams& m, double phi0, double t_min, double t_max, double tol) {
  const double T = m.period();
  if (!(t_min <= -T * (1 - 1e-14) && t_max >= T * (1 - 1e-14))) {
    fail(ErrorCode::window_too_small, "window must contain [-T, T] with T = " + std::to_string(T));
  }
  if (!(tol >= min_phase_tol && tol <= max_phase_tol)) {
    fail(ErrorCode::invalid_argument, "tol must lie in [1e-14, 1e-4]");
  }
  if (!std::isfinite(phi0)) fail(ErrorCode::invalid_argument, "phi0 must be finite");

  auto impl = std::make_shared<PhasePath::Impl>();
  impl->params = m;
  impl->phi0 = phi0;
  impl->t_min = t_min;
  impl->t_max = t_max;
  impl->tol = tol;

  const double rtol = detail::internal_rtol(tol);
  impl->fw = detail::integrate_phase(m, phi0, t_max, rtol, 5.0 * tol);
  impl->bw = detail::integrate_phase(m, phi0, t_min, rtol, 5.0 * tol);

  const double fine = std::max(rtol * 1e-2, 2e-16);
  const auto fw2 = detail::integrate_phase(m, phi0, t_max, fine, std::numeric_limits<double>::infinity());
  const auto bw2 = detail::integrate_phase(m, phi0, t_min, fine, std::numeric_limits<double>::infinity());
  impl->err_est = std::max(detail::sup_difference(impl->fw, fw2), detail::sup_difference(impl->bw, bw2));
  if (impl->err_est > 1e3 * tol) {
    fail(ErrorCode::tolerance_not_met, "refinement disagreement " + std::to_string(impl->err_est) + " exceeds 1e3*tol");
  }
  return PhasePath(std::move(impl));
}

inline PhasePath solve_phase(const ModelParams& m, double phi0, double tol = 1e-12) {
  const auto [a, b] = default_window(m);
  return solve_phase(m, phi0, a, b, tol);
}

inline PhaseSample eval_phase(const PhasePath& path, double t) { return path.eval(t); }

}  // namespace rsjm
