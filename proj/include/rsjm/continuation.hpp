#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "rsjm/circle.hpp"
#include "rsjm/dop853.hpp"
#include "rsjm/error.hpp"
#include "rsjm/model.hpp"

namespace rsjm {

/// Straight segment in log-radius at fixed angle.
struct Radial {
  double theta;
  double rho_from;
  double rho_to;
};

/// Circular arc at fixed radius.
struct Arc {
  double rho;
  double theta_from;
  double theta_to;
};

using Segment = std::variant<Radial, Arc>;

enum class Chart { phi, inverse };

/// A Riccati value in one of the two charts: Φ itself or W = 1/Φ.
struct ChartValue {
  Chart chart = Chart::phi;
  cplx value{1.0, 0.0};
  std::size_t switches = 0;

  cplx phi() const { return chart == Chart::phi ? value : 1.0 / value; }
};

inline constexpr double chart_switch_up = 1e3;
inline constexpr double chart_switch_back = 1e2;
inline constexpr double chart_blowup = 1e6;

namespace detail {

inline cplx riccati_g(const ModelParams& m, cplx z) { return m.ell() / z + m.mu() * (1.0 + 1.0 / (z * z)); }

// dΦ/dz in the Φ chart, dW/dz in the inverse chart.
inline cplx riccati_dz(const ModelParams& m, cplx z, cplx y, Chart c) {
  const cplx a = (1.0 - y * y) / (2.0 * I * m.omega() * z);
  const cplx gy = riccati_g(m, z) * y;
  return c == Chart::phi ? a + gy : a - gy;
}

}  // namespace detail

/// Continues a solution of the Riccati equation along segments of the cover,
/// switching to W = 1/Φ when |Φ| passes chart_switch_up and back once |Φ|
/// falls below chart_switch_back.
inline ChartValue riccati_continue(const ModelParams& m, ChartValue start, const std::vector<Segment>& path, double tol) {
  ChartValue cur = start;
  ode::Dop853Options opt;
  opt.rtol = opt.atol = std::max(tol * 1e-2, 1e-14);
  opt.dense = false;
  opt.max_step = 0.05;

  for (const auto& seg : path) {
    double s0, s1;
    std::function<cplx(double)> zfun;
    std::function<cplx(double)> dzds;
    if (const auto* r = std::get_if<Radial>(&seg)) {
      if (!(r->rho_from > 0 && r->rho_to > 0)) fail(ErrorCode::invalid_argument, "radii must be positive");
      s0 = std::log(r->rho_from);
      s1 = std::log(r->rho_to);
      const double th = r->theta;
      zfun = [th](double s) { return std::polar(std::exp(s), th); };
      dzds = zfun;
    } else {
      const auto& a = std::get<Arc>(seg);
      s0 = a.theta_from;
      s1 = a.theta_to;
      const double rho = a.rho;
      zfun = [rho](double s) { return std::polar(rho, s); };
      dzds = [rho](double s) { return I * std::polar(rho, s); };
    }
    double s = s0;
    int guard = 0;
    while (s != s1) {
      if (++guard > 10000) fail(ErrorCode::non_analytic_on_ray, "too many chart switches");
      const Chart chart = cur.chart;
      auto rhs = [&](double ss, const ode::State<cplx, 1>& y) -> ode::State<cplx, 1> {
        return {detail::riccati_dz(m, zfun(ss), y[0], chart) * dzds(ss)};
      };
      bool want_switch = false;
      auto observer = [&](double, const ode::State<cplx, 1>& y) {
        const double a = std::abs(y[0]);
        if (chart == Chart::phi ? a > chart_switch_up : a > 1.0 / chart_switch_back) {
          want_switch = true;
          return false;
        }
        return true;
      };
      auto res = ode::integrate_dop853<cplx, 1>(rhs, s, ode::State<cplx, 1>{cur.value}, s1, opt, observer);
      if (res.status == ode::Status::step_size_underflow || res.status == ode::Status::max_steps_exceeded ||
          !std::isfinite(std::abs(res.y[0]))) {
        fail(ErrorCode::non_analytic_on_ray, "integration broke down near z = " + std::to_string(zfun(res.t).real()) +
                                                 std::string(" + i") + std::to_string(zfun(res.t).imag()));
      }
      s = res.t;
      cur.value = res.y[0];
      if (want_switch) {
        if (std::abs(cur.value) > chart_blowup) fail(ErrorCode::non_analytic_on_ray, "both charts exceed 1e6");
        cur.chart = cur.chart == Chart::phi ? Chart::inverse : Chart::phi;
        cur.value = 1.0 / cur.value;
        ++cur.switches;
      }
    }
  }
  if (std::abs(cur.value) > chart_blowup) fail(ErrorCode::non_analytic_on_ray, "value exceeds 1e6 in its chart");
  return cur;
}

/// Φ at ρe^{iθ}, continued radially from the circle value e^{iφ(θ/ω)}.
template <PhaseSource S>
ChartValue riccati_continue_ray(const S& src, double theta, double rho_target, double tol = 1e-10) {
  if (!(rho_target >= 0.2 && rho_target <= 5.0)) fail(ErrorCode::invalid_argument, "rho must lie in [0.2, 5]");
  const auto& m = src.params();
  const double t = theta / m.omega();
  if (t < src.t_min() || t > src.t_max()) fail(ErrorCode::out_of_window, "theta outside the lifted window");
  ChartValue start{Chart::phi, std::polar(1.0, src.jet(t).phi), 0};
  if (rho_target == 1.0) return start;
  return riccati_continue(m, start, {Radial{theta, 1.0, rho_target}}, tol);
}

}  // namespace rsjm
