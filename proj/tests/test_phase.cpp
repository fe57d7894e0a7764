#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "rsjm/phase.hpp"

using namespace rsjm;
using Catch::Matchers::WithinAbs;

namespace {

ModelParams golden2() { return ModelParams::from_chart(2.0, 0.3, 1.0); }
ModelParams golden1() { return ModelParams::from_chart(1.0, 0.2, 1.3); }

// φ(T) fixed by two unrelated schemes (RK4 step halving, odeint RKF78) that
// agree with each other to ~1e-13.
constexpr double golden2_phi_T = 11.2366868551908;
constexpr double golden1_phi_T = 2.83406030878633;

}  // namespace

TEST_CASE("golden phi(T) from two independent integrators") {
  struct Case {
    ModelParams m;
    double phi0, golden;
  };
  for (const auto& c : {Case{golden2(), 0.5, golden2_phi_T}, Case{golden1(), 1.0, golden1_phi_T}}) {
    const double T = c.m.period();
    const oracle::Drive d{c.m.A(), c.m.Bdrive(), c.m.omega()};
    for (double sign : {1.0, -1.0}) {
      const auto a = oracle::rk4_halving(d, c.phi0, sign * T);
      const auto b = oracle::odeint_rkf78(d, c.phi0, sign * T);
      REQUIRE_THAT(a[0], WithinAbs(b[0], 1e-10));
      REQUIRE_THAT(a[1], WithinAbs(b[1], 1e-10));
      const auto path = solve_phase(c.m, c.phi0, 1e-12);
      const auto s = path.eval(sign * T);
      CHECK_THAT(s.phi, WithinAbs(b[0], 1e-10));
      CHECK_THAT(s.P, WithinAbs(b[1], 1e-10));
      if (sign > 0) CHECK_THAT(s.phi, WithinAbs(c.golden, 1e-10));
    }
  }
}

TEST_CASE("equilibria are reproduced exactly") {
  const auto m = ModelParams::from_physical(0.0, 0.0, 1.0);
  const auto zero = solve_phase(m, 0.0, 1e-12);
  const auto pi = solve_phase(m, std::numbers::pi, 1e-12);
  for (double t : {-8.0, -3.1, 0.0, 0.7, 5.0, 12.0}) {
    CHECK(zero.eval(t).phi == 0.0);
    CHECK_THAT(zero.eval(t).P, WithinAbs(t, 1e-12));
    CHECK_THAT(pi.eval(t).phi, WithinAbs(std::numbers::pi, 1e-12));
    CHECK_THAT(pi.eval(t).P, WithinAbs(-t, 1e-12));
  }
}

TEST_CASE("initial condition and step endpoints") {
  const auto path = solve_phase(golden2(), 0.5, 1e-12);
  CHECK(path.eval(0.0).phi == 0.5);
  CHECK(path.eval(0.0).P == 0.0);
  const auto& fw = path.forward();
  const auto& times = fw.node_times();
  const auto& states = fw.node_states();
  for (std::size_t i = 0; i < times.size(); i += 17) {
    const auto s = path.eval(times[i]);
    CHECK(s.phi == states[i][0]);
    CHECK(s.P == states[i][1]);
  }
}

TEST_CASE("window and tolerance preconditions") {
  const auto m = golden2();
  const double T = m.period();
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::not_constant;
  };
  CHECK(code_of([&] { solve_phase(m, 0.5, -0.9 * T, 2 * T, 1e-10); }) == ErrorCode::window_too_small);
  CHECK(code_of([&] { solve_phase(m, 0.5, -2 * T, 0.5 * T, 1e-10); }) == ErrorCode::window_too_small);
  CHECK(code_of([&] { solve_phase(m, 0.5, 1e-2); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { solve_phase(m, 0.5, 1e-15); }) == ErrorCode::invalid_argument);
  const auto path = solve_phase(m, 0.5, -T, T, 1e-10);
  CHECK(code_of([&] { path.eval(1.01 * T); }) == ErrorCode::out_of_window);
  CHECK_NOTHROW(path.eval(T));
}

TEST_CASE("default window spans [-9T/4, 9T/4]") {
  const auto m = golden1();
  const auto path = solve_phase(m, 1.0);
  CHECK_THAT(path.t_min(), WithinAbs(-2.25 * m.period(), 1e-12));
  CHECK_THAT(path.t_max(), WithinAbs(2.25 * m.period(), 1e-12));
}

TEST_CASE("error estimate and interpolant residual track the tolerance") {
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    const auto m = golden2();
    const auto path = solve_phase(m, 0.5, tol);
    CHECK(path.err_est() <= 1e3 * tol);
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double t = path.t_min() + (path.t_max() - path.t_min()) * i / 4000.0;
      sup = std::max(sup, std::abs(path.interpolant_derivative(t).phi - m.phase_rhs(t, path.eval(t).phi)));
    }
    CHECK(sup <= 10 * tol);
  }
}

TEST_CASE("time translation by one period solves the same equation") {
  const auto m = golden2();
  const double T = m.period();
  const auto path = solve_phase(m, 0.5, 1e-12);
  double sup = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = -T + 2 * T * i / 1000.0;
    sup = std::max(sup, std::abs(path.interpolant_derivative(t + T).phi - m.phase_rhs(t, path.eval(t + T).phi)));
  }
  CHECK(sup <= 1e-11);
}

TEST_CASE("P is increasing wherever cos phi > 0") {
  const auto m = golden1();
  const auto path = solve_phase(m, 1.0, 1e-10);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const double a = path.t_min() + (path.t_max() - path.t_min()) * i / 2000.0;
    const double b = path.t_min() + (path.t_max() - path.t_min()) * (i + 1) / 2000.0;
    if (std::cos(path.eval(a).phi) > 0.05 && std::cos(path.eval(b).phi) > 0.05) {
      CHECK(path.eval(b).P > path.eval(a).P);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("phase is stored unwrapped") {
  // ℓ = 2 drifts by several multiples of 2π over the window.
  const auto path = solve_phase(golden2(), 0.5, 1e-10);
  CHECK(path.eval(path.t_max()).phi > 4 * std::numbers::pi);
  double jump = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double a = path.t_min() + (path.t_max() - path.t_min()) * i / 5000.0;
    const double b = path.t_min() + (path.t_max() - path.t_min()) * (i + 1) / 5000.0;
    jump = std::max(jump, std::abs(path.eval(b).phi - path.eval(a).phi));
  }
  CHECK(jump < 0.1);
}

TEST_CASE("backward and forward halves meet at the origin") {
  const auto path = solve_phase(golden1(), 1.0, 1e-12);
  const double e = 1e-9;
  CHECK_THAT(path.eval(-e).phi, WithinAbs(path.eval(e).phi, 1e-8));
  CHECK_THAT(path.eval(-e).P, WithinAbs(path.eval(e).P, 1e-8));
}

TEST_CASE("concurrent evaluation of a shared path") {
  const auto path = solve_phase(golden2(), 0.5, 1e-10);
  std::vector<double> a(64), b(64);
  std::vector<std::thread> ts;
  for (int k = 0; k < 4; ++k) {
    ts.emplace_back([&, k] {
      for (int i = k; i < 64; i += 4) a[i] = path.eval(-10.0 + 0.3 * i).phi;
    });
  }
  for (auto& t : ts) t.join();
  for (int i = 0; i < 64; ++i) b[i] = path.eval(-10.0 + 0.3 * i).phi;
  CHECK(a == b);
}
