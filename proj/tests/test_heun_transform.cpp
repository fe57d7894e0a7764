#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "rsjm/continuation.hpp"
#include "rsjm/heun_transform.hpp"
#include "rsjm/monodromy.hpp"

using namespace rsjm;

namespace {

struct Golden {
  double ell, mu, omega, phi0;
};
constexpr Golden sets[] = {{2, 0.3, 1.0, 0.5}, {1, 0.2, 1.3, 1.0}};

PhasePath path_of(const Golden& g) { return solve_phase(ModelParams::from_chart(g.ell, g.mu, g.omega), g.phi0, 1e-12); }

// Oracle: the DCHE integrated by odeint along z = e^{iωt} from E(1), E'(1).
std::array<cplx, 2> dche_along_circle(const Dche& eq, double omega, cplx E0, cplx E1, double t_end) {
  namespace ode = boost::numeric::odeint;
  using R4 = std::array<double, 4>;
  auto sys = [&](const R4& y, R4& dy, double t) {
    const cplx z = std::polar(1.0, omega * t), dz = I * omega * z;
    const cplx e(y[0], y[1]), de(y[2], y[3]);
    const cplx a = (eq.ell + 1.0) * z + eq.mu * (1.0 - z * z), b = -eq.mu * (eq.ell + 1.0) * z + eq.lambda;
    const cplx dd = -(a * de + b * e) / (z * z);
    const cplx v0 = de * dz, v1 = dd * dz;
    dy = {v0.real(), v0.imag(), v1.real(), v1.imag()};
  };
  R4 y{E0.real(), E0.imag(), E1.real(), E1.imag()};
  ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_fehlberg78<R4>()), sys, y, 0.0, t_end,
                          t_end / 500.0);
  return {cplx(y[0], y[1]), cplx(y[2], y[3])};
}

}  // namespace

TEST_CASE("basis satisfies the first-order pair and the DCHE") {
  for (const auto& g : sets) {
    const auto E = build_E(path_of(g));
    const double T = E.params().period();
    const double pair = pair_ode_residual(E, lifted_grid(T, 2001));
    const double dche = dche_residual(E, lifted_grid(T, 2001));
    CHECK(pair <= 1e-8);
    CHECK(dche <= 1e-7);
    // Refinement does not make things worse.
    CHECK(pair_ode_residual(E, lifted_grid(T, 4001)) <= std::max(2 * pair, 1e-14));
  }
}

TEST_CASE("basis agrees with direct integration of the DCHE along the circle") {
  for (const auto& g : sets) {
    const auto E = build_E(path_of(g));
    const double T = E.params().period();
    for (int sign : {+1, -1}) {
      const ZJet j0 = E.jet(sign, 0.0);
      for (double t : {0.3 * T, -0.45 * T, 0.9 * T}) {
        const auto ref = dche_along_circle(E.equation(), E.params().omega(), j0.v, j0.d1, t);
        const ZJet j = E.jet(sign, t);
        CHECK(std::abs(j.v - ref[0]) < 1e-9);
        CHECK(std::abs(j.d1 - ref[1]) < 1e-9);
      }
    }
  }
}

TEST_CASE("z-jets agree with finite differences along the circle") {
  const auto E = build_E(path_of(sets[0]));
  const double w = E.params().omega(), h = 1e-5;
  for (double t : {-2.0, 0.4, 3.0}) {
    const cplx z = std::polar(1.0, w * t);
    const ZJet j = E.jet(+1, t);
    const cplx dt = (E.value(+1, t + h) - E.value(+1, t - h)) / (2 * h);
    CHECK(std::abs(dt / (I * w * z) - j.d1) < 1e-8);
    const ZJet a = E.jet(+1, t - h), b = E.jet(+1, t + h);
    CHECK(std::abs((b.d1 - a.d1) / (2 * h) / (I * w * z) - j.d2) < 1e-7);
    CHECK(std::abs((b.d2 - a.d2) / (2 * h) / (I * w * z) - j.d3) < 1e-6);
  }
}

TEST_CASE("values at z = 1 are real with the closed-form values") {
  for (const auto& g : sets) {
    const auto E = build_E(path_of(g));
    for (int sign : {+1, -1}) {
      const cplx v = E.value(sign, 0.0);
      const double want = -sign * std::sin(0.5 * (g.phi0 - sign * std::numbers::pi / 2));
      CHECK(std::abs(v.real() - want) <= 1e-10);
      CHECK(std::abs(v.imag()) <= 1e-10);
    }
    CHECK(std::abs(wronskian_at_one(E)) > 1e-6);
  }
}

TEST_CASE("cos phi(0) = 0 is refused") {
  const auto p = solve_phase(ModelParams::from_chart(2.0, 0.3, 1.0), std::numbers::pi / 2, 1e-10);
  try {
    build_E(p);
    FAIL("expected DegenerateAtOne");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_at_one);
    CHECK(e.is_excluded_point());
  }
}

TEST_CASE("phi alpha family") {
  for (const auto& g : sets) {
    const auto p = path_of(g);
    const auto E = build_E(p);
    const auto& m = E.params();
    for (double alpha : {0.0, 0.7, std::numbers::pi / 2, 2.1}) {
      const auto pa = phi_alpha(E, alpha);
      double unimod = 0.0, ric = 0.0, ident = 0.0;
      for (double t : circle_grid(m.period(), 1001)) {
        const CJet j = pa.jet(t);
        unimod = std::max(unimod, std::abs(std::abs(j.v) - 1.0));
        ric = std::max(ric, riccati_residual(m, t, j.v, j.d1));
        ident = std::max(ident, std::abs(j.v - std::polar(1.0, p.eval(t).phi)));
      }
      CAPTURE(alpha);
      CHECK(unimod <= 1e-8);
      CHECK(ric <= 1e-7);
      if (alpha == std::numbers::pi / 2) CHECK(ident <= 1e-9);
      if (alpha == 0.0) CHECK(ident > 1e-3);
    }
  }
}

TEST_CASE("off-circle phi alpha agrees with Riccati continuation") {
  for (const auto& g : sets) {
    const auto p = path_of(g);
    const auto E = build_E(p);
    for (double theta : {0.3, -1.0, 2.5}) {
      const auto v = riccati_continue_ray(p, theta, 1.1, 1e-12);
      CHECK(std::abs(v.phi() - phi_alpha_off_circle(E, std::numbers::pi / 2, theta, 1.1)) <= 1e-7);
    }
    const auto r = radial_continue_E(E, 0.4, {1.0});
    CHECK(std::abs(r.values[0][0] - E.value(+1, 0.4 / E.params().omega())) < 1e-15);
    CHECK_THROWS_AS(radial_continue_E(E, 0.4, {6.0}), Error);
  }
}

TEST_CASE("operator maps the basis to DCHE solutions and matches the matrix") {
  for (const auto& g : sets) {
    const auto p = path_of(g);
    const auto E = build_E(p);
    const auto& m = E.params();
    const auto d = diagonal(m.require_integer_order());
    const BOperator op(m, d);
    const auto cg = circle_grid(m.period(), 1001);
    CHECK(dche_residual(E.equation(), m.omega(), op.apply(E.E_plus()), cg) <= 1e-6);
    CHECK(dche_residual(E.equation(), m.omega(), op.apply(E.E_minus()), cg) <= 1e-6);
    const auto B = build_matrix_B(boundary_values(p), d, m);
    CHECK(matrix_action_residual(E, op, B, cg) <= 1e-6);
    const double D = d_plus_minus(d, m).D;
    CHECK(std::abs(std::abs(B.det()) - std::abs(D)) <= 1e-5);
    CHECK(std::abs(B.det() * B.det() - D * D) / (D * D) <= 1e-6);
    CHECK(std::abs(B.det() + D) <= 1e-9);
    // The printed normalisation is four times the operator.
    CHECK(std::abs(B.literal_entry(0, 1) - 4.0 * B.entry(0, 1)) < 1e-14);
  }
}

TEST_CASE("operator squared is D times the monodromy, for one global lift") {
  for (const auto& g : sets) {
    const auto p = path_of(g);
    const auto E = build_E(p);
    const auto d = diagonal(static_cast<int>(g.ell));
    const auto cg = circle_grid(E.params().period(), 1001);
    const auto r = check_B_squared(E, d, cg);
    CHECK(r.lift == MinusZLift::plus_half_period);
    CHECK(r.sup_relative <= 1e-6);
    CHECK(r.D_relative_gap <= 1e-12);
    // The opposite lift squares to the inverse monodromy.
    const auto s = check_B_squared(E, d, cg, MinusZLift::minus_half_period);
    CHECK(s.monodromy_shift < 0);
    CHECK(s.sup_relative <= 1e-6);
  }
}

TEST_CASE("random linear combinations obey the same laws") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  const auto p = path_of(sets[0]);
  const auto E = build_E(p);
  const auto& m = E.params();
  const auto d = diagonal(2);
  const BOperator op(m, d);
  const auto B = build_matrix_B(boundary_values(p), d, m);
  const double T = m.period();
  for (int k = 0; k < 5; ++k) {
    const cplx a(n(rng), n(rng)), b(n(rng), n(rng));
    const HeunFunction f = [&, a, b](double t) { return a * E.jet(+1, t) + b * E.jet(-1, t); };
    CHECK(dche_residual(E.equation(), m.omega(), f, lifted_grid(T, 501)) <= 1e-7);
    const auto img = op.apply(f);
    const auto twice = op.apply(img);
    double num = 0.0, den = 0.0, num2 = 0.0, den2 = 0.0;
    for (double t : circle_grid(T, 301)) {
      const cplx want = a * (B.entry(0, 0) * E.value(+1, t) + B.entry(0, 1) * E.value(-1, t)) +
                        b * (B.entry(1, 0) * E.value(+1, t) + B.entry(1, 1) * E.value(-1, t));
      num = std::max(num, std::abs(img(t).v - want));
      den = std::max(den, std::abs(want));
      const cplx target = d_plus_minus(d, m).D * f(t + T).v;
      num2 = std::max(num2, std::abs(twice(t).v - target));
      den2 = std::max(den2, std::abs(target));
    }
    CHECK(num / den <= 1e-6);
    CHECK(num2 / den2 <= 1e-6);
  }
}

TEST_CASE("operator gates and window requirements") {
  const auto bad = ModelParams::from_chart(1.0, 0.5, 1.0);
  CHECK_THROWS_AS(BOperator(bad, diagonal(1)), Error);
  const auto m = ModelParams::from_chart(2.0, 0.3, 1.0);
  CHECK_THROWS_AS(BOperator(m, diagonal(3)), Error);
  const auto narrow = solve_phase(m, 0.5, -m.period(), m.period(), 1e-10);
  const auto E = build_E(narrow);
  try {
    check_B_squared(E, diagonal(2), circle_grid(m.period(), 101));
    FAIL("expected WindowTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::window_too_small);
  }
}

TEST_CASE("check report schema") {
  const auto m = ModelParams::from_chart(2.0, 0.3, 1.0);
  HeunCheck c{"pair_ode", 1e-15, 1001, "t+T/2", {}};
  const auto j = to_json(c, m);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"check", "params", "grid", "sup_residual", "convention_used"});
}
