#include <catch_amalgamated.hpp>

#include <complex>
#include <random>
#include <string>

#include "rsjm/heun_poly.hpp"

using namespace rsjm;

namespace {

// Canonical text produced by an independent computer-algebra run of the recurrence.
const char* const golden_text_1 =
    "p = 1\n"
    "q = mu - mu*z^2\n"
    "r = mu\n"
    "s = mu^2 + lambda - mu^2*z^2\n";

const char* const golden_text_2 =
    "p = mu - z - mu*z^2\n"
    "q = mu^2 - 2*mu^2*z^2 - lambda*z^2 + mu*z^3 + mu^2*z^4\n"
    "r = -mu^2 - lambda + mu^2*z^2\n"
    "s = -mu^3 - lambda*mu - mu^2*z - lambda*z + 2*mu^3*z^2 + 2*lambda*mu*z^2 - mu^3*z^4\n";

const char* const golden_text_3 =
    "p = mu^2 - 2*mu*z + 2*z^2 - 2*mu^2*z^2 - lambda*z^2 + 2*mu*z^3 + mu^2*z^4\n"
    "q = mu^3 - 3*mu^3*z^2 - 2*lambda*mu*z^2 + 2*mu^2*z^3 - 2*mu*z^4 + 3*mu^3*z^4 + 2*lambda*mu*z^4 - 2*mu^2*z^5 - "
    "mu^3*z^6\n"
    "r = mu^3 + lambda*mu - 2*mu^3*z^2 - 2*lambda*mu*z^2 + mu^3*z^4\n"
    "s = mu^4 + lambda*mu^2 + 2*mu^3*z + 2*lambda*mu*z + 2*mu^2*z^2 - 3*mu^4*z^2 + 2*lambda*z^2 - 4*lambda*mu^2*z^2 - "
    "lambda^2*z^2 - 2*mu^3*z^3 - 2*lambda*mu*z^3 + 3*mu^4*z^4 + 3*lambda*mu^2*z^4 - mu^4*z^6\n";

const char* const golden_D[] = {
    "lambda",
    "mu^2 + lambda - lambda^2",
    "4*mu^2 + 4*lambda - 4*lambda*mu^2 - 4*lambda^2 + lambda^3",
    "36*mu^2 - 9*mu^4 + 36*lambda - 42*lambda*mu^2 - 33*lambda^2 + 10*lambda^2*mu^2 + 10*lambda^3 - lambda^4",
    "576*mu^2 - 192*mu^4 + 576*lambda - 672*lambda*mu^2 + 64*lambda*mu^4 - 480*lambda^2 + 212*lambda^2*mu^2 + "
    "148*lambda^3 - 20*lambda^3*mu^2 - 20*lambda^4 + lambda^5",
    "14400*mu^2 - 5200*mu^4 + 225*mu^6 + 14400*lambda - 16160*lambda*mu^2 + 2435*lambda*mu^4 - 10960*lambda^2 + "
    "5491*lambda^2*mu^2 - 259*lambda^2*mu^4 + 3281*lambda^3 - 742*lambda^3*mu^2 - 483*lambda^4 + 35*lambda^4*mu^2 + "
    "35*lambda^5 - lambda^6",
};

}  // namespace

TEST_CASE("first step from the initial quadruple") {
  const auto q0 = initial_quadruple(1);
  CHECK(q0.level == 0);
  CHECK(q0.p.is_zero());
  CHECK(q0.r == LaurentPoly::z(-2));
  const auto q1 = recurrence_step(q0);
  CHECK(q1.level == 1);
  CHECK(to_text(q1) == golden_text_1);
  for (int ell = 1; ell <= 6; ++ell) CHECK(recurrence_step(initial_quadruple(ell)).p == LaurentPoly(1));
}

TEST_CASE("diagonal quadruples match independent golden text") {
  CHECK(to_text(diagonal(1)) == golden_text_1);
  CHECK(to_text(diagonal(2)) == golden_text_2);
  CHECK(to_text(diagonal(3)) == golden_text_3);
}

TEST_CASE("degree claim and exact identities for orders 1..6") {
  for (int ell = 1; ell <= 6; ++ell) {
    CAPTURE(ell);
    const auto d = diagonal(ell);
    CHECK(d.p.max_degree() == 2 * ell - 2);
    CHECK(d.q.max_degree() == 2 * ell);
    CHECK(d.r.max_degree() == 2 * ell - 2);
    CHECK(d.s.max_degree() == 2 * ell);
    for (int i = 0; i < 4; ++i) CHECK(d[i].is_polynomial());
    CHECK(check_parity(d).ok());
    CHECK(check_ode_system(d).ok());
    CHECK(first_integral(d).to_string() == golden_D[ell - 1]);
    CHECK(check_first_integral_at_one(d).holds);
  }
}

TEST_CASE("intermediate levels are Laurent with bounded pole order") {
  for (int ell = 2; ell <= 6; ++ell) {
    auto q = initial_quadruple(ell);
    for (int k = 1; k < ell; ++k) {
      q = recurrence_step(q);
      CAPTURE(ell, k);
      CHECK(q.r.min_degree() >= -2);
      CHECK((q.s.is_zero() || q.s.min_degree() >= -2));
    }
  }
}

TEST_CASE("identity checks report a witness when they fail") {
  auto d = diagonal(2);
  d.s = d.s + LaurentPoly::z(3);
  const auto par = check_parity(d);
  REQUIRE_FALSE(par.ok());
  const auto f = par.first_failure();
  REQUIRE(f);
  CHECK_FALSE(f->witness.empty());
  CHECK_FALSE(check_ode_system(d).ok());
  try {
    first_integral(d);
    FAIL("expected NotConstant");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_constant);
  }
}

TEST_CASE("order range") {
  CHECK_THROWS_AS(diagonal(0), Error);
  CHECK_THROWS_AS(diagonal(33), Error);
  CHECK_NOTHROW(diagonal(12));
}

TEST_CASE("first integral is z-independent numerically at random points") {
  std::mt19937_64 rng(20261014);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int ell = 1; ell <= 4; ++ell) {
    const auto d = diagonal(ell);
    const auto D = first_integral(d);
    for (int i = 0; i < 20; ++i) {
      const double lam = u(rng), mu = u(rng);
      const NumericLaurent p(d.p, lam, mu), q(d.q, lam, mu), r(d.r, lam, mu), s(d.s, lam, mu);
      const double Dv = D.eval(lam, mu);
      for (int j = 0; j < 5; ++j) {
        const std::complex<double> z(u(rng), u(rng));
        const auto val = std::pow(z, 2 * (1 - ell)) * (p(z) * s(z) - q(z) * r(z));
        CHECK(std::abs(val - Dv) <= 1e-12 * std::max(1.0, std::abs(Dv)) * std::pow(10.0, ell - 1));
      }
    }
  }
}

TEST_CASE("D plus minus at order one and genericity") {
  const auto d = diagonal(1);
  for (double mu : {0.1, 0.3, 0.7}) {
    const auto m = ModelParams::from_chart(1.0, mu, 1.0);
    const auto v = d_plus_minus(d, m);
    CHECK(std::abs(v.D_plus - (1 + m.A())) < 1e-15);
    CHECK(std::abs(v.D_minus - (1 - m.A())) < 1e-15);
  }
  const auto bad = ModelParams::from_chart(1.0, 0.5, 1.0);
  CHECK_FALSE(evaluate_d_plus_minus(d, bad).generic);
  try {
    d_plus_minus(d, bad);
    FAIL("expected GenericityViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::genericity_violated);
    CHECK(e.is_excluded_point());
  }
  CHECK_THROWS_AS(d_plus_minus(diagonal(2), ModelParams::from_chart(1.0, 0.3, 1.0)), Error);
}

TEST_CASE("product of D plus and D minus reproduces the exact first integral") {
  for (const auto& [ell, mu, w] : {std::tuple{2, 0.3, 1.0}, std::tuple{1, 0.2, 1.3}, std::tuple{3, 0.45, 0.7}, std::tuple{5, 0.1, 2.0}}) {
    const auto m = ModelParams::from_chart(ell, mu, w);
    const auto v = d_plus_minus(diagonal(ell), m);
    const double prod = v.D_plus * v.D_minus / (4 * w * w);
    CHECK(std::abs(prod - v.D) <= 1e-12 * std::max(1.0, std::abs(v.D)));
  }
}

TEST_CASE("json form is deterministic and carries D") {
  const auto a = to_json(diagonal(3)).dump();
  const auto b = to_json(diagonal(3)).dump();
  CHECK(a == b);
  const auto j = to_json(diagonal(1));
  CHECK(j["D"] == "lambda");
  CHECK(j["p"]["text"] == "1");
  CHECK(j["q"]["terms"].size() == 2);
}
