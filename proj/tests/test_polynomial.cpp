#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rsjm/polynomial.hpp"

using namespace rsjm;

namespace {
LaurentPoly lam() { return LaurentPoly(BivariateCoeff::lambda()); }
LaurentPoly mu() { return LaurentPoly(BivariateCoeff::mu()); }
LaurentPoly z(int k = 1) { return LaurentPoly::z(k); }
}  // namespace

TEST_CASE("bivariate coefficients cancel and print canonically") {
  const auto l = BivariateCoeff::lambda(), m = BivariateCoeff::mu();
  CHECK((l - l).is_zero());
  CHECK((m * m + l).to_string() == "mu^2 + lambda");
  CHECK((BivariateCoeff(-3) * l * m).to_string() == "-3*lambda*mu");
  CHECK(BivariateCoeff{}.to_string() == "0");
  CHECK((l * l - BivariateCoeff(2)).to_string() == "-2 + lambda^2");
  CHECK((l + m) * (l - m) == l * l - m * m);
  CHECK((l * m + BivariateCoeff(1)).eval(2.0, 3.0) == 7.0);
}

TEST_CASE("big integer coefficients do not overflow") {
  BivariateCoeff c(1);
  for (int i = 0; i < 40; ++i) c = c * BivariateCoeff(1000003);
  const BigInt expect = boost::multiprecision::pow(BigInt(1000003), 40);
  CHECK(c.terms().at({0, 0}) == expect);
}

TEST_CASE("laurent polynomials: ring operations and trimming") {
  const auto a = z(-2) + mu() * z(1);
  const auto b = z(2) - mu() * z(5);
  const auto prod = a * b;
  CHECK(prod.min_degree() == 0);
  CHECK(prod.max_degree() == 6);
  CHECK(prod.coeff(3).is_zero());
  CHECK(prod.to_string() == "1 - mu^2*z^6");
  CHECK((a - a).is_zero());
  CHECK((a - a).min_degree() == 0);
  CHECK((z(3) + z(-1) - z(3)).max_degree() == -1);
  CHECK(!z(-1).is_polynomial());
  CHECK(LaurentPoly{}.is_polynomial());
  CHECK((-(lam() * z(2))).to_string() == "-lambda*z^2");
}

TEST_CASE("formal derivative and reflection") {
  const auto p = z(-2) + LaurentPoly(3) * z(1) + mu() * z(4);
  CHECK(p.derivative() == LaurentPoly(-2) * z(-3) + LaurentPoly(3) + LaurentPoly(4) * mu() * z(3));
  CHECK(LaurentPoly(7).derivative().is_zero());
  CHECK(p.reflect() == z(-2) - LaurentPoly(3) * z(1) + mu() * z(4));
  CHECK(p.reflect().reflect() == p);
  // Leibniz rule on a product.
  const auto q = lam() * z(-1) - z(2);
  CHECK((p * q).derivative() == p.derivative() * q + p * q.derivative());
}

TEST_CASE("canonical order: z power, then lambda power, then mu power") {
  const auto p = mu() * z(2) + lam() * z(2) + mu() * mu() * z(0) + lam() + z(1);
  CHECK(p.to_string() == "mu^2 + lambda + z + mu*z^2 + lambda*z^2");
}

TEST_CASE("numeric evaluation agrees with Horner on complex arguments") {
  const auto p = z(-2) + LaurentPoly(3) * z(1) - mu() * lam() * z(4);
  const NumericLaurent n(p, 0.7, -0.4);
  const std::complex<double> x(0.3, 1.1);
  const auto want = 1.0 / (x * x) + 3.0 * x + 0.28 * std::pow(x, 4);
  CHECK(std::abs(n(x) - want) < 1e-14);
  const auto dwant = -2.0 / (x * x * x) + 3.0 + 4.0 * 0.28 * std::pow(x, 3);
  CHECK(std::abs(n.derivative(x) - dwant) < 1e-13);
  CHECK(std::abs(NumericLaurent(LaurentPoly{}, 1, 1)(x)) == 0.0);
}
