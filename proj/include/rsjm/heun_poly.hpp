#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsjm/error.hpp"
#include "rsjm/model.hpp"
#include "rsjm/polynomial.hpp"

namespace rsjm {

inline constexpr int max_order = 32;

/// Level-k members (p_k, q_k, r_k, s_k) of the recurrence for order ℓ.
struct PolyQuadruple {
  int level = 0;
  int ell = 1;
  LaurentPoly p, q, r, s;

  const LaurentPoly& operator[](std::size_t i) const {
    switch (i) {
      case 0: return p;
      case 1: return q;
      case 2: return r;
      default: return s;
    }
  }
};

inline constexpr std::array<const char*, 4> quad_names{"p", "q", "r", "s"};

namespace detail {
inline LaurentPoly L_lam() { return LaurentPoly(BivariateCoeff::lambda()); }
inline LaurentPoly L_mu() { return LaurentPoly(BivariateCoeff::mu()); }
inline LaurentPoly L_z(int k = 1) { return LaurentPoly::z(k); }
inline LaurentPoly L_int(long long c) { return LaurentPoly(c); }
/// λ + μ².
inline LaurentPoly L_sum() { return L_lam() + L_mu() * L_mu(); }
inline LaurentPoly L_sign(int e) { return L_int(e % 2 == 0 ? 1 : -1); }
}  // namespace detail

/// Level 0: p = 0, q = 1, r = z⁻², s = -μ.
inline PolyQuadruple initial_quadruple(int ell) {
  PolyQuadruple q;
  q.level = 0;
  q.ell = ell;
  q.p = LaurentPoly{};
  q.q = 1;
  q.r = LaurentPoly::z(-2);
  q.s = -detail::L_mu();
  return q;
}

/// One step of the recurrence; k in the factors (k-2), (2k-ℓ-3) is the
/// output level.
inline PolyQuadruple recurrence_step(const PolyQuadruple& in) {
  using namespace detail;
  const int ell = in.ell;
  const int k = in.level + 1;
  const auto z = L_z(), z2 = L_z(2), mu = L_mu(), lam = L_lam();
  const auto& [_, __, p, q, r, s] = in;
  PolyQuadruple out;
  out.level = k;
  out.ell = ell;
  out.p = L_int(1 - ell) * z * p + q + z2 * p.derivative();
  out.q = z2 * (-lam + L_int(ell + 1) * mu * z) * p + mu * (L_int(1) - z2) * q + z2 * q.derivative();
  out.r = L_int(2 * (k - 2)) * z * r - s - z2 * r.derivative();
  out.s = z2 * (lam - L_int(ell + 1) * mu * z) * r + (L_int(2 * k - ell - 3) * z + mu * (z2 - L_int(1))) * s -
          z2 * s.derivative();
  return out;
}

/// The diagonal representatives (𝔭, 𝔮, 𝔯, 𝔰) = level-ℓ quadruple.
inline PolyQuadruple diagonal(int ell) {
  if (ell < 1 || ell > max_order) fail(ErrorCode::invalid_argument, "ell must lie in [1, 32]");
  PolyQuadruple q = initial_quadruple(ell);
  for (int i = 0; i < ell; ++i) q = recurrence_step(q);
  const std::array<int, 4> want{2 * ell - 2, 2 * ell, 2 * ell - 2, 2 * ell};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& x = q[i];
    if (x.is_zero() || !x.is_polynomial() || x.max_degree() != want[i]) {
      std::ostringstream os;
      os << quad_names[i] << " has degree range [" << x.min_degree() << ", " << x.max_degree() << "], expected polynomial of degree "
         << want[i];
      fail(ErrorCode::degree_claim_violated, os.str());
    }
  }
  return q;
}

struct IdentityResult {
  std::string name;
  bool holds = true;
  /// First nonzero monomial of lhs - rhs when the identity fails.
  std::string witness;
};

struct CheckResult {
  std::vector<IdentityResult> identities;
  bool ok() const {
    for (const auto& r : identities)
      if (!r.holds) return false;
    return true;
  }
  std::optional<IdentityResult> first_failure() const {
    for (const auto& r : identities)
      if (!r.holds) return r;
    return std::nullopt;
  }
};

namespace detail {
inline IdentityResult compare(std::string name, const LaurentPoly& lhs, const LaurentPoly& rhs) {
  IdentityResult r;
  r.name = std::move(name);
  const LaurentPoly d = lhs - rhs;
  r.holds = d.is_zero();
  if (!r.holds) {
    const int k = d.min_degree();
    const auto& c = d.coeff(k);
    const auto& [key, val] = *c.terms().begin();
    std::string w;
    BivariateCoeff::append_term(w, val, BivariateCoeff::monomial_name(key.first, key.second, k), true);
    r.witness = w;
  }
  return r;
}
}  // namespace detail

/// Reflection identities under z → -z, denominators (λ+μ²) cleared.
inline CheckResult check_parity(const PolyQuadruple& d) {
  using namespace detail;
  const int ell = d.ell;
  const auto L = L_sum(), mu = L_mu(), z2 = L_z(2);
  const auto combo = mu * z2 * d.r + d.s;
  CheckResult out;
  out.identities.push_back(compare("L p(-z) = (-1)^(l+1) (mu z^2 r + s)", L * d.p.reflect(), L_sign(ell + 1) * combo));
  out.identities.push_back(compare("L q(-z) = L (mu z^2 p + q) + (-1)^l mu z^2 (mu z^2 r + s)", L * d.q.reflect(),
                                   L * (mu * z2 * d.p + d.q) + L_sign(ell) * mu * z2 * combo));
  out.identities.push_back(compare("r(-z) = r", d.r.reflect(), d.r));
  out.identities.push_back(compare("s(-z) = (-1)^(l+1) L p - mu z^2 r", d.s.reflect(), L_sign(ell + 1) * L * d.p - mu * z2 * d.r));
  return out;
}

/// The first-order differential system obeyed by the diagonal quadruple.
inline CheckResult check_ode_system(const PolyQuadruple& d) {
  using namespace detail;
  const int ell = d.ell;
  const auto L = L_sum(), mu = L_mu(), lam = L_lam(), z = L_z(), z2 = L_z(2);
  const auto& [_, __, p, q, r, s] = d;
  CheckResult out;
  out.identities.push_back(compare("z^2 p' = (mu + (l-1) z) p - q + (-1)^l z^2 r", z2 * p.derivative(),
                                   (mu + L_int(ell - 1) * z) * p - q + L_sign(ell) * z2 * r));
  out.identities.push_back(compare("q' = (lambda - (l+1) mu z) p + mu q + (-1)^l s", q.derivative(),
                                   (lam - L_int(ell + 1) * mu * z) * p + mu * q + L_sign(ell) * s));
  out.identities.push_back(compare("z^2 r' = (-1)^(l+1) L p + z (2(l-1) - mu z) r - s", z2 * r.derivative(),
                                   L_sign(ell + 1) * L * p + z * (L_int(2 * (ell - 1)) - mu * z) * r - s));
  out.identities.push_back(compare("z^2 s' = (-1)^(l+1) L q + z^2 (lambda - (l+1) mu z) r + ((l-1) z - mu) s",
                                   z2 * s.derivative(),
                                   L_sign(ell + 1) * L * q + z2 * (lam - L_int(ell + 1) * mu * z) * r +
                                       (L_int(ell - 1) * z - mu) * s));
  return out;
}

/// 𝔇 = z^{2(1-ℓ)}(𝔭𝔰 - 𝔮𝔯); NotConstant if any z-dependence survives.
inline BivariateCoeff first_integral(const PolyQuadruple& d) {
  const LaurentPoly D = LaurentPoly::z(2 * (1 - d.ell)) * (d.p * d.s - d.q * d.r);
  if (D.is_zero()) return {};
  if (D.min_degree() != 0 || D.max_degree() != 0) {
    fail(ErrorCode::not_constant, "first integral depends on z: " + D.to_string());
  }
  return D.coeff(0);
}

/// Value at z = 1 (sum of the coefficients).
inline BivariateCoeff at_one(const LaurentPoly& p) {
  BivariateCoeff s;
  for (int k = p.min_degree(); !p.is_zero() && k <= p.max_degree(); ++k) s += p.coeff(k);
  return s;
}

/// 𝔇 = (λ+μ²)𝔭(1)² - 𝔯(1)².
inline IdentityResult check_first_integral_at_one(const PolyQuadruple& d) {
  const BivariateCoeff D = first_integral(d);
  const BivariateCoeff p1 = at_one(d.p), r1 = at_one(d.r);
  const BivariateCoeff L = BivariateCoeff::lambda() + BivariateCoeff::mu() * BivariateCoeff::mu();
  return detail::compare("D = (lambda + mu^2) p(1)^2 - r(1)^2", LaurentPoly(D), LaurentPoly(L * p1 * p1 - r1 * r1));
}

/// Numeric form of the diagonal quadruple at a parameter point.
struct HeunPolys {
  int ell = 1;
  NumericLaurent p, q, r, s;
};

inline HeunPolys numeric_polys(const PolyQuadruple& d, const ModelParams& m) {
  const double lam = m.lambda(), mu = m.mu();
  return {d.ell, NumericLaurent(d.p, lam, mu), NumericLaurent(d.q, lam, mu), NumericLaurent(d.r, lam, mu),
          NumericLaurent(d.s, lam, mu)};
}

struct DPlusMinus {
  double p1 = 0.0;
  double r1 = 0.0;
  double D_plus = 0.0;
  double D_minus = 0.0;
  /// Exact 𝔇 evaluated numerically.
  double D = 0.0;
  bool generic = true;
};

inline constexpr double genericity_threshold = 1e-8;

/// 𝔇± = 𝔭(1) ± 2ω𝔯(1), without raising on degenerate points.
inline DPlusMinus evaluate_d_plus_minus(const PolyQuadruple& d, const ModelParams& m) {
  DPlusMinus out;
  const double lam = m.lambda(), mu = m.mu(), w = m.omega();
  out.p1 = at_one(d.p).eval(lam, mu);
  out.r1 = at_one(d.r).eval(lam, mu);
  out.D_plus = out.p1 + 2.0 * w * out.r1;
  out.D_minus = out.p1 - 2.0 * w * out.r1;
  out.D = first_integral(d).eval(lam, mu);
  const double scale = genericity_threshold * std::max(1.0, std::abs(out.p1));
  out.generic = std::abs(out.D_plus) > scale && std::abs(out.D_minus) > scale;
  return out;
}

/// As evaluate_d_plus_minus, raising GenericityViolated when 𝔇₊ or 𝔇₋ vanishes.
inline DPlusMinus d_plus_minus(const PolyQuadruple& d, const ModelParams& m) {
  if (m.require_integer_order() != d.ell) fail(ErrorCode::invalid_argument, "quadruple order does not match params");
  auto out = evaluate_d_plus_minus(d, m);
  if (!out.generic) {
    std::ostringstream os;
    os.precision(17);
    os << "D+ = " << out.D_plus << ", D- = " << out.D_minus << " (p(1)^2 = (2 omega)^2 r(1)^2)";
    fail(ErrorCode::genericity_violated, os.str());
  }
  return out;
}

/// Canonical text, one "name = poly" line per member.
inline std::string to_text(const PolyQuadruple& d) {
  std::string out;
  for (std::size_t i = 0; i < 4; ++i) out += std::string(quad_names[i]) + " = " + d[i].to_string() + "\n";
  return out;
}

inline nlohmann::ordered_json poly_to_json(const LaurentPoly& p) {
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (int k = p.min_degree(); !p.is_zero() && k <= p.max_degree(); ++k) {
    const BivariateCoeff ck = p.coeff(k);
    for (const auto& [key, c] : ck.terms()) {
      terms.push_back({{"z", k}, {"lambda", key.first}, {"mu", key.second}, {"coefficient", c.str()}});
    }
  }
  nlohmann::ordered_json j;
  j["text"] = p.to_string();
  j["degree"] = p.is_zero() ? -1 : p.max_degree();
  j["terms"] = terms;
  return j;
}

inline nlohmann::ordered_json to_json(const PolyQuadruple& d) {
  nlohmann::ordered_json j;
  j["ell"] = d.ell;
  j["level"] = d.level;
  for (std::size_t i = 0; i < 4; ++i) j[quad_names[i]] = poly_to_json(d[i]);
  j["D"] = first_integral(d).to_string();
  return j;
}

inline nlohmann::ordered_json to_json(const CheckResult& c) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& r : c.identities) {
    nlohmann::ordered_json x;
    x["identity"] = r.name;
    x["holds"] = r.holds;
    if (!r.holds) x["witness"] = r.witness;
    a.push_back(x);
  }
  return a;
}

}  // namespace rsjm
