#pragma once

// Exact polynomials in (λ, μ) with big-integer coefficients, and Laurent
// polynomials in z whose coefficients are such bivariates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rsjm {

using BigInt = boost::multiprecision::cpp_int;

/// Σ c_{ab} λ^a μ^b. Zero coefficients are never stored.
class BivariateCoeff {
 public:
  using Key = std::pair<int, int>;  // (power of λ, power of μ)

  BivariateCoeff() = default;
  BivariateCoeff(long long c) {  // NOLINT: integers convert implicitly
    if (c != 0) terms_[{0, 0}] = c;
  }
  static BivariateCoeff monomial(BigInt c, int lam_pow, int mu_pow) {
    BivariateCoeff b;
    if (c != 0) b.terms_[{lam_pow, mu_pow}] = std::move(c);
    return b;
  }
  static BivariateCoeff lambda() { return monomial(1, 1, 0); }
  static BivariateCoeff mu() { return monomial(1, 0, 1); }

  const std::map<Key, BigInt>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  BivariateCoeff& operator+=(const BivariateCoeff& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  BivariateCoeff& operator-=(const BivariateCoeff& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  friend BivariateCoeff operator+(BivariateCoeff a, const BivariateCoeff& b) { return a += b; }
  friend BivariateCoeff operator-(BivariateCoeff a, const BivariateCoeff& b) { return a -= b; }
  friend BivariateCoeff operator-(const BivariateCoeff& a) { return BivariateCoeff{} - a; }
  friend BivariateCoeff operator*(const BivariateCoeff& a, const BivariateCoeff& b) {
    BivariateCoeff out;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) out.add_term({ka.first + kb.first, ka.second + kb.second}, ca * cb);
    return out;
  }
  friend bool operator==(const BivariateCoeff&, const BivariateCoeff&) = default;

  double eval(double lam, double mu) const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) s += c.convert_to<double>() * std::pow(lam, k.first) * std::pow(mu, k.second);
    return s;
  }

  /// Monomials in ascending (λ, μ) order, e.g. "mu^2 + lambda".
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      append_term(out, c, monomial_name(k.first, k.second), first);
      first = false;
    }
    return out;
  }

  static std::string monomial_name(int lam_pow, int mu_pow, int z_pow = 0) {
    std::string s;
    auto factor = [&s](const char* name, int p) {
      if (p == 0) return;
      if (!s.empty()) s += "*";
      s += name;
      if (p != 1) s += "^" + std::to_string(p);
    };
    factor("lambda", lam_pow);
    factor("mu", mu_pow);
    factor("z", z_pow);
    return s;
  }

  // Appends "± |c|*name" (sign folded into the joiner after the first term).
  static void append_term(std::string& out, const BigInt& c, const std::string& name, bool first) {
    const bool neg = c < 0;
    const BigInt mag = neg ? BigInt(-c) : c;
    if (first) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    if (name.empty()) {
      out += mag.str();
    } else {
      if (mag != 1) out += mag.str() + "*";
      out += name;
    }
  }

 private:
  void add_term(const Key& k, const BigInt& c) {
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      if (c != 0) terms_.emplace(k, c);
      return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }

  std::map<Key, BigInt> terms_;
};

/// Σ_{k ≥ lo} c_k z^k with BivariateCoeff entries; canonical means the first
/// and last stored coefficients are nonzero (the zero polynomial stores none).
class LaurentPoly {
 public:
  LaurentPoly() = default;
  LaurentPoly(BivariateCoeff c) {  // NOLINT: constants convert implicitly
    if (!c.is_zero()) coeffs_.push_back(std::move(c));
  }
  LaurentPoly(long long c) : LaurentPoly(BivariateCoeff(c)) {}  // NOLINT

  static LaurentPoly monomial(BivariateCoeff c, int power) {
    LaurentPoly p(std::move(c));
    p.lo_ = power;
    return p;
  }
  static LaurentPoly z(int power = 1) { return monomial(1, power); }

  bool is_zero() const noexcept { return coeffs_.empty(); }
  int min_degree() const noexcept { return lo_; }
  int max_degree() const noexcept { return lo_ + static_cast<int>(coeffs_.size()) - 1; }
  bool is_polynomial() const noexcept { return is_zero() || lo_ >= 0; }

  /// Coefficient of z^k (zero outside the stored range).
  BivariateCoeff coeff(int k) const {
    if (is_zero() || k < lo_ || k > max_degree()) return {};
    return coeffs_[static_cast<std::size_t>(k - lo_)];
  }

  friend LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) { return combine(a, b, false); }
  friend LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) { return combine(a, b, true); }
  friend LaurentPoly operator-(const LaurentPoly& a) { return LaurentPoly{} - a; }
  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    LaurentPoly out;
    out.lo_ = a.lo_ + b.lo_;
    out.coeffs_.assign(a.coeffs_.size() + b.coeffs_.size() - 1, BivariateCoeff{});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out.coeffs_[i + j] += a.coeffs_[i] * b.coeffs_[j];
    out.trim();
    return out;
  }
  friend bool operator==(const LaurentPoly&, const LaurentPoly&) = default;

  /// Formal d/dz.
  LaurentPoly derivative() const {
    LaurentPoly out;
    if (is_zero()) return out;
    out.lo_ = lo_ - 1;
    out.coeffs_.reserve(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const int k = lo_ + static_cast<int>(i);
      out.coeffs_.push_back(BivariateCoeff(k) * coeffs_[i]);
    }
    out.trim();
    return out;
  }

  /// p(-z).
  LaurentPoly reflect() const {
    LaurentPoly out = *this;
    for (std::size_t i = 0; i < out.coeffs_.size(); ++i) {
      const int k = lo_ + static_cast<int>(i);
      if (k % 2 != 0) out.coeffs_[i] = -out.coeffs_[i];
    }
    return out;
  }

  /// Numeric coefficients at given (λ, μ), lowest power first.
  std::vector<double> numeric(double lam, double mu) const {
    std::vector<double> v;
    v.reserve(coeffs_.size());
    for (const auto& c : coeffs_) v.push_back(c.eval(lam, mu));
    return v;
  }

  /// Monomials sorted by z-power, then λ-power, then μ-power.
  std::string to_string() const {
    if (is_zero()) return "0";
    std::string out;
    bool first = true;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const int k = lo_ + static_cast<int>(i);
      for (const auto& [key, c] : coeffs_[i].terms()) {
        BivariateCoeff::append_term(out, c, BivariateCoeff::monomial_name(key.first, key.second, k), first);
        first = false;
      }
    }
    return out;
  }

 private:
  static LaurentPoly combine(const LaurentPoly& a, const LaurentPoly& b, bool subtract) {
    if (b.is_zero()) return a;
    if (a.is_zero()) {
      if (!subtract) return b;
    }
    LaurentPoly out;
    const int lo = a.is_zero() ? b.lo_ : std::min(a.lo_, b.lo_);
    const int hi = a.is_zero() ? b.max_degree() : std::max(a.max_degree(), b.max_degree());
    out.lo_ = lo;
    out.coeffs_.assign(static_cast<std::size_t>(hi - lo + 1), BivariateCoeff{});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) out.coeffs_[static_cast<std::size_t>(a.lo_ - lo) + i] += a.coeffs_[i];
    for (std::size_t i = 0; i < b.coeffs_.size(); ++i) {
      auto& slot = out.coeffs_[static_cast<std::size_t>(b.lo_ - lo) + i];
      if (subtract) slot -= b.coeffs_[i]; else slot += b.coeffs_[i];
    }
    out.trim();
    return out;
  }

  void trim() {
    std::size_t first = 0;
    while (first < coeffs_.size() && coeffs_[first].is_zero()) ++first;
    if (first == coeffs_.size()) {
      coeffs_.clear();
      lo_ = 0;
      return;
    }
    std::size_t last = coeffs_.size();
    while (coeffs_[last - 1].is_zero()) --last;
    coeffs_ = std::vector<BivariateCoeff>(coeffs_.begin() + static_cast<std::ptrdiff_t>(first),
                                          coeffs_.begin() + static_cast<std::ptrdiff_t>(last));
    lo_ += static_cast<int>(first);
  }

  int lo_ = 0;
  std::vector<BivariateCoeff> coeffs_;
};

/// Laurent polynomial with numeric coefficients, for fast evaluation.
class NumericLaurent {
 public:
  NumericLaurent() = default;
  NumericLaurent(const LaurentPoly& p, double lam, double mu) : lo_(p.min_degree()), c_(p.numeric(lam, mu)) {}

  template <class T>
  T operator()(const T& z) const {
    T acc{};
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
    return acc * pow_int(z, lo_);
  }

  /// d/dz.
  template <class T>
  T derivative(const T& z) const {
    T acc{};
    for (std::size_t i = c_.size(); i-- > 0;) {
      const int k = lo_ + static_cast<int>(i);
      acc = acc * z + static_cast<double>(k) * c_[i];
    }
    return acc * pow_int(z, lo_ - 1);
  }

 private:
  template <class T>
  static T pow_int(const T& z, int n) {
    if (n == 0) return T(1.0);
    T base = n > 0 ? z : T(1.0) / z;
    unsigned e = static_cast<unsigned>(n > 0 ? n : -n);
    T r(1.0);
    while (e) {
      if (e & 1u) r *= base;
      base *= base;
      e >>= 1u;
    }
    return r;
  }

  int lo_ = 0;
  std::vector<double> c_;
};

}  // namespace rsjm
