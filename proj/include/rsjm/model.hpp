#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsjm/error.hpp"

namespace rsjm {

/// Parameters of the phase equation  φ̇ + sin φ = B + A cos ωt, stored in the
/// (ℓ, μ, ω) chart of the Riccati lift. A = 2ωμ and B = ωℓ are derived.
class ModelParams {
 public:
  /// Relative tolerance used to decide that ℓ is a positive integer.
  static constexpr double integer_tolerance = 1e-12;

  ModelParams() = default;

  static ModelParams from_chart(double ell, double mu, double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      std::ostringstream os;
      os << "omega must be positive (got " << omega << ")";
      fail(ErrorCode::non_positive_omega, os.str());
    }
    if (!std::isfinite(ell) || !std::isfinite(mu)) {
      fail(ErrorCode::invalid_argument, "ell and mu must be finite");
    }
    ModelParams p;
    p.mu_ = mu;
    p.omega_ = omega;
    p.ell_ = ell;
    const double nearest = std::round(ell);
    if (nearest >= 1.0 && std::abs(ell - nearest) <= integer_tolerance * std::max(1.0, std::abs(ell))) {
      p.order_ = static_cast<int>(nearest);
      p.ell_ = nearest;
    }
    return p;
  }

  static ModelParams from_physical(double A, double Bdrive, double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      std::ostringstream os;
      os << "omega must be positive (got " << omega << ")";
      fail(ErrorCode::non_positive_omega, os.str());
    }
    return from_chart(Bdrive / omega, A / (2.0 * omega), omega);
  }

  double ell() const noexcept { return ell_; }
  double mu() const noexcept { return mu_; }
  double omega() const noexcept { return omega_; }

  double A() const noexcept { return 2.0 * omega_ * mu_; }
  double Bdrive() const noexcept { return omega_ * ell_; }
  double period() const noexcept { return 2.0 * std::numbers::pi / omega_; }
  /// λ = (2ω)⁻² − μ².
  double lambda() const noexcept { return 1.0 / (4.0 * omega_ * omega_) - mu_ * mu_; }

  std::optional<int> integer_order() const noexcept { return order_; }

  /// The integer order, or NonIntegerOrder for the Heun machinery.
  int require_integer_order() const {
    if (!order_) {
      std::ostringstream os;
      os.precision(17);
      os << "ell = " << ell_ << " is not a positive integer";
      fail(ErrorCode::non_integer_order, os.str());
    }
    return *order_;
  }

  /// Right-hand side of the phase equation.
  double phase_rhs(double t, double phi) const noexcept {
    return Bdrive() + A() * std::cos(omega_ * t) - std::sin(phi);
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double ell_ = 0.0;
  double mu_ = 0.0;
  double omega_ = 1.0;
  std::optional<int> order_;
};

inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json::object();
  j["ell"] = p.ell();
  j["mu"] = p.mu();
  j["omega"] = p.omega();
}

inline void to_json(nlohmann::ordered_json& j, const ModelParams& p) {
  j = nlohmann::ordered_json::object();
  j["ell"] = p.ell();
  j["mu"] = p.mu();
  j["omega"] = p.omega();
}

inline void from_json(const nlohmann::json& j, ModelParams& p) {
  p = ModelParams::from_chart(j.at("ell").get<double>(), j.at("mu").get<double>(),
                              j.at("omega").get<double>());
}

}  // namespace rsjm
