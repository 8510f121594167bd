#pragma once

#include <cmath>
#include <string>

namespace cglab {

enum class PotentialKind { Quadratic, BoundedAnharmonic };

/// Symmetric, uniformly convex pair potential V(eta).
///
/// Quadratic: V = kappa eta^2 / 2.
/// BoundedAnharmonic: V'' = 1 + b eta^2 / (1 + eta^2), so 1 <= V'' <= 1 + b.
struct Potential {
  PotentialKind kind = PotentialKind::Quadratic;
  double kappa = 1.0;
  double b = 0.5;

  static Potential quadratic(double kappa = 1.0);
  static Potential bounded_anharmonic(double b = 0.5);

  double V(double eta) const noexcept {
    if (kind == PotentialKind::Quadratic) return 0.5 * kappa * eta * eta;
    return 0.5 * (1.0 + b) * eta * eta - b * (eta * std::atan(eta) - 0.5 * std::log1p(eta * eta));
  }
  double dV(double eta) const noexcept {
    if (kind == PotentialKind::Quadratic) return kappa * eta;
    return (1.0 + b) * eta - b * std::atan(eta);
  }
  double d2V(double eta) const noexcept {
    if (kind == PotentialKind::Quadratic) return kappa;
    const double e2 = eta * eta;
    return 1.0 + b * e2 / (1.0 + e2);
  }

  double c_minus() const noexcept { return kind == PotentialKind::Quadratic ? kappa : 1.0; }
  double c_plus() const noexcept { return kind == PotentialKind::Quadratic ? kappa : 1.0 + b; }

  /// "quadratic" or "anharmonic".
  std::string id() const;
  /// Throws ModelError if the parameters break the convexity bounds.
  void validate() const;
};

}  // namespace cglab
