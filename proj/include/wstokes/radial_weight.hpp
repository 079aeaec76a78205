#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace wstokes {

enum class WeightForm { inhomogeneous, homogeneous };

/// Radial power weight: <x>^s = (1+|x|^2)^{s/2}, or |x|^s for the homogeneous form.
struct RadialWeight {
  double s = 0.0;
  WeightForm form = WeightForm::inhomogeneous;

  static RadialWeight bracket(double s) { return {s, WeightForm::inhomogeneous}; }
  static RadialWeight power(double s) { return {s, WeightForm::homogeneous}; }

  /// Value at squared radius r2. The homogeneous form at the origin gives +inf
  /// for s < 0, 0 for s > 0 and 1 for s == 0.
  double at_radius_squared(double r2) const {
    if (form == WeightForm::inhomogeneous) return std::pow(1.0 + r2, 0.5 * s);
    if (r2 == 0.0) {
      if (s < 0.0) return std::numeric_limits<double>::infinity();
      return s == 0.0 ? 1.0 : 0.0;
    }
    return std::pow(r2, 0.5 * s);
  }

  RadialWeight pow(double e) const { return {s * e, form}; }
};

inline std::string to_string(WeightForm f) {
  return f == WeightForm::inhomogeneous ? "inhomogeneous" : "homogeneous";
}

}  // namespace wstokes
