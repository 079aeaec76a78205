#pragma once

#include "wstokes/grid.hpp"
#include "wstokes/radial_weight.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <span>

namespace wstokes {

/// Real samples of a scalar (1 component) or vector field on a Grid.
/// Storage is one column per component, rows in flat point order.
class Field {
 public:
  explicit Field(const Grid& grid, int components = 1);
  Field(const Grid& grid, Eigen::ArrayXXd values);

  /// Samples fn(x, out) at every grid point; out has `components` entries.
  static Field sample(const Grid& grid, int components,
                      const std::function<void(std::span<const double>, std::span<double>)>& fn);
  static Field sample_scalar(const Grid& grid, const std::function<double(std::span<const double>)>& fn);

  const Grid& grid() const { return grid_; }
  int components() const { return static_cast<int>(values_.cols()); }
  Eigen::Index size() const { return values_.rows(); }

  const Eigen::ArrayXXd& values() const { return values_; }
  Eigen::ArrayXXd& values() { return values_; }
  auto component(int c) { return values_.col(c); }
  auto component(int c) const { return values_.col(c); }

  /// Single component as its own scalar field.
  Field extract(int c) const;
  bool all_finite() const { return values_.allFinite(); }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a) {
    values_ *= a;
    return *this;
  }

 private:
  Grid grid_;
  Eigen::ArrayXXd values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);

/// Fourier-series coefficients of a Field in the half-spectrum layout of Grid.
/// Normalized so that f(x) = sum_xi c(xi) e^{i xi.(x+L)} over the full spectrum.
class SpectralField {
 public:
  explicit SpectralField(const Grid& grid, int components = 1);
  SpectralField(const Grid& grid, Eigen::ArrayXXcd coeffs);

  const Grid& grid() const { return grid_; }
  int components() const { return static_cast<int>(coeffs_.cols()); }
  const Eigen::ArrayXXcd& coeffs() const { return coeffs_; }
  Eigen::ArrayXXcd& coeffs() { return coeffs_; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a) {
    coeffs_ *= a;
    return *this;
  }

 private:
  Grid grid_;
  Eigen::ArrayXXcd coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double a, SpectralField f);

/// Rejects non-finite samples.
SpectralField to_spectral(const Field& f);
Field from_spectral(const SpectralField& f);

/// Multiplies every mode by m(mode) (same multiplier for all components).
SpectralField apply_multiplier(SpectralField f, const std::function<double(Eigen::Index)>& m);

// Differential operators are spectral multipliers i*xi_j. Odd-order operators
// drop the Nyquist frequency of the differentiated axis so real fields stay real.

/// Gradient of each component: output component c*n + j holds d_j f_c.
SpectralField gradient(const SpectralField& f);
Field gradient(const Field& f);
/// d_j of every component.
SpectralField partial(const SpectralField& f, int axis);
/// Divergence of an n-component field.
SpectralField divergence(const SpectralField& v);
Field divergence(const Field& v);
/// Laplacian consistent with divergence(gradient(.)).
SpectralField laplacian(const SpectralField& f);
Field laplacian(const Field& f);
/// Curl of a 3-component field (n = 3 only).
SpectralField curl(const SpectralField& v);
Field curl(const Field& v);

/// Euclidean magnitude of the components at every point.
Eigen::ArrayXd pointwise_magnitude(const Field& f);

/// Midpoint-rule integral sum f h^n of one component.
double integral(const Field& f, int component = 0);
/// Sum over points and components of a.b h^n.
double inner_product(const Field& a, const Field& b);

/// (sum |f|^q <x>^{sq} h^n)^{1/q} with |f| the pointwise Euclidean magnitude.
/// Rejects q <= 1.
double weighted_lq_norm(const Field& f, double q, std::optional<RadialWeight> w = std::nullopt);
/// Same with an optional restriction mask (points where mask is true).
double weighted_lq_norm_masked(const Field& f, double q, std::optional<RadialWeight> w,
                               const Eigen::Array<bool, Eigen::Dynamic, 1>& mask);
double l2_norm(const Field& f);

/// L^2 norm computed from spectral coefficients (Parseval).
double spectral_l2_norm(const SpectralField& f);
double spectral_inner_product(const SpectralField& a, const SpectralField& b);

namespace detail {
/// Weighted L^q norm without the q > 1 precondition (q >= 1 accepted).
double lq_norm_unchecked(const Field& f, double q, std::optional<RadialWeight> w);
}  // namespace detail

}  // namespace wstokes
