#include "wstokes/field.hpp"

#include "wstokes/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace wstokes {

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  require(a == b, "fields live on different grids");
}

double derivative_wavenumber(const Grid& g, Eigen::Index mode, int axis) {
  return g.derivative_wavenumber(mode, axis);
}

}  // namespace

Field::Field(const Grid& grid, int components)
    : grid_(grid), values_(Eigen::ArrayXXd::Zero(grid.num_points(), components)) {
  require(components >= 1, "a field needs at least one component");
}

Field::Field(const Grid& grid, Eigen::ArrayXXd values) : grid_(grid), values_(std::move(values)) {
  require(values_.rows() == grid.num_points(), "sample count does not match the grid");
  require(values_.cols() >= 1, "a field needs at least one component");
}

Field Field::sample(const Grid& grid, int components,
                    const std::function<void(std::span<const double>, std::span<double>)>& fn) {
  Field f(grid, components);
  std::vector<double> x(grid.dim());
  std::vector<double> out(components);
  for (Eigen::Index p = 0; p < grid.num_points(); ++p) {
    grid.point(p, x);
    std::fill(out.begin(), out.end(), 0.0);
    fn(x, out);
    for (int c = 0; c < components; ++c) f.values_(p, c) = out[c];
  }
  return f;
}

Field Field::sample_scalar(const Grid& grid, const std::function<double(std::span<const double>)>& fn) {
  Field f(grid, 1);
  std::vector<double> x(grid.dim());
  for (Eigen::Index p = 0; p < grid.num_points(); ++p) {
    grid.point(p, x);
    f.values_(p, 0) = fn(x);
  }
  return f;
}

Field Field::extract(int c) const {
  require(c >= 0 && c < components(), "component index out of range");
  return Field(grid_, Eigen::ArrayXXd(values_.col(c)));
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(grid_, o.grid_);
  require(components() == o.components(), "component count mismatch");
  values_ += o.values_;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(grid_, o.grid_);
  require(components() == o.components(), "component count mismatch");
  values_ -= o.values_;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

SpectralField::SpectralField(const Grid& grid, int components)
    : grid_(grid), coeffs_(Eigen::ArrayXXcd::Zero(grid.num_modes(), components)) {}

SpectralField::SpectralField(const Grid& grid, Eigen::ArrayXXcd coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  require(coeffs_.rows() == grid.num_modes(), "mode count does not match the grid");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  require(components() == o.components(), "component count mismatch");
  coeffs_ += o.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid_, o.grid_);
  require(components() == o.components(), "component count mismatch");
  coeffs_ -= o.coeffs_;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double a, SpectralField f) { return f *= a; }

SpectralField to_spectral(const Field& f) {
  require(f.all_finite(), "field has non-finite samples");
  const Grid& g = f.grid();
  SpectralField out(g, f.components());
  const double scale = 1.0 / static_cast<double>(g.num_points());
  for (int c = 0; c < f.components(); ++c) {
    g.forward_raw(f.values().col(c).data(), out.coeffs().col(c).data());
  }
  out.coeffs() *= scale;
  return out;
}

Field from_spectral(const SpectralField& f) {
  const Grid& g = f.grid();
  Field out(g, f.components());
  for (int c = 0; c < f.components(); ++c) {
    g.inverse_raw(f.coeffs().col(c).data(), out.values().col(c).data());
  }
  return out;
}

SpectralField apply_multiplier(SpectralField f, const std::function<double(Eigen::Index)>& m) {
  const Eigen::Index modes = f.grid().num_modes();
  for (Eigen::Index k = 0; k < modes; ++k) {
    const double v = m(k);
    f.coeffs().row(k) *= v;
  }
  return f;
}

SpectralField partial(const SpectralField& f, int axis) {
  const Grid& g = f.grid();
  require(axis >= 0 && axis < g.dim(), "axis out of range");
  SpectralField out(g, f.components());
  const std::complex<double> i(0.0, 1.0);
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    const double xi = derivative_wavenumber(g, k, axis);
    out.coeffs().row(k) = f.coeffs().row(k) * (i * xi);
  }
  return out;
}

SpectralField gradient(const SpectralField& f) {
  const Grid& g = f.grid();
  const int n = g.dim();
  SpectralField out(g, f.components() * n);
  const std::complex<double> i(0.0, 1.0);
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    for (int j = 0; j < n; ++j) {
      const std::complex<double> m = i * derivative_wavenumber(g, k, j);
      for (int c = 0; c < f.components(); ++c) out.coeffs()(k, c * n + j) = m * f.coeffs()(k, c);
    }
  }
  return out;
}

Field gradient(const Field& f) { return from_spectral(gradient(to_spectral(f))); }

SpectralField divergence(const SpectralField& v) {
  const Grid& g = v.grid();
  const int n = g.dim();
  require(v.components() == n, "divergence needs an n-component field");
  SpectralField out(g, 1);
  const std::complex<double> i(0.0, 1.0);
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < n; ++j) s += derivative_wavenumber(g, k, j) * v.coeffs()(k, j);
    out.coeffs()(k, 0) = i * s;
  }
  return out;
}

Field divergence(const Field& v) { return from_spectral(divergence(to_spectral(v))); }

SpectralField laplacian(const SpectralField& f) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](Eigen::Index k) {
    double s = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double xi = derivative_wavenumber(g, k, j);
      s += xi * xi;
    }
    return -s;
  });
}

Field laplacian(const Field& f) { return from_spectral(laplacian(to_spectral(f))); }

SpectralField curl(const SpectralField& v) {
  const Grid& g = v.grid();
  require(g.dim() == 3 && v.components() == 3, "curl is defined for 3-component fields in 3-D");
  SpectralField out(g, 3);
  const std::complex<double> i(0.0, 1.0);
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    const std::complex<double> d0 = i * derivative_wavenumber(g, k, 0);
    const std::complex<double> d1 = i * derivative_wavenumber(g, k, 1);
    const std::complex<double> d2 = i * derivative_wavenumber(g, k, 2);
    const auto& c = v.coeffs();
    out.coeffs()(k, 0) = d1 * c(k, 2) - d2 * c(k, 1);
    out.coeffs()(k, 1) = d2 * c(k, 0) - d0 * c(k, 2);
    out.coeffs()(k, 2) = d0 * c(k, 1) - d1 * c(k, 0);
  }
  return out;
}

Field curl(const Field& v) { return from_spectral(curl(to_spectral(v))); }

Eigen::ArrayXd pointwise_magnitude(const Field& f) {
  if (f.components() == 1) return f.values().col(0).abs();
  return f.values().square().rowwise().sum().sqrt();
}

double integral(const Field& f, int component) {
  require(component >= 0 && component < f.components(), "component index out of range");
  return f.values().col(component).sum() * f.grid().cell_volume();
}

double inner_product(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  require(a.components() == b.components(), "component count mismatch");
  return (a.values() * b.values()).sum() * a.grid().cell_volume();
}

namespace detail {

double lq_norm_unchecked(const Field& f, double q, std::optional<RadialWeight> w) {
  require(std::isfinite(q) && q >= 1.0, "Lebesgue index must be finite and >= 1");
  const Eigen::ArrayXd mag = pointwise_magnitude(f);
  Eigen::ArrayXd integrand = mag.pow(q);
  if (w && w->s != 0.0) {
    const RadialWeight wq = w->pow(q);
    const Eigen::ArrayXd& r2 = f.grid().radius_squared();
    for (Eigen::Index p = 0; p < integrand.size(); ++p) {
      if (integrand[p] != 0.0) integrand[p] *= wq.at_radius_squared(r2[p]);
    }
  }
  return std::pow(integrand.sum() * f.grid().cell_volume(), 1.0 / q);
}

}  // namespace detail

double weighted_lq_norm(const Field& f, double q, std::optional<RadialWeight> w) {
  require(std::isfinite(q) && q > 1.0, "Lebesgue index q must satisfy 1 < q < inf, got " + std::to_string(q));
  return detail::lq_norm_unchecked(f, q, w);
}

double weighted_lq_norm_masked(const Field& f, double q, std::optional<RadialWeight> w,
                               const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
  require(std::isfinite(q) && q > 1.0, "Lebesgue index q must satisfy 1 < q < inf");
  require(mask.size() == f.size(), "mask size mismatch");
  Field masked = f;
  for (Eigen::Index p = 0; p < f.size(); ++p)
    if (!mask[p]) masked.values().row(p).setZero();
  return detail::lq_norm_unchecked(masked, q, w);
}

double l2_norm(const Field& f) { return weighted_lq_norm(f, 2.0); }

double spectral_inner_product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid());
  require(a.components() == b.components(), "component count mismatch");
  const Grid& g = a.grid();
  double s = 0.0;
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    double row = 0.0;
    for (int c = 0; c < a.components(); ++c) row += std::real(a.coeffs()(k, c) * std::conj(b.coeffs()(k, c)));
    s += g.mode_multiplicity(k) * row;
  }
  return s * std::pow(2.0 * g.half_extent(), g.dim());
}

double spectral_l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, spectral_inner_product(f, f))); }

}  // namespace wstokes
