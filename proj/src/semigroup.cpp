#include "wstokes/semigroup.hpp"

#include "wstokes/errors.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace wstokes {

namespace {

double unit_ball_volume(int n) { return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

// Integral of |y|^{lambda-n} over the ball whose volume is one grid cell.
double singular_cell_value(int n, double h, double lambda) {
  const double rho = std::pow(std::pow(h, n) / unit_ball_volume(n), 1.0 / n);
  return n * unit_ball_volume(n) * std::pow(rho, lambda) / lambda;
}

}  // namespace

double heat_kernel_radial(int n, double t, double r2) {
  require(t > 0.0, "heat kernel needs t > 0");
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
}

double heat_kernel(const HeatKernelParams& params, std::span<const double> x) {
  require(static_cast<int>(x.size()) == params.n, "point dimension does not match n");
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  return heat_kernel_radial(params.n, params.t, r2);
}

Field heat_kernel_field(const Grid& grid, double t) {
  require(t > 0.0, "heat kernel needs t > 0");
  const Eigen::ArrayXd& r2 = grid.radius_squared();
  const double c = std::pow(4.0 * std::numbers::pi * t, -0.5 * grid.dim());
  return Field(grid, Eigen::ArrayXXd(c * (-r2 / (4.0 * t)).exp()));
}

SpectralField heat_apply(SpectralField u, double t) {
  require(t >= 0.0 && std::isfinite(t), "heat semigroup needs t >= 0");
  if (t == 0.0) return u;
  const Grid g = u.grid();  // u is moved below
  return apply_multiplier(std::move(u), [&](Eigen::Index k) { return std::exp(-t * g.mode_kappa(k)); });
}

Field heat_apply(const Field& u, double t) {
  require(t >= 0.0 && std::isfinite(t), "heat semigroup needs t >= 0");
  if (t == 0.0) return u;
  return from_spectral(heat_apply(to_spectral(u), t));
}

SpectralField leray_project(const SpectralField& v) {
  const Grid& g = v.grid();
  const int n = g.dim();
  require(v.components() == n, "Leray projection needs an n-component field");
  SpectralField out(g, n);
  std::vector<double> xi(n);
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    if (g.is_nyquist(k)) continue;
    double k2 = 0.0;
    for (int j = 0; j < n; ++j) {
      xi[j] = g.derivative_wavenumber(k, j);
      k2 += xi[j] * xi[j];
    }
    if (k2 == 0.0) continue;
    std::complex<double> dot = 0.0;
    for (int j = 0; j < n; ++j) dot += xi[j] * v.coeffs()(k, j);
    dot /= k2;
    for (int j = 0; j < n; ++j) out.coeffs()(k, j) = v.coeffs()(k, j) - xi[j] * dot;
  }
  return out;
}

Field leray_project(const Field& v) { return from_spectral(leray_project(to_spectral(v))); }

SpectralField stokes_apply(const SpectralField& u, double t) { return heat_apply(leray_project(u), t); }

Field stokes_apply(const Field& u, double t) {
  require(t >= 0.0 && std::isfinite(t), "Stokes semigroup needs t >= 0");
  return from_spectral(stokes_apply(to_spectral(u), t));
}

Field semigroup_gradient_apply(const Field& u, double t, int j) {
  require(t > 0.0 && std::isfinite(t), "semigroup gradient needs t > 0");
  require(j >= 0 && j < u.grid().dim(), "derivative index out of range");
  return from_spectral(partial(heat_apply(to_spectral(u), t), j));
}

SpectralField half_laplacian(const SpectralField& v) {
  const Grid& g = v.grid();
  return apply_multiplier(v, [&](Eigen::Index k) {
    double s = 0.0;
    for (int j = 0; j < g.dim(); ++j) s += std::pow(g.derivative_wavenumber(k, j), 2);
    return std::sqrt(s);
  });
}

double riesz_gradient_ratio(const Field& v, double q, double s) {
  const SpectralField hat = to_spectral(v);
  const RadialWeight w = RadialWeight::bracket(s);
  const double den = weighted_lq_norm(from_spectral(half_laplacian(hat)), q, w);
  const double scale = weighted_lq_norm(v, q, w);
  require(den > 1e-14 * std::max(scale, 1e-300), "(-Delta)^{1/2} v vanishes; v is constant");
  return weighted_lq_norm(from_spectral(gradient(hat)), q, w) / den;
}

Field fractional_integral(const Field& f, double lambda) {
  const Grid& g = f.grid();
  const int n = g.dim();
  require(lambda > 0.0 && lambda < n, "fractional integral needs 0 < lambda < n");
  require(f.all_finite(), "field has non-finite samples");
  const int N = g.points_per_axis();
  const double h = g.spacing();
  // Twice the points over twice the extent: same spacing, no periodic wrap.
  const Grid padded(n, 2 * N, 2.0 * g.half_extent());

  Eigen::ArrayXd kernel(padded.num_points());
  for (Eigen::Index p = 0; p < padded.num_points(); ++p) {
    Eigen::Index rest = p;
    double m = 0.0;
    for (int d = 0; d < n; ++d) {
      int i = static_cast<int>(rest % (2 * N));
      rest /= 2 * N;
      if (i >= N) i -= 2 * N;
      m += double(i) * i;
    }
    kernel[p] = m == 0.0 ? singular_cell_value(n, h, lambda) : std::pow(m * h * h, 0.5 * (lambda - n)) * std::pow(h, n);
  }
  Eigen::ArrayXcd k_hat(padded.num_modes());
  padded.forward_raw(kernel.data(), k_hat.data());

  Field out(g, f.components());
  Eigen::ArrayXd buf(padded.num_points());
  Eigen::ArrayXcd hat(padded.num_modes());
  std::vector<int> idx(n);
  for (int c = 0; c < f.components(); ++c) {
    buf.setZero();
    for (Eigen::Index p = 0; p < g.num_points(); ++p) {
      Eigen::Index rest = p;
      Eigen::Index q = 0;
      Eigen::Index stride = 1;
      for (int d = 0; d < n; ++d) {
        q += (rest % N) * stride;
        rest /= N;
        stride *= 2 * N;
      }
      buf[q] = f.values()(p, c);
    }
    padded.forward_raw(buf.data(), hat.data());
    hat *= k_hat;
    padded.inverse_raw(hat.data(), buf.data());
    const double scale = 1.0 / static_cast<double>(padded.num_points());
    for (Eigen::Index p = 0; p < g.num_points(); ++p) {
      Eigen::Index rest = p;
      Eigen::Index q = 0;
      Eigen::Index stride = 1;
      for (int d = 0; d < n; ++d) {
        q += (rest % N) * stride;
        rest /= N;
        stride *= 2 * N;
      }
      out.values()(p, c) = buf[q] * scale;
    }
  }
  return out;
}

double fractional_integral_at(const Field& f, double lambda, Eigen::Index point) {
  const Grid& g = f.grid();
  const int n = g.dim();
  require(lambda > 0.0 && lambda < n, "fractional integral needs 0 < lambda < n");
  require(f.components() == 1, "pointwise fractional integral takes a scalar field");
  require(point >= 0 && point < g.num_points(), "point index out of range");
  const double h = g.spacing();
  std::vector<double> x(n), y(n);
  g.point(point, x);
  double sum = 0.0;
  for (Eigen::Index p = 0; p < g.num_points(); ++p) {
    const double v = f.values()(p, 0);
    if (v == 0.0) continue;
    if (p == point) {
      sum += v * singular_cell_value(n, h, lambda);
      continue;
    }
    g.point(p, y);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) r2 += (x[d] - y[d]) * (x[d] - y[d]);
    sum += v * std::pow(r2, 0.5 * (lambda - n)) * std::pow(h, n);
  }
  return sum;
}

double kernel_domination_constant(int n, double lambda) {
  require(lambda > 0.0 && lambda < n, "kernel domination needs 0 < lambda < n");
  const double a = 0.5 * (n - lambda);
  return std::pow(4.0 * std::numbers::pi, -0.5 * n) * std::pow(4.0, a) * std::pow(a, a) * std::exp(-a);
}

}  // namespace wstokes
