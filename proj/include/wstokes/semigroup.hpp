#pragma once

#include "wstokes/field.hpp"

#include <span>

namespace wstokes {

struct HeatKernelParams {
  int n = 3;
  double t = 1.0;
};

/// E_t(x) = (4 pi t)^{-n/2} exp(-|x|^2 / (4t)).
double heat_kernel(const HeatKernelParams& params, std::span<const double> x);
/// Same, as a function of |x|^2.
double heat_kernel_radial(int n, double t, double r2);
/// E_t sampled on every grid point.
Field heat_kernel_field(const Grid& grid, double t);

/// Spectral multiplier exp(-t |xi|^2) on every component; t = 0 is the identity.
SpectralField heat_apply(SpectralField u, double t);
Field heat_apply(const Field& u, double t);

/// Multiplier I - xi xi^T / |xi|^2 built from the derivative wavenumbers, so the
/// result is exactly divergence free for `divergence`. The zero mode and every
/// Nyquist mode are sent to 0.
SpectralField leray_project(const SpectralField& v);
Field leray_project(const Field& v);

/// heat_apply o leray_project.
SpectralField stokes_apply(const SpectralField& u, double t);
Field stokes_apply(const Field& u, double t);

/// d_j of heat_apply(u, t) for every component (multiplier i xi_j e^{-t|xi|^2}).
Field semigroup_gradient_apply(const Field& u, double t, int j);

/// (-Delta)^{1/2} with symbol |xi| (derivative wavenumbers).
SpectralField half_laplacian(const SpectralField& v);

/// ||grad v||_{L^q_s} / ||(-Delta)^{1/2} v||_{L^q_s}.
double riesz_gradient_ratio(const Field& v, double q, double s);

/// I_lambda f(x) = int f(x - y) |y|^{lambda - n} dy on every grid point, as a
/// zero-padded (non-periodic) discrete convolution. The singular cell uses the
/// exact integral of |y|^{lambda-n} over the ball with the cell's volume.
Field fractional_integral(const Field& f, double lambda);

/// Direct sum of the same quadrature at one grid point.
double fractional_integral_at(const Field& f, double lambda, Eigen::Index point);

/// Smallest C with E_t(x) <= C |x|^{lambda-n} t^{-lambda/2} for all x != 0, t > 0:
/// C = (4 pi)^{-n/2} 4^a a^a e^{-a}, a = (n - lambda)/2.
double kernel_domination_constant(int n, double lambda);

}  // namespace wstokes
