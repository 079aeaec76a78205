#pragma once

#include "wstokes/field.hpp"

namespace wstokes {

/// Annulus D_R = {R < |x| < R+1}.
struct AnnulusSpec {
  double R = 1.0;

  double inner() const { return R; }
  double outer() const { return R + 1.0; }
  bool contains_open(double r2) const { return r2 > R * R && r2 < outer() * outer(); }
};

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0, 1], and its derivative.
double smoothstep5(double t);
double smoothstep5_derivative(double t);

/// 1 on |x| <= inner, 0 on |x| >= outer, 1 - smoothstep5 in between.
Field radial_cutoff(const Grid& grid, double inner, double outer);
/// Analytic gradient of radial_cutoff (3 components on n = 3 grids).
Field radial_cutoff_gradient(const Grid& grid, double inner, double outer);

/// phi_R (plateau radii R+2 / R+3) and psi_R (R+1 / R+2).
struct CutoffPair {
  Field phi;
  Field psi;
};
CutoffPair cutoff_pair(const Grid& grid, double R);

struct BogovskiiOptions {
  /// Radius of the balls carrying the weight functions theta.
  double ball_radius = 0.3;
  /// Direction quadrature for targets outside a weight ball: Gauss-Legendre in
  /// cos(angle) over the cap seen from the target, uniform in azimuth.
  int cap_polar = 6;
  int cap_azimuth = 12;
  /// Same over the full sphere for targets inside a weight ball.
  int full_polar = 12;
  int full_azimuth = 24;
  /// Gauss-Legendre nodes along each chord through a weight ball.
  int chord_nodes = 12;
  /// Trapezoid step along source rays, in units of the grid spacing.
  double ray_step = 1.0;
  /// Relative mean tolerance of the input.
  double mean_tolerance = 1e-10;
};

/// Right inverse of the divergence on the annulus (n = 3).
///
/// The annulus is split into conical sectors, each star-shaped with respect to
/// a ball; an angular partition of unity cuts f into pieces whose masses are
/// moved between overlapping sectors with normalized bumps so that every piece
/// has zero mean. Each piece goes through the classical Bogovskii integral
/// formula of its sector, evaluated in polar coordinates around the target.
/// The trilinear interpolant of the samples is what gets inverted, and the
/// output is written only on grid points of the open annulus.
///
/// Preconditions: f scalar, zero outside the open annulus, and
/// |sum f h^3| <= mean_tolerance * sum |f| h^3. The error message reports the mean.
Field bogovskii_apply(const Field& f, const AnnulusSpec& spec, const BogovskiiOptions& options = {});

/// ||div B - f|| / ||f|| in L^2 over the open annulus.
double annulus_divergence_error(const Field& b, const Field& f, const AnnulusSpec& spec);

/// ||B||_{W^{1,2}} / ||f||_{L^2}.
double w12_bound_ratio(const Field& b, const Field& f);

struct ExtensionResult {
  Field v0;
  /// grad(phi_R).u0 before mean removal, relative to its L^1 norm.
  double relative_flux;
  /// Mean removed from grad(phi_R).u0 before the Bogovskii step.
  double removed_mean;
};

struct ExtensionOptions {
  /// Accepted |div u0| / max|grad u0| on |x| > R.
  double divergence_tolerance = 1e-8;
  /// Accepted relative mean of grad(phi_R).u0 (quadrature tolerance).
  double flux_tolerance = 1e-2;
  BogovskiiOptions bogovskii;
};

/// v0 = (1 - phi_R) u0 + B[grad(phi_R).u0] with B on D_{R+2}; v0 = u0 on |x| >= R+3.
/// Requires n = 3 and R + 3 < L.
ExtensionResult solenoidal_extension(const Field& u0, double R, const ExtensionOptions& options = {});

}  // namespace wstokes
