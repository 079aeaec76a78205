#pragma once

#include "wstokes/field.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace wstokes {

/// T-periodic forcing f(x, t) = eps * sum_i a_i(t mod T) g_i(x).
class PeriodicForce {
 public:
  PeriodicForce(const Grid& grid, double period, double amplitude = 1.0);

  /// Adds a_i(t) g_i(x); the profile is only ever evaluated on [0, T).
  void add_term(std::function<double(double)> profile, const Field& shape);

  const Grid& grid() const { return grid_; }
  double period() const { return period_; }
  double amplitude() const { return amplitude_; }
  bool is_zero() const { return amplitude_ == 0.0 || terms_.empty(); }
  /// Copy with a different amplitude.
  PeriodicForce with_amplitude(double eps) const;

  Field sample(double t) const;
  /// Leray projection of sample(t), in spectral form.
  SpectralField projected(double t) const;

 private:
  struct Term {
    std::function<double(double)> profile;
    Field shape;
    SpectralField projected_shape;
  };
  double wrap(double t) const;

  Grid grid_;
  double period_;
  double amplitude_;
  std::vector<Term> terms_;
};

struct PicardConfig {
  /// Time nodes per period (even, >= 8).
  int M = 16;
  double tol = 1e-8;
  int max_iter = 30;
  /// The history sum stops at the first k with exp(-k T kappa_min) < tail_eps.
  double tail_eps = 1e-14;
  /// Drop the nonlinearity (B = 0).
  bool linear = false;
};

/// Node values u(t_m), t_m = m T / M, in spectral form.
using NodeSeries = std::vector<SpectralField>;

struct PeriodicSolution {
  double period = 0.0;
  NodeSeries nodes;
  /// ||u(t_m) - H[u](t_m)||_{L^2} for the returned iterate.
  std::vector<double> node_residual;
  /// Relative residual of every Picard evaluation.
  std::vector<double> residual_history;
  /// Number of evaluations of the Poincare map.
  int iterations = 0;
  /// Largest ratio of consecutive residuals after the second evaluation.
  double contraction = 0.0;
};

/// Raised when the residual fails to decrease three times in a row.
class ContractionFailure : public std::runtime_error {
 public:
  ContractionFailure(double growth, int iteration);
  double growth() const { return growth_; }
  int iteration() const { return iteration_; }

 private:
  double growth_;
  int iteration_;
};

/// -P((u.grad)u) with 2/3-rule de-aliasing, computed as -P div(u (x) u).
SpectralField nonlinearity(const SpectralField& u);
Field nonlinearity(const Field& u);

/// Number of periods kept in the history sum.
int tail_periods(const Grid& grid, double period, double tail_eps);

/// H[u](t_m) = int_{-inf}^{t_m} e^{-(t_m - tau)A} (B[u] + P f)(tau) dtau with the
/// integrand replaced by its trigonometric interpolant through the nodes. Each
/// time frequency w is integrated exactly; the periodic history sum over the
/// retained K periods gives the factor (1 - e^{-K kappa T}) / (kappa + i w).
NodeSeries poincare_map(const NodeSeries& u, const PeriodicForce& f, const PicardConfig& cfg);

/// Picard iteration u <- H[u] from u = 0 until
/// max_m ||u - H[u]|| / max(max_m ||u||, machine eps) <= tol.
PeriodicSolution picard_solve(const PeriodicForce& f, const PicardConfig& cfg);

/// Marches u(0) over one period with a fourth-order exponential time
/// differencing scheme (contour-integral coefficients) and returns
/// ||u(T) - u(0)|| / ||u(0)|| (the absolute defect when u(0) = 0).
/// steps <= 0 selects max(256, 8M).
double periodicity_check(const PeriodicSolution& sol, const PeriodicForce& f, const PicardConfig& cfg, int steps = 0);

struct WeightedReport {
  double q1 = 2.0, q2 = 2.0, s = 0.0;
  double q12 = 1.0, q22_star = 1.0;
  /// sup_m ||<x>^s u||_{q1} + ||<x>^s grad u||_{q2}
  double solution_norm = 0.0;
  /// sup_m ||<x>^{2s} f||_{q12} + ||<x>^{2s} f||_{q22*}
  double force_norm = 0.0;
  /// solution_norm / force_norm; empty when both vanish.
  std::optional<double> ratio;
};

WeightedReport weighted_report(const PeriodicSolution& sol, const PeriodicForce& f, double q1, double q2, double s);

}  // namespace wstokes
