#pragma once

#include "wstokes/field.hpp"
#include "wstokes/radial_weight.hpp"

#include <span>
#include <string>
#include <vector>

namespace wstokes {

/// Open interval (lower, upper); empty when lower >= upper.
struct OpenInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool empty() const { return !(lower < upper); }
  bool contains(double x) const { return lower < x && x < upper; }
  double width() const { return empty() ? 0.0 : upper - lower; }
};

// ---------------------------------------------------------------------------
// Muckenhoupt A_q diagnostics

enum class AqVerdict { finite, diverging, inconclusive };
std::string to_string(AqVerdict v);

struct CubeSample {
  double center_offset;  // cube center sits at center_offset * e_1
  double side;
  double product;  // (avg w)(avg w^{-1/(q-1)})^{q-1}
};

struct AqOptions {
  /// Midpoint cells per axis; the cube is sampled with points_per_axis^n cells.
  int points_per_axis = 64;
  /// Width of the cells next to the origin. Zero selects the default: 0.02 for
  /// <x>^s, and (smallest ladder side)/points_per_axis for |x|^s.
  double grading_floor = 0.0;
  double stable_increase = 0.05;
  double diverging_growth = 1.5;
};

struct AqReport {
  double q = 2.0;
  int dim = 3;
  RadialWeight weight;
  std::vector<CubeSample> samples;
  double sup_estimate = 1.0;
  /// Running sup over cubes with side <= ladder side, one entry per ladder side.
  std::vector<double> ladder_sides;
  std::vector<double> running_sup;
  double last_decade_increase = 0.0;
  double max_decade_growth = 1.0;
  AqVerdict verdict = AqVerdict::inconclusive;
};

/// A_q product of one cube (side `side`, center `center_offset * e_1`) by
/// tensor midpoint quadrature on cells graded geometrically toward the point of
/// the cube closest to the origin.
double aq_cube_product(const RadialWeight& w, double q, int dim, double center_offset, double side,
                       int points_per_axis, double grading_floor);

/// Evaluates the A_q product over the cube ladder (sides) at the origin and at
/// every center offset along e_1, then classifies the running sup:
/// finite when the last decade of sides raises it by less than 5%, diverging
/// when some decade multiplies it by at least 1.5, inconclusive otherwise.
AqReport aq_check(const RadialWeight& w, double q, std::span<const double> cube_sides,
                  std::span<const double> center_offsets = {}, int dim = 3, const AqOptions& options = {});

/// Logarithmically spaced values from lo to hi inclusive, `per_decade` per factor 10.
std::vector<double> geometric_ladder(double lo, double hi, int per_decade);

/// Range of s with <x>^{sq} in A_q(R^n): (-n/q, n(1 - 1/q)).
OpenInterval admissible_range(double q, int n);

// ---------------------------------------------------------------------------
// Maximal function

/// Average of |f| over the discrete periodic ball {y : |y| <= r} around every point.
Field ball_average(const Field& f, double radius);

/// Pointwise max of |f| and its ball averages over the given radii.
Field maximal_function(const Field& f, std::span<const double> radii);

/// `count` radii spaced geometrically over [h, L].
std::vector<double> radius_ladder(const Grid& grid, int count);

/// Every distinct periodic lattice distance h*sqrt(m) in (0, rmax].
std::vector<double> shell_radii(const Grid& grid, double rmax);

/// sup over eps of the normalized discrete Gaussian average of |f| with
/// rho_eps(y) ~ exp(-|y|^2 / eps^2), evaluated with periodic distances.
Field mollifier_supremum(const Field& f, std::span<const double> eps);

// ---------------------------------------------------------------------------
// Hypothesis feasibility for the periodic existence result

/// Exponents (n, q1, q2) with the derived indices recomputed on demand.
class HypothesisSet {
 public:
  HypothesisSet(int n, double q1, double q2);
  int n() const { return n_; }
  double q1() const { return q1_; }
  double q2() const { return q2_; }
  /// q1 q2 / (q1 + q2)
  double q12() const { return q1_ * q2_ / (q1_ + q2_); }
  /// n q2 / (n - q2)
  double q2_star() const { return n_ * q2_ / (n_ - q2_); }
  /// q2* q2 / (q2* + q2)
  double q22_star() const { return q2_star() * q2_ / (q2_star() + q2_); }

 private:
  int n_;
  double q1_;
  double q2_;
};

/// Open interval of weight exponents s allowed by the hypotheses:
/// lower = max(0, 2 - n/q2),
/// upper = min(n(1 - 1/q1), (n/2)(1 - 1/q12), (n/2)(1 - 1/q22*)).
OpenInterval feasibility(const HypothesisSet& h);

struct FeasibilityScan {
  int n = 3;
  double step = 0.01;
  long points = 0;
  long nonempty = 0;
  double widest = 0.0;  // widest interval found (0 if all empty)
};

/// Scans the open box 1 < q1 < n, n/2 < q2 < n on a lattice with the given step.
FeasibilityScan feasibility_scan(int n, double step);

// ---------------------------------------------------------------------------

/// ||u||_{L^{q*}_s} / ||grad u||_{L^q_s} with q* = nq/(n-q), q < n.
double sobolev_embedding_ratio(const Field& u, double q, double s);

}  // namespace wstokes
