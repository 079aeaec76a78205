#pragma once

#include "wstokes/field.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace wstokes {

/// Exponents of one two-weight decay estimate: the data live in L^p_s, the
/// solution is measured in L^q_{s0}, alpha is the derivative order (0 or 1).
struct DecayParams {
  double p = 2.0;
  double q = 2.0;
  double s = 0.0;
  double s0 = 0.0;
  int alpha = 0;
};

struct DecaySeries {
  DecayParams params;
  std::vector<double> t;
  std::vector<double> value;
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

/// Least-squares fit of log(value) against log(t) over samples with t >= t_min.
ExponentFit fit_power_law(std::span<const double> t, std::span<const double> value, double t_min = 0.0);

/// t^{-(n/2)(1/p-1/q) - alpha/2} (1+t)^{-(s-s0)/2}.
double predicted_rate(const DecayParams& params, int n, double t);
/// Large-t exponent of predicted_rate: -(n/2)(1/p-1/q) - alpha/2 - (s-s0)/2.
double predicted_exponent(const DecayParams& params, int n);

struct DecayResult {
  DecaySeries series;
  ExponentFit fit;
  double predicted_exponent = 0.0;
  std::vector<double> envelope;  // predicted rate scaled to the first sample
  std::vector<double> ratio;     // value / envelope
  double bound_compliance = 0.0;  // max ratio
};

/// Evaluates ||grad^alpha e^{t Delta} P u0||_{L^q_{s0}} over the t ladder and
/// compares it with the predicted rate. Preconditions: 1 < p <= q < inf,
/// -n/q < s0 <= s < n(1 - 1/p), and u0 numerically in L^p_s (the norm over the
/// inner half of the cube holds at least 98% of the full norm).
DecayResult decay_harness(const Field& u0, const DecayParams& params, std::span<const double> t_ladder);

/// Ladder t_k = t_min 2^{k/per_octave} up to t_max inclusive.
std::vector<double> time_ladder(double t_min, double t_max, int per_octave = 2);

/// CSV with columns t,norm,predicted_envelope,ratio followed by one "#"-prefixed
/// JSON line holding the fit.
void write_decay_csv(std::ostream& os, const DecayResult& r);

}  // namespace wstokes
