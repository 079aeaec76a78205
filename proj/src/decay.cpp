#include "wstokes/decay.hpp"

#include "wstokes/errors.hpp"
#include "wstokes/semigroup.hpp"
#include "wstokes/weights.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace wstokes {

ExponentFit fit_power_law(std::span<const double> t, std::span<const double> value, double t_min) {
  require(t.size() == value.size(), "t and value lengths differ");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min) continue;
    require(t[i] > 0.0 && value[i] > 0.0, "power-law fit needs positive samples");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(value[i]));
  }
  require(lx.size() >= 2, "power-law fit needs at least two samples");
  const double m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  require(sxx > 0.0, "power-law fit needs distinct t values");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

double predicted_rate(const DecayParams& p, int n, double t) {
  return std::pow(t, -0.5 * n * (1.0 / p.p - 1.0 / p.q) - 0.5 * p.alpha) * std::pow(1.0 + t, -0.5 * (p.s - p.s0));
}

double predicted_exponent(const DecayParams& p, int n) {
  return -0.5 * n * (1.0 / p.p - 1.0 / p.q) - 0.5 * p.alpha - 0.5 * (p.s - p.s0);
}

std::vector<double> time_ladder(double t_min, double t_max, int per_octave) {
  require(t_min > 0.0 && t_max >= t_min && per_octave >= 1, "time ladder needs 0 < t_min <= t_max");
  std::vector<double> t;
  for (int k = 0;; ++k) {
    const double v = t_min * std::exp2(double(k) / per_octave);
    if (v > t_max * (1.0 + 1e-12)) break;
    t.push_back(v);
  }
  return t;
}

DecayResult decay_harness(const Field& u0, const DecayParams& params, std::span<const double> t_ladder) {
  const Grid& g = u0.grid();
  const int n = g.dim();
  const double p = params.p, q = params.q;
  require(p > 1.0 && p <= q && std::isfinite(q), "decay harness needs 1 < p <= q < inf");
  require(params.alpha == 0 || params.alpha == 1, "derivative order must be 0 or 1");
  require(u0.components() == n, "decay harness takes an n-component field");
  const OpenInterval range_q = admissible_range(q, n);
  const OpenInterval range_p = admissible_range(p, n);
  require(range_q.lower < params.s0 && params.s0 <= params.s && params.s < range_p.upper,
          "weight exponents must satisfy -n/q < s0 <= s < n(1-1/p)");
  require(!t_ladder.empty(), "time ladder is empty");
  for (size_t i = 0; i < t_ladder.size(); ++i) {
    require(t_ladder[i] > 0.0, "ladder times must be positive");
    if (i > 0) require(t_ladder[i] > t_ladder[i - 1], "ladder times must increase strictly");
  }

  // u0 must be resolved by the cube: doubling L would change ||u0||_{L^p_s}
  // by less than 2% only if the outer shell carries less than 2% of it.
  const RadialWeight ws = RadialWeight::bracket(params.s);
  const double full = weighted_lq_norm(u0, p, ws);
  require(std::isfinite(full) && full > 0.0, "u0 must have a finite, nonzero L^p_s norm");
  Eigen::Array<bool, Eigen::Dynamic, 1> inner(g.num_points());
  {
    std::vector<double> x(n);
    const double half = 0.5 * g.half_extent();
    for (Eigen::Index i = 0; i < g.num_points(); ++i) {
      g.point(i, x);
      inner[i] = std::all_of(x.begin(), x.end(), [&](double c) { return std::abs(c) < half; });
    }
  }
  require(weighted_lq_norm_masked(u0, p, ws, inner) >= 0.98 * full,
          "u0 is not resolved by the cube (L^p_s norm not stable under doubling L)");

  DecayResult r;
  r.series.params = params;
  r.series.t.assign(t_ladder.begin(), t_ladder.end());
  r.series.value.resize(t_ladder.size());
  const SpectralField projected = leray_project(to_spectral(u0));
  const std::optional<RadialWeight> w0 = RadialWeight::bracket(params.s0);
  for (size_t i = 0; i < t_ladder.size(); ++i) {
    SpectralField evolved = heat_apply(projected, t_ladder[i]);
    if (params.alpha == 1) evolved = gradient(evolved);
    r.series.value[i] = detail::lq_norm_unchecked(from_spectral(evolved), q, w0);
  }

  r.predicted_exponent = predicted_exponent(params, n);
  const double scale = r.series.value.front() / predicted_rate(params, n, t_ladder.front());
  r.bound_compliance = 0.0;
  for (size_t i = 0; i < t_ladder.size(); ++i) {
    const double env = scale * predicted_rate(params, n, t_ladder[i]);
    r.envelope.push_back(env);
    r.ratio.push_back(r.series.value[i] / env);
    r.bound_compliance = std::max(r.bound_compliance, r.ratio.back());
  }
  const double t_fit = std::max(1.0, t_ladder.front());
  const long fit_points = std::count_if(t_ladder.begin(), t_ladder.end(), [&](double t) { return t >= t_fit; });
  r.fit = fit_power_law(r.series.t, r.series.value, fit_points >= 2 ? t_fit : 0.0);
  return r;
}

void write_decay_csv(std::ostream& os, const DecayResult& r) {
  char buf[160];
  os << "t,norm,predicted_envelope,ratio\n";
  for (size_t i = 0; i < r.series.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.series.t[i], r.series.value[i], r.envelope[i],
                  r.ratio[i]);
    os << buf;
  }
  const auto& p = r.series.params;
  nlohmann::json footer = {
      {"slope", r.fit.slope},
      {"intercept", r.fit.intercept},
      {"r2", r.fit.r2},
      {"predicted_exponent", r.predicted_exponent},
      {"bound_compliance", r.bound_compliance},
      {"params", {{"p", p.p}, {"q", p.q}, {"s", p.s}, {"s0", p.s0}, {"alpha", p.alpha}}},
  };
  os << '#' << footer.dump() << '\n';
}

}  // namespace wstokes
