// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "wstokes/corpus.hpp"
#include "wstokes/decay.hpp"
#include "wstokes/exterior.hpp"
#include "wstokes/periodic.hpp"
#include "wstokes/semigroup.hpp"
#include "wstokes/weights.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace wstokes;

namespace {

constexpr std::uint64_t seed = 20240611;
constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Grid& default_grid() {
  static const Grid g(3, 64, 16.0);
  return g;
}

const std::vector<Field>& corpus() {
  static const std::vector<Field> c = solenoidal_corpus(default_grid(), seed, 10);
  return c;
}

// ---------------------------------------------------------------------------

Outcome heat_kernel_mass() {
  // On [-16, 16)^3 the kernel at t = 4 leaves about 5e-8 of its mass outside
  // the cube, so this check uses a wider and finer grid.
  const Grid g(3, 128, 24.0);
  double worst = 0.0;
  for (double t : {0.25, 1.0, 4.0}) worst = std::max(worst, std::abs(integral(heat_kernel_field(g, t)) - 1.0));
  return {worst <= 1e-10, fmt("max |mass - 1| = %.2e over t in {0.25, 1, 4} (N = 128, L = 24)", worst)};
}

Outcome decay_compliance() {
  const std::vector<DecayParams> sets = {
      {2.0, 2.0, 1.0, 0.0, 0}, {2.0, 6.0, 0.0, 0.0, 0}, {2.0, 2.0, 0.0, 0.0, 1}, {2.0, 4.0, 1.0, 0.0, 0}};
  const auto t = time_ladder(1.0, 64.0, 2);
  double compliance = 0.0, slack = -1e300;
  for (const auto& p : sets)
    for (const auto& u0 : corpus()) {
      const DecayResult r = decay_harness(u0, p, t);
      compliance = std::max(compliance, r.bound_compliance);
      slack = std::max(slack, r.fit.slope - r.predicted_exponent);
    }
  return {compliance <= 1.05 && slack <= 0.1,
          fmt("max compliance %.4f (<= 1.05), max slope - predicted %.3f (<= 0.1), 40 runs", compliance, slack)};
}

Outcome leray_defects() {
  const auto scalars = scalar_corpus(default_grid(), seed + 1, 10);
  double idem = 0.0, sol = 0.0, grad = 0.0;
  for (std::size_t i = 0; i < corpus().size(); ++i) {
    const Field g = gradient(scalars[i]);
    const Field v = corpus()[i] + g;
    const Field pv = leray_project(v);
    idem = std::max(idem, l2_norm(leray_project(pv) - pv) / l2_norm(v));
    sol = std::max(sol, l2_norm(divergence(pv)) / l2_norm(gradient(pv)));
    grad = std::max(grad, l2_norm(leray_project(g)) / l2_norm(g));
  }
  return {idem <= 1e-10 && sol <= 1e-10 && grad <= 1e-10,
          fmt("idempotence %.2e, divergence %.2e, gradient residue %.2e", idem, sol, grad)};
}

Outcome muckenhoupt() {
  const auto sides = geometric_ladder(1e-3, 1e3, 3);
  std::ostringstream d;
  bool ok = true;
  for (double a : {-2.0, 0.0, 2.0, -3.0}) {
    const AqReport r = aq_check(RadialWeight::bracket(a), 2.0, sides);
    const AqVerdict want = a > -3.0 && a < 3.0 ? AqVerdict::finite : AqVerdict::diverging;
    ok = ok && r.verdict == want;
    d << "alpha=" << a << ':' << to_string(r.verdict) << ' ';
  }
  return {ok, d.str()};
}

// f = d/dx_axis of (1 - |x-c|^2/a^2)^4, zero-mean by construction.
Field bump_derivative(const Grid& g, std::array<double, 3> c, double a, int axis) {
  return Field::sample_scalar(g, [=](std::span<const double> x) {
    double r2 = 0.0;
    for (int k = 0; k < 3; ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
    r2 /= a * a;
    return r2 < 1.0 ? -8.0 * (x[axis] - c[axis]) / (a * a) * std::pow(1.0 - r2, 3) : 0.0;
  });
}

Outcome bogovskii_contract() {
  const AnnulusSpec spec{1.0};
  BogovskiiOptions opt;
  opt.mean_tolerance = 1e-6;
  struct Case {
    std::array<double, 3> c;
    int axis;
  };
  // Centers sit on grid points of both resolutions so the sampled f has zero mean.
  const std::vector<Case> cases = {{{1.5, 0.0, 0.0}, 0}, {{0.84375, 0.84375, 0.84375}, 1}};
  bool ok = true;
  std::ostringstream d;
  for (const auto& cs : cases) {
    double err[2], outside = 0.0;
    for (int k = 0; k < 2; ++k) {
      const Grid g(3, 64 << k, 3.0);
      const Field f = bump_derivative(g, cs.c, 0.45, cs.axis);
      const Field b = bogovskii_apply(f, spec, opt);
      err[k] = annulus_divergence_error(b, f, spec);
      for (Eigen::Index p = 0; p < g.num_points(); ++p)
        if (!spec.contains_open(g.radius_squared()[p])) outside = std::max(outside, b.values().row(p).abs().maxCoeff());
    }
    const double ratio = err[1] / err[0];
    ok = ok && err[1] <= 0.1 && ratio <= 0.6 && outside == 0.0;
    d << fmt("[err64 %.3f, err128 %.3f, ratio %.2f, outside %.1g] ", err[0], err[1], ratio, outside);
  }
  return {ok, d.str()};
}

Outcome extension() {
  const double R = 0.25, L = 3.6;
  double div[2], changed = 0.0, h[2];
  for (int k = 0; k < 2; ++k) {
    const Grid g(3, 64 << k, L);
    h[k] = g.spacing();
    const double lo = R + 1.0, hi = L - 0.2;
    const Field u0 = curl(Field::sample(g, 3, [&](std::span<const double> x, std::span<double> out) {
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      if (r <= lo || r >= hi) return;
      const double s = std::pow((r - lo) * (hi - r) * 4.0 / ((hi - lo) * (hi - lo)), 4);
      out[0] = s * std::cos(0.7 * x[1]);
      out[1] = s * std::sin(0.5 * x[2] + 0.3);
      out[2] = s * (1.0 + 0.3 * x[0]);
    }));
    const ExtensionResult e = solenoidal_extension(u0, R);
    const Field grad_phi = radial_cutoff_gradient(g, R + 2.0, R + 3.0);
    const Field flux(g, Eigen::ArrayXXd((grad_phi.values() * u0.values()).rowwise().sum()));
    div[k] = l2_norm(divergence(e.v0)) / l2_norm(flux);
    const double r3 = (R + 3.0) * (R + 3.0);
    for (Eigen::Index p = 0; p < g.num_points(); ++p)
      if (g.radius_squared()[p] >= r3)
        changed = std::max(changed, (e.v0.values().row(p) - u0.values().row(p)).abs().maxCoeff());
  }
  const double ratio = div[1] / div[0];
  return {ratio <= 0.6 && changed == 0.0,
          fmt("relative div %.3f (h=%.4f) -> %.3f (h=%.4f), ratio %.2f, max change beyond R+3 %.1g", div[0], h[0],
              div[1], h[1], ratio, changed)};
}

Outcome linear_oracle() {
  const Grid& g = default_grid();
  const double T = 1.0, w = 2.0 * pi / T, k = g.base_frequency(), kappa = k * k;
  const Field shape = Field::sample(g, 3, [k](std::span<const double> x, std::span<double> out) {
    out[2] = std::cos(k * x[0]);
  });
  PeriodicForce f(g, T, 1.0);
  f.add_term([w](double t) { return std::cos(w * t); }, shape);
  PicardConfig cfg;
  cfg.M = 32;
  cfg.linear = true;
  const NodeSeries zero(cfg.M, SpectralField(g, 3));
  const NodeSeries hu = poincare_map(zero, f, cfg);
  double err = 0.0;
  for (int m = 0; m < cfg.M; ++m) {
    const double t = T * m / cfg.M;
    const double a = (kappa * std::cos(w * t) + w * std::sin(w * t)) / (kappa * kappa + w * w);
    err = std::max(err, l2_norm(from_spectral(hu[m]) - a * shape) / l2_norm(shape));
  }
  return {err <= 1e-6, fmt("max relative node error %.2e over M = 32 nodes", err)};
}

Outcome nonlinear_fixed_point() {
  const Grid& g = default_grid();
  const double T = 1.0, w = 2.0 * pi / T;
  PeriodicForce unit(g, T, 1.0);
  unit.add_term([w](double t) { return std::cos(w * t) + 0.5 * std::sin(2.0 * w * t); }, corpus().front());
  PicardConfig cfg;
  cfg.tol = 1e-8;
  auto max_norm = [](const NodeSeries& s) {
    double v = 0.0;
    for (const auto& u : s) v = std::max(v, spectral_l2_norm(u));
    return v;
  };
  const double eps = 1e-2 / max_norm(poincare_map(NodeSeries(cfg.M, SpectralField(g, 3)), unit, cfg));

  const PeriodicForce f = unit.with_amplitude(eps);
  const PeriodicSolution sol = picard_solve(f, cfg);
  const double residual = sol.residual_history.back();
  const double defect = periodicity_check(sol, f, cfg);
  double lo = max_norm(sol.nodes) / eps, hi = lo;
  double e = eps;
  for (int k = 0; k < 3; ++k) {
    e *= 0.5;
    const double r = max_norm(picard_solve(unit.with_amplitude(e), cfg).nodes) / e;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double spread = hi / lo - 1.0;
  return {sol.iterations <= 20 && residual <= 1e-8 && defect <= 1e-5 && spread <= 0.02,
          fmt("eps %.4g, %d iterations, residual %.1e, periodicity defect %.1e, response spread %.1e", eps,
              sol.iterations, residual, defect, spread)};
}

Outcome feasibility_check() {
  const OpenInterval s = feasibility(HypothesisSet(5, 4.0, 3.0));
  const bool exact = std::abs(s.lower - 1.0 / 3.0) < 1e-12 && std::abs(s.upper - 25.0 / 24.0) < 1e-12;
  const FeasibilityScan scan = feasibility_scan(3, 0.01);
  return {exact && scan.nonempty == 0,
          fmt("(5,4,3) -> (%.6f, %.6f); finding: n = 3 scan at step 0.01 has %ld nonempty of %ld points", s.lower,
              s.upper, scan.nonempty, scan.points)};
}

Outcome embedding_stability() {
  double max_ratio[2];
  for (int k = 0; k < 2; ++k) {
    const Grid g(3, 64 << k, 16.0);
    max_ratio[k] = 0.0;
    for (const auto& u : scalar_corpus(g, seed, 10)) max_ratio[k] = std::max(max_ratio[k], sobolev_embedding_ratio(u, 2.0, 1.0));
  }
  const double change = std::abs(max_ratio[1] / max_ratio[0] - 1.0);
  return {std::isfinite(max_ratio[1]) && change <= 0.1,
          fmt("corpus max %.4f (N=64) -> %.4f (N=128), change %.1f%%", max_ratio[0], max_ratio[1], 100.0 * change)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"heat kernel normalization", heat_kernel_mass},
      {"semigroup decay compliance", decay_compliance},
      {"Leray projection defects", leray_defects},
      {"Muckenhoupt separation", muckenhoupt},
      {"Bogovskii divergence contract", bogovskii_contract},
      {"solenoidal extension", extension},
      {"linear Poincare map oracle", linear_oracle},
      {"nonlinear periodic fixed point", nonlinear_fixed_point},
      {"hypothesis feasibility", feasibility_check},
      {"weighted embedding stability", embedding_stability},
  };
  // Optional arguments select criteria by number.
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
