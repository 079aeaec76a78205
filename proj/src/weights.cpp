#include "wstokes/weights.hpp"

#include "wstokes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace wstokes {

std::string to_string(AqVerdict v) {
  switch (v) {
    case AqVerdict::finite: return "finite";
    case AqVerdict::diverging: return "diverging";
    case AqVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

// Offsets 0 = e_0 < e_1 < ... < e_k = a, geometric with first step w0 unless a
// uniform split is already finer than w0.
std::vector<double> graded_offsets(double a, int k, double w0) {
  std::vector<double> e(k + 1, 0.0);
  if (a / k <= w0) {
    for (int i = 0; i <= k; ++i) e[i] = a * i / k;
    return e;
  }
  auto total = [&](double r) { return w0 * (std::pow(r, k) - 1.0) / (r - 1.0); };
  double lo = 1.0 + 1e-12;
  double hi = 2.0;
  while (total(hi) < a) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < a ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  double width = w0;
  for (int i = 1; i <= k; ++i) {
    e[i] = e[i - 1] + width;
    width *= r;
  }
  e[k] = a;
  return e;
}

struct AxisRule {
  std::vector<double> x;
  std::vector<double> w;
};

AxisRule axis_rule(double lo, double hi, int cells, double w0) {
  const double anchor = std::clamp(0.0, lo, hi);
  const double left = anchor - lo;
  const double right = hi - anchor;
  int k_left = 0;
  if (left > 0.0 && right > 0.0) {
    k_left = std::clamp(static_cast<int>(std::lround(cells * left / (left + right))), 1, cells - 1);
  } else if (left > 0.0) {
    k_left = cells;
  }
  const int k_right = cells - k_left;
  AxisRule rule;
  if (k_left > 0) {
    const auto e = graded_offsets(left, k_left, w0);
    for (int i = k_left - 1; i >= 0; --i) {
      rule.x.push_back(anchor - 0.5 * (e[i] + e[i + 1]));
      rule.w.push_back(e[i + 1] - e[i]);
    }
  }
  if (k_right > 0) {
    const auto e = graded_offsets(right, k_right, w0);
    for (int i = 0; i < k_right; ++i) {
      rule.x.push_back(anchor + 0.5 * (e[i] + e[i + 1]));
      rule.w.push_back(e[i + 1] - e[i]);
    }
  }
  return rule;
}

}  // namespace

double aq_cube_product(const RadialWeight& w, double q, int dim, double center_offset, double side,
                       int points_per_axis, double grading_floor) {
  require(q > 1.0 && std::isfinite(q), "A_q check needs 1 < q < inf");
  require(side > 0.0 && std::isfinite(side), "cube side must be positive");
  require(points_per_axis >= 2, "need at least two cells per axis");
  require(grading_floor > 0.0, "grading floor must be positive");
  const double a = 0.5 * side;

  // Grade toward the cube point nearest the origin; far from the origin the
  // weight varies on the scale of that distance, so the first cell may grow with it.
  const double nearest = std::abs(std::clamp(0.0, center_offset - a, center_offset + a));
  const double w0 = std::max(grading_floor, 0.05 * nearest);
  std::vector<AxisRule> rules;
  for (int d = 0; d < dim; ++d) {
    const double c = d == 0 ? center_offset : 0.0;
    rules.push_back(axis_rule(c - a, c + a, points_per_axis, w0));
  }

  // log-weight exponents: w = exp(ew * L), sigma = w^{-1/(q-1)} = exp(es * L)
  const bool homogeneous = w.form == WeightForm::homogeneous;
  const double ew = 0.5 * w.s;
  const double es = -0.5 * w.s / (q - 1.0);

  double sum_w = 0.0;
  double sum_s = 0.0;
  double volume = 0.0;
  std::vector<int> idx(dim, 0);
  // Odometer over the leading dim-1 axes; the last axis is the inner loop.
  const AxisRule& inner = rules[dim - 1];
  while (true) {
    double r2_outer = 0.0;
    double w_outer = 1.0;
    for (int d = 0; d < dim - 1; ++d) {
      const double x = rules[d].x[idx[d]];
      r2_outer += x * x;
      w_outer *= rules[d].w[idx[d]];
    }
    double row_w = 0.0;
    double row_s = 0.0;
    double row_v = 0.0;
    for (size_t i = 0; i < inner.x.size(); ++i) {
      const double r2 = r2_outer + inner.x[i] * inner.x[i];
      const double lr = homogeneous ? std::log(r2) : std::log1p(r2);
      const double cw = inner.w[i];
      row_w += cw * std::exp(ew * lr);
      row_s += cw * std::exp(es * lr);
      row_v += cw;
    }
    sum_w += w_outer * row_w;
    sum_s += w_outer * row_s;
    volume += w_outer * row_v;

    int d = dim - 2;
    while (d >= 0 && ++idx[d] == static_cast<int>(rules[d].x.size())) {
      idx[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
  const double avg_w = sum_w / volume;
  const double avg_s = sum_s / volume;
  return avg_w * std::pow(avg_s, q - 1.0);
}

std::vector<double> geometric_ladder(double lo, double hi, int per_decade) {
  require(lo > 0.0 && hi > lo && per_decade >= 1, "geometric ladder needs 0 < lo < hi");
  const int steps = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  std::vector<double> out;
  for (int i = 0; i <= std::max(steps, 1); ++i) out.push_back(lo * std::pow(hi / lo, double(i) / std::max(steps, 1)));
  return out;
}

AqReport aq_check(const RadialWeight& w, double q, std::span<const double> cube_sides,
                  std::span<const double> center_offsets, int dim, const AqOptions& options) {
  require(std::isfinite(q) && q > 1.0, "A_q check needs 1 < q < inf");
  require(std::isfinite(w.s), "weight exponent must be finite");
  require(dim >= 1, "dimension must be positive");
  require(options.points_per_axis >= 32, "A_q quadrature needs at least 32 cells per axis");
  require(!cube_sides.empty(), "cube ladder is empty");
  std::vector<double> sides(cube_sides.begin(), cube_sides.end());
  std::sort(sides.begin(), sides.end());
  require(sides.front() > 0.0, "cube sides must be positive");
  require(sides.back() / sides.front() >= 1000.0 * (1.0 - 1e-12), "cube ladder must span at least 3 decades");

  double floor = options.grading_floor;
  if (floor <= 0.0) {
    floor = w.form == WeightForm::inhomogeneous ? 0.02 : sides.front() / options.points_per_axis;
  }

  std::vector<double> centers{0.0};
  for (double c : center_offsets)
    if (c != 0.0) centers.push_back(std::abs(c));

  AqReport report;
  report.q = q;
  report.dim = dim;
  report.weight = w;
  report.ladder_sides = sides;

  std::vector<double> best_at_side(sides.size(), 0.0);
  std::vector<CubeSample> samples(sides.size() * centers.size());
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < static_cast<long>(samples.size()); ++j) {
    const size_t si = j / centers.size();
    const size_t ci = j % centers.size();
    samples[j] = {centers[ci], sides[si],
                  aq_cube_product(w, q, dim, centers[ci], sides[si], options.points_per_axis, floor)};
  }
  for (size_t j = 0; j < samples.size(); ++j) {
    const size_t si = j / centers.size();
    if (!(samples[j].product >= 1.0 - 1e-12)) {
      // Jensen: every cube average product is >= 1 for a positive weight.
      if (!std::isnan(samples[j].product))
        throw std::logic_error("A_q product below 1 violates Jensen's inequality");
    }
    best_at_side[si] = std::max(best_at_side[si], samples[j].product);
  }
  report.samples = std::move(samples);

  double running = 1.0;
  for (double b : best_at_side) {
    running = std::max(running, b);
    report.running_sup.push_back(running);
  }
  report.sup_estimate = running;

  auto sup_at_or_below = [&](double side) {
    double v = 1.0;
    for (size_t i = 0; i < sides.size(); ++i)
      if (sides[i] <= side * (1.0 + 1e-9)) v = report.running_sup[i];
    return v;
  };
  double max_growth = 1.0;
  for (size_t i = 0; i < sides.size(); ++i) {
    if (sides[i] < 10.0 * sides.front() * (1.0 - 1e-9)) continue;
    const double g = report.running_sup[i] / sup_at_or_below(sides[i] / 10.0);
    max_growth = std::max(max_growth, std::isfinite(g) ? g : std::numeric_limits<double>::infinity());
  }
  const double top = report.running_sup.back();
  report.last_decade_increase = top / sup_at_or_below(sides.back() / 10.0) - 1.0;
  report.max_decade_growth = max_growth;

  if (!std::isfinite(top)) {
    report.verdict = AqVerdict::diverging;
  } else if (report.last_decade_increase < options.stable_increase) {
    report.verdict = AqVerdict::finite;
  } else if (max_growth >= options.diverging_growth) {
    report.verdict = AqVerdict::diverging;
  } else {
    report.verdict = AqVerdict::inconclusive;
  }
  return report;
}

OpenInterval admissible_range(double q, int n) {
  require(std::isfinite(q) && q > 1.0, "admissible range needs 1 < q < inf");
  require(n >= 1, "dimension must be positive");
  return {-n / q, n * (1.0 - 1.0 / q)};
}

// ---------------------------------------------------------------------------

namespace {

// Squared periodic lattice distance (in units of h^2) from displacement index 0.
Eigen::ArrayXi displacement_norm2(const Grid& g) {
  Eigen::ArrayXi m(g.num_points());
  const int N = g.points_per_axis();
  for (Eigen::Index p = 0; p < g.num_points(); ++p) {
    Eigen::Index rest = p;
    int s = 0;
    for (int d = 0; d < g.dim(); ++d) {
      int i = static_cast<int>(rest % N);
      rest /= N;
      if (i > N / 2) i -= N;
      s += i * i;
    }
    m[p] = s;
  }
  return m;
}

// Periodic convolution of |f| with a kernel on displacement indices, divided by
// the kernel's sum.
Eigen::ArrayXd normalized_average(const Grid& g, const Eigen::ArrayXcd& abs_hat, const Eigen::ArrayXd& kernel) {
  Eigen::ArrayXcd k_hat(g.num_modes());
  g.forward_raw(kernel.data(), k_hat.data());
  const Eigen::ArrayXcd prod = abs_hat * k_hat;
  Eigen::ArrayXd out(g.num_points());
  g.inverse_raw(prod.data(), out.data());
  return out / (static_cast<double>(g.num_points()) * kernel.sum());
}

Eigen::ArrayXcd abs_transform(const Field& f) {
  const Grid& g = f.grid();
  const Eigen::ArrayXd a = pointwise_magnitude(f);
  Eigen::ArrayXcd hat(g.num_modes());
  g.forward_raw(a.data(), hat.data());
  return hat;
}

}  // namespace

Field ball_average(const Field& f, double radius) {
  require(f.all_finite(), "field has non-finite samples");
  require(radius >= 0.0, "radius must be non-negative");
  const Grid& g = f.grid();
  const Eigen::ArrayXi m = displacement_norm2(g);
  const double limit = std::pow(radius / g.spacing(), 2) * (1.0 + 1e-12);
  const Eigen::ArrayXd kernel = (m.cast<double>() <= limit).cast<double>();
  return Field(g, Eigen::ArrayXXd(normalized_average(g, abs_transform(f), kernel)));
}

Field maximal_function(const Field& f, std::span<const double> radii) {
  require(f.all_finite(), "field has non-finite samples");
  const Grid& g = f.grid();
  const Eigen::ArrayXi m = displacement_norm2(g);
  const Eigen::ArrayXcd hat = abs_transform(f);
  Eigen::ArrayXd best = pointwise_magnitude(f);
  for (double r : radii) {
    require(r >= 0.0, "radius must be non-negative");
    const double limit = std::pow(r / g.spacing(), 2) * (1.0 + 1e-12);
    const Eigen::ArrayXd kernel = (m.cast<double>() <= limit).cast<double>();
    best = best.max(normalized_average(g, hat, kernel));
  }
  return Field(g, Eigen::ArrayXXd(best));
}

std::vector<double> radius_ladder(const Grid& grid, int count) {
  require(count >= 2, "radius ladder needs at least two radii");
  std::vector<double> r;
  const double lo = grid.spacing();
  const double hi = grid.half_extent();
  for (int i = 0; i < count; ++i) r.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return r;
}

std::vector<double> shell_radii(const Grid& grid, double rmax) {
  const Eigen::ArrayXi m = displacement_norm2(grid);
  std::set<int> distinct(m.data(), m.data() + m.size());
  std::vector<double> out;
  const double h = grid.spacing();
  for (int v : distinct) {
    if (v == 0) continue;
    const double r = h * std::sqrt(static_cast<double>(v));
    if (r <= rmax * (1.0 + 1e-12)) out.push_back(r);
  }
  return out;
}

Field mollifier_supremum(const Field& f, std::span<const double> eps) {
  require(f.all_finite(), "field has non-finite samples");
  const Grid& g = f.grid();
  const Eigen::ArrayXd m = displacement_norm2(g).cast<double>() * std::pow(g.spacing(), 2);
  const Eigen::ArrayXcd hat = abs_transform(f);
  Eigen::ArrayXd best = Eigen::ArrayXd::Zero(g.num_points());
  for (double e : eps) {
    require(e > 0.0, "mollifier scale must be positive");
    const Eigen::ArrayXd kernel = (-m / (e * e)).exp();
    best = best.max(normalized_average(g, hat, kernel));
  }
  return Field(g, Eigen::ArrayXXd(best));
}

// ---------------------------------------------------------------------------

HypothesisSet::HypothesisSet(int n, double q1, double q2) : n_(n), q1_(q1), q2_(q2) {
  require(n >= 3, "hypotheses need n >= 3");
  require(q1 > 1.0 && q1 < n, "hypotheses need 1 < q1 < n");
  require(q2 > 0.5 * n && q2 < n, "hypotheses need n/2 < q2 < n");
}

OpenInterval feasibility(const HypothesisSet& h) {
  const double n = h.n();
  const double lower = std::max(0.0, 2.0 - n / h.q2());
  const double upper = std::min({n * (1.0 - 1.0 / h.q1()), 0.5 * n * (1.0 - 1.0 / h.q12()),
                                 0.5 * n * (1.0 - 1.0 / h.q22_star())});
  return {lower, upper};
}

FeasibilityScan feasibility_scan(int n, double step) {
  require(step > 0.0, "scan step must be positive");
  FeasibilityScan scan;
  scan.n = n;
  scan.step = step;
  const long i_max = static_cast<long>(std::ceil((n - 1.0) / step));
  const long j_max = static_cast<long>(std::ceil((0.5 * n) / step));
  for (long i = 1; i < i_max; ++i) {
    const double q1 = 1.0 + i * step;
    if (!(q1 < n)) break;
    for (long j = 1; j < j_max; ++j) {
      const double q2 = 0.5 * n + j * step;
      if (!(q2 < n)) break;
      const OpenInterval s = feasibility(HypothesisSet(n, q1, q2));
      ++scan.points;
      if (!s.empty()) {
        ++scan.nonempty;
        scan.widest = std::max(scan.widest, s.width());
      }
    }
  }
  return scan;
}

double sobolev_embedding_ratio(const Field& u, double q, double s) {
  const int n = u.grid().dim();
  require(q > 1.0 && q < n, "embedding needs 1 < q < n");
  const double q_star = n * q / (n - q);
  const double num = weighted_lq_norm(u, q_star, RadialWeight::bracket(s));
  const double den = weighted_lq_norm(gradient(u), q, RadialWeight::bracket(s));
  require(den > 0.0, "gradient vanishes identically");
  return num / den;
}

}  // namespace wstokes
