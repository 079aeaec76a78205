#include "wstokes/exterior.hpp"

#include "wstokes/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

namespace wstokes {

namespace {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
Vec3 normalized(const Vec3& a) { return scaled(a, 1.0 / norm(a)); }
double angle_between(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
}

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre nodes on [a, b] by Newton iteration on P_n.
QuadRule gauss_legendre(int n, double a, double b) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z_old = z;
      z = z_old - p1 / pp;
      if (std::abs(z - z_old) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (b - a) * r.x[i] + 0.5 * (b + a);
    r.w[i] *= 0.5 * (b - a);
  }
  return r;
}

// C^infinity bump on the unit interval, exp(-1/(1-u^2)).
double bump(double u) {
  const double v = 1.0 - u * u;
  return v > 0.0 ? std::exp(-1.0 / v) : 0.0;
}

// C^3 bump (1-u^2)^4: far less steep than the C^infinity one, so it stays
// resolved on coarse grids.
double soft_bump(double u) {
  const double v = 1.0 - u * u;
  return v > 0.0 ? v * v * v * v : 0.0;
}

std::vector<Vec3> fibonacci_directions(int count) {
  std::vector<Vec3> d(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    d[i] = {r * std::cos(golden * i), r * std::sin(golden * i), z};
  }
  return d;
}

double covering_radius(const std::vector<Vec3>& dirs) {
  double worst = 0.0;
  for (const Vec3& probe : fibonacci_directions(4000)) {
    double best = std::numbers::pi;
    for (const Vec3& d : dirs) best = std::min(best, angle_between(probe, d));
    worst = std::max(worst, best);
  }
  return worst;
}

// Sample-level description of one sector piece: values on a dense index box.
struct Piece {
  std::map<Eigen::Index, double> sparse;
  std::array<int, 3> lo{}, hi{};  // inclusive bounds of nonzero samples
  std::array<int, 3> ext{};       // box extents including one zero layer each side
  std::vector<double> dense;

  void densify(int N) {
    lo = {N, N, N};
    hi = {-1, -1, -1};
    for (const auto& [p, v] : sparse) {
      if (v == 0.0) continue;
      const int i[3] = {int(p / (Eigen::Index(N) * N)), int((p / N) % N), int(p % N)};
      for (int d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], i[d]);
        hi[d] = std::max(hi[d], i[d]);
      }
    }
    if (hi[0] < 0) return;
    for (int d = 0; d < 3; ++d) ext[d] = hi[d] - lo[d] + 3;
    dense.assign(size_t(ext[0]) * ext[1] * ext[2], 0.0);
    for (const auto& [p, v] : sparse) {
      const int i[3] = {int(p / (Eigen::Index(N) * N)), int((p / N) % N), int(p % N)};
      dense[(size_t(i[0] - lo[0] + 1) * ext[1] + (i[1] - lo[1] + 1)) * ext[2] + (i[2] - lo[2] + 1)] = v;
    }
  }
  bool empty() const { return dense.empty(); }

  // Trilinear interpolant at physical point y; zero outside the box.
  double at(const Vec3& y, double L, double h) const {
    double u[3];
    int i[3];
    for (int d = 0; d < 3; ++d) {
      const double g = (y[d] + L) / h - lo[d] + 1;
      i[d] = static_cast<int>(std::floor(g));
      if (i[d] < 0 || i[d] + 1 >= ext[d]) return 0.0;
      u[d] = g - i[d];
    }
    auto v = [&](int a, int b, int c) { return dense[(size_t(i[0] + a) * ext[1] + (i[1] + b)) * ext[2] + (i[2] + c)]; };
    const double c00 = v(0, 0, 0) * (1 - u[2]) + v(0, 0, 1) * u[2];
    const double c01 = v(0, 1, 0) * (1 - u[2]) + v(0, 1, 1) * u[2];
    const double c10 = v(1, 0, 0) * (1 - u[2]) + v(1, 0, 1) * u[2];
    const double c11 = v(1, 1, 0) * (1 - u[2]) + v(1, 1, 1) * u[2];
    return ((c00 * (1 - u[1]) + c01 * u[1]) * (1 - u[0])) + ((c10 * (1 - u[1]) + c11 * u[1]) * u[0]);
  }
};

struct Sector {
  Vec3 dir;
  Vec3 center;  // center of the weight ball
};

// Normalization of theta(z) = c (1 - |z-center|^2/rho^2)^4.
double theta_constant(double rho) {
  const QuadRule r = gauss_legendre(200, 0.0, 1.0);
  double s = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * r.x[i] * r.x[i] * soft_bump(r.x[i]);
  return 1.0 / (4.0 * std::numbers::pi * rho * rho * rho * s);
}

// Adds samples of a ball bump centered at c with radius r, normalized to unit
// grid sum, times `mass`, into piece.sparse.
void add_normalized_bump(const Grid& g, const Vec3& c, double r, double mass, Piece& piece) {
  const int N = g.points_per_axis();
  const double h = g.spacing();
  const double L = g.half_extent();
  std::vector<std::pair<Eigen::Index, double>> samples;
  double total = 0.0;
  int lo[3], hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::max(0, static_cast<int>(std::floor((c[d] - r + L) / h)));
    hi[d] = std::min(N - 1, static_cast<int>(std::ceil((c[d] + r + L) / h)));
  }
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        const Vec3 y = {g.coordinate(i) - c[0], g.coordinate(j) - c[1], g.coordinate(k) - c[2]};
        const double v = soft_bump(norm(y) / r);
        if (v == 0.0) continue;
        samples.push_back({(Eigen::Index(i) * N + j) * N + k, v});
        total += v;
      }
  require(total > 0.0, "mass-transfer bump is not resolved by the grid");
  // mass is an integral, so the samples carry mass / (total h^3).
  const double scale = mass / (total * h * h * h);
  for (const auto& [p, v] : samples) piece.sparse[p] += scale * v;
}

}  // namespace

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep5_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

Field radial_cutoff(const Grid& grid, double inner, double outer) {
  require(0.0 <= inner && inner < outer, "cut-off needs 0 <= inner < outer");
  const Eigen::ArrayXd r = grid.radius_squared().sqrt();
  Eigen::ArrayXd v(r.size());
  for (Eigen::Index p = 0; p < r.size(); ++p) v[p] = 1.0 - smoothstep5((r[p] - inner) / (outer - inner));
  return Field(grid, Eigen::ArrayXXd(v));
}

Field radial_cutoff_gradient(const Grid& grid, double inner, double outer) {
  require(0.0 <= inner && inner < outer, "cut-off needs 0 <= inner < outer");
  const int n = grid.dim();
  return Field::sample(grid, n, [&](std::span<const double> x, std::span<double> out) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    if (r == 0.0) return;
    const double dr = -smoothstep5_derivative((r - inner) / (outer - inner)) / (outer - inner);
    for (int d = 0; d < n; ++d) out[d] = dr * x[d] / r;
  });
}

CutoffPair cutoff_pair(const Grid& grid, double R) {
  require(R > 0.0, "cut-off radius must be positive");
  return {radial_cutoff(grid, R + 2.0, R + 3.0), radial_cutoff(grid, R + 1.0, R + 2.0)};
}

namespace {

// The operator proper; only needs the annulus plus two cells inside the box.
Field bogovskii_unchecked(const Field& f, const AnnulusSpec& spec, const BogovskiiOptions& opt) {
  const Grid& g = f.grid();
  require(g.dim() == 3, "the Bogovskii operator is implemented for n = 3");
  require(f.components() == 1, "the Bogovskii operator takes a scalar field");
  require(f.all_finite(), "field has non-finite samples");
  const double R = spec.R;
  require(R > 0.0, "annulus inner radius must be positive");
  require(spec.outer() + 2.0 * g.spacing() < g.half_extent(), "annulus does not fit inside the grid");
  require(opt.ball_radius > 0.0 && opt.ball_radius < 0.5, "weight ball radius must lie in (0, 1/2)");

  const int N = g.points_per_axis();
  const double h = g.spacing();
  const double L = g.half_extent();
  const double cell = g.cell_volume();
  const Eigen::ArrayXd& r2 = g.radius_squared();
  const auto& fv = f.values().col(0);

  double mean = 0.0, l1 = 0.0;
  for (Eigen::Index p = 0; p < g.num_points(); ++p) {
    if (fv[p] == 0.0) continue;
    require(spec.contains_open(r2[p]), "f must vanish outside the open annulus");
    mean += fv[p] * cell;
    l1 += std::abs(fv[p]) * cell;
  }
  Field out(g, 3);
  if (l1 == 0.0) return out;
  if (std::abs(mean) > opt.mean_tolerance * l1) {
    std::ostringstream msg;
    msg << "f must have zero mean over the annulus; measured mean " << mean << " (L1 norm " << l1 << ")";
    throw PreconditionError(msg.str());
  }

  // Sectors: cones of half-angle beta around Fibonacci directions. A sector of
  // the annulus is star-shaped with respect to the ball of radius rho centered
  // at (R + 1/2) d when cos(beta) >= (R + rho)/(R + 1/2); keep a margin for
  // the one-cell spill of the trilinear interpolant.
  const double rho = opt.ball_radius;
  const double beta = 0.9 * std::acos((R + rho) / (R + 0.5));
  std::vector<Vec3> dirs;
  for (int count = 6;; count += 2) {
    dirs = fibonacci_directions(count);
    if (covering_radius(dirs) <= 0.75 * beta) break;
  }
  const int S = static_cast<int>(dirs.size());
  std::vector<Sector> sectors(S);
  for (int s = 0; s < S; ++s) sectors[s] = {dirs[s], scaled(dirs[s], R + 0.5)};

  // Angular partition of unity applied to f.
  std::vector<Piece> pieces(S);
  std::vector<double> b(S);
  for (Eigen::Index p = 0; p < g.num_points(); ++p) {
    if (fv[p] == 0.0) continue;
    Vec3 x;
    g.point(p, x);
    double total = 0.0;
    for (int s = 0; s < S; ++s) {
      b[s] = soft_bump(angle_between(x, dirs[s]) / beta);
      total += b[s];
    }
    for (int s = 0; s < S; ++s)
      if (b[s] > 0.0) pieces[s].sparse[p] += fv[p] * b[s] / total;
  }
  std::vector<double> mass(S, 0.0);
  for (int s = 0; s < S; ++s)
    for (const auto& [p, v] : pieces[s].sparse) mass[s] += v * cell;

  // Mass transfer between overlapping sectors: the flow of least energy,
  // F_st = phi_s - phi_t with (graph Laplacian) phi = mass, spreads the
  // transport over every overlap instead of piling it up along a tree. Each
  // flow is carried by a normalized bump inside the overlap of the two cones.
  // Overlap threshold: start at beta and widen until the sectors connect.
  std::vector<std::pair<int, int>> edges;
  for (double reach = beta;; reach *= 1.1) {
    if (reach > 1.8 * beta) throw std::logic_error("annulus sectors do not form a connected cover");
    edges.clear();
    for (int s = 0; s < S; ++s)
      for (int t = s + 1; t < S; ++t)
        if (angle_between(dirs[s], dirs[t]) <= reach) edges.push_back({s, t});
    std::vector<int> component(S);
    for (int s = 0; s < S; ++s) component[s] = s;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [s, t] : edges) {
        const int m = std::min(component[s], component[t]);
        if (component[s] != m || component[t] != m) {
          component[s] = component[t] = m;
          changed = true;
        }
      }
    }
    if (std::all_of(component.begin(), component.end(), [](int c) { return c == 0; })) break;
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Constant(S, S, 1.0 / S);
  for (const auto& [s, t] : edges) {
    lap(s, s) += 1.0;
    lap(t, t) += 1.0;
    lap(s, t) -= 1.0;
    lap(t, s) -= 1.0;
  }
  const Eigen::VectorXd potential = lap.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(mass.data(), S));
  for (const auto& [s, t] : edges) {
    const double flow = potential[s] - potential[t];
    if (flow == 0.0) continue;
    const Vec3 mid = normalized({dirs[s][0] + dirs[t][0], dirs[s][1] + dirs[t][1], dirs[s][2] + dirs[t][2]});
    const double gamma = angle_between(dirs[s], dirs[t]);
    const double radius = std::min(0.45, 0.9 * (R + 0.5) * std::sin(beta - 0.5 * gamma));
    const Vec3 c = scaled(mid, R + 0.5);
    add_normalized_bump(g, c, radius, -flow, pieces[s]);
    add_normalized_bump(g, c, radius, flow, pieces[t]);
  }
  for (auto& piece : pieces) piece.densify(N);

  const double theta_c = theta_constant(rho);
  const QuadRule chord_ref = gauss_legendre(opt.chord_nodes, 0.0, 1.0);
  const QuadRule cap_ref = gauss_legendre(opt.cap_polar, 0.0, 1.0);
  const QuadRule full_u = gauss_legendre(opt.full_polar, -1.0, 1.0);
  const double r_stop = R - std::sqrt(3.0) * h;

  auto& ov = out.values();
  for (int s = 0; s < S; ++s) {
    const Piece& piece = pieces[s];
    if (piece.empty()) continue;
    const Vec3 c = sectors[s].center;
    // Interpolant support box, in physical coordinates.
    Vec3 box_lo, box_hi;
    int t_lo[3], t_hi[3];
    for (int d = 0; d < 3; ++d) {
      box_lo[d] = g.coordinate(piece.lo[d] - 1);
      box_hi[d] = g.coordinate(piece.hi[d] + 1);
      // Targets: bounding box of the convex hull of the support and the ball.
      const double a = std::min(box_lo[d], c[d] - rho);
      const double bb = std::max(box_hi[d], c[d] + rho);
      t_lo[d] = std::max(0, static_cast<int>(std::floor((a + L) / h)));
      t_hi[d] = std::min(N - 1, static_cast<int>(std::ceil((bb + L) / h)));
    }
    std::vector<Eigen::Index> targets;
    for (int i = t_lo[0]; i <= t_hi[0]; ++i)
      for (int j = t_lo[1]; j <= t_hi[1]; ++j)
        for (int k = t_lo[2]; k <= t_hi[2]; ++k) {
          const Eigen::Index p = (Eigen::Index(i) * N + j) * N + k;
          if (spec.contains_open(r2[p])) targets.push_back(p);
        }

#pragma omp parallel for schedule(dynamic, 16)
    for (long ti = 0; ti < static_cast<long>(targets.size()); ++ti) {
      const Eigen::Index p = targets[ti];
      Vec3 x;
      g.point(p, x);
      const Vec3 dc = {c[0] - x[0], c[1] - x[1], c[2] - x[2]};
      const double dist = norm(dc);
      const bool inside = dist <= rho;
      const Vec3 axis = inside ? Vec3{0.0, 0.0, 1.0} : scaled(dc, 1.0 / dist);
      // Orthonormal frame around the axis.
      const Vec3 helper = std::abs(axis[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
      Vec3 e1 = {helper[1] * axis[2] - helper[2] * axis[1], helper[2] * axis[0] - helper[0] * axis[2],
                 helper[0] * axis[1] - helper[1] * axis[0]};
      e1 = normalized(e1);
      const Vec3 e2 = {axis[1] * e1[2] - axis[2] * e1[1], axis[2] * e1[0] - axis[0] * e1[2],
                       axis[0] * e1[1] - axis[1] * e1[0]};
      QuadRule polar;
      int n_az;
      if (inside) {
        polar = full_u;
        n_az = opt.full_azimuth;
      } else {
        const double cos_cap = std::sqrt(std::max(0.0, 1.0 - (rho / dist) * (rho / dist)));
        polar = cap_ref;
        for (size_t i = 0; i < polar.x.size(); ++i) {
          polar.x[i] = cos_cap + (1.0 - cos_cap) * cap_ref.x[i];
          polar.w[i] = (1.0 - cos_cap) * cap_ref.w[i];
        }
        n_az = opt.cap_azimuth;
      }
      const double w_az = 2.0 * std::numbers::pi / n_az;
      const Vec3 xc = {x[0] - c[0], x[1] - c[1], x[2] - c[2]};
      const double xc2 = dot(xc, xc);
      Vec3 acc = {0.0, 0.0, 0.0};
      for (size_t iu = 0; iu < polar.x.size(); ++iu) {
        const double u = polar.x[iu];
        const double sn = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (int ia = 0; ia < n_az; ++ia) {
          const double phi = w_az * (ia + 0.5);
          const double cp = std::cos(phi), sp = std::sin(phi);
          Vec3 om;
          for (int d = 0; d < 3; ++d) om[d] = u * axis[d] + sn * (cp * e1[d] + sp * e2[d]);

          // Chord of the ray x + tau om, tau >= 0, through the weight ball.
          const double bq = dot(om, xc);
          const double disc = bq * bq - (xc2 - rho * rho);
          if (disc <= 0.0) continue;
          const double tau2 = -bq + std::sqrt(disc);
          if (tau2 <= 0.0) continue;
          const double tau1 = std::max(0.0, -bq - std::sqrt(disc));
          double m0 = 0.0, m1 = 0.0, m2 = 0.0;
          for (size_t k = 0; k < chord_ref.x.size(); ++k) {
            const double tau = tau1 + (tau2 - tau1) * chord_ref.x[k];
            const double d2 = xc2 + 2.0 * tau * bq + tau * tau;
            const double th = theta_c * soft_bump(std::sqrt(std::max(0.0, d2)) / rho) * (tau2 - tau1) * chord_ref.w[k];
            m0 += th;
            m1 += th * tau;
            m2 += th * tau * tau;
          }
          if (m0 == 0.0) continue;

          // Ray x - r om through the support box, stopped at the inner sphere.
          double r_in = 0.0, r_out = std::numeric_limits<double>::infinity();
          bool hit = true;
          for (int d = 0; d < 3 && hit; ++d) {
            const double dir = -om[d];
            if (std::abs(dir) < 1e-300) {
              if (x[d] < box_lo[d] || x[d] > box_hi[d]) hit = false;
              continue;
            }
            double r_a = (box_lo[d] - x[d]) / dir, r_b = (box_hi[d] - x[d]) / dir;
            if (r_a > r_b) std::swap(r_a, r_b);
            r_in = std::max(r_in, r_a);
            r_out = std::min(r_out, r_b);
            if (r_in >= r_out) hit = false;
          }
          if (!hit) continue;
          if (r_stop > 0.0) {
            const double xo = dot(x, om);
            const double dd = xo * xo - (dot(x, x) - r_stop * r_stop);
            if (dd > 0.0) {
              const double first = xo - std::sqrt(dd);
              if (first > 0.0) r_out = std::min(r_out, first);
            }
          }
          if (r_out <= r_in) continue;
          const int steps = std::max(1, static_cast<int>(std::ceil((r_out - r_in) / (opt.ray_step * h))));
          const double dr = (r_out - r_in) / steps;
          double F0 = 0.0, F1 = 0.0, F2 = 0.0;
          for (int k = 0; k <= steps; ++k) {
            const double r = r_in + k * dr;
            const double wt = (k == 0 || k == steps) ? 0.5 * dr : dr;
            const double v = piece.at({x[0] - r * om[0], x[1] - r * om[1], x[2] - r * om[2]}, L, h);
            if (v == 0.0) continue;
            F0 += wt * v;
            F1 += wt * v * r;
            F2 += wt * v * r * r;
          }
          const double kernel = polar.w[iu] * w_az * (m0 * F2 + 2.0 * m1 * F1 + m2 * F0);
          for (int d = 0; d < 3; ++d) acc[d] += kernel * om[d];
        }
      }
      for (int d = 0; d < 3; ++d) ov(p, d) += acc[d];
    }
  }
  return out;
}

}  // namespace

Field bogovskii_apply(const Field& f, const AnnulusSpec& spec, const BogovskiiOptions& opt) {
  require(spec.outer() + 1.0 <= f.grid().half_extent(), "annulus must fit the grid with margin >= 1 (R + 2 <= L)");
  return bogovskii_unchecked(f, spec, opt);
}

double annulus_divergence_error(const Field& b, const Field& f, const AnnulusSpec& spec) {
  const Field div = divergence(b);
  const Eigen::ArrayXd& r2 = f.grid().radius_squared();
  double num = 0.0, den = 0.0;
  for (Eigen::Index p = 0; p < f.size(); ++p) {
    if (!spec.contains_open(r2[p])) continue;
    const double e = div.values()(p, 0) - f.values()(p, 0);
    num += e * e;
    den += f.values()(p, 0) * f.values()(p, 0);
  }
  require(den > 0.0, "f vanishes on the annulus");
  return std::sqrt(num / den);
}

double w12_bound_ratio(const Field& b, const Field& f) {
  const double lb = l2_norm(b);
  const double gb = l2_norm(gradient(b));
  const double lf = l2_norm(f);
  require(lf > 0.0, "f vanishes");
  return std::sqrt(lb * lb + gb * gb) / lf;
}

ExtensionResult solenoidal_extension(const Field& u0, double R, const ExtensionOptions& opt) {
  const Grid& g = u0.grid();
  require(g.dim() == 3 && u0.components() == 3, "solenoidal extension is implemented for 3-D vector fields");
  require(R > 0.0, "obstacle radius must be positive");
  require(R + 3.0 + 2.0 * g.spacing() < g.half_extent(), "extension needs R + 3 < L (with two cells to spare)");
  require(u0.all_finite(), "field has non-finite samples");

  const Eigen::ArrayXd& r2 = g.radius_squared();
  {
    const Field div = divergence(u0);
    const Eigen::ArrayXd grad = pointwise_magnitude(gradient(u0));
    double max_div = 0.0, max_grad = 0.0;
    for (Eigen::Index p = 0; p < g.num_points(); ++p) {
      if (r2[p] <= R * R) continue;
      max_div = std::max(max_div, std::abs(div.values()(p, 0)));
      max_grad = std::max(max_grad, grad[p]);
    }
    if (max_div > opt.divergence_tolerance * max_grad) {
      std::ostringstream msg;
      msg << "u0 is not solenoidal outside B_R: max|div u0| = " << max_div << ", max|grad u0| = " << max_grad;
      throw PreconditionError(msg.str());
    }
  }

  const Field phi = radial_cutoff(g, R + 2.0, R + 3.0);
  const Field grad_phi = radial_cutoff_gradient(g, R + 2.0, R + 3.0);
  Field flux(g, Eigen::ArrayXXd((grad_phi.values() * u0.values()).rowwise().sum()));

  const double cell = g.cell_volume();
  const double mean = flux.values().sum() * cell;
  const double l1 = flux.values().abs().sum() * cell;
  ExtensionResult result{Field(g, 3), 0.0, 0.0};
  result.relative_flux = l1 > 0.0 ? std::abs(mean) / l1 : 0.0;
  if (result.relative_flux > opt.flux_tolerance) {
    std::ostringstream msg;
    msg << "grad(phi_R).u0 is not mean-zero within quadrature tolerance: relative mean " << result.relative_flux;
    throw PreconditionError(msg.str());
  }

  // Remove the quadrature-level mean with a normalized radial shell bump
  // supported inside D_{R+2}.
  if (mean != 0.0) {
    Eigen::ArrayXd shell(g.num_points());
    for (Eigen::Index p = 0; p < g.num_points(); ++p) shell[p] = bump((std::sqrt(r2[p]) - (R + 2.5)) / 0.4);
    flux.values().col(0) -= mean * shell / (shell.sum() * cell);
    result.removed_mean = mean;
  }

  const Field b = bogovskii_unchecked(flux, AnnulusSpec{R + 2.0}, opt.bogovskii);
  Field v0 = u0;
  for (int c = 0; c < 3; ++c) v0.values().col(c) *= 1.0 - phi.values().col(0);
  v0 += b;
  result.v0 = std::move(v0);
  return result;
}

}  // namespace wstokes
