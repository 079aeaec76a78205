#include "wstokes/periodic.hpp"

#include "wstokes/errors.hpp"
#include "wstokes/semigroup.hpp"
#include "wstokes/weights.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <string>

namespace wstokes {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// forcing

PeriodicForce::PeriodicForce(const Grid& grid, double period, double amplitude)
    : grid_(grid), period_(period), amplitude_(amplitude) {
  require(std::isfinite(period) && period > 0.0, "period must be positive");
  require(std::isfinite(amplitude), "forcing amplitude must be finite");
}

void PeriodicForce::add_term(std::function<double(double)> profile, const Field& shape) {
  require(shape.grid() == grid_, "forcing term lives on a different grid");
  require(shape.components() == grid_.dim(), "forcing terms are n-component fields");
  terms_.push_back({std::move(profile), shape, leray_project(to_spectral(shape))});
}

PeriodicForce PeriodicForce::with_amplitude(double eps) const {
  PeriodicForce f = *this;
  require(std::isfinite(eps), "forcing amplitude must be finite");
  f.amplitude_ = eps;
  return f;
}

double PeriodicForce::wrap(double t) const {
  double r = std::fmod(t, period_);
  if (r < 0.0) r += period_;
  return r;
}

Field PeriodicForce::sample(double t) const {
  Field out(grid_, grid_.dim());
  if (is_zero()) return out;
  const double tau = wrap(t);
  for (const auto& term : terms_) out.values() += (amplitude_ * term.profile(tau)) * term.shape.values();
  return out;
}

SpectralField PeriodicForce::projected(double t) const {
  SpectralField out(grid_, grid_.dim());
  if (is_zero()) return out;
  const double tau = wrap(t);
  for (const auto& term : terms_) out.coeffs() += (amplitude_ * term.profile(tau)) * term.projected_shape.coeffs();
  return out;
}

ContractionFailure::ContractionFailure(double growth, int iteration)
    : std::runtime_error("outside contraction regime: residual grew by factor " + std::to_string(growth) +
                         " at iteration " + std::to_string(iteration)),
      growth_(growth),
      iteration_(iteration) {}

// ---------------------------------------------------------------------------
// nonlinearity

namespace {

// Zeroes every mode with |k_j| > N/3 on some axis.
void dealias(SpectralField& u) {
  const Grid& g = u.grid();
  const int cut = g.points_per_axis() / 3;
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    for (int d = 0; d < g.dim(); ++d) {
      if (std::abs(g.mode_wavenumber(d)[k]) > cut) {
        u.coeffs().row(k).setZero();
        break;
      }
    }
  }
}

SpectralField nonlinearity_unchecked(const SpectralField& u) {
  const Grid& g = u.grid();
  const int n = g.dim();
  SpectralField ud = u;
  dealias(ud);
  const Field phys = from_spectral(ud);
  SpectralField div(g, n);
  const cplx i(0.0, 1.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const Field prod(g, Eigen::ArrayXXd(phys.values().col(a) * phys.values().col(b)));
      const SpectralField ph = to_spectral(prod);
      // (u.grad)u_a = sum_b d_b(u_b u_a); the symmetric product feeds rows a and b.
      for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
        div.coeffs()(k, a) += (i * g.derivative_wavenumber(k, b)) * ph.coeffs()(k, 0);
        if (b != a) div.coeffs()(k, b) += (i * g.derivative_wavenumber(k, a)) * ph.coeffs()(k, 0);
      }
    }
  }
  dealias(div);
  SpectralField out = leray_project(div);
  out *= -1.0;
  return out;
}

double kappa_of_row(const Grid& g, Eigen::Index row) { return g.mode_kappa(row % g.num_modes()); }

}  // namespace

SpectralField nonlinearity(const SpectralField& u) {
  const Grid& g = u.grid();
  require(u.components() == g.dim(), "nonlinearity takes an n-component field");
  require(u.coeffs().allFinite(), "field has non-finite coefficients");
  const double grad = spectral_l2_norm(gradient(u));
  const double div = spectral_l2_norm(divergence(u));
  require(div <= 1e-8 * std::max(grad, std::numeric_limits<double>::min()) || grad == 0.0,
          "nonlinearity needs a solenoidal field (relative divergence above 1e-8)");
  return nonlinearity_unchecked(u);
}

Field nonlinearity(const Field& u) { return from_spectral(nonlinearity(to_spectral(u))); }

// ---------------------------------------------------------------------------
// Poincare map

int tail_periods(const Grid& grid, double period, double tail_eps) {
  require(tail_eps > 0.0 && tail_eps < 1.0, "tail_eps must lie in (0, 1)");
  const double rate = grid.kappa_min() * period;
  require(rate >= 1e-6, "history tail does not converge: kappa_min * T below 1e-6");
  // First k with exp(-k T kappa_min) < tail_eps.
  const double k = -std::log(tail_eps) / rate;
  return static_cast<int>(std::floor(k)) + 1;
}

namespace {

void validate(const PicardConfig& cfg) {
  require(cfg.M >= 8 && cfg.M % 2 == 0, "M must be even and >= 8");
  require(cfg.tol > 0.0, "tolerance must be positive");
  require(cfg.tail_eps > 0.0, "tail_eps must be positive");
  require(cfg.max_iter >= 1, "max_iter must be positive");
}

double series_norm(const NodeSeries& u) {
  double m = 0.0;
  for (const auto& v : u) m = std::max(m, spectral_l2_norm(v));
  return m;
}

}  // namespace

NodeSeries poincare_map(const NodeSeries& u, const PeriodicForce& f, const PicardConfig& cfg) {
  validate(cfg);
  const Grid& g = f.grid();
  const int n = g.dim();
  const int M = cfg.M;
  require(static_cast<int>(u.size()) == M, "node series must have M entries");
  const double T = f.period();
  const int K = tail_periods(g, T, cfg.tail_eps);

  const Eigen::Index P = g.num_modes() * n;
  Eigen::MatrixXcd h(P, M);
  for (int m = 0; m < M; ++m) {
    require(u[m].grid() == g && u[m].components() == n, "node field does not match the forcing grid");
    SpectralField hm = f.projected(T * m / M);
    if (!cfg.linear) hm += nonlinearity_unchecked(u[m]);
    h.col(m) = Eigen::Map<const Eigen::VectorXcd>(hm.coeffs().data(), P);
  }

  Eigen::MatrixXcd forward(M, M), backward(M, M);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < M; ++k) {
      const double a = 2.0 * std::numbers::pi * double(k) * m / M;
      forward(m, k) = std::polar(1.0 / M, -a);
      backward(k, m) = std::polar(1.0, a);
    }
  Eigen::MatrixXcd coeffs = h * forward;

  for (Eigen::Index r = 0; r < P; ++r) {
    const double kappa = kappa_of_row(g, r);
    if (kappa == 0.0) {
      coeffs.row(r).setZero();
      continue;
    }
    const double tail = -std::expm1(-K * kappa * T);
    for (int k = 0; k < M; ++k) {
      const int kk = k <= M / 2 ? k : k - M;
      const double w = 2.0 * std::numbers::pi * kk / T;
      cplx lambda = tail / cplx(kappa, w);
      // Nyquist node frequency: the interpolant carries it as a cosine.
      if (k == M / 2) lambda = std::real(lambda);
      coeffs(r, k) *= lambda;
    }
  }
  const Eigen::MatrixXcd out = coeffs * backward;

  NodeSeries result;
  result.reserve(M);
  for (int m = 0; m < M; ++m) {
    SpectralField v(g, n);
    Eigen::Map<Eigen::VectorXcd>(v.coeffs().data(), P) = out.col(m);
    result.push_back(std::move(v));
  }
  return result;
}

PeriodicSolution picard_solve(const PeriodicForce& f, const PicardConfig& cfg) {
  validate(cfg);
  const Grid& g = f.grid();
  PeriodicSolution sol;
  sol.period = f.period();
  NodeSeries u(cfg.M, SpectralField(g, g.dim()));
  int rising = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    NodeSeries hu = poincare_map(u, f, cfg);
    std::vector<double> node_res(cfg.M);
    double res = 0.0;
    for (int m = 0; m < cfg.M; ++m) {
      node_res[m] = spectral_l2_norm(u[m] - hu[m]);
      res = std::max(res, node_res[m]);
    }
    const double rel = res / std::max(series_norm(u), std::numeric_limits<double>::epsilon());
    sol.residual_history.push_back(rel);
    sol.iterations = it;
    if (it >= 3) {
      const double ratio = rel / sol.residual_history[it - 2];
      sol.contraction = std::max(sol.contraction, ratio);
      rising = ratio >= 1.0 ? rising + 1 : 0;
      if (rising >= 3) throw ContractionFailure(ratio, it);
    }
    if (rel <= cfg.tol) {
      sol.nodes = std::move(u);
      sol.node_residual = std::move(node_res);
      return sol;
    }
    u = std::move(hu);
  }
  throw std::runtime_error("Picard iteration did not reach tolerance within max_iter = " +
                           std::to_string(cfg.max_iter) + " (last residual " +
                           std::to_string(sol.residual_history.back()) + ")");
}

// ---------------------------------------------------------------------------
// periodicity check

namespace {

// Fourth-order exponential time differencing coefficients for one decay rate.
struct EtdCoefficients {
  double e, e2, q, f1, f2, f3;
};

EtdCoefficients etd_coefficients(double kappa, double dt) {
  constexpr int contour = 64;
  const double lh = -kappa * dt;
  cplx q = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
  for (int j = 1; j <= contour; ++j) {
    const cplx r = lh + std::exp(cplx(0.0, std::numbers::pi * (j - 0.5) / (contour / 2)));
    const cplx er = std::exp(r);
    q += (std::exp(r / 2.0) - 1.0) / r;
    f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / (r * r * r);
    f2 += (2.0 + r + er * (r - 2.0)) / (r * r * r);
    f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / (r * r * r);
  }
  return {std::exp(lh), std::exp(lh / 2.0), dt * std::real(q) / contour, dt * std::real(f1) / contour,
          dt * std::real(f2) / contour, dt * std::real(f3) / contour};
}

}  // namespace

double periodicity_check(const PeriodicSolution& sol, const PeriodicForce& f, const PicardConfig& cfg, int steps) {
  validate(cfg);
  require(!sol.nodes.empty(), "solution has no nodes");
  const Grid& g = f.grid();
  const int n = g.dim();
  if (steps <= 0) steps = std::max(256, 8 * cfg.M);
  const double T = f.period();
  const double dt = T / steps;

  // Coefficients per distinct integer |k|^2.
  std::map<long, EtdCoefficients> table;
  std::vector<const EtdCoefficients*> coef(g.num_modes());
  const double k0 = g.base_frequency();
  for (Eigen::Index k = 0; k < g.num_modes(); ++k) {
    long m2 = 0;
    for (int d = 0; d < n; ++d) m2 += long(g.mode_wavenumber(d)[k]) * g.mode_wavenumber(d)[k];
    auto it = table.find(m2);
    if (it == table.end()) it = table.emplace(m2, etd_coefficients(k0 * k0 * m2, dt)).first;
    coef[k] = &it->second;
  }

  auto rhs = [&](const SpectralField& v, double t) {
    SpectralField r = f.projected(t);
    if (!cfg.linear) r += nonlinearity_unchecked(v);
    return r;
  };
  auto combine = [&](auto&& fn) {
    SpectralField out(g, n);
    for (Eigen::Index k = 0; k < g.num_modes(); ++k) fn(k, *coef[k], out);
    return out;
  };

  const SpectralField u0 = sol.nodes.front();
  SpectralField v = u0;
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const SpectralField nv = rhs(v, t);
    const SpectralField a = combine([&](Eigen::Index k, const EtdCoefficients& c, SpectralField& o) {
      o.coeffs().row(k) = c.e2 * v.coeffs().row(k) + c.q * nv.coeffs().row(k);
    });
    const SpectralField na = rhs(a, t + dt / 2);
    const SpectralField b = combine([&](Eigen::Index k, const EtdCoefficients& c, SpectralField& o) {
      o.coeffs().row(k) = c.e2 * v.coeffs().row(k) + c.q * na.coeffs().row(k);
    });
    const SpectralField nb = rhs(b, t + dt / 2);
    const SpectralField cc = combine([&](Eigen::Index k, const EtdCoefficients& c, SpectralField& o) {
      o.coeffs().row(k) = c.e2 * a.coeffs().row(k) + c.q * (2.0 * nb.coeffs().row(k) - nv.coeffs().row(k));
    });
    const SpectralField nc = rhs(cc, t + dt);
    v = combine([&](Eigen::Index k, const EtdCoefficients& c, SpectralField& o) {
      o.coeffs().row(k) = c.e * v.coeffs().row(k) + c.f1 * nv.coeffs().row(k) +
                          2.0 * c.f2 * (na.coeffs().row(k) + nb.coeffs().row(k)) + c.f3 * nc.coeffs().row(k);
    });
  }
  const double defect = spectral_l2_norm(v - u0);
  const double base = spectral_l2_norm(u0);
  return base > 0.0 ? defect / base : defect;
}

// ---------------------------------------------------------------------------

WeightedReport weighted_report(const PeriodicSolution& sol, const PeriodicForce& f, double q1, double q2, double s) {
  const Grid& g = f.grid();
  const int n = g.dim();
  require(q1 > 1.0 && q2 > 1.0 && q2 < n, "weighted report needs q1 > 1 and 1 < q2 < n");
  WeightedReport rep;
  rep.q1 = q1;
  rep.q2 = q2;
  rep.s = s;
  rep.q12 = q1 * q2 / (q1 + q2);
  const double q2_star = n * q2 / (n - q2);
  rep.q22_star = q2_star * q2 / (q2_star + q2);
  require(rep.q12 >= 1.0, "weighted report needs q1 q2 / (q1 + q2) >= 1");
  const RadialWeight ws = RadialWeight::bracket(s);
  const RadialWeight w2s = RadialWeight::bracket(2.0 * s);
  const int M = static_cast<int>(sol.nodes.size());
  for (int m = 0; m < M; ++m) {
    const Field u = from_spectral(sol.nodes[m]);
    const double un = detail::lq_norm_unchecked(u, q1, ws) + detail::lq_norm_unchecked(gradient(u), q2, ws);
    rep.solution_norm = std::max(rep.solution_norm, un);
    const Field fm = f.sample(sol.period * m / M);
    const double fn = detail::lq_norm_unchecked(fm, rep.q12, w2s) + detail::lq_norm_unchecked(fm, rep.q22_star, w2s);
    rep.force_norm = std::max(rep.force_norm, fn);
  }
  if (rep.force_norm > 0.0) rep.ratio = rep.solution_norm / rep.force_norm;
  return rep;
}

}  // namespace wstokes
