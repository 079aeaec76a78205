#include "wstokes/corpus.hpp"
#include "wstokes/decay.hpp"
#include "wstokes/errors.hpp"
#include "wstokes/semigroup.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace wstokes;

namespace {

Field heat_field_at(const Grid& g, double t) { return heat_kernel_field(g, t); }

Field gaussian_potential_field(const Grid& g) {
  return Field::sample(g, 3, [](std::span<const double> x, std::span<double> out) {
    const double e = std::exp(-(x[0] * x[0] + 0.5 * x[1] * x[1] + x[2] * x[2]));
    out[0] = e;
    out[1] = x[0] * e;
    out[2] = -x[2] * e;
  });
}

}  // namespace

TEST_CASE("heat kernel values") {
  const std::array<double, 3> zero{0.0, 0.0, 0.0};
  CHECK(heat_kernel({3, 1.0 / (4.0 * std::numbers::pi)}, zero) == doctest::Approx(1.0).epsilon(1e-14));
  const std::array<double, 3> x{1.0, 2.0, -0.5};
  CHECK(heat_kernel({3, 0.7}, x) == doctest::Approx(heat_kernel_radial(3, 0.7, 5.25)));
  CHECK(heat_kernel_radial(2, 1.0, 0.0) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
}

TEST_CASE("heat kernel parabolic scaling E_t(x) = t^{-n/2} E_1(x / sqrt t)") {
  for (double t : {0.1, 2.0, 9.0})
    for (double r : {0.0, 0.5, 3.0}) {
      const double scaled = std::pow(t, -1.5) * heat_kernel_radial(3, 1.0, r * r / t);
      CHECK(heat_kernel_radial(3, t, r * r) == doctest::Approx(scaled).epsilon(1e-13));
    }
}

TEST_CASE("heat kernel has unit mass") {
  const Grid g(3, 64, 16.0);
  for (double t : {0.25, 1.0, 4.0}) CHECK(std::abs(integral(heat_field_at(g, t)) - 1.0) < 1e-6);
}

TEST_CASE("heat semigroup") {
  const Grid g(3, 64, 12.0);
  SUBCASE("t = 0 is the identity") {
    const Field u = gaussian_potential_field(g);
    CHECK((heat_apply(u, 0.0).values() - u.values()).abs().maxCoeff() < 1e-13);
  }
  SUBCASE("kernel evolves into the kernel at a later time") {
    const Field e = heat_apply(heat_field_at(g, 0.5), 0.75);
    const Field expect = heat_field_at(g, 1.25);
    CHECK((e.values() - expect.values()).abs().maxCoeff() < 1e-9 * expect.values().maxCoeff());
  }
  SUBCASE("semigroup property") {
    const Field u = gaussian_potential_field(g);
    const Field a = heat_apply(heat_apply(u, 0.3), 0.4);
    const Field b = heat_apply(u, 0.7);
    CHECK(l2_norm(a - b) < 1e-12 * l2_norm(u));
  }
  SUBCASE("spectral and physical overloads agree") {
    const Field u = gaussian_potential_field(g);
    const Field a = from_spectral(heat_apply(to_spectral(u), 0.2));
    CHECK(l2_norm(a - heat_apply(u, 0.2)) < 1e-14 * l2_norm(u));
  }
}

TEST_CASE("Leray projection") {
  const Grid g(3, 48, 8.0);
  const Field u = gaussian_potential_field(g);
  const Field pu = leray_project(u);

  CHECK(l2_norm(divergence(pu)) < 1e-12 * l2_norm(u));
  CHECK(l2_norm(leray_project(pu) - pu) < 1e-13 * l2_norm(u));

  const Field scalar = Field::sample_scalar(g, [](std::span<const double> x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2]));
  });
  const Field grad = gradient(scalar);
  CHECK(l2_norm(leray_project(grad)) < 1e-10 * l2_norm(grad));

  const Field solenoidal = curl(u);
  CHECK(l2_norm(leray_project(solenoidal) - solenoidal) < 1e-8 * l2_norm(solenoidal));

  // Orthogonal decomposition.
  CHECK(std::abs(inner_product(pu, u - pu)) < 1e-12 * l2_norm(u) * l2_norm(u));

  CHECK(l2_norm(stokes_apply(u, 0.3) - heat_apply(pu, 0.3)) < 1e-14 * l2_norm(u));
}

TEST_CASE("derivatives of the semigroup") {
  const Grid g(3, 32, 6.0);
  const Field u = gaussian_potential_field(g);
  const Field hu = heat_apply(u, 0.4);
  const Field grad = gradient(hu);
  for (int j = 0; j < 3; ++j) {
    const Field dj = semigroup_gradient_apply(u, 0.4, j);
    for (int c = 0; c < 3; ++c)
      CHECK((dj.values().col(c) - grad.values().col(c * 3 + j)).abs().maxCoeff() < 1e-12);
  }

  const SpectralField s = to_spectral(u);
  const Field twice = from_spectral(half_laplacian(half_laplacian(s)));
  const Field minus_lap = -1.0 * laplacian(u);
  CHECK(l2_norm(twice - minus_lap) < 1e-10 * l2_norm(minus_lap));

  // Riesz transforms are L^2 isometries up to the dropped Nyquist modes.
  const Field v = leray_project(u);
  CHECK(riesz_gradient_ratio(v, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kernel domination constant is sharp") {
  const int n = 3;
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double c = kernel_domination_constant(n, lambda);
    double sup = 0.0;
    for (int i = 1; i <= 4000; ++i) {
      const double r = i * 0.001;
      sup = std::max(sup, heat_kernel_radial(n, 1.0, r * r) / std::pow(r, lambda - n));
    }
    CHECK(sup <= c * (1.0 + 1e-12));
    CHECK(sup == doctest::Approx(c).epsilon(1e-5));
    // scale invariance in t
    const double t = 9.0;
    const double r = 2.3;
    CHECK(heat_kernel_radial(n, t, r * r) <= c * std::pow(r, lambda - n) * std::pow(t, -lambda / 2.0));
  }
}

TEST_CASE("fractional integral of a Gaussian at the origin") {
  // int e^{-|y|^2} |y|^{-1} dy = 2 pi
  const Grid g(3, 128, 4.0);
  const Field f = Field::sample_scalar(g, [](std::span<const double> x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  });
  const std::array<int, 3> mid{64, 64, 64};
  const Eigen::Index origin = g.flat_index(mid);
  const double direct = fractional_integral_at(f, 2.0, origin);
  CHECK(std::abs(direct - 2.0 * std::numbers::pi) < 1e-3 * 2.0 * std::numbers::pi);

  const Grid small(3, 16, 3.0);
  const Field fs = Field::sample_scalar(small, [](std::span<const double> x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  });
  const Field all = fractional_integral(fs, 1.5);
  for (Eigen::Index p : {Eigen::Index(0), Eigen::Index(1000), Eigen::Index(2184)})
    CHECK(all.values()(p, 0) == doctest::Approx(fractional_integral_at(fs, 1.5, p)).epsilon(1e-10));
}

TEST_CASE("decay exponents and fits") {
  const DecayParams p{2.0, 6.0, 1.0, 0.0, 1};
  CHECK(predicted_exponent(p, 3) == doctest::Approx(-0.5 - 0.5 - 0.5));
  CHECK(predicted_rate(p, 3, 1.0) == doctest::Approx(std::pow(2.0, -0.5)));

  const auto t = time_ladder(1.0, 64.0, 2);
  REQUIRE(t.size() == 13);
  CHECK(t.back() == doctest::Approx(64.0));
  std::vector<double> v;
  for (double ti : t) v.push_back(3.0 * std::pow(ti, -1.25));
  const ExponentFit fit = fit_power_law(t, v);
  CHECK(fit.slope == doctest::Approx(-1.25));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
  CHECK(fit.r2 == doctest::Approx(1.0));
}

TEST_CASE("decay harness on a corpus field") {
  const Grid g(3, 32, 12.0);
  const Field u0 = solenoidal_corpus(g, 20240611, 1).front();
  const auto t = time_ladder(1.0, 16.0, 2);

  const DecayResult r = decay_harness(u0, {2.0, 2.0, 0.0, 0.0, 0}, t);
  CHECK(r.series.value.size() == t.size());
  CHECK(r.bound_compliance >= 1.0);
  CHECK(r.bound_compliance < 10.0);
  for (std::size_t i = 1; i < r.series.value.size(); ++i) CHECK(r.series.value[i] <= r.series.value[i - 1]);

  std::ostringstream csv;
  write_decay_csv(csv, r);
  CHECK(csv.str().rfind("t,norm,predicted_envelope,ratio\n", 0) == 0);
  CHECK(csv.str().find("\n#{") != std::string::npos);

  CHECK_THROWS_AS(decay_harness(u0, {6.0, 2.0, 0.0, 0.0, 0}, t), PreconditionError);
  CHECK_THROWS_AS(decay_harness(u0, {2.0, 2.0, 0.0, 1.0, 0}, t), PreconditionError);
  CHECK_THROWS_AS(decay_harness(u0, {2.0, 2.0, 2.0, 0.0, 0}, t), PreconditionError);
}
