#include "wstokes/errors.hpp"
#include "wstokes/field.hpp"
#include "wstokes/field_io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

using namespace wstokes;

namespace {

Field random_field(const Grid& g, int comps, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g, comps);
  for (Eigen::Index i = 0; i < f.values().size(); ++i) f.values().data()[i] = u(rng);
  return f;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("grid rejects invalid parameters") {
  CHECK_THROWS_AS(Grid(2, 16, 1.0), PreconditionError);
  CHECK_THROWS_AS(Grid(3, 15, 1.0), PreconditionError);
  CHECK_THROWS_AS(Grid(3, 6, 1.0), PreconditionError);
  CHECK_THROWS_AS(Grid(3, 16, 0.0), PreconditionError);
  CHECK_NOTHROW(Grid(3, 8, 1.0));
}

TEST_CASE("grid geometry") {
  const Grid g(3, 16, 2.0);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.coordinate(0) == doctest::Approx(-2.0));
  CHECK(g.coordinate(8) == 0.0);
  const std::array<int, 3> mid = {8, 8, 8};
  CHECK(g.radius_squared()[g.flat_index(mid)] == 0.0);
  CHECK(g.num_modes() == 16 * 16 * 9);
  CHECK(g.base_frequency() == doctest::Approx(2.0 * std::numbers::pi / 4.0));
  CHECK(g.kappa_min() == doctest::Approx(g.base_frequency() * g.base_frequency()));
}

TEST_CASE("integral of one is the cube volume") {
  for (double L : {1.0, 2.5, 16.0}) {
    const Grid g(3, 8, L);
    const Field one = Field::sample_scalar(g, [](auto) { return 1.0; });
    CHECK(integral(one) == doctest::Approx(std::pow(2.0 * L, 3)).epsilon(1e-14));
  }
}

TEST_CASE("constant field has only the zero mode") {
  const Grid g(3, 16, 3.0);
  const Field c = Field::sample_scalar(g, [](auto) { return 2.5; });
  const SpectralField s = to_spectral(c);
  CHECK(std::abs(s.coeffs()(0, 0) - 2.5) < 1e-13);
  CHECK(s.coeffs().col(0).abs().tail(g.num_modes() - 1).maxCoeff() < 1e-13);
}

TEST_CASE("single cosine mode gives two symmetric coefficients") {
  const Grid g(3, 16, 3.0);
  const double k = 2.0 * std::numbers::pi / 6.0;
  const Field f = Field::sample_scalar(g, [k](std::span<const double> x) { return std::cos(k * x[0]); });
  const SpectralField s = to_spectral(f);
  const Eigen::ArrayXd mag = s.coeffs().col(0).abs();
  const double peak = mag.maxCoeff();
  int big = 0;
  for (Eigen::Index m = 0; m < g.num_modes(); ++m) {
    if (mag[m] > 1e-12 * peak) {
      ++big;
      CHECK(std::abs(g.mode_wavenumber(0)[m]) == 1);
      CHECK(g.mode_wavenumber(1)[m] == 0);
      CHECK(g.mode_wavenumber(2)[m] == 0);
      CHECK(mag[m] == doctest::Approx(0.5));
    }
  }
  CHECK(big == 2);
}

TEST_CASE("spectral round trip and Parseval on random fields") {
  const Grid g(3, 16, 2.0);
  for (unsigned seed : {1u, 2u, 3u}) {
    const Field f = random_field(g, 3, seed);
    const Field back = from_spectral(to_spectral(f));
    CHECK((back.values() - f.values()).abs().maxCoeff() <= 1e-12 * f.values().abs().maxCoeff());
    CHECK(rel(spectral_l2_norm(to_spectral(f)), l2_norm(f)) < 1e-12);
  }
}

TEST_CASE("non-finite samples are rejected") {
  const Grid g(3, 8, 1.0);
  Field f(g, 1);
  f.values()(3, 0) = std::nan("");
  CHECK_THROWS_AS(to_spectral(f), PreconditionError);
}

TEST_CASE("gradient and divergence") {
  const Grid g(3, 32, 4.0);
  const double k = 2.0 * std::numbers::pi / 8.0;

  SUBCASE("gradient of a constant vanishes") {
    const Field c = Field::sample_scalar(g, [](auto) { return 7.0; });
    CHECK(pointwise_magnitude(gradient(c)).maxCoeff() < 1e-12);
  }
  SUBCASE("gradient of a sine") {
    const Field f = Field::sample_scalar(g, [k](std::span<const double> x) { return std::sin(k * x[0]); });
    const Field d = gradient(f);
    const Field expect = Field::sample_scalar(g, [k](std::span<const double> x) { return k * std::cos(k * x[0]); });
    CHECK((d.values().col(0) - expect.values().col(0)).abs().maxCoeff() < 1e-10);
    CHECK(d.values().col(1).abs().maxCoeff() < 1e-10);
    CHECK(d.values().col(2).abs().maxCoeff() < 1e-10);
  }
  SUBCASE("divergence of a curl-form field vanishes") {
    const Field psi = Field::sample_scalar(g, [](std::span<const double> x) {
      return std::exp(-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2]));
    });
    const Field gp = gradient(psi);
    Field v(g, 3);
    v.values().col(0) = gp.values().col(1);
    v.values().col(1) = -gp.values().col(0);
    CHECK(l2_norm(divergence(v)) <= 1e-10 * l2_norm(v));
  }
  SUBCASE("divergence of gradient is the Laplacian") {
    const Field f = random_field(g, 1, 9);
    CHECK(l2_norm(divergence(gradient(f)) - laplacian(f)) <= 1e-10 * l2_norm(laplacian(f)));
  }
  SUBCASE("gradient and divergence are adjoint") {
    const Field f = random_field(g, 1, 4);
    const Field v = random_field(g, 3, 5);
    const double lhs = inner_product(gradient(f), v);
    const double rhs = -inner_product(f, divergence(v));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * l2_norm(gradient(f)) * l2_norm(v));
  }
}

TEST_CASE("weighted norms") {
  SUBCASE("unit field on [-1,1]^3") {
    const Grid g(3, 8, 1.0);
    const Field one = Field::sample_scalar(g, [](auto) { return 1.0; });
    CHECK(weighted_lq_norm(one, 2.0) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
  }
  const Grid g(3, 64, 6.0);
  const Field gauss = Field::sample_scalar(g, [](std::span<const double> x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  });
  SUBCASE("Gaussian, s = 0") {
    CHECK(std::abs(weighted_lq_norm(gauss, 2.0) - std::pow(std::numbers::pi / 2.0, 0.75)) < 1e-6);
  }
  SUBCASE("Gaussian, s = 1 against a radial quadrature") {
    // 4 pi int_0^10 r^2 (1 + r^2) e^{-2 r^2} dr by composite Simpson.
    const int m = 20000;
    const double h = 10.0 / m;
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double r = i * h;
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * r * r * (1.0 + r * r) * std::exp(-2.0 * r * r);
    }
    const double oracle = std::sqrt(4.0 * std::numbers::pi * sum * h / 3.0);
    CHECK(rel(weighted_lq_norm(gauss, 2.0, RadialWeight::bracket(1.0)), oracle) < 1e-4);
  }
  SUBCASE("q <= 1 is rejected") {
    CHECK_THROWS_AS(weighted_lq_norm(gauss, 1.0), PreconditionError);
    CHECK_THROWS_AS(weighted_lq_norm(gauss, 0.5), PreconditionError);
  }
}

TEST_CASE("midpoint quadrature converges under refinement") {
  auto bump_integral = [](int N) {
    const Grid g(3, N, 2.0);
    return integral(Field::sample_scalar(g, [](std::span<const double> x) {
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      return r2 < 1.0 ? std::pow(1.0 - r2, 4) : 0.0;
    }));
  };
  // 4 pi int_0^1 r^2 (1-r^2)^4 dr = 4 pi * 128/3465
  const double exact = 4.0 * std::numbers::pi * 128.0 / 3465.0;
  const double e16 = std::abs(bump_integral(16) - exact);
  const double e32 = std::abs(bump_integral(32) - exact);
  CHECK(e32 <= 0.25 * 0.25 * 0.25 * 4.0);  // O(h^2) with h = 1/8
  CHECK(e32 <= e16);
}

TEST_CASE("field binary round trip") {
  const Grid g(3, 8, 1.5);
  const Field f = random_field(g, 3, 11);
  std::stringstream ss;
  write_field(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 + 4 + 8 + 4 + 8 * 512 * 3);
  std::int32_t n = 0;
  std::memcpy(&n, bytes.data(), 4);
  CHECK(n == 3);
  const Field back = read_field(ss);
  CHECK(back.grid() == g);
  CHECK((back.values() == f.values()).all());
}
