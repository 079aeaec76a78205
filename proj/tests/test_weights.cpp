#include "wstokes/errors.hpp"
#include "wstokes/weights.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wstokes;

TEST_CASE("admissible range of <x>^{sq}") {
  const OpenInterval a = admissible_range(3.0, 3);
  CHECK(a.lower == doctest::Approx(-1.0));
  CHECK(a.upper == doctest::Approx(2.0));
  const OpenInterval b = admissible_range(2.0, 4);
  CHECK(b.lower == doctest::Approx(-2.0));
  CHECK(b.upper == doctest::Approx(2.0));
  CHECK(a.contains(0.0));
  CHECK_FALSE(a.contains(2.0));
}

TEST_CASE("A_q verdicts") {
  const auto sides = geometric_ladder(1e-3, 1e3, 3);
  CHECK(sides.front() == doctest::Approx(1e-3));
  CHECK(sides.back() == doctest::Approx(1e3));
  CHECK(sides.size() == 19);

  SUBCASE("weights inside the admissible range are finite") {
    for (double alpha : {-2.0, 0.0, 2.0}) {
      const AqReport r = aq_check(RadialWeight::bracket(alpha), 2.0, sides);
      CHECK(r.verdict == AqVerdict::finite);
      CHECK(std::isfinite(r.sup_estimate));
      CHECK(r.sup_estimate >= 1.0 - 1e-9);  // Jensen
    }
  }
  SUBCASE("weights outside diverge") {
    const AqReport r = aq_check(RadialWeight::bracket(-3.0), 2.0, sides);
    CHECK(r.verdict == AqVerdict::diverging);
    const AqReport h = aq_check(RadialWeight::power(4.0), 2.0, sides);
    CHECK(h.verdict == AqVerdict::diverging);
  }
  SUBCASE("constant weight has product one on every cube") {
    for (double side : {0.01, 1.0, 100.0})
      CHECK(aq_cube_product(RadialWeight::bracket(0.0), 2.0, 3, 0.5, side, 16, 0.02) ==
            doctest::Approx(1.0));
  }
}

TEST_CASE("ball averages and maximal functions") {
  const Grid g(3, 16, 2.0);
  const Field c = Field::sample_scalar(g, [](auto) { return -3.0; });
  CHECK((ball_average(c, 0.7).values() - 3.0).abs().maxCoeff() < 1e-12);

  const Field f = Field::sample_scalar(g, [](std::span<const double> x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  });
  const auto radii = radius_ladder(g, 6);
  CHECK(radii.front() == doctest::Approx(g.spacing()));
  CHECK(radii.back() == doctest::Approx(2.0));
  const Field m = maximal_function(f, radii);
  CHECK((m.values().col(0) >= f.values().col(0).abs() - 1e-15).all());
  // An average never exceeds the sup.
  CHECK(m.values().maxCoeff() <= f.values().abs().maxCoeff() + 1e-12);

  const std::vector<double> eps = {0.25, 0.5, 1.0};
  const Field ms = mollifier_supremum(c, eps);
  CHECK((ms.values() - 3.0).abs().maxCoeff() < 1e-12);

  const auto shells = shell_radii(g, 2.0 * g.spacing());
  // sqrt(m) for m = 1..4
  REQUIRE(shells.size() == 4);
  CHECK(shells[3] == doctest::Approx(2.0 * g.spacing()));
}

TEST_CASE("feasibility of the exponent hypotheses") {
  SUBCASE("n = 5, q1 = 4, q2 = 3") {
    const HypothesisSet h(5, 4.0, 3.0);
    CHECK(h.q12() == doctest::Approx(12.0 / 7.0));
    CHECK(h.q2_star() == doctest::Approx(7.5));
    const OpenInterval s = feasibility(h);
    CHECK(s.lower == doctest::Approx(1.0 / 3.0));
    CHECK(s.upper == doctest::Approx(25.0 / 24.0));
    CHECK_FALSE(s.empty());
  }
  SUBCASE("the n = 3 box is empty") {
    const FeasibilityScan scan = feasibility_scan(3, 0.01);
    CHECK(scan.points > 0);
    CHECK(scan.nonempty == 0);
    CHECK(scan.widest == 0.0);
  }
  SUBCASE("some n = 5 lattice point is feasible") {
    const FeasibilityScan scan = feasibility_scan(5, 0.05);
    CHECK(scan.nonempty > 0);
  }
}

TEST_CASE("Sobolev embedding ratio stays below the sharp constant") {
  const Grid g(3, 48, 6.0);
  const Field u = Field::sample_scalar(g, [](std::span<const double> x) {
    return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  });
  // Best constant of ||u||_6 <= S ||grad u||_2 in three dimensions.
  const double sharp = std::pow(2.0 / std::tgamma(1.5), 1.0 / 3.0) / std::sqrt(3.0 * std::numbers::pi);
  const double r = sobolev_embedding_ratio(u, 2.0, 0.0);
  CHECK(r > 0.5 * sharp);
  CHECK(r < sharp);
  CHECK_THROWS_AS(sobolev_embedding_ratio(u, 3.0, 0.0), PreconditionError);
}
