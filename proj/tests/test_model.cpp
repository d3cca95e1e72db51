#include <cmath>
#include <limits>

#include <doctest.h>

#include "rsg/errors.hpp"
#include "rsg/model.hpp"
#include "test_support.hpp"

using namespace rsg;
using namespace rsg::testing;

TEST_CASE("coefficient fields interpolate linearly between samples") {
  const ScalarField f = ScalarField::sampled({{0.0, 1.0, 4.0}}, 2.0);
  CHECK(f.at(0.0, 0) == 0.0);
  CHECK(f.at(0.5, 0) == doctest::Approx(0.5));
  CHECK(f.at(1.5, 0) == doctest::Approx(2.5));
  CHECK(f.at(2.0, 0) == 4.0);
  CHECK(f.at(3.0, 0) == 4.0);
  CHECK_FALSE(f.is_constant());
}

TEST_CASE("validate rejects wrong shapes and non-finite values") {
  ProblemSpec s = load_data("zero.json");
  s.dyn.B_F1 = constant_field(2, Eigen::MatrixXd::Zero(1, 2));
  CHECK_THROWS_AS(validate(s), Error);
  s = load_data("zero.json");
  s.dyn.A = per_regime({0.0, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_AS(validate(s), Error);
  s = load_data("zero.json");
  s.follower.G = {1.0};
  CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("R_F is assembled from R1, R2 and S") {
  ProblemSpec s = ProblemSpec::zero(Generator(), 1.0, 10);
  s.follower.R1 = per_regime_1x1({2.0});
  s.follower.R2 = per_regime_1x1({-3.0});
  s.follower.S = per_regime_1x1({0.5});
  Eigen::Matrix2d expect;
  expect << 2.0, 0.5, 0.5, -3.0;
  CHECK(s.R_F(0.3, 0).isApprox(expect));
}

TEST_CASE("all-zero data gives zero constants from the degenerate limit") {
  const Constants c = derive_constants(ProblemSpec::zero(Generator(), 1.0, 10));
  CHECK(c.degenerate);
  CHECK(c.c1 == 0.0);
  CHECK(c.c3 == 0.0);
  CHECK(c.varrho == 0.0);
  CHECK(c.varrho_bar == 0.0);
}

TEST_CASE("constants follow their defining formulas") {
  ProblemSpec s = generic_multiplicative_spec(100);
  const Constants c = derive_constants(s);
  // Regime 1: 2|0.3| + 0.4^2 + 2 * 1.0; regime 2: 2|0.2| + 0.2^2 + 2 * 0.7.
  CHECK(c.c1 == doctest::Approx(std::max(0.6 + 0.16 + 2.0, 0.4 + 0.04 + 1.4)));
  CHECK(c.cbar1 == doctest::Approx(0.04));
  CHECK(c.cbar2 == 0.0);
  CHECK(c.c3 == doctest::Approx(std::pow(1.0 + 0.2 * 0.4, 2)));
  CHECK(c.q0 == doctest::Approx(0.8));
  CHECK(c.g0 == doctest::Approx(0.6));
  const double a = c.c1 * 2, K = std::expm1(a) / a, S = K * c.q0 + c.g0 * std::exp(a);
  CHECK(c.varrho == doctest::Approx(4 * c.c3 * K * S));
  CHECK(c.varrho_bar == doctest::Approx(2 * S));
}

TEST_CASE("pricing data: assumption report") {
  const ProblemSpec s = load_data("pricing.json");
  const AssumptionReport r = check_assumptions(s);
  CHECK(r.F2);
  CHECK_FALSE(r.F3);  // Gbar_F != 0
  CHECK_FALSE(r.F4);  // D_F = 0
  CHECK(r.L1);
  CHECK(r.L3);
  CHECK(r.rf1_positive);
  CHECK(r.rf2_negative);
  CHECK(r.pricing_structure);
  CHECK(r.constants.c1 == doctest::Approx(3.0));
  CHECK(r.constants.c3 == doctest::Approx(0.25));
  CHECK(pricing_structure_violations(s).empty());
  CHECK_FALSE(pricing_structure_violations(generic_additive_spec(10)).empty());
}

TEST_CASE("random F suite satisfies F2-F5 by construction") {
  std::mt19937_64 rng(3);
  for (int m = 1; m <= 3; ++m) {
    const AssumptionReport r = check_assumptions(random_f_spec(rng, m));
    CHECK(r.F2);
    CHECK(r.F3);
    CHECK(r.F4);
    CHECK(r.F5);
  }
}
