#include <array>
#include <cmath>
#include <limits>

#include <doctest.h>

#include "rsg/errors.hpp"
#include "rsg/regime_ode.hpp"

using namespace rsg;

namespace {

Generator two_state(double a, double b) {
  Eigen::MatrixXd q(2, 2);
  q << -a, a, b, -b;
  return Generator::validate(q);
}

const double kF[2] = {0.4, -0.3}, kH[2] = {0.2, 0.5}, kG[2] = {1.0, -0.5};

LinearBsdeSolution solve_two_state(int N, Scheme scheme) {
  return solve_linear_regime_bsde(
      [](double t, int i) { return Eigen::MatrixXd::Constant(1, 1, kF[i] * (1 + t)); },
      [](double t, int i) { return Eigen::MatrixXd::Constant(1, 1, kH[i] * std::cos(t)); },
      {Eigen::MatrixXd::Constant(1, 1, kG[0]), Eigen::MatrixXd::Constant(1, 1, kG[1])}, two_state(1.0, 2.0),
      TimeGrid{1.0, N}, scheme);
}

/// Explicit Euler backward from T with `steps` steps.
std::array<double, 2> euler_oracle(long steps) {
  double v0 = kG[0], v1 = kG[1];
  const double h = 1.0 / static_cast<double>(steps);
  for (long k = steps; k > 0; --k) {
    const double t = k * h;
    const double d0 = kF[0] * (1 + t) * v0 + 1.0 * (v1 - v0) + kH[0] * std::cos(t);
    const double d1 = kF[1] * (1 + t) * v1 + 2.0 * (v0 - v1) + kH[1] * std::cos(t);
    v0 += h * d0;
    v1 += h * d1;
  }
  return {v0, v1};
}

}  // namespace

TEST_CASE("regime grid layout and accessors") {
  RegimeGrid g(TimeGrid{1.0, 4}, 2, 2, 1);
  g(3, 1)(1, 0) = 5.0;
  CHECK(g.value(3, 1, 1, 0) == 5.0);
  CHECK(g.node(3)[3] == 5.0);
  CHECK(g.block_size() == 2);
  CHECK(g.max_abs() == 5.0);
  g(2, 1)(1, 0) = 1.0;
  CHECK(g.interpolate(0.625, 1)(1, 0) == doctest::Approx(3.0));
}

TEST_CASE("two-regime linear BSDE matches a fine explicit-Euler oracle") {
  const auto oracle = euler_oracle(1000000);
  const auto sol = solve_two_state(1000, Scheme::kRk4);
  CHECK(sol.v.value(0, 0) == doctest::Approx(oracle[0]).epsilon(1e-5));
  CHECK(sol.v.value(0, 1) == doctest::Approx(oracle[1]).epsilon(1e-5));
  CHECK(sol.v.value(1000, 0) == kG[0]);
  CHECK(sol.jumps(500, 0, 1)(0, 0) == sol.v.value(500, 1) - sol.v.value(500, 0));
}

TEST_CASE("RK4 converges at fourth order and Euler at first order") {
  const double ref = solve_two_state(4000, Scheme::kRk4).v.value(0, 0);
  const double e_rk1 = std::abs(solve_two_state(20, Scheme::kRk4).v.value(0, 0) - ref);
  const double e_rk2 = std::abs(solve_two_state(40, Scheme::kRk4).v.value(0, 0) - ref);
  CHECK(e_rk1 / e_rk2 == doctest::Approx(16.0).epsilon(0.15));
  const double e_eu1 = std::abs(solve_two_state(200, Scheme::kEuler).v.value(0, 0) - ref);
  const double e_eu2 = std::abs(solve_two_state(400, Scheme::kEuler).v.value(0, 0) - ref);
  CHECK(e_eu1 / e_eu2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Markov coupling adds sum_j lambda_ij (v_j - v_i)") {
  Eigen::VectorXd v(2), out = Eigen::VectorXd::Zero(2);
  v << 1.0, 4.0;
  add_markov_coupling(two_state(1.0, 2.0), v, 1, out);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == -6.0);
}

TEST_CASE("blow-up and non-finite derivatives are reported with the failing time") {
  const StackedRhs blowup = [](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) { d = -v.cwiseProduct(v); };
  try {
    integrate_backward(blowup, {Eigen::MatrixXd::Constant(1, 1, 1.0)}, TimeGrid{2.0, 2000});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kNonFiniteDerivative);
    REQUIRE(e.time().has_value());
    CHECK(*e.time() > 0.9);
    CHECK(*e.time() < 1.1);
  }
  const StackedRhs nan = [](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) {
    d = v * std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(integrate_backward(nan, {Eigen::MatrixXd::Ones(1, 1)}, TimeGrid{1.0, 10}), Error);
}
