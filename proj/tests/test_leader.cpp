#include <array>
#include <cmath>

#include <doctest.h>

#include "rsg/errors.hpp"
#include "rsg/leader.hpp"
#include "test_support.hpp"

using namespace rsg;
using namespace rsg::testing;

TEST_CASE("leader/follower block layout") {
  const Eigen::Matrix2d b = leader_follower_block(1.5, 0.25);
  CHECK(b(0, 0) == 1.5);
  CHECK(b(0, 1) == -0.25);
  CHECK(b(1, 0) == 0.25);
  CHECK(b(1, 1) == 0.0);
}

TEST_CASE("without follower influence P_L(1,1) is the leader's scalar Riccati solution") {
  ProblemSpec s = generic_additive_spec(1000);
  s.dyn.B_F1 = s.dyn.B_F2 = constant_field(2, Eigen::MatrixXd::Zero(1, 1));
  s.dyn.C = per_regime({0.3, -0.2});
  s.leader.Q = per_regime({0.7, 0.2});
  s.leader.G = {0.5, 1.2};
  const LeaderRiccati lr = solve_PL(s);

  // p' + (2A + C^2) p + Q_L - B_L^2 p^2 / R_L + sum_j lambda_ij (p_j - p_i) = 0, explicit Euler.
  std::array<double, 2> p{s.leader.G[0], s.leader.G[1]};
  const long steps = 1000000;
  const double h = 1.0 / steps;
  for (long k = steps; k > 0; --k) {
    const double t = k * h;
    std::array<double, 2> d{};
    for (int i = 0; i < 2; ++i) {
      const double A = s.dyn.A.at(t, i), C = s.dyn.C.at(t, i), B = s.dyn.B_L.at(t, i)(0, 0);
      d[i] = (2 * A + C * C) * p[i] + s.leader.Q.at(t, i) - B * B * p[i] * p[i] / s.leader.R.at(t, i)(0, 0) +
             s.generator.rate(i, 1 - i) * (p[1 - i] - p[i]);
    }
    for (int i = 0; i < 2; ++i) p[i] += h * d[i];
  }
  CHECK(lr.P(0, 0)(0, 0) == doctest::Approx(p[0]).epsilon(1e-5));
  CHECK(lr.P(0, 1)(0, 0) == doctest::Approx(p[1]).epsilon(1e-5));
}

TEST_CASE("per-regime and block-form solves agree") {
  std::mt19937_64 rng(8);
  for (int m = 1; m <= 3; ++m) {
    const ProblemSpec s = random_l3_spec(rng, m, 200);
    const LeaderRiccati pl = solve_PL(s);
    const RegimeGrid block = solve_PL_blockform(s);
    double worst = 0;
    for (int k = 0; k <= s.N; ++k)
      for (int i = 0; i < m; ++i)
        worst = std::max(worst, (pl.P(k, i) - block(k, 0).block(2 * i, 2 * i, 2, 2)).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("coupling matrices carry square roots of the rates") {
  Eigen::MatrixXd q(3, 3);
  q << -3, 1, 2, 0.5, -0.5, 0, 4, 5, -9;
  const auto Nk = coupling_matrices(Generator::validate(q));
  REQUIRE(Nk.size() == 2);
  CHECK(Nk[0](0, 1) == doctest::Approx(1.0));
  CHECK(Nk[0](1, 2) == 0.0);
  CHECK(Nk[0](2, 0) == doctest::Approx(2.0));
  CHECK(Nk[1](0, 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(Nk[1](2, 1) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("Pbar_L and tau vanish without mean-field data and forcing") {
  std::mt19937_64 rng(9);
  ProblemSpec s = random_l3_spec(rng, 2, 200);
  s.dyn.Abar = s.dyn.b = s.dyn.sigma = constant_field(2, 0.0);
  s.follower.Qbar = s.leader.Qbar = constant_field(2, 0.0);
  s.follower.Gbar = s.leader.Gbar = {0.0, 0.0};
  const LeaderRiccati lr = solve_leader_riccati(s);
  CHECK(solve_PLbar(s, lr).Pbar.max_abs() == 0.0);
  CHECK(lr.tau.max_abs() == 0.0);
}

TEST_CASE("leader feedback requires D_L = 0 and invertible R_L") {
  std::mt19937_64 rng(10);
  ProblemSpec s = random_l3_spec(rng, 2, 50);
  const LeaderRiccati lr = solve_leader_riccati(s);
  const LeaderGains g = leader_feedback(s, build_augmented(s), lr);
  // KX = -R_L^-1 B^T P with B = (B_L; 0).
  const double expect = -s.dyn.B_L.at(0, 1)(0, 0) * lr.P(0, 1)(0, 1) / s.leader.R.at(0, 1)(0, 0);
  CHECK(g.KX.value(0, 1, 0, 1) == doctest::Approx(expect));

  ProblemSpec d = s;
  d.dyn.D_L = per_regime_1x1({0.1, 0.0});
  try {
    leader_feedback(d, build_augmented(d), lr);
    FAIL("expected RequiresL3");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kRequiresL3);
  }
  ProblemSpec r = s;
  r.leader.R = per_regime_1x1({1.0, 0.0});
  try {
    build_augmented(r);
    FAIL("expected SingularRL");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kSingularRL);
  }
}

TEST_CASE("failed L3 warns but still solves") {
  ProblemSpec s = generic_multiplicative_spec(50);  // Cbar, D_L, D_F nonzero
  const LeaderRiccati lr = solve_PL(s);
  CHECK_FALSE(lr.warnings.empty());
  CHECK(std::isfinite(lr.P(0, 0).sum()));
}
