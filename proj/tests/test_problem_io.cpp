#include <doctest.h>

#include "rsg/errors.hpp"
#include "rsg/problem_io.hpp"
#include "test_support.hpp"

using namespace rsg;

namespace {

Errc parse_error(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown for: " << text);
  return Errc::kInvalidArgument;
}

}  // namespace

TEST_CASE("bundled pricing data") {
  const ProblemSpec s = testing::load_data("pricing.json");
  CHECK(s.regimes() == 2);
  CHECK(s.N == 1000);
  CHECK(s.initial_regime == 0);
  CHECK(s.terminal_form == TerminalForm::kLinear);
  CHECK(s.generator.rate(1, 0) == 0.5);
  CHECK(s.dyn.sigma.at(0.3, 0) == 2.0);
  CHECK(s.follower.R2.at(0.0, 1)(0, 0) == -1.0);
  CHECK(s.leader.Gbar[1] == 0.6);
  CHECK(s.dyn.C.at(0.5, 1) == 0.0);  // omitted keys are zero
}

TEST_CASE("matrix value forms") {
  const std::string head = R"({"generator": [[0]], "dims": {"m0": 1, "m1": 2, "m2": 1}, )";
  SUBCASE("number on a square block is a multiple of the identity") {
    const ProblemSpec s = parse_problem(head + R"("follower_cost": [{"R1": 3, "R2": -1}]})");
    CHECK(s.follower.R1.at(0, 0).isApprox(3.0 * Eigen::Matrix2d::Identity()));
  }
  SUBCASE("flat row-major array") {
    const ProblemSpec s = parse_problem(head + R"("follower_cost": [{"R1": [1, 0.5, 0.5, 2]}]})");
    CHECK(s.follower.R1.at(0, 0)(0, 1) == 0.5);
    CHECK(s.follower.R1.at(0, 0)(1, 1) == 2.0);
  }
  SUBCASE("nested rows") {
    const ProblemSpec s = parse_problem(head + R"("follower_cost": [{"R1": [[1, 0.5], [0.5, 2]]}]})");
    CHECK(s.follower.R1.at(0, 0)(1, 0) == 0.5);
  }
  SUBCASE("row vector") {
    const ProblemSpec s = parse_problem(head + R"("dynamics": [{"B_F1": [0.1, 0.2]}]})");
    CHECK(s.dyn.B_F1.at(0, 0)(0, 1) == 0.2);
  }
  SUBCASE("time samples") {
    const ProblemSpec s =
        parse_problem(R"({"generator": [[0]], "horizon": 2, "dynamics": [{"A": [0, 1, 4], "B_L": [[1], [3]]}]})");
    CHECK(s.dyn.A.at(0.5, 0) == doctest::Approx(0.5));
    CHECK(s.dyn.A.at(1.5, 0) == doctest::Approx(2.5));
    CHECK(s.dyn.B_L.at(1.0, 0)(0, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("leader control and initial regime") {
  const ProblemSpec s = parse_problem(
      R"({"generator": [[-1, 1], [1, -1]], "initial_regime": 2, "leader_control": [0.5, -0.25]})");
  CHECK(s.initial_regime == 1);
  CHECK(s.leader_control.at(0.1, 1)(0, 0) == -0.25);
}

TEST_CASE("input errors") {
  CHECK(parse_error("{") == Errc::kParseError);
  CHECK(parse_error("[]") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "bogus": 1})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "dynamics": [{"AA": 1}]})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "dynamics": [{}, {}]})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "steps": 0})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "horizon": -1})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "terminal_cost": "cubic"})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[-1, 1], [1, -1]], "initial_regime": 3})") == Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[0]], "dims": {"m1": 2}, "dynamics": [{"B_F1": [1, 2, 3]}]})") ==
        Errc::kParseError);
  CHECK(parse_error(R"({"generator": [[-1, 1], [1, -0.5]]})") == Errc::kRowSumNonzero);
  CHECK(parse_error(R"({"generator": [[1, -1], [1, -1]]})") == Errc::kNegativeOffDiagonal);
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), Error);
}
