#include <cmath>
#include <functional>

#include <doctest.h>

#include "rsg/errors.hpp"
#include "rsg/regime.hpp"
#include "rsg/simulate.hpp"

using namespace rsg;

namespace {

Generator two_state(double a, double b) {
  Eigen::MatrixXd q(2, 2);
  q << -a, a, b, -b;
  return Generator::validate(q);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::kInvalidArgument;
}

}  // namespace

TEST_CASE("generator validation") {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, -0.5, 0.5;
  CHECK(code_of([&] { Generator::validate(q); }) == Errc::kNegativeOffDiagonal);
  q << -1, 1, 0.5, -0.4;
  CHECK(code_of([&] { Generator::validate(q); }) == Errc::kRowSumNonzero);
  CHECK(code_of([&] { Generator::validate(Eigen::MatrixXd(2, 3)); }) == Errc::kInvalidArgument);
  const Generator g = two_state(1.0, 0.5);
  CHECK(g.size() == 2);
  CHECK(g.exit_rate(1) == 0.5);
}

TEST_CASE("path engines are reproducible and stream-separated") {
  auto a = path_engine(3, 17, Stream::kChain), b = path_engine(3, 17, Stream::kChain);
  auto c = path_engine(3, 17, Stream::kBrownian), d = path_engine(3, 18, Stream::kChain);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());
}

TEST_CASE("sampled chains are well formed") {
  const Generator g = two_state(2.0, 3.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const ChainPath p = sample_chain(g, 1, 2.0, s);
    REQUIRE(p.states.size() == p.jump_times.size() + 1);
    CHECK(p.initial() == 1);
    for (std::size_t j = 0; j < p.jump_times.size(); ++j) {
      CHECK(p.jump_times[j] > 0.0);
      CHECK(p.jump_times[j] <= 2.0);
      if (j) CHECK(p.jump_times[j] > p.jump_times[j - 1]);
      CHECK(p.states[j] != p.states[j + 1]);
    }
  }
}

TEST_CASE("an absorbing chain never jumps") {
  Eigen::MatrixXd q(2, 2);
  q << 0, 0, 1, -1;
  const ChainPath p = sample_chain(Generator::validate(q), 0, 5.0, std::uint64_t{4});
  CHECK(p.jump_times.empty());
}

TEST_CASE("grid projection uses the left limit") {
  ChainPath p;
  p.horizon = 1.0;
  p.jump_times = {0.25, 0.6};
  p.states = {0, 1, 0};
  const auto r = project_to_grid(p, 4, 1.0);  // nodes 0, .25, .5, .75, 1
  CHECK(r == std::vector<int>{0, 0, 1, 0, 0});
  CHECK(p.left_limit(0.25) == 0);
  CHECK(p.left_limit(0.2500001) == 1);
}

TEST_CASE("martingale ledger counts jumps and occupation") {
  const Generator g = two_state(1.0, 2.0);
  ChainPath p;
  p.horizon = 1.0;
  p.jump_times = {0.3, 0.5, 0.9};
  p.states = {0, 1, 0, 1};
  const MartingaleLedger led = martingale_ledger(p, g, 1.0);
  CHECK(led.counts(0, 1) == 2);
  CHECK(led.counts(1, 0) == 1);
  CHECK(led.occupation[0] == doctest::Approx(0.7));
  CHECK(led.occupation[1] == doctest::Approx(0.3));
  CHECK(led.compensators(1, 0) == doctest::Approx(0.6));
  CHECK(led.residuals()(0, 1) == doctest::Approx(2 - 0.7));
}

TEST_CASE("mean occupation matches the two-state closed form") {
  // P(alpha_t = 0 | alpha_0 = 0) = pi0 + (1 - pi0) e^{-(a+b)t}, pi0 = b / (a + b).
  const double a = 1.5, b = 0.5, T = 2.0;
  const Generator g = two_state(a, b);
  const double pi0 = b / (a + b);
  const double expected = pi0 * T + (1 - pi0) * (1 - std::exp(-(a + b) * T)) / (a + b);
  std::vector<double> occ;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    auto rng = path_engine(9, s, Stream::kChain);
    occ.push_back(martingale_ledger(sample_chain(g, 0, T, rng), g, T).occupation[0]);
  }
  const MCEstimate e = estimate(occ);
  CHECK(std::abs(e.mean - expected) <= 4 * e.se);
}
