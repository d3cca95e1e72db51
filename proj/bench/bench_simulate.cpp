// Parallel flat-table kernel against the serial Eigen reference on the
// bundled pricing problem.

#include <string>

#include <benchmark/benchmark.h>

#include "rsg/problem_io.hpp"
#include "rsg/simulate.hpp"
#include "rsg/solve.hpp"

namespace {

struct Fixture {
  rsg::ProblemSpec spec;
  rsg::ModeSolution sol;
};

const Fixture& pricing() {
  static const Fixture f = [] {
    Fixture x{rsg::load_problem(std::string(RSG_DATA_DIR) + "/pricing.json"), {}};
    x.sol = rsg::solve_mode(x.spec, rsg::Mode::kPricing);
    return x;
  }();
  return f;
}

template <class Kernel>
void run(benchmark::State& state, Kernel kernel) {
  const Fixture& f = pricing();
  rsg::SimulationOptions o;
  o.n_paths = static_cast<std::uint64_t>(state.range(0));
  o.seed = 1;
  o.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kernel(f.spec, f.sol.profile, o).JF.mean);
  state.SetItemsProcessed(state.iterations() * state.range(0) * f.spec.N);
  state.counters["threads"] = static_cast<double>(state.range(1));
}

void BM_simulate_paths(benchmark::State& state) { run(state, rsg::simulate_paths); }
void BM_simulate_reference(benchmark::State& state) { run(state, rsg::simulate_reference); }

}  // namespace

BENCHMARK(BM_simulate_paths)->ArgsProduct({{1000, 10000}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_simulate_reference)->ArgsProduct({{1000, 10000}, {1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
