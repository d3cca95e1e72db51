#pragma once

#include <cstdint>
#include <vector>

#include "rsg/model.hpp"
#include "rsg/regime.hpp"
#include "rsg/strategies.hpp"

namespace rsg {

enum class Quadrature { kLeftRiemann, kTrapezoid };

struct SimulationOptions {
  std::uint64_t n_paths = 1000;
  std::uint64_t seed = 0;
  Quadrature quadrature = Quadrature::kLeftRiemann;
  /// Number of leading paths whose full trajectories are kept.
  std::uint64_t record = 0;
  /// When set, every path uses this chain path; Brownian streams stay per path.
  const ChainPath* fixed_chain = nullptr;
  /// Node indices at which x is stored for every path.
  std::vector<int> checkpoints;
  /// OpenMP thread count; 0 keeps the runtime default.
  int threads = 0;
};

/// One simulated trajectory on the problem grid. Vector quantities are
/// node-major: u_F[k * nF + r].
struct SimulationPath {
  std::vector<double> t;
  std::vector<int> regime;    // left-limit regime per node, 0-based
  std::vector<double> dW;     // N increments
  std::vector<double> x, x_hat;
  std::vector<double> psi, psi_hat;  // Stackelberg mode only
  std::vector<double> u_L, u_F;
  double JF_running = 0, JF_terminal = 0;
  double JL_running = 0, JL_terminal = 0;
  ChainPath chain;

  double JF() const { return JF_running + JF_terminal; }
  double JL() const { return JL_running + JL_terminal; }
};

/// Sample mean with standard error = sample std / sqrt(n).
struct MCEstimate {
  double mean = 0, se = 0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

/// Sequential (fixed-order) mean and standard error of `values`.
MCEstimate estimate(const std::vector<double>& values, std::uint64_t seed = 0);

struct SimulationResult {
  MCEstimate JF, JL;
  std::vector<double> JF_path, JL_path;  // per-path costs, path order
  std::vector<SimulationPath> recorded;
  std::vector<int> checkpoints;
  /// x at the checkpoints, path-major: x_at[p * checkpoints.size() + c].
  std::vector<double> x_at;
};

/// Euler-Maruyama with the conditional-mean filter, in parallel over paths.
/// Coefficients are tabulated once per (node, regime); per-path results go to
/// arrays that are reduced in path order, so output does not depend on the
/// thread count. Throws Error{kGridMismatch}.
SimulationResult simulate_paths(const ProblemSpec& spec, const StrategyProfile& profile,
                                const SimulationOptions& opts);

/// Serial implementation that evaluates coefficients from the ProblemSpec at every
/// step with Eigen. Kept as a test oracle for simulate_paths.
SimulationResult simulate_reference(const ProblemSpec& spec, const StrategyProfile& profile,
                                    const SimulationOptions& opts);

}  // namespace rsg
