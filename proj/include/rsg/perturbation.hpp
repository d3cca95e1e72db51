#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsg/follower.hpp"
#include "rsg/simulate.hpp"
#include "rsg/strategies.hpp"

namespace rsg {

/// Regime-deterministic perturbation direction, constant in time: every
/// component of the perturbed control moves by eps * value[alpha].
struct Direction {
  std::string name;
  std::vector<double> value;  // per regime
};

/// +1, -1 and the indicator of each regime.
std::vector<Direction> default_directions(int regimes);

struct PerturbationOptions {
  std::uint64_t n_paths = 20000;
  std::uint64_t seed = 0;
  std::vector<double> eps{0.05, 0.1, 0.2};
  std::vector<Direction> directions;  // empty: default_directions
  double band = 3.0;                  // acceptance band in standard errors
  int threads = 0;
};

/// Paired difference J(perturbed) - J(baseline) on common random numbers.
struct PerturbationCase {
  std::string player;  // "F1", "F2" or "L"
  std::string direction;
  double eps = 0;
  MCEstimate diff;
  bool pass = false;
};

/// Curvature of the paired difference along one direction: E[J(eps) - J(0)] / eps^2
/// over the eps grid.
struct ScalingCheck {
  std::string player, direction;
  std::vector<double> ratio;  // per eps
  double max_rel_dev = 0;
  bool pass = false;
};

struct PerturbationReport {
  MCEstimate baseline_JF, baseline_JL;
  std::vector<PerturbationCase> cases;
  /// Quadratic coefficient sign per player and direction (saddle test only).
  std::vector<PerturbationCase> curvature;
  std::vector<ScalingCheck> scaling;
  bool pass() const;
};

/// Open-loop perturbations u*_{F,1} + eps v (J_F must not decrease) and
/// u*_{F,2} + eps v (J_F must not increase), the other controls held fixed
/// as processes. The state perturbation is linear in eps, so each path
/// yields J(eps) - J(0) = eps * L + eps^2 * K exactly; eps = 0 gives 0.
PerturbationReport saddle_test(const ProblemSpec& spec, const StrategyProfile& profile,
                               const PerturbationOptions& opts);

/// Leader perturbation u*_L + eps v with the followers' response
/// delta u_F = Kx delta x + Kxhat delta x_hat - RR^-1 [B_F^T phi_v + D_F^T P_F D_L v],
/// phi_v from the offset equation with b = sigma = 0 and u_L = v. Pass
/// `follower = nullptr` when the response does not depend on u_L (pricing).
/// Also checks that the difference scales as eps^2 within 25%.
PerturbationReport leader_test(const ProblemSpec& spec, const StrategyProfile& profile,
                               const FollowerRiccati* follower, const PerturbationOptions& opts,
                               const SolveOptions& solve = {});

struct HamiltonianOptions {
  std::uint64_t n_paths = 2000;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Residuals of the adjoint p = P x + Pbar x_hat + phi along simulated paths.
/// p is propagated by the Euler form of its BSDE,
///   dp = -[A p + Abar p_hat + C q + Cbar q_hat + Q x + Qbar x_hat] dt + q dW + k . dM,
/// with q = P (C x + Cbar x_hat + D_L u_L + D_F u_F + sigma), and compared at T
/// with G x + Gbar x_hat (Gbar alone for a linear terminal cost).
struct ResidualStats {
  int N = 0;
  MCEstimate terminal;      // |p_N - terminal target| per path
  double terminal_max = 0;
  double step_mean = 0;     // mean |one-step residual| over steps and paths
};

ResidualStats hamiltonian_residual(const ProblemSpec& spec, const StrategyProfile& profile, const RegimeGrid& P,
                                   const RegimeGrid& Pbar, const RegimeGrid& phi, const HamiltonianOptions& opts);

}  // namespace rsg
