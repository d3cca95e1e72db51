#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsg/follower.hpp"
#include "rsg/model.hpp"
#include "rsg/regime_ode.hpp"

namespace rsg {

/// Blocks of the augmented leader system at one (t, i). The state is
/// X = (x, psi) and the adjoint Y = (y, p).
struct AugmentedBlocks {
  Eigen::Matrix2d A, Abar, C, Cbar;  // diag(H, H)
  Eigen::MatrixXd B, D;              // 2 x m0: (B_L; 0), (D_L; 0)
  Eigen::Matrix2d B1, B2, D1, D2;
  Eigen::Vector2d E{1.0, 0.0};
  Eigen::Matrix2d Q, Qbar;  // [[K_L, -K_F], [K_F, 0]]
  Eigen::MatrixXd RL_inv;   // m0 x m0
  Eigen::MatrixXd RF_inv;   // nF x nF
};

/// [[leader, -follower], [follower, 0]].
Eigen::Matrix2d leader_follower_block(double leader, double follower);

/// Throws Error{kSingularRL | kSingularRF} when R_L or R_F fails the margin.
AugmentedBlocks augmented_at(const ProblemSpec& spec, double t, int i, const Tolerances& tol = {});

struct AugmentedSystem {
  TimeGrid grid;
  int regimes = 0;
  std::vector<AugmentedBlocks> nodes;  // (k, i) -> nodes[k * regimes + i]
  std::vector<Eigen::Matrix2d> G, Gbar;
  const AugmentedBlocks& at(int k, int i) const { return nodes[k * regimes + i]; }
};

AugmentedSystem build_augmented(const ProblemSpec& spec, const Tolerances& tol = {});

struct LeaderRiccati {
  RegimeGrid P;     // 2 x 2
  RegimeGrid Pbar;  // 2 x 2, empty until solve_PLbar
  RegimeGrid tau;   // 2 x 1, empty until solve_tau
  JumpIntegrand tau_M;
  std::vector<std::string> warnings;
};

/// Backward solve of
///   P' + P A + A P + P B1 P + C P C + Q + sum_j lambda_ij [P(j) - P(i)] = 0,  P(T) = G.
/// Not symmetrized. Warns (does not refuse) when L3 fails.
LeaderRiccati solve_PL(const ProblemSpec& spec, const SolveOptions& opts = {});

/// Same equation in the stacked 2m x 2m form
///   PP' + PP AA + AA PP + PP BB1 PP + CC PP CC + QQ + sum_k (N_k x I) PP (N_k x I)^T = 0,
/// AA = diag(A(i) + lambda_ii/2 I), N_k[i, (i+k) mod m] = sqrt(lambda_{i,(i+k) mod m}).
RegimeGrid solve_PL_blockform(const ProblemSpec& spec, const SolveOptions& opts = {});

/// The N_k matrices, k = 1..m-1.
std::vector<Eigen::MatrixXd> coupling_matrices(const Generator& gen);

/// Adds Pbar (terminal Gbar):
///   Pbar' + Pbar B1 Pbar + [2(A + Abar) + P B1] Pbar + Pbar [B1 + B2 C] P + 2 Abar P + Qbar
///   + sum_j lambda_ij [Pbar(j) - Pbar(i)] = 0.
/// P is re-integrated jointly; the result carries both.
LeaderRiccati solve_PLbar(const ProblemSpec& spec, const LeaderRiccati& pl, const SolveOptions& opts = {});

/// Adds tau (terminal 0), with tau_W = 0 and tau_hat = tau:
///   tau' + (A + P B1) tau + (Abar + Pbar B1) tau + (C + P B2) P E sigma + Pbar B2 P E sigma
///   + (P + Pbar) E b + sum_j lambda_ij [tau(j) - tau(i)] = 0.
LeaderRiccati solve_tau(const ProblemSpec& spec, const LeaderRiccati& pl, const SolveOptions& opts = {});

inline LeaderRiccati solve_leader_riccati(const ProblemSpec& spec, const SolveOptions& opts = {}) {
  return solve_tau(spec, solve_PL(spec, opts), opts);
}

/// u_L = KX X + KXhat X_hat + offset with KX = -R_L^-1 B^T P, KXhat = -R_L^-1 B^T Pbar,
/// offset = -R_L^-1 B^T tau. Throws Error{kRequiresL3} when D_L != 0.
struct LeaderGains {
  RegimeGrid KX, KXhat;  // m0 x 2
  RegimeGrid offset;     // m0 x 1
};

LeaderGains leader_feedback(const ProblemSpec& spec, const AugmentedSystem& aug, const LeaderRiccati& lr);

}  // namespace rsg
