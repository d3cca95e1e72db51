#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rsg/model.hpp"
#include "rsg/regime_ode.hpp"

namespace rsg {

struct SolveOptions {
  Scheme scheme = Scheme::kRk4;
  Tolerances tol;
};

/// Followers' Riccati pair. Pbar is empty until solve_PFbar.
struct FollowerRiccati {
  RegimeGrid P;
  RegimeGrid Pbar;
  /// Minimum over all evaluations of the relative smallest singular value of R_F + D_F^T P D_F.
  double invert_margin = 0.0;
};

/// Backward solve of
///   P' + (2A + C^2) P + Q_F - BB^T RR^-1 BB + sum_j lambda_ij [P(j) - P(i)] = 0, P(T) = G_F,
/// with RR = R_F + D_F^T P D_F and BB = B_F^T P + D_F^T P C.
/// Throws Error{kRiccatiSingular} with (t, i) when RR loses invertibility.
FollowerRiccati solve_PF(const ProblemSpec& spec, const SolveOptions& opts = {});

/// Adds the conditional-mean part Pbar (terminal Gbar_F). P_F is re-integrated
/// jointly with Pbar so mid-step values stay fourth-order accurate; the result
/// carries the joint P, which equals `pf.P` to rounding.
FollowerRiccati solve_PFbar(const ProblemSpec& spec, const FollowerRiccati& pf, const SolveOptions& opts = {});

inline FollowerRiccati solve_follower_riccati(const ProblemSpec& spec, const SolveOptions& opts = {}) {
  return solve_PFbar(spec, solve_PF(spec, opts), opts);
}

/// Feedback coefficient maps at one (t, i).
struct FeedbackAt {
  Eigen::MatrixXd RR;         // R_F + D_F^T P D_F
  Eigen::VectorXd BB, BBbar;  // B_F^T P + D_F^T P C,  B_F^T Pbar + D_F^T P Cbar
  double Phi_A = 0, Phi_Abar = 0;        // A - BB^T RR^-1 B_F^T,  Abar - BBbar^T RR^-1 B_F^T
  Eigen::RowVectorXd Psi_C, Psi_Cbar;    // 1 x m0 maps acting on u_L
  double Gamma_C = 0, Gamma_Cbar = 0;    // maps acting on sigma
  Eigen::MatrixXd Kx, Kxhat;  // -RR^-1 BB, -RR^-1 BBbar (nF x 1)
  double margin = 0;
};

FeedbackAt feedback_at(const ProblemSpec& spec, double t, int i, double P, double Pbar, const Tolerances& tol);

class FeedbackCoeffs {
 public:
  FeedbackCoeffs() = default;
  FeedbackCoeffs(TimeGrid grid, int m) : grid_(grid), m_(m), nodes_((grid.N + 1) * m) {}
  const FeedbackAt& at(int k, int i) const { return nodes_[k * m_ + i]; }
  FeedbackAt& at(int k, int i) { return nodes_[k * m_ + i]; }
  const TimeGrid& grid() const { return grid_; }
  int regimes() const { return m_; }

 private:
  TimeGrid grid_;
  int m_ = 0;
  std::vector<FeedbackAt> nodes_;
};

FeedbackCoeffs feedback_coeffs(const ProblemSpec& spec, const FollowerRiccati& fr, const Tolerances& tol = {});

struct PhiSolution {
  RegimeGrid phi;
  JumpIntegrand phi_M;
};

/// Offset equation with regime-deterministic leader control u_L (m0 x 1 per
/// node), phi_W = 0, phi_hat = phi, sigma_hat = sigma, b_hat = b, phi(T) = 0.
/// (P, Pbar) are integrated alongside phi.
PhiSolution solve_phi(const ProblemSpec& spec, const FollowerRiccati& fr, const RegimeGrid& u_L,
                      const SolveOptions& opts = {});

/// Leader control grid (m0 x 1 per node) sampled from spec.leader_control.
RegimeGrid exogenous_leader_control(const ProblemSpec& spec);

struct Envelope {
  RegimeGrid upper, lower;
  double varrho_bar = 0.0;
  Constants constants;
};

/// Closed-form bounding solutions P^+(t) = g0 e^{a(T-t)} + (q0 + c3 rho_bar^2/rho)(e^{a(T-t)} - 1)/a
/// with a = c1 m (limit form when a = 0), and P^- = -P^+.
Envelope envelope(const ProblemSpec& spec);

struct EnvelopeCheck {
  bool ok = false;
  /// min over the grid of min(P - P^-, P^+ - P, rho_bar - P^+); negative when violated.
  double worst_margin = 0.0;
  int k = 0, regime = 0;
};

EnvelopeCheck check_envelope(const RegimeGrid& P, const Envelope& env);

}  // namespace rsg
