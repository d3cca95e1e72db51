#pragma once

#include <span>

#include "rsg/follower.hpp"
#include "rsg/leader.hpp"
#include "rsg/model.hpp"
#include "rsg/regime_ode.hpp"

namespace rsg {

enum class Mode { kFollowers, kStackelberg, kPricing };

const char* mode_name(Mode mode);

/// Affine feedback strategies on the problem grid, evaluated at the left
/// endpoint of each step. The simulated state s has dimension 1 (x) or 2
/// (x, psi) in Stackelberg mode, where psi is the leader's multiplier state.
struct StrategyProfile {
  Mode mode = Mode::kFollowers;
  TimeGrid grid;
  int regimes = 0;
  Dims dims;
  int state_dim = 1;

  // u_F = F_Kx s + F_Kxhat s_hat + F_offset: (nF x d, nF x d, nF x 1)
  RegimeGrid F_Kx, F_Kxhat, F_offset;
  // u_L = L_Kx s + L_Kxhat s_hat + L_offset: (m0 x d, m0 x d, m0 x 1)
  RegimeGrid L_Kx, L_Kxhat, L_offset;
  // Stackelberg only: forcing of the psi drift, (1 x 2, 1 x 2, 1 x 1)
  RegimeGrid aux_Kx, aux_Kxhat, aux_offset;

  /// Controls at node k, regime i. Writes nF follower and m0 leader entries.
  void controls(int k, int i, std::span<const double> s, std::span<const double> s_hat, std::span<double> uF,
                std::span<double> uL) const;
  double aux(int k, int i, std::span<const double> s, std::span<const double> s_hat) const;
};

/// Zero gains of the right shapes.
StrategyProfile empty_profile(const ProblemSpec& spec, Mode mode, int state_dim);

/// u_F = -RR^-1 [BB x + BBbar x_hat + Phi_F], Phi_F = B_F^T phi + D_F^T P_F (D_L u_L + sigma);
/// the leader plays the given regime-deterministic u_L.
StrategyProfile follower_feedback(const ProblemSpec& spec, const FollowerRiccati& fr, const FeedbackCoeffs& coeffs,
                                  const RegimeGrid& phi, const RegimeGrid& u_L);

/// Pricing adjoints: p' + A p + sum_j lambda_ij [p(j) - p(i)] = 0 with p(T) = Gbar_F,
/// and y the same equation with terminal y(T) = Gbar_L - Gbar_F (kNetOfFollower)
/// or Gbar_L (kLeaderOnly, the terminal of the leader's own LQ adjoint).
enum class PricingLeaderTerminal { kNetOfFollower, kLeaderOnly };

struct PricingAdjoints {
  RegimeGrid p, y;
  JumpIntegrand k, zeta;
};

PricingAdjoints solve_pricing_adjoints(const ProblemSpec& spec, const SolveOptions& opts = {},
                                       PricingLeaderTerminal leader_terminal = PricingLeaderTerminal::kNetOfFollower);

/// u_F = -R_F^-1 B_F^T p(t, alpha), u_L = -R_L^-1 B_L^T y(t, alpha).
/// Throws Error{kStructuralMismatch} listing nonzero excluded coefficients.
StrategyProfile pricing_strategies(const ProblemSpec& spec, const RegimeGrid& p, const RegimeGrid& y);

/// Leader feedback from the augmented Riccati system; followers play
/// u_F = -R_F^-1 B_F^T p with p the second component of Y = P X + Pbar X_hat + tau.
StrategyProfile stackelberg_strategies(const ProblemSpec& spec, const AugmentedSystem& aug, const LeaderRiccati& lr);

}  // namespace rsg
