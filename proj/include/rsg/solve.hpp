#pragma once

#include "rsg/follower.hpp"
#include "rsg/leader.hpp"
#include "rsg/model.hpp"
#include "rsg/strategies.hpp"

namespace rsg {

/// Everything the chosen mode needs, solved on the problem grid.
struct ModeSolution {
  Mode mode = Mode::kFollowers;
  FollowerRiccati follower;  // all modes
  RegimeGrid u_L;            // followers: exogenous leader control
  RegimeGrid phi;            // followers
  LeaderRiccati leader;      // stackelberg
  PricingAdjoints pricing;   // pricing
  StrategyProfile profile;
};

/// followers: P_F, Pbar_F, phi and the follower feedback against the
/// exogenous leader control; stackelberg: additionally P_L, Pbar_L, tau and the
/// leader feedback; pricing: P_F, Pbar_F and the adjoints p, y.
ModeSolution solve_mode(const ProblemSpec& spec, Mode mode, const SolveOptions& opts = {});

/// Parses "followers" | "stackelberg" | "pricing". Throws Error{kInvalidArgument}.
Mode parse_mode(const std::string& name);

}  // namespace rsg
