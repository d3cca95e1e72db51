#include "rsg/solve.hpp"

#include "rsg/errors.hpp"

namespace rsg {

Mode parse_mode(const std::string& name) {
  if (name == "followers") return Mode::kFollowers;
  if (name == "stackelberg") return Mode::kStackelberg;
  if (name == "pricing") return Mode::kPricing;
  throw Error(Errc::kInvalidArgument, "unknown mode '" + name + "'");
}

ModeSolution solve_mode(const ProblemSpec& spec, Mode mode, const SolveOptions& opts) {
  ModeSolution sol;
  sol.mode = mode;
  sol.follower = solve_follower_riccati(spec, opts);
  switch (mode) {
    case Mode::kFollowers: {
      sol.u_L = exogenous_leader_control(spec);
      sol.phi = solve_phi(spec, sol.follower, sol.u_L, opts).phi;
      sol.profile = follower_feedback(spec, sol.follower, feedback_coeffs(spec, sol.follower, opts.tol), sol.phi,
                                      sol.u_L);
      break;
    }
    case Mode::kStackelberg: {
      sol.leader = solve_leader_riccati(spec, opts);
      sol.profile = stackelberg_strategies(spec, build_augmented(spec, opts.tol), sol.leader);
      break;
    }
    case Mode::kPricing: {
      sol.pricing = solve_pricing_adjoints(spec, opts);
      sol.profile = pricing_strategies(spec, sol.pricing.p, sol.pricing.y);
      break;
    }
  }
  return sol;
}

}  // namespace rsg
