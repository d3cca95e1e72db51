#include "rsg/strategies.hpp"

#include "rsg/errors.hpp"

namespace rsg {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kFollowers: return "followers";
    case Mode::kStackelberg: return "stackelberg";
    case Mode::kPricing: return "pricing";
  }
  return "?";
}

void StrategyProfile::controls(int k, int i, std::span<const double> s, std::span<const double> s_hat,
                               std::span<double> uF, std::span<double> uL) const {
  const int nF = dims.nF(), m0 = dims.m0, d = state_dim;
  const auto fx = F_Kx(k, i), fh = F_Kxhat(k, i), fo = F_offset(k, i);
  for (int r = 0; r < nF; ++r) {
    double u = fo(r, 0);
    for (int c = 0; c < d; ++c) u += fx(r, c) * s[c] + fh(r, c) * s_hat[c];
    uF[r] = u;
  }
  const auto lx = L_Kx(k, i), lh = L_Kxhat(k, i), lo = L_offset(k, i);
  for (int r = 0; r < m0; ++r) {
    double u = lo(r, 0);
    for (int c = 0; c < d; ++c) u += lx(r, c) * s[c] + lh(r, c) * s_hat[c];
    uL[r] = u;
  }
}

double StrategyProfile::aux(int k, int i, std::span<const double> s, std::span<const double> s_hat) const {
  if (state_dim < 2) return 0.0;
  const auto ax = aux_Kx(k, i), ah = aux_Kxhat(k, i);
  double out = aux_offset.value(k, i);
  for (int c = 0; c < state_dim; ++c) out += ax(0, c) * s[c] + ah(0, c) * s_hat[c];
  return out;
}

StrategyProfile empty_profile(const ProblemSpec& spec, Mode mode, int d) {
  StrategyProfile p;
  p.mode = mode;
  p.grid = spec.grid();
  p.regimes = spec.regimes();
  p.dims = spec.dims;
  p.state_dim = d;
  const int m = spec.regimes(), nF = spec.dims.nF(), m0 = spec.dims.m0;
  p.F_Kx = p.F_Kxhat = RegimeGrid(p.grid, m, nF, d);
  p.F_offset = RegimeGrid(p.grid, m, nF, 1);
  p.L_Kx = p.L_Kxhat = RegimeGrid(p.grid, m, m0, d);
  p.L_offset = RegimeGrid(p.grid, m, m0, 1);
  p.aux_Kx = p.aux_Kxhat = RegimeGrid(p.grid, m, 1, d);
  p.aux_offset = RegimeGrid(p.grid, m, 1, 1);
  return p;
}

StrategyProfile follower_feedback(const ProblemSpec& spec, const FollowerRiccati& fr, const FeedbackCoeffs& coeffs,
                                  const RegimeGrid& phi, const RegimeGrid& u_L) {
  const TimeGrid g = spec.grid();
  if (!(coeffs.grid() == g) || !(phi.grid() == g) || !(u_L.grid() == g) || !(fr.P.grid() == g))
    throw Error(Errc::kGridMismatch, "follower inputs do not share the problem grid");
  StrategyProfile p = empty_profile(spec, Mode::kFollowers, 1);
  for (int k = 0; k <= g.N; ++k)
    for (int i = 0; i < spec.regimes(); ++i) {
      const double t = g.t(k);
      const FeedbackAt& f = coeffs.at(k, i);
      const RowVectorXd BF = spec.B_F(t, i), DF = spec.D_F(t, i);
      const double DLu = (spec.dyn.D_L.at(t, i) * u_L(k, i))(0, 0);
      const VectorXd Phi =
          BF.transpose() * phi.value(k, i) + DF.transpose() * (fr.P.value(k, i) * (DLu + spec.dyn.sigma.at(t, i)));
      p.F_Kx(k, i) = f.Kx;
      p.F_Kxhat(k, i) = f.Kxhat;
      p.F_offset(k, i) = -f.RR.fullPivLu().solve(Phi);
      p.L_offset(k, i) = u_L(k, i);
    }
  return p;
}

PricingAdjoints solve_pricing_adjoints(const ProblemSpec& spec, const SolveOptions& opts,
                                       PricingLeaderTerminal leader_terminal) {
  const int m = spec.regimes();
  std::vector<MatrixXd> gp(m, MatrixXd(1, 1)), gy(m, MatrixXd(1, 1));
  for (int i = 0; i < m; ++i) {
    gp[i](0, 0) = spec.follower.Gbar[i];
    gy[i](0, 0) = leader_terminal == PricingLeaderTerminal::kNetOfFollower
                      ? spec.leader.Gbar[i] - spec.follower.Gbar[i]
                      : spec.leader.Gbar[i];
  }
  auto F = [&](double t, int i) { return MatrixXd::Constant(1, 1, spec.dyn.A.at(t, i)); };
  auto h = [](double, int) { return MatrixXd::Zero(1, 1); };
  PricingAdjoints out;
  auto p = solve_linear_regime_bsde(F, h, gp, spec.generator, spec.grid(), opts.scheme);
  auto y = solve_linear_regime_bsde(F, h, gy, spec.generator, spec.grid(), opts.scheme);
  out.p = std::move(p.v);
  out.k = std::move(p.jumps);
  out.y = std::move(y.v);
  out.zeta = std::move(y.jumps);
  return out;
}

StrategyProfile pricing_strategies(const ProblemSpec& spec, const RegimeGrid& p, const RegimeGrid& y) {
  const auto viol = pricing_structure_violations(spec);
  if (!viol.empty()) {
    std::string what = "pricing strategies need zero";
    for (const auto& v : viol) what += " " + v;
    throw Error(Errc::kStructuralMismatch, what);
  }
  const TimeGrid g = spec.grid();
  if (!(p.grid() == g) || !(y.grid() == g)) throw Error(Errc::kGridMismatch, "adjoint grids differ from the problem grid");
  StrategyProfile prof = empty_profile(spec, Mode::kPricing, 1);
  for (int k = 0; k <= g.N; ++k)
    for (int i = 0; i < spec.regimes(); ++i) {
      const double t = g.t(k);
      const MatrixXd RF = spec.R_F(t, i), RL = spec.leader.R.at(t, i);
      const RowVectorXd BF = spec.B_F(t, i), BL = spec.dyn.B_L.at(t, i);
      prof.F_offset(k, i) = -RF.fullPivLu().solve(BF.transpose() * p.value(k, i));
      prof.L_offset(k, i) = -RL.fullPivLu().solve(BL.transpose() * y.value(k, i));
    }
  return prof;
}

StrategyProfile stackelberg_strategies(const ProblemSpec& spec, const AugmentedSystem& aug, const LeaderRiccati& lr) {
  const LeaderGains lg = leader_feedback(spec, aug, lr);
  const TimeGrid g = spec.grid();
  StrategyProfile prof = empty_profile(spec, Mode::kStackelberg, 2);
  for (int k = 0; k <= g.N; ++k)
    for (int i = 0; i < spec.regimes(); ++i) {
      const double t = g.t(k);
      const AugmentedBlocks& a = aug.at(k, i);
      prof.L_Kx(k, i) = lg.KX(k, i);
      prof.L_Kxhat(k, i) = lg.KXhat(k, i);
      prof.L_offset(k, i) = lg.offset(k, i);
      // followers: -R_F^-1 B_F^T times the second row of (P, Pbar, tau)
      const MatrixXd W = -a.RF_inv * spec.B_F(t, i).transpose();  // nF x 1
      prof.F_Kx(k, i) = W * lr.P(k, i).row(1);
      prof.F_Kxhat(k, i) = W * lr.Pbar(k, i).row(1);
      prof.F_offset(k, i) = W * lr.tau(k, i).row(1);
      // psi forcing: B_F R_F^-1 B_F^T times the first row
      const double bf = a.B1(1, 0);
      prof.aux_Kx(k, i) = bf * lr.P(k, i).row(0);
      prof.aux_Kxhat(k, i) = bf * lr.Pbar(k, i).row(0);
      prof.aux_offset(k, i) = bf * lr.tau(k, i).row(0);
    }
  return prof;
}

}  // namespace rsg
