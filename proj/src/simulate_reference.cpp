#include <algorithm>
#include <cmath>

#include "rsg/errors.hpp"
#include "rsg/simulate.hpp"
#include "sim_kernel.hpp"

namespace rsg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct RefCosts {
  double fF = 0, fL = 0;
};

RefCosts integrand(const ProblemSpec& spec, double t, int i, double x, double xh, const VectorXd& uF,
                   const VectorXd& uL) {
  RefCosts c;
  c.fF = 0.5 * (spec.follower.Q.at(t, i) * x * x + spec.follower.Qbar.at(t, i) * xh * xh +
                uF.dot(spec.R_F(t, i) * uF));
  c.fL = 0.5 * (spec.leader.Q.at(t, i) * x * x + spec.leader.Qbar.at(t, i) * xh * xh +
                uL.dot(spec.leader.R.at(t, i) * uL));
  return c;
}

}  // namespace

SimulationResult simulate_reference(const ProblemSpec& spec, const StrategyProfile& prof,
                                    const SimulationOptions& opts) {
  if (!(prof.grid == spec.grid()) || prof.regimes != spec.regimes())
    throw Error(Errc::kGridMismatch, "strategy profile does not match the problem grid");
  const int N = spec.N, d = prof.state_dim, nF = spec.dims.nF(), m0 = spec.dims.m0;
  const TimeGrid g = spec.grid();
  const double dt = g.dt();
  const std::size_t nc = opts.checkpoints.size();
  for (int c : opts.checkpoints)
    if (c < 0 || c > N) throw Error(Errc::kInvalidArgument, "checkpoint index outside 0..N");

  SimulationResult res;
  res.checkpoints = opts.checkpoints;
  res.JF_path.resize(opts.n_paths);
  res.JL_path.resize(opts.n_paths);
  res.x_at.resize(opts.n_paths * nc);
  res.recorded.resize(std::min<std::uint64_t>(opts.record, opts.n_paths));

  detail::PathBuffers noise;
  for (std::uint64_t p = 0; p < opts.n_paths; ++p) {
    detail::draw_noise(spec, opts.seed, p, opts.fixed_chain, noise);
    std::vector<VectorXd> s(N + 1, VectorXd::Zero(d)), sh(N + 1, VectorXd::Zero(d));
    std::vector<VectorXd> uF(N + 1, VectorXd(nF)), uL(N + 1, VectorXd(m0));
    s[0](0) = sh[0](0) = spec.x0;
    for (int k = 0; k <= N; ++k) {
      const int i = noise.regime[k];
      const double t = g.t(k);
      VectorXd uFh(nF), uLh(m0);
      prof.controls(k, i, {s[k].data(), std::size_t(d)}, {sh[k].data(), std::size_t(d)}, {uF[k].data(), std::size_t(nF)},
                    {uL[k].data(), std::size_t(m0)});
      prof.controls(k, i, {sh[k].data(), std::size_t(d)}, {sh[k].data(), std::size_t(d)}, {uFh.data(), std::size_t(nF)},
                    {uLh.data(), std::size_t(m0)});
      if (k == N) break;
      const double A = spec.dyn.A.at(t, i), Abar = spec.dyn.Abar.at(t, i);
      const double C = spec.dyn.C.at(t, i), Cbar = spec.dyn.Cbar.at(t, i);
      const double b = spec.dyn.b.at(t, i), sigma = spec.dyn.sigma.at(t, i);
      const MatrixXd BL = spec.dyn.B_L.at(t, i), DL = spec.dyn.D_L.at(t, i);
      const Eigen::RowVectorXd BF = spec.B_F(t, i), DF = spec.D_F(t, i);
      const double x = s[k](0), xh = sh[k](0), w = noise.dW[k];
      const double drift = A * x + Abar * xh + (BL * uL[k])(0) + BF.dot(uF[k]) + b;
      const double diff = C * x + Cbar * xh + (DL * uL[k])(0) + DF.dot(uF[k]) + sigma;
      s[k + 1](0) = x + drift * dt + diff * w;
      sh[k + 1](0) = xh + ((A + Abar) * xh + (BL * uLh)(0) + BF.dot(uFh) + b) * dt;
      if (d == 2) {
        const std::span<const double> sk(s[k].data(), 2), shk(sh[k].data(), 2);
        const double a = prof.aux(k, i, sk, shk), ah = prof.aux(k, i, shk, shk);
        s[k + 1](1) = s[k](1) + (A * s[k](1) + Abar * sh[k](1) + a) * dt + (C * s[k](1) + Cbar * sh[k](1)) * w;
        sh[k + 1](1) = sh[k](1) + ((A + Abar) * sh[k](1) + ah) * dt;
      }
    }

    double JF = 0, JL = 0;
    for (int k = 0; k < N; ++k) {
      const RefCosts c0 = integrand(spec, g.t(k), noise.regime[k], s[k](0), sh[k](0), uF[k], uL[k]);
      if (opts.quadrature == Quadrature::kLeftRiemann) {
        JF += c0.fF * dt;
        JL += c0.fL * dt;
      } else {
        const RefCosts c1 =
            integrand(spec, g.t(k + 1), noise.regime[k + 1], s[k + 1](0), sh[k + 1](0), uF[k + 1], uL[k + 1]);
        JF += 0.5 * (c0.fF + c1.fF) * dt;
        JL += 0.5 * (c0.fL + c1.fL) * dt;
      }
    }
    const int iN = noise.regime[N];
    const double xT = s[N](0), xhT = sh[N](0);
    double JF_term, JL_term;
    if (spec.terminal_form == TerminalForm::kQuadratic) {
      JF_term = 0.5 * (spec.follower.G[iN] * xT * xT + spec.follower.Gbar[iN] * xhT * xhT);
      JL_term = 0.5 * (spec.leader.G[iN] * xT * xT + spec.leader.Gbar[iN] * xhT * xhT);
    } else {
      JF_term = spec.follower.Gbar[iN] * xhT;
      JL_term = spec.leader.Gbar[iN] * xhT;
    }
    res.JF_path[p] = JF + JF_term;
    res.JL_path[p] = JL + JL_term;
    if (p < res.recorded.size()) {
      SimulationPath& r = res.recorded[p];
      r.regime = noise.regime;
      r.dW = noise.dW;
      r.chain = noise.chain;
      for (int k = 0; k <= N; ++k) {
        r.t.push_back(g.t(k));
        r.x.push_back(s[k](0));
        r.x_hat.push_back(sh[k](0));
        if (d == 2) {
          r.psi.push_back(s[k](1));
          r.psi_hat.push_back(sh[k](1));
        }
        r.u_F.insert(r.u_F.end(), uF[k].data(), uF[k].data() + nF);
        r.u_L.insert(r.u_L.end(), uL[k].data(), uL[k].data() + m0);
      }
      r.JF_running = JF;
      r.JF_terminal = JF_term;
      r.JL_running = JL;
      r.JL_terminal = JL_term;
    }
    for (std::size_t c = 0; c < nc; ++c) res.x_at[p * nc + c] = s[opts.checkpoints[c]](0);
  }
  res.JF = estimate(res.JF_path, opts.seed);
  res.JL = estimate(res.JL_path, opts.seed);
  return res;
}

}  // namespace rsg
