#include "rsg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <omp.h>

#include "rsg/errors.hpp"
#include "sim_kernel.hpp"

namespace rsg {

namespace detail {

StepTable tabulate(const ProblemSpec& spec) {
  StepTable tab;
  tab.N = spec.N;
  tab.m = spec.regimes();
  tab.m0 = spec.dims.m0;
  tab.nF = spec.dims.nF();
  tab.T = spec.T;
  tab.dt = spec.grid().dt();
  tab.terminal = spec.terminal_form;
  const std::size_t n = static_cast<std::size_t>(tab.N + 1) * tab.m;
  for (auto* v : {&tab.A, &tab.Abar, &tab.C, &tab.Cbar, &tab.b, &tab.sigma, &tab.QF, &tab.QFbar, &tab.QL, &tab.QLbar})
    v->resize(n);
  tab.BL.resize(n * tab.m0);
  tab.DL.resize(n * tab.m0);
  tab.BF.resize(n * tab.nF);
  tab.DF.resize(n * tab.nF);
  tab.RF.resize(n * tab.nF * tab.nF);
  tab.RL.resize(n * tab.m0 * tab.m0);
  const TimeGrid g = spec.grid();
  for (int k = 0; k <= tab.N; ++k)
    for (int i = 0; i < tab.m; ++i) {
      const double t = g.t(k);
      const std::size_t e = tab.idx(k, i);
      tab.A[e] = spec.dyn.A.at(t, i);
      tab.Abar[e] = spec.dyn.Abar.at(t, i);
      tab.C[e] = spec.dyn.C.at(t, i);
      tab.Cbar[e] = spec.dyn.Cbar.at(t, i);
      tab.b[e] = spec.dyn.b.at(t, i);
      tab.sigma[e] = spec.dyn.sigma.at(t, i);
      tab.QF[e] = spec.follower.Q.at(t, i);
      tab.QFbar[e] = spec.follower.Qbar.at(t, i);
      tab.QL[e] = spec.leader.Q.at(t, i);
      tab.QLbar[e] = spec.leader.Qbar.at(t, i);
      const Eigen::MatrixXd BL = spec.dyn.B_L.at(t, i), DL = spec.dyn.D_L.at(t, i);
      const Eigen::RowVectorXd BF = spec.B_F(t, i), DF = spec.D_F(t, i);
      const Eigen::MatrixXd RF = spec.R_F(t, i), RL = spec.leader.R.at(t, i);
      std::copy(BL.data(), BL.data() + tab.m0, tab.BL.begin() + e * tab.m0);
      std::copy(DL.data(), DL.data() + tab.m0, tab.DL.begin() + e * tab.m0);
      std::copy(BF.data(), BF.data() + tab.nF, tab.BF.begin() + e * tab.nF);
      std::copy(DF.data(), DF.data() + tab.nF, tab.DF.begin() + e * tab.nF);
      std::copy(RF.data(), RF.data() + RF.size(), tab.RF.begin() + e * tab.nF * tab.nF);
      std::copy(RL.data(), RL.data() + RL.size(), tab.RL.begin() + e * tab.m0 * tab.m0);
    }
  tab.GF = spec.follower.G;
  tab.GFbar = spec.follower.Gbar;
  tab.GL = spec.leader.G;
  tab.GLbar = spec.leader.Gbar;
  return tab;
}

void PathBuffers::resize(int N, int d, int nF, int m0) {
  regime.resize(N + 1);
  dW.resize(N);
  s.resize((N + 1) * d);
  s_hat.resize((N + 1) * d);
  uF.resize((N + 1) * nF);
  uF_hat.resize((N + 1) * nF);
  uL.resize((N + 1) * m0);
  uL_hat.resize((N + 1) * m0);
}

void draw_noise(const ProblemSpec& spec, std::uint64_t seed, std::uint64_t path, const ChainPath* fixed_chain,
                PathBuffers& buf) {
  if (fixed_chain) {
    buf.chain = *fixed_chain;
  } else {
    auto rng = path_engine(seed, path, Stream::kChain);
    buf.chain = sample_chain(spec.generator, spec.initial_regime, spec.T, rng);
  }
  buf.regime = project_to_grid(buf.chain, spec.N, spec.T);
  auto rng = path_engine(seed, path, Stream::kBrownian);
  std::normal_distribution<double> normal(0.0, std::sqrt(spec.grid().dt()));
  buf.dW.resize(spec.N);
  for (auto& w : buf.dW) w = normal(rng);
}

void running_integrands(const StepTable& tab, const PathBuffers& buf, int d, int k, double& fF, double& fL) {
  const std::size_t e = tab.idx(k, buf.regime[k]);
  const double x = buf.s[k * d], xh = buf.s_hat[k * d];
  fF = 0.5 * (tab.QF[e] * x * x + tab.QFbar[e] * xh * xh +
              quad_form(&tab.RF[e * tab.nF * tab.nF], &buf.uF[k * tab.nF], tab.nF));
  fL = 0.5 * (tab.QL[e] * x * x + tab.QLbar[e] * xh * xh +
              quad_form(&tab.RL[e * tab.m0 * tab.m0], &buf.uL[k * tab.m0], tab.m0));
}

void run_path(const StepTable& tab, const StrategyProfile& prof, double x0, Quadrature quad, PathBuffers& buf) {
  const int N = tab.N, d = prof.state_dim, nF = tab.nF, m0 = tab.m0;
  const double dt = tab.dt;
  buf.s[0] = buf.s_hat[0] = x0;
  if (d == 2) buf.s[1] = buf.s_hat[1] = 0.0;

  for (int k = 0;; ++k) {
    const int i = buf.regime[k];
    const std::span<const double> s(&buf.s[k * d], d), sh(&buf.s_hat[k * d], d);
    prof.controls(k, i, s, sh, {&buf.uF[k * nF], std::size_t(nF)}, {&buf.uL[k * m0], std::size_t(m0)});
    prof.controls(k, i, sh, sh, {&buf.uF_hat[k * nF], std::size_t(nF)}, {&buf.uL_hat[k * m0], std::size_t(m0)});
    if (k == N) break;

    const std::size_t e = tab.idx(k, i);
    const double* uF = &buf.uF[k * nF];
    const double* uL = &buf.uL[k * m0];
    const double x = s[0], xh = sh[0], w = buf.dW[k];
    const double drift = tab.A[e] * x + tab.Abar[e] * xh + dot(&tab.BL[e * m0], uL, m0) +
                         dot(&tab.BF[e * nF], uF, nF) + tab.b[e];
    const double diff = tab.C[e] * x + tab.Cbar[e] * xh + dot(&tab.DL[e * m0], uL, m0) +
                        dot(&tab.DF[e * nF], uF, nF) + tab.sigma[e];
    const double fdrift = (tab.A[e] + tab.Abar[e]) * xh + dot(&tab.BL[e * m0], &buf.uL_hat[k * m0], m0) +
                          dot(&tab.BF[e * nF], &buf.uF_hat[k * nF], nF) + tab.b[e];
    double* next = &buf.s[(k + 1) * d];
    double* next_hat = &buf.s_hat[(k + 1) * d];
    next[0] = x + drift * dt + diff * w;
    next_hat[0] = xh + fdrift * dt;
    if (d == 2) {
      const double psi = s[1], psih = sh[1];
      const double a = prof.aux(k, i, s, sh), ah = prof.aux(k, i, sh, sh);
      next[1] = psi + (tab.A[e] * psi + tab.Abar[e] * psih + a) * dt + (tab.C[e] * psi + tab.Cbar[e] * psih) * w;
      next_hat[1] = psih + ((tab.A[e] + tab.Abar[e]) * psih + ah) * dt;
    }
  }

  buf.JF_run = buf.JL_run = 0.0;
  double fF_prev = 0, fL_prev = 0;
  running_integrands(tab, buf, d, 0, fF_prev, fL_prev);
  for (int k = 0; k < N; ++k) {
    if (quad == Quadrature::kLeftRiemann) {
      buf.JF_run += fF_prev * dt;
      buf.JL_run += fL_prev * dt;
      if (k + 1 < N) running_integrands(tab, buf, d, k + 1, fF_prev, fL_prev);
    } else {
      double fF, fL;
      running_integrands(tab, buf, d, k + 1, fF, fL);
      buf.JF_run += 0.5 * (fF_prev + fF) * dt;
      buf.JL_run += 0.5 * (fL_prev + fL) * dt;
      fF_prev = fF;
      fL_prev = fL;
    }
  }

  const int iN = buf.regime[N];
  const double xT = buf.s[N * d], xhT = buf.s_hat[N * d];
  if (tab.terminal == TerminalForm::kQuadratic) {
    buf.JF_term = 0.5 * (tab.GF[iN] * xT * xT + tab.GFbar[iN] * xhT * xhT);
    buf.JL_term = 0.5 * (tab.GL[iN] * xT * xT + tab.GLbar[iN] * xhT * xhT);
  } else {
    buf.JF_term = tab.GFbar[iN] * xhT;
    buf.JL_term = tab.GLbar[iN] * xhT;
  }
}

}  // namespace detail

MCEstimate estimate(const std::vector<double>& values, std::uint64_t seed) {
  MCEstimate out;
  out.n = values.size();
  out.seed = seed;
  if (values.empty()) {
    out.mean = out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) {
    out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
  return out;
}

namespace {

void check_profile(const ProblemSpec& spec, const StrategyProfile& prof) {
  if (!(prof.grid == spec.grid()) || prof.regimes != spec.regimes() || prof.dims.m0 != spec.dims.m0 ||
      prof.dims.nF() != spec.dims.nF())
    throw Error(Errc::kGridMismatch, "strategy profile does not match the problem grid");
}

}  // namespace

namespace detail {

SimulationPath to_record(const ProblemSpec& spec, const StrategyProfile& prof, const PathBuffers& buf) {
  const int N = spec.N, d = prof.state_dim;
  SimulationPath p;
  p.t.resize(N + 1);
  for (int k = 0; k <= N; ++k) p.t[k] = spec.grid().t(k);
  p.regime = buf.regime;
  p.dW = buf.dW;
  p.x.resize(N + 1);
  p.x_hat.resize(N + 1);
  if (d == 2) {
    p.psi.resize(N + 1);
    p.psi_hat.resize(N + 1);
  }
  for (int k = 0; k <= N; ++k) {
    p.x[k] = buf.s[k * d];
    p.x_hat[k] = buf.s_hat[k * d];
    if (d == 2) {
      p.psi[k] = buf.s[k * d + 1];
      p.psi_hat[k] = buf.s_hat[k * d + 1];
    }
  }
  p.u_L = buf.uL;
  p.u_F = buf.uF;
  p.JF_running = buf.JF_run;
  p.JF_terminal = buf.JF_term;
  p.JL_running = buf.JL_run;
  p.JL_terminal = buf.JL_term;
  p.chain = buf.chain;
  return p;
}

}  // namespace detail

SimulationResult simulate_paths(const ProblemSpec& spec, const StrategyProfile& prof, const SimulationOptions& opts) {
  check_profile(spec, prof);
  const detail::StepTable tab = detail::tabulate(spec);
  const auto n = static_cast<std::int64_t>(opts.n_paths);
  const std::size_t nc = opts.checkpoints.size();
  for (int c : opts.checkpoints)
    if (c < 0 || c > spec.N) throw Error(Errc::kInvalidArgument, "checkpoint outside the grid");

  SimulationResult res;
  res.checkpoints = opts.checkpoints;
  res.JF_path.resize(n);
  res.JL_path.resize(n);
  res.x_at.resize(n * nc);
  res.recorded.resize(std::min<std::uint64_t>(opts.record, opts.n_paths));
  const int nt = opts.threads > 0 ? opts.threads : omp_get_max_threads();

#pragma omp parallel num_threads(nt)
  {
    detail::PathBuffers buf;
    buf.resize(spec.N, prof.state_dim, tab.nF, tab.m0);
#pragma omp for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
      detail::draw_noise(spec, opts.seed, p, opts.fixed_chain, buf);
      detail::run_path(tab, prof, spec.x0, opts.quadrature, buf);
      res.JF_path[p] = buf.JF_run + buf.JF_term;
      res.JL_path[p] = buf.JL_run + buf.JL_term;
      for (std::size_t c = 0; c < nc; ++c) res.x_at[p * nc + c] = buf.s[opts.checkpoints[c] * prof.state_dim];
      if (static_cast<std::size_t>(p) < res.recorded.size()) res.recorded[p] = detail::to_record(spec, prof, buf);
    }
  }
  res.JF = estimate(res.JF_path, opts.seed);
  res.JL = estimate(res.JL_path, opts.seed);
  return res;
}

}  // namespace rsg
