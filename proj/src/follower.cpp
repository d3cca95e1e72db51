#include "rsg/follower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"
#include "rsg/errors.hpp"

namespace rsg {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

FeedbackAt feedback_at(const ProblemSpec& s, double t, int i, double P, double Pbar, const Tolerances& tol) {
  FeedbackAt f;
  const RowVectorXd BF = s.B_F(t, i), DF = s.D_F(t, i);
  const double A = s.dyn.A.at(t, i), Abar = s.dyn.Abar.at(t, i);
  const double C = s.dyn.C.at(t, i), Cbar = s.dyn.Cbar.at(t, i);
  const RowVectorXd BL = s.dyn.B_L.at(t, i), DL = s.dyn.D_L.at(t, i);

  f.RR = s.R_F(t, i) + DF.transpose() * P * DF;
  f.margin = detail::relative_margin(f.RR);
  if (!(f.margin > tol.invert))
    throw Error(Errc::kRiccatiSingular, "R_F + D_F^T P_F D_F is not invertible", t, i);
  const auto lu = f.RR.fullPivLu();
  f.BB = BF.transpose() * P + DF.transpose() * (P * C);
  f.BBbar = BF.transpose() * Pbar + DF.transpose() * (P * Cbar);
  const VectorXd RBB = lu.solve(f.BB), RBBbar = lu.solve(f.BBbar);
  f.Kx = -RBB;
  f.Kxhat = -RBBbar;
  f.Phi_A = A - RBB.dot(BF.transpose());
  f.Phi_Abar = Abar - RBBbar.dot(BF.transpose());
  const VectorXd DFtP = DF.transpose() * P;
  f.Psi_C = P * BL + C * P * DL - RBB.dot(DFtP) * DL;
  f.Psi_Cbar = Pbar * BL + Cbar * P * DL - RBBbar.dot(DFtP) * DL;
  f.Gamma_C = C * P - RBB.dot(DFtP);
  f.Gamma_Cbar = Cbar * P - RBBbar.dot(DFtP);
  return f;
}

namespace {

/// Right-hand side for the stacked per-regime vector [P, Pbar, phi] (first
/// `ncomp` components).
class FollowerRhs {
 public:
  FollowerRhs(const ProblemSpec& s, int ncomp, const RegimeGrid* u_L, const Tolerances& tol)
      : s_(s), ncomp_(ncomp), u_L_(u_L), tol_(tol) {}

  void operator()(double t, const VectorXd& v, VectorXd& dv) {
    const int m = s_.regimes();
    for (int i = 0; i < m; ++i) {
      const double P = v[i * ncomp_];
      const double Pbar = ncomp_ > 1 ? v[i * ncomp_ + 1] : 0.0;
      const double A = s_.dyn.A.at(t, i), Abar = s_.dyn.Abar.at(t, i);
      const double C = s_.dyn.C.at(t, i), Cbar = s_.dyn.Cbar.at(t, i);
      const FeedbackAt f = feedback_at(s_, t, i, P, Pbar, tol_);
      margin = std::min(margin, f.margin);
      const VectorXd RBB = -f.Kx;
      const double quad = f.BB.dot(RBB);
      dv[i * ncomp_] = -((2.0 * A + C * C) * P + s_.follower.Q.at(t, i) - quad);
      if (ncomp_ > 1) {
        const VectorXd RBBbar = -f.Kxhat;
        const double cross = f.BB.dot(RBBbar) + f.BBbar.dot(RBBbar) + f.BBbar.dot(RBB);
        dv[i * ncomp_ + 1] = -(2.0 * (A + Abar) * Pbar + (2.0 * Abar + Cbar * Cbar + 2.0 * C * Cbar) * P +
                               s_.follower.Qbar.at(t, i) - cross);
      }
      if (ncomp_ > 2) {
        const double phi = v[i * ncomp_ + 2];
        const VectorXd uL = u_L_->interpolate(t, i);
        const double src = (f.Psi_C + f.Psi_Cbar).dot(uL) + (f.Gamma_C + f.Gamma_Cbar) * s_.dyn.sigma.at(t, i) +
                           (P + Pbar) * s_.dyn.b.at(t, i);
        dv[i * ncomp_ + 2] = -((f.Phi_A + f.Phi_Abar) * phi + src);
      }
    }
    VectorXd coupling = VectorXd::Zero(v.size());
    add_markov_coupling(s_.generator, v, ncomp_, coupling);
    dv -= coupling;
  }

  double margin = std::numeric_limits<double>::infinity();

 private:
  const ProblemSpec& s_;
  int ncomp_;
  const RegimeGrid* u_L_;
  Tolerances tol_;
};

/// Integrates the first `ncomp` follower components and splits the result.
std::vector<RegimeGrid> integrate_follower(const ProblemSpec& s, int ncomp, const RegimeGrid* u_L,
                                           const SolveOptions& opts, double& margin) {
  const int m = s.regimes();
  std::vector<MatrixXd> terminal(m, MatrixXd::Zero(ncomp, 1));
  for (int i = 0; i < m; ++i) {
    terminal[i](0, 0) = s.follower.G[i];
    if (ncomp > 1) terminal[i](1, 0) = s.follower.Gbar[i];
  }
  FollowerRhs rhs(s, ncomp, u_L, opts.tol);
  RegimeGrid joint = integrate_backward(std::ref(rhs), terminal, s.grid(), opts.scheme);
  margin = rhs.margin;
  std::vector<RegimeGrid> out(ncomp, RegimeGrid(s.grid(), m, 1, 1));
  for (int k = 0; k <= s.N; ++k)
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < ncomp; ++c) out[c].value(k, i) = joint.value(k, i, c);
  return out;
}

}  // namespace

FollowerRiccati solve_PF(const ProblemSpec& s, const SolveOptions& opts) {
  FollowerRiccati fr;
  auto parts = integrate_follower(s, 1, nullptr, opts, fr.invert_margin);
  fr.P = std::move(parts[0]);
  return fr;
}

FollowerRiccati solve_PFbar(const ProblemSpec& s, const FollowerRiccati& pf, const SolveOptions& opts) {
  if (!(pf.P.grid() == s.grid())) throw Error(Errc::kGridMismatch, "P_F grid differs from the problem grid");
  FollowerRiccati fr;
  auto parts = integrate_follower(s, 2, nullptr, opts, fr.invert_margin);
  fr.P = std::move(parts[0]);
  fr.Pbar = std::move(parts[1]);
  return fr;
}

FeedbackCoeffs feedback_coeffs(const ProblemSpec& s, const FollowerRiccati& fr, const Tolerances& tol) {
  if (!(fr.P.grid() == s.grid()) || !(fr.Pbar.grid() == s.grid()))
    throw Error(Errc::kGridMismatch, "Riccati grids differ from the problem grid");
  const TimeGrid g = s.grid();
  FeedbackCoeffs out(g, s.regimes());
  for (int k = 0; k <= g.N; ++k)
    for (int i = 0; i < s.regimes(); ++i)
      out.at(k, i) = feedback_at(s, g.t(k), i, fr.P.value(k, i), fr.Pbar.value(k, i), tol);
  return out;
}

RegimeGrid exogenous_leader_control(const ProblemSpec& s) {
  const TimeGrid g = s.grid();
  RegimeGrid u(g, s.regimes(), s.dims.m0, 1);
  for (int k = 0; k <= g.N; ++k)
    for (int i = 0; i < s.regimes(); ++i) u(k, i) = s.leader_control.at(g.t(k), i);
  return u;
}

PhiSolution solve_phi(const ProblemSpec& s, const FollowerRiccati& fr, const RegimeGrid& u_L,
                      const SolveOptions& opts) {
  if (!(u_L.grid() == s.grid()) || u_L.rows() != s.dims.m0 || u_L.regimes() != s.regimes())
    throw Error(Errc::kGridMismatch, "leader control grid does not match the problem grid");
  if (!(fr.P.grid() == s.grid())) throw Error(Errc::kGridMismatch, "P_F grid differs from the problem grid");
  double margin = 0.0;
  auto parts = integrate_follower(s, 3, &u_L, opts, margin);
  PhiSolution out;
  out.phi = std::move(parts[2]);
  out.phi_M = JumpIntegrand(out.phi);
  return out;
}

Envelope envelope(const ProblemSpec& s) {
  Envelope env;
  env.constants = derive_constants(s);
  const Constants& c = env.constants;
  const double a = c.c1 * s.regimes();
  const double T = s.T;
  const double growth = c.degenerate ? 1.0 : std::exp(a * T);
  const double K = c.degenerate ? T : std::expm1(a * T) / a;
  const double S = K * c.q0 + c.g0 * growth;
  // c3 rho_bar^2 / rho simplifies to S / K; this form stays finite when c3 = 0.
  const double forcing = c.q0 + S / K;
  env.varrho_bar = c.varrho_bar;
  const TimeGrid g = s.grid();
  env.upper = RegimeGrid(g, s.regimes(), 1, 1);
  env.lower = RegimeGrid(g, s.regimes(), 1, 1);
  for (int k = 0; k <= g.N; ++k) {
    const double tau = T - g.t(k);
    const double e = c.degenerate ? 1.0 : std::exp(a * tau);
    const double integral = c.degenerate ? tau : std::expm1(a * tau) / a;
    const double up = c.g0 * e + forcing * integral;
    for (int i = 0; i < s.regimes(); ++i) {
      env.upper.value(k, i) = up;
      env.lower.value(k, i) = -up;
    }
  }
  return env;
}

EnvelopeCheck check_envelope(const RegimeGrid& P, const Envelope& env) {
  if (!(P.grid() == env.upper.grid()) || P.regimes() != env.upper.regimes())
    throw Error(Errc::kGridMismatch, "P_F grid differs from the envelope grid");
  EnvelopeCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  const double slack = 1e-12 * std::max(1.0, env.varrho_bar);
  for (int k = 0; k <= P.grid().N; ++k)
    for (int i = 0; i < P.regimes(); ++i) {
      const double p = P.value(k, i), up = env.upper.value(k, i), lo = env.lower.value(k, i);
      const double mgn = std::min({p - lo, up - p, env.varrho_bar - up});
      if (mgn < out.worst_margin || std::isnan(mgn)) {
        out.worst_margin = mgn;
        out.k = k;
        out.regime = i;
      }
    }
  out.ok = out.worst_margin >= -slack;
  return out;
}

}  // namespace rsg
