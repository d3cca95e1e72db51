#include "rsg/leader.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "linalg.hpp"
#include "rsg/errors.hpp"

namespace rsg {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

Matrix2d leader_follower_block(double leader, double follower) {
  Matrix2d out;
  out << leader, -follower, follower, 0.0;
  return out;
}

namespace {

MatrixXd checked_inverse(const MatrixXd& R, Errc code, const char* name, double t, int i, double tol) {
  if (!(detail::relative_margin(R) > tol)) throw Error(code, std::string(name) + " is not invertible", t, i);
  return R.fullPivLu().inverse();
}

}  // namespace

AugmentedBlocks augmented_at(const ProblemSpec& s, double t, int i, const Tolerances& tol) {
  AugmentedBlocks a;
  const double A = s.dyn.A.at(t, i), Abar = s.dyn.Abar.at(t, i);
  const double C = s.dyn.C.at(t, i), Cbar = s.dyn.Cbar.at(t, i);
  a.A = A * Matrix2d::Identity();
  a.Abar = Abar * Matrix2d::Identity();
  a.C = C * Matrix2d::Identity();
  a.Cbar = Cbar * Matrix2d::Identity();
  const RowVectorXd BL = s.dyn.B_L.at(t, i), DL = s.dyn.D_L.at(t, i);
  const RowVectorXd BF = s.B_F(t, i), DF = s.D_F(t, i);
  a.RL_inv = checked_inverse(s.leader.R.at(t, i), Errc::kSingularRL, "R_L", t, i, tol.invert);
  a.RF_inv = checked_inverse(s.R_F(t, i), Errc::kSingularRF, "R_F", t, i, tol.invert);
  const int m0 = s.dims.m0;
  a.B = MatrixXd::Zero(2, m0);
  a.B.row(0) = BL;
  a.D = MatrixXd::Zero(2, m0);
  a.D.row(0) = DL;
  auto form = [&](const RowVectorXd& xl, const RowVectorXd& yl, const RowVectorXd& xf, const RowVectorXd& yf) {
    const double l = xl * a.RL_inv * yl.transpose();
    const double f = xf * a.RF_inv * yf.transpose();
    Matrix2d out;
    out << -l, -f, f, 0.0;
    return out;
  };
  a.B1 = form(BL, BL, BF, BF);
  a.B2 = form(BL, DL, BF, DF);
  a.D1 = form(DL, BL, DF, BF);
  a.D2 = form(DL, DL, DF, DF);
  a.Q = leader_follower_block(s.leader.Q.at(t, i), s.follower.Q.at(t, i));
  a.Qbar = leader_follower_block(s.leader.Qbar.at(t, i), s.follower.Qbar.at(t, i));
  return a;
}

AugmentedSystem build_augmented(const ProblemSpec& s, const Tolerances& tol) {
  AugmentedSystem sys;
  sys.grid = s.grid();
  sys.regimes = s.regimes();
  sys.nodes.reserve((s.N + 1) * s.regimes());
  for (int k = 0; k <= s.N; ++k)
    for (int i = 0; i < s.regimes(); ++i) sys.nodes.push_back(augmented_at(s, sys.grid.t(k), i, tol));
  for (int i = 0; i < s.regimes(); ++i) {
    sys.G.push_back(leader_follower_block(s.leader.G[i], s.follower.G[i]));
    sys.Gbar.push_back(leader_follower_block(s.leader.Gbar[i], s.follower.Gbar[i]));
  }
  return sys;
}

namespace {

void note_l3(const ProblemSpec& s, std::vector<std::string>& warnings) {
  const AssumptionReport r = check_assumptions(s);
  if (!r.L3) warnings.push_back("L3 does not hold; leader Riccati solved without solvability guarantee");
}

/// Per-regime stacked [P (4), Pbar (4), tau (2)], first `ncomp` entries.
class LeaderRhs {
 public:
  LeaderRhs(const ProblemSpec& s, int ncomp, const Tolerances& tol) : s_(s), ncomp_(ncomp), tol_(tol) {}

  void operator()(double t, const VectorXd& v, VectorXd& dv) {
    const int m = s_.regimes();
    for (int i = 0; i < m; ++i) {
      const AugmentedBlocks a = augmented_at(s_, t, i, tol_);
      const int o = i * ncomp_;
      const Matrix2d P = Eigen::Map<const Matrix2d>(v.data() + o);
      const Matrix2d dP = -(P * a.A + a.A * P + P * a.B1 * P + a.C * P * a.C + a.Q);
      Eigen::Map<Matrix2d>(dv.data() + o) = dP;
      if (ncomp_ < 8) continue;
      const Matrix2d Pb = Eigen::Map<const Matrix2d>(v.data() + o + 4);
      const Matrix2d dPb = -(Pb * a.B1 * Pb + (2.0 * (a.A + a.Abar) + P * a.B1) * Pb + Pb * (a.B1 + a.B2 * a.C) * P +
                             2.0 * a.Abar * P + a.Qbar);
      Eigen::Map<Matrix2d>(dv.data() + o + 4) = dPb;
      if (ncomp_ < 10) continue;
      const Vector2d tau = Eigen::Map<const Vector2d>(v.data() + o + 8);
      const double sigma = s_.dyn.sigma.at(t, i), b = s_.dyn.b.at(t, i);
      const Vector2d PEsig = P * a.E * sigma;
      const Vector2d dtau = -((a.A + P * a.B1) * tau + (a.Abar + Pb * a.B1) * tau + (a.C + P * a.B2) * PEsig +
                              Pb * a.B2 * PEsig + (P + Pb) * a.E * b);
      Eigen::Map<Vector2d>(dv.data() + o + 8) = dtau;
    }
    VectorXd coupling = VectorXd::Zero(v.size());
    add_markov_coupling(s_.generator, v, ncomp_, coupling);
    dv -= coupling;
  }

 private:
  const ProblemSpec& s_;
  int ncomp_;
  Tolerances tol_;
};

RegimeGrid integrate_leader(const ProblemSpec& s, int ncomp, const SolveOptions& opts) {
  const int m = s.regimes();
  std::vector<MatrixXd> terminal(m, MatrixXd::Zero(ncomp, 1));
  for (int i = 0; i < m; ++i) {
    const Matrix2d G = leader_follower_block(s.leader.G[i], s.follower.G[i]);
    terminal[i].block(0, 0, 4, 1) = Eigen::Map<const VectorXd>(G.data(), 4);
    if (ncomp >= 8) {
      const Matrix2d Gb = leader_follower_block(s.leader.Gbar[i], s.follower.Gbar[i]);
      terminal[i].block(4, 0, 4, 1) = Eigen::Map<const VectorXd>(Gb.data(), 4);
    }
  }
  return integrate_backward(LeaderRhs(s, ncomp, opts.tol), terminal, s.grid(), opts.scheme);
}

RegimeGrid extract(const RegimeGrid& joint, int first, int rows, int cols) {
  RegimeGrid out(joint.grid(), joint.regimes(), rows, cols);
  for (int k = 0; k <= joint.grid().N; ++k)
    for (int i = 0; i < joint.regimes(); ++i)
      for (int n = 0; n < rows * cols; ++n) out(k, i).data()[n] = joint.value(k, i, first + n);
  return out;
}

}  // namespace

LeaderRiccati solve_PL(const ProblemSpec& s, const SolveOptions& opts) {
  LeaderRiccati lr;
  note_l3(s, lr.warnings);
  lr.P = extract(integrate_leader(s, 4, opts), 0, 2, 2);
  return lr;
}

LeaderRiccati solve_PLbar(const ProblemSpec& s, const LeaderRiccati& pl, const SolveOptions& opts) {
  if (!(pl.P.grid() == s.grid())) throw Error(Errc::kGridMismatch, "P_L grid differs from the problem grid");
  LeaderRiccati lr;
  lr.warnings = pl.warnings;
  const RegimeGrid joint = integrate_leader(s, 8, opts);
  lr.P = extract(joint, 0, 2, 2);
  lr.Pbar = extract(joint, 4, 2, 2);
  return lr;
}

LeaderRiccati solve_tau(const ProblemSpec& s, const LeaderRiccati& pl, const SolveOptions& opts) {
  if (!(pl.P.grid() == s.grid())) throw Error(Errc::kGridMismatch, "P_L grid differs from the problem grid");
  LeaderRiccati lr;
  lr.warnings = pl.warnings;
  const RegimeGrid joint = integrate_leader(s, 10, opts);
  lr.P = extract(joint, 0, 2, 2);
  lr.Pbar = extract(joint, 4, 2, 2);
  lr.tau = extract(joint, 8, 2, 1);
  lr.tau_M = JumpIntegrand(lr.tau);
  return lr;
}

std::vector<MatrixXd> coupling_matrices(const Generator& gen) {
  const int m = gen.size();
  std::vector<MatrixXd> out;
  for (int k = 1; k < m; ++k) {
    MatrixXd N = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const int j = (i + k) % m;
      N(i, j) = std::sqrt(gen.rate(i, j));
    }
    out.push_back(N);
  }
  return out;
}

RegimeGrid solve_PL_blockform(const ProblemSpec& s, const SolveOptions& opts) {
  const int m = s.regimes();
  const int n = 2 * m;
  std::vector<MatrixXd> Ns;
  for (const MatrixXd& N : coupling_matrices(s.generator))
    Ns.push_back(Eigen::kroneckerProduct(N, Matrix2d::Identity()).eval());
  auto rhs = [&](double t, const VectorXd& v, VectorXd& dv) {
    MatrixXd AA = MatrixXd::Zero(n, n), BB1 = MatrixXd::Zero(n, n), CC = MatrixXd::Zero(n, n),
             QQ = MatrixXd::Zero(n, n);
    for (int i = 0; i < m; ++i) {
      const AugmentedBlocks a = augmented_at(s, t, i, opts.tol);
      AA.block<2, 2>(2 * i, 2 * i) = a.A + 0.5 * s.generator.rate(i, i) * Matrix2d::Identity();
      BB1.block<2, 2>(2 * i, 2 * i) = a.B1;
      CC.block<2, 2>(2 * i, 2 * i) = a.C;
      QQ.block<2, 2>(2 * i, 2 * i) = a.Q;
    }
    const Eigen::Map<const MatrixXd> PP(v.data(), n, n);
    MatrixXd d = PP * AA + AA * PP + PP * BB1 * PP + CC * PP * CC + QQ;
    for (const MatrixXd& N : Ns) d += N * PP * N.transpose();
    Eigen::Map<MatrixXd>(dv.data(), n, n) = -d;
  };
  MatrixXd GG = MatrixXd::Zero(n, n);
  for (int i = 0; i < m; ++i) GG.block<2, 2>(2 * i, 2 * i) = leader_follower_block(s.leader.G[i], s.follower.G[i]);
  return integrate_backward(rhs, {GG}, s.grid(), opts.scheme);
}

LeaderGains leader_feedback(const ProblemSpec& s, const AugmentedSystem& aug, const LeaderRiccati& lr) {
  for (const auto& nodes : s.dyn.D_L.nodes())
    for (const auto& v : nodes)
      if (detail::max_norm(v) != 0.0)
        throw Error(Errc::kRequiresL3, "leader feedback with D_L != 0 needs the Z term, which is not supported");
  if (!(lr.P.grid() == s.grid()) || !(lr.Pbar.grid() == s.grid()) || !(lr.tau.grid() == s.grid()) ||
      !(aug.grid == s.grid()))
    throw Error(Errc::kGridMismatch, "leader grids differ from the problem grid");
  const int m0 = s.dims.m0;
  LeaderGains g;
  g.KX = RegimeGrid(s.grid(), s.regimes(), m0, 2);
  g.KXhat = RegimeGrid(s.grid(), s.regimes(), m0, 2);
  g.offset = RegimeGrid(s.grid(), s.regimes(), m0, 1);
  for (int k = 0; k <= s.N; ++k)
    for (int i = 0; i < s.regimes(); ++i) {
      const AugmentedBlocks& a = aug.at(k, i);
      const MatrixXd L = -a.RL_inv * a.B.transpose();  // m0 x 2
      g.KX(k, i) = L * lr.P(k, i);
      g.KXhat(k, i) = L * lr.Pbar(k, i);
      g.offset(k, i) = L * lr.tau(k, i);
    }
  return g;
}

}  // namespace rsg
