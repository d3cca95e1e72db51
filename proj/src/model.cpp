#include "rsg/model.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "linalg.hpp"
#include "rsg/errors.hpp"

namespace rsg {

using Eigen::MatrixXd;

ScalarField constant_field(int m, double value) {
  return ScalarField::constant(std::vector<double>(m, value));
}

MatrixField constant_field(int m, const MatrixXd& value) {
  return MatrixField::constant(std::vector<MatrixXd>(m, value));
}

ProblemSpec ProblemSpec::zero(const Generator& gen, double T, int N, Dims dims) {
  ProblemSpec s;
  s.generator = gen;
  s.T = T;
  s.N = N;
  s.dims = dims;
  const int m = gen.size();
  auto z = constant_field(m, 0.0);
  s.dyn.A = s.dyn.Abar = s.dyn.C = s.dyn.Cbar = s.dyn.b = s.dyn.sigma = z;
  s.dyn.B_L = s.dyn.D_L = constant_field(m, MatrixXd::Zero(1, dims.m0));
  s.dyn.B_F1 = s.dyn.D_F1 = constant_field(m, MatrixXd::Zero(1, dims.m1));
  s.dyn.B_F2 = s.dyn.D_F2 = constant_field(m, MatrixXd::Zero(1, dims.m2));
  s.follower.Q = s.follower.Qbar = z;
  s.follower.R1 = constant_field(m, MatrixXd::Zero(dims.m1, dims.m1));
  s.follower.R2 = constant_field(m, MatrixXd::Zero(dims.m2, dims.m2));
  s.follower.S = constant_field(m, MatrixXd::Zero(dims.m1, dims.m2));
  s.follower.G = s.follower.Gbar = std::vector<double>(m, 0.0);
  s.leader.Q = s.leader.Qbar = z;
  s.leader.R = constant_field(m, MatrixXd::Zero(dims.m0, dims.m0));
  s.leader.G = s.leader.Gbar = std::vector<double>(m, 0.0);
  s.leader_control = constant_field(m, MatrixXd::Zero(dims.m0, 1));
  return s;
}

Eigen::RowVectorXd ProblemSpec::B_F(double t, int i) const {
  Eigen::RowVectorXd out(dims.nF());
  out << dyn.B_F1.at(t, i), dyn.B_F2.at(t, i);
  return out;
}

Eigen::RowVectorXd ProblemSpec::D_F(double t, int i) const {
  Eigen::RowVectorXd out(dims.nF());
  out << dyn.D_F1.at(t, i), dyn.D_F2.at(t, i);
  return out;
}

MatrixXd ProblemSpec::R_F(double t, int i) const {
  const MatrixXd S = follower.S.at(t, i);
  MatrixXd out(dims.nF(), dims.nF());
  out << follower.R1.at(t, i), S, S.transpose(), follower.R2.at(t, i);
  return out;
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::kInvalidArgument, what); }

void check_scalar(const ScalarField& f, int m, const char* name) {
  if (f.regimes() != m) bad(std::string(name) + ": expected one entry per regime");
  for (const auto& nodes : f.nodes()) {
    if (nodes.empty()) bad(std::string(name) + ": empty");
    for (double v : nodes)
      if (!std::isfinite(v)) bad(std::string(name) + ": non-finite value");
  }
}

void check_matrix(const MatrixField& f, int m, int rows, int cols, const char* name, bool symmetric = false) {
  if (f.regimes() != m) bad(std::string(name) + ": expected one entry per regime");
  for (const auto& nodes : f.nodes()) {
    if (nodes.empty()) bad(std::string(name) + ": empty");
    for (const auto& v : nodes) {
      if (v.rows() != rows || v.cols() != cols) {
        std::ostringstream os;
        os << name << ": expected shape " << rows << "x" << cols << ", got " << v.rows() << "x" << v.cols();
        bad(os.str());
      }
      if (!v.allFinite()) bad(std::string(name) + ": non-finite value");
      if (symmetric && !detail::is_symmetric(v, 1e-12)) bad(std::string(name) + ": not symmetric");
    }
  }
}

void check_terminal(const std::vector<double>& g, int m, const char* name) {
  if (static_cast<int>(g.size()) != m) bad(std::string(name) + ": expected one value per regime");
  for (double v : g)
    if (!std::isfinite(v)) bad(std::string(name) + ": non-finite value");
}

}  // namespace

void validate(const ProblemSpec& s) {
  if (!(s.T > 0.0) || !std::isfinite(s.T)) bad("horizon must be positive");
  if (s.N < 1) bad("steps must be at least 1");
  if (s.dims.m0 < 1 || s.dims.m1 < 1 || s.dims.m2 < 1) bad("control dimensions must be positive");
  if (!std::isfinite(s.x0)) bad("x0 must be finite");
  const int m = s.regimes();
  if (s.initial_regime < 0 || s.initial_regime >= m) bad("initial_regime out of range");
  const auto& d = s.dims;
  check_scalar(s.dyn.A, m, "A");
  check_scalar(s.dyn.Abar, m, "Abar");
  check_scalar(s.dyn.C, m, "C");
  check_scalar(s.dyn.Cbar, m, "Cbar");
  check_scalar(s.dyn.b, m, "b");
  check_scalar(s.dyn.sigma, m, "sigma");
  check_matrix(s.dyn.B_L, m, 1, d.m0, "B_L");
  check_matrix(s.dyn.D_L, m, 1, d.m0, "D_L");
  check_matrix(s.dyn.B_F1, m, 1, d.m1, "B_F1");
  check_matrix(s.dyn.D_F1, m, 1, d.m1, "D_F1");
  check_matrix(s.dyn.B_F2, m, 1, d.m2, "B_F2");
  check_matrix(s.dyn.D_F2, m, 1, d.m2, "D_F2");
  check_scalar(s.follower.Q, m, "Q_F");
  check_scalar(s.follower.Qbar, m, "Qbar_F");
  check_matrix(s.follower.R1, m, d.m1, d.m1, "R_F1", true);
  check_matrix(s.follower.R2, m, d.m2, d.m2, "R_F2", true);
  check_matrix(s.follower.S, m, d.m1, d.m2, "S_F");
  check_terminal(s.follower.G, m, "G_F");
  check_terminal(s.follower.Gbar, m, "Gbar_F");
  check_scalar(s.leader.Q, m, "Q_L");
  check_scalar(s.leader.Qbar, m, "Qbar_L");
  check_matrix(s.leader.R, m, d.m0, d.m0, "R_L", true);
  check_terminal(s.leader.G, m, "G_L");
  check_terminal(s.leader.Gbar, m, "Gbar_L");
  check_matrix(s.leader_control, m, d.m0, 1, "leader_control");
}

namespace {

/// Visits every (solver grid node, regime).
void for_nodes(const ProblemSpec& s, const std::function<void(double, int)>& f) {
  const TimeGrid g = s.grid();
  for (int k = 0; k <= g.N; ++k)
    for (int i = 0; i < s.regimes(); ++i) f(g.t(k), i);
}

/// Tracks the worst (max or min) value of a quantity over the grid.
struct Tracker {
  Diagnostic d;
  bool seeking_max;
  bool seen = false;
  Tracker(std::string name, bool max) : seeking_max(max) { d.check = std::move(name); }
  void see(double v, double t, int i) {
    if (!seen || (seeking_max ? v > d.worst : v < d.worst)) {
      d.worst = v;
      d.t = t;
      d.regime = i;
      seen = true;
    }
  }
};

}  // namespace

Constants derive_constants(const ProblemSpec& s) {
  Constants c;
  const int m = s.regimes();
  const auto& gen = s.generator;
  for_nodes(s, [&](double t, int i) {
    c.q0 = std::max(c.q0, std::abs(s.follower.Q.at(t, i)));
    const double A = s.dyn.A.at(t, i), C = s.dyn.C.at(t, i);
    double rates = 0.0;
    for (int j = 0; j < m; ++j) rates += std::abs(gen.rate(i, j));
    c.c1 = std::max(c.c1, 2.0 * std::abs(A) + C * C + rates);
    const MatrixXd D1 = s.dyn.D_F1.at(t, i), D2 = s.dyn.D_F2.at(t, i);
    c.cbar1 = std::max(c.cbar1, D1.squaredNorm());  // max eigenvalue of D^T D
    c.cbar2 = std::max(c.cbar2, D2.squaredNorm());
    c.c3 = std::max(c.c3, (s.dyn.B_F1.at(t, i) + D1 * C).squaredNorm());
    c.c3 = std::max(c.c3, (s.dyn.B_F2.at(t, i) + D2 * C).squaredNorm());
  });
  for (double g : s.follower.G) c.g0 = std::max(c.g0, std::abs(g));

  const double a = c.c1 * m;
  const double T = s.T;
  c.degenerate = !(a > 0.0);
  const double growth = c.degenerate ? 1.0 : std::exp(a * T);
  const double K = c.degenerate ? T : std::expm1(a * T) / a;
  const double S = K * c.q0 + c.g0 * growth;
  c.varrho = 4.0 * c.c3 * K * S;
  if (!c.degenerate && c.c3 > 0.0)
    c.varrho_bar = a * c.varrho / (2.0 * c.c3 * std::expm1(a * T));
  else
    c.varrho_bar = 2.0 * S;
  return c;
}

std::vector<std::string> pricing_structure_violations(const ProblemSpec& s) {
  std::vector<std::string> out;
  auto scalar_zero = [&](const ScalarField& f, const char* name) {
    for (const auto& nodes : f.nodes())
      for (double v : nodes)
        if (v != 0.0) {
          out.push_back(name);
          return;
        }
  };
  auto matrix_zero = [&](const MatrixField& f, const char* name) {
    for (const auto& nodes : f.nodes())
      for (const auto& v : nodes)
        if (v.size() && v.cwiseAbs().maxCoeff() != 0.0) {
          out.push_back(name);
          return;
        }
  };
  auto terminal_zero = [&](const std::vector<double>& g, const char* name) {
    for (double v : g)
      if (v != 0.0) {
        out.push_back(name);
        return;
      }
  };
  scalar_zero(s.dyn.Abar, "Abar");
  scalar_zero(s.dyn.b, "b");
  scalar_zero(s.dyn.C, "C");
  scalar_zero(s.dyn.Cbar, "Cbar");
  matrix_zero(s.dyn.D_L, "D_L");
  matrix_zero(s.dyn.D_F1, "D_F1");
  matrix_zero(s.dyn.D_F2, "D_F2");
  scalar_zero(s.follower.Q, "Q_F");
  scalar_zero(s.follower.Qbar, "Qbar_F");
  scalar_zero(s.leader.Q, "Q_L");
  scalar_zero(s.leader.Qbar, "Qbar_L");
  terminal_zero(s.follower.G, "G_F");
  terminal_zero(s.leader.G, "G_L");
  if (s.terminal_form != TerminalForm::kLinear) out.push_back("terminal_cost (must be linear)");
  return out;
}

AssumptionReport check_assumptions(const ProblemSpec& s, const Tolerances& tol) {
  AssumptionReport r;
  r.constants = derive_constants(s);
  const Constants& c = r.constants;
  const int m = s.regimes();

  Tracker f2("F2: relative min singular value of R_F", false);
  Tracker f3_q("F3: Q_F >= 0", false), f3_g("F3: G_F >= 0", false);
  Tracker f3_b("F3: B_F R_F^-1 B_F^T >= 0", false), f3_d("F3: D_F R_F^-1 D_F^T >= 0", false);
  Tracker f3_bar("F3: |Qbar_F|, |Gbar_F| = 0", true), f3_sym("F3: asymmetry of B_F^T D_F", true);
  Tracker f4("F4: min eigenvalue of D_Fj^T D_Fj", false);
  Tracker f5_1("F5: min eig R_F1 - (rho + rho_bar cbar2)", false);
  Tracker f5_2("F5: min eig -R_F2 - (rho + rho_bar cbar2)", false);
  Tracker rf1("R_F1 min eigenvalue", false), rf2("R_F2 max eigenvalue", true);
  Tracker l1_q("L1: min(Q_L, Qbar_L)", false), l1_r("L1: relative min eigenvalue of R_L", false);
  Tracker l1_g("L1: min(G_L, Gbar_L)", false);
  Tracker l2("L2: asymmetry of B_L^T D_L", true);
  Tracker l3_zero("L3: max |Cbar|, |D_L|, |D_F|", true);
  Tracker l3_bl("L3: |B_L|", false), l3_bf("L3: |B_F R_F^-1 B_F^T|", false);

  const double shift = c.varrho + c.varrho_bar * c.cbar2;
  bool rf_invertible = true;
  for_nodes(s, [&](double t, int i) {
    const MatrixXd RF = s.R_F(t, i);
    const double margin = detail::relative_margin(RF);
    f2.see(margin, t, i);
    const Eigen::RowVectorXd BF = s.B_F(t, i), DF = s.D_F(t, i);
    f3_q.see(s.follower.Q.at(t, i), t, i);
    f3_bar.see(std::abs(s.follower.Qbar.at(t, i)), t, i);
    if (margin > tol.invert) {
      const auto lu = RF.fullPivLu();
      const double bfb = (BF * lu.solve(BF.transpose()))(0, 0);
      f3_b.see(bfb, t, i);
      f3_d.see((DF * lu.solve(DF.transpose()))(0, 0), t, i);
      l3_bf.see(std::abs(bfb), t, i);
    } else {
      rf_invertible = false;
    }
    const MatrixXd BD = BF.transpose() * DF;
    f3_sym.see(detail::max_norm(BD) == 0.0 ? 0.0 : detail::asymmetry(BD) / detail::max_norm(BD), t, i);

    const MatrixXd D1 = s.dyn.D_F1.at(t, i), D2 = s.dyn.D_F2.at(t, i);
    f4.see(std::min(detail::min_eig(D1.transpose() * D1), detail::min_eig(D2.transpose() * D2)), t, i);
    const MatrixXd R1 = s.follower.R1.at(t, i), R2 = s.follower.R2.at(t, i);
    f5_1.see(detail::min_eig(R1) - shift, t, i);
    f5_2.see(detail::min_eig(-R2) - shift, t, i);
    rf1.see(detail::min_eig(R1), t, i);
    rf2.see(detail::max_eig(R2), t, i);

    l1_q.see(std::min(s.leader.Q.at(t, i), s.leader.Qbar.at(t, i)), t, i);
    const MatrixXd RL = s.leader.R.at(t, i);
    const double nrl = detail::max_norm(RL);
    l1_r.see(nrl == 0.0 ? 0.0 : detail::min_eig(RL) / nrl, t, i);
    const MatrixXd BL = s.dyn.B_L.at(t, i), DL = s.dyn.D_L.at(t, i);
    const MatrixXd BLDL = BL.transpose() * DL;
    l2.see(detail::max_norm(BLDL) == 0.0 ? 0.0 : detail::asymmetry(BLDL) / detail::max_norm(BLDL), t, i);
    l3_zero.see(std::max({std::abs(s.dyn.Cbar.at(t, i)), detail::max_norm(DL), detail::max_norm(DF)}), t, i);
    l3_bl.see(detail::max_norm(BL), t, i);
  });
  for (int i = 0; i < m; ++i) {
    f3_g.see(s.follower.G[i], s.T, i);
    f3_bar.see(std::abs(s.follower.Gbar[i]), s.T, i);
    l1_g.see(std::min(s.leader.G[i], s.leader.Gbar[i]), s.T, i);
  }

  auto finish = [&](Tracker& tr, bool ok, std::string note = {}) {
    tr.d.ok = ok;
    tr.d.note = std::move(note);
    r.diagnostics.push_back(tr.d);
    return ok;
  };
  r.F2 = finish(f2, f2.d.worst > tol.invert);
  const double sign_tol = 1e-12;
  bool f3 = finish(f3_q, f3_q.d.worst >= 0.0);
  f3 = finish(f3_g, f3_g.d.worst >= 0.0) && f3;
  if (rf_invertible) {
    f3 = finish(f3_b, f3_b.d.worst >= -sign_tol) && f3;
    f3 = finish(f3_d, f3_d.d.worst >= -sign_tol) && f3;
  } else {
    f3 = finish(f3_b, false, "R_F not invertible") && f3;
  }
  f3 = finish(f3_bar, f3_bar.d.worst == 0.0) && f3;
  f3 = finish(f3_sym, f3_sym.d.worst <= tol.symmetry) && f3;
  r.F3 = f3;
  r.underline_c2 = std::max(0.0, f4.d.worst);
  r.F4 = finish(f4, r.underline_c2 > 0.0);
  const bool f5a = finish(f5_1, f5_1.d.worst >= 0.0);
  const bool f5b = finish(f5_2, f5_2.d.worst >= 0.0);
  r.F5 = f5a && f5b;
  r.rf1_positive = finish(rf1, rf1.d.worst > 0.0);
  r.rf2_negative = finish(rf2, rf2.d.worst < 0.0);
  bool l1 = finish(l1_q, l1_q.d.worst >= 0.0);
  l1 = finish(l1_r, l1_r.d.worst > tol.invert) && l1;
  l1 = finish(l1_g, l1_g.d.worst >= 0.0) && l1;
  r.L1 = l1;
  r.L2 = finish(l2, l2.d.worst <= tol.symmetry);
  bool l3 = finish(l3_zero, l3_zero.d.worst == 0.0);
  l3 = finish(l3_bl, l3_bl.d.worst > 0.0) && l3;
  if (rf_invertible)
    l3 = finish(l3_bf, l3_bf.d.worst > sign_tol) && l3;
  else
    l3 = finish(l3_bf, false, "R_F not invertible") && l3;
  r.L3 = l3;
  const auto viol = pricing_structure_violations(s);
  r.pricing_structure = viol.empty();
  Diagnostic ps;
  ps.check = "pricing structure";
  ps.ok = viol.empty();
  for (const auto& v : viol) ps.note += (ps.note.empty() ? "nonzero: " : ", ") + v;
  r.diagnostics.push_back(ps);
  return r;
}

}  // namespace rsg
