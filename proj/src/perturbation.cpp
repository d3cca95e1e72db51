#include "rsg/perturbation.hpp"

#include <cmath>
#include <cstdint>

#include <omp.h>

#include "rsg/errors.hpp"
#include "sim_kernel.hpp"

namespace rsg {

using Eigen::MatrixXd;

std::vector<Direction> default_directions(int regimes) {
  std::vector<Direction> out;
  out.push_back({"+1", std::vector<double>(regimes, 1.0)});
  out.push_back({"-1", std::vector<double>(regimes, -1.0)});
  for (int i = 0; i < regimes; ++i) {
    Direction d{"1{alpha=" + std::to_string(i + 1) + "}", std::vector<double>(regimes, 0.0)};
    d.value[i] = 1.0;
    out.push_back(std::move(d));
  }
  return out;
}

bool PerturbationReport::pass() const {
  for (const auto& c : cases)
    if (!c.pass) return false;
  for (const auto& c : curvature)
    if (!c.pass) return false;
  for (const auto& s : scaling)
    if (!s.pass) return false;
  return true;
}

namespace {

enum class Player { kF1, kF2, kL };

const char* player_name(Player p) {
  switch (p) {
    case Player::kF1: return "F1";
    case Player::kF2: return "F2";
    case Player::kL: return "L";
  }
  return "?";
}

/// One perturbed control and the cost it is measured on.
struct DeltaCase {
  Player player;
  const Direction* dir;
  bool leader_cost;  // measure J_L instead of J_F
  // Follower response to a leader perturbation (nF x 1 grids), or null.
  const RegimeGrid* Kx = nullptr;
  const RegimeGrid* Kxhat = nullptr;
  const RegimeGrid* offset = nullptr;
};

struct DeltaScratch {
  std::vector<double> xi, xih, duF, duFh, duL, duLh;
  void resize(int N, int nF, int m0) {
    xi.resize(N + 1);
    xih.resize(N + 1);
    duF.resize((N + 1) * nF);
    duFh.resize((N + 1) * nF);
    duL.resize((N + 1) * m0);
    duLh.resize((N + 1) * m0);
  }
};

/// Controls perturbation at node k for unit eps.
void delta_controls(const detail::StepTable& tab, const DeltaCase& dc, const detail::PathBuffers& buf,
                    DeltaScratch& sc, int k, int m1) {
  const int nF = tab.nF, m0 = tab.m0, i = buf.regime[k];
  const double v = dc.dir->value[i];
  double* duF = &sc.duF[k * nF];
  double* duFh = &sc.duFh[k * nF];
  double* duL = &sc.duL[k * m0];
  double* duLh = &sc.duLh[k * m0];
  for (int r = 0; r < nF; ++r) duF[r] = duFh[r] = 0.0;
  for (int r = 0; r < m0; ++r) duL[r] = duLh[r] = 0.0;
  switch (dc.player) {
    case Player::kF1:
      for (int r = 0; r < m1; ++r) duF[r] = duFh[r] = v;
      break;
    case Player::kF2:
      for (int r = m1; r < nF; ++r) duF[r] = duFh[r] = v;
      break;
    case Player::kL:
      for (int r = 0; r < m0; ++r) duL[r] = duLh[r] = v;
      if (dc.offset) {
        for (int r = 0; r < nF; ++r) {
          const double kx = dc.Kx->value(k, i, r), kh = dc.Kxhat->value(k, i, r), off = dc.offset->value(k, i, r);
          duF[r] = kx * sc.xi[k] + kh * sc.xih[k] + off;
          duFh[r] = (kx + kh) * sc.xih[k] + off;
        }
      }
      break;
  }
}

/// Linear and quadratic coefficients of J(eps) - J(0) on one path.
void delta_pass(const detail::StepTable& tab, const detail::PathBuffers& buf, int d, int m1, Quadrature quad,
                const DeltaCase& dc, DeltaScratch& sc, double& lin, double& qd) {
  const int N = tab.N, nF = tab.nF, m0 = tab.m0;
  const double dt = tab.dt;
  sc.xi[0] = sc.xih[0] = 0.0;
  for (int k = 0;; ++k) {
    delta_controls(tab, dc, buf, sc, k, m1);
    if (k == N) break;
    const std::size_t e = tab.idx(k, buf.regime[k]);
    const double* duF = &sc.duF[k * nF];
    const double* duL = &sc.duL[k * m0];
    const double xi = sc.xi[k], xih = sc.xih[k];
    const double drift = tab.A[e] * xi + tab.Abar[e] * xih + detail::dot(&tab.BL[e * m0], duL, m0) +
                         detail::dot(&tab.BF[e * nF], duF, nF);
    const double diff = tab.C[e] * xi + tab.Cbar[e] * xih + detail::dot(&tab.DL[e * m0], duL, m0) +
                        detail::dot(&tab.DF[e * nF], duF, nF);
    sc.xi[k + 1] = xi + drift * dt + diff * buf.dW[k];
    sc.xih[k + 1] = xih + ((tab.A[e] + tab.Abar[e]) * xih + detail::dot(&tab.BL[e * m0], &sc.duLh[k * m0], m0) +
                           detail::dot(&tab.BF[e * nF], &sc.duFh[k * nF], nF)) *
                              dt;
  }

  auto node = [&](int k, double& l, double& q) {
    const std::size_t e = tab.idx(k, buf.regime[k]);
    const double x = buf.s[k * d], xh = buf.s_hat[k * d], xi = sc.xi[k], xih = sc.xih[k];
    if (dc.leader_cost) {
      const double* R = &tab.RL[e * m0 * m0];
      l = tab.QL[e] * x * xi + tab.QLbar[e] * xh * xih + detail::bilinear(R, &buf.uL[k * m0], &sc.duL[k * m0], m0);
      q = 0.5 * (tab.QL[e] * xi * xi + tab.QLbar[e] * xih * xih + detail::quad_form(R, &sc.duL[k * m0], m0));
    } else {
      const double* R = &tab.RF[e * nF * nF];
      l = tab.QF[e] * x * xi + tab.QFbar[e] * xh * xih + detail::bilinear(R, &buf.uF[k * nF], &sc.duF[k * nF], nF);
      q = 0.5 * (tab.QF[e] * xi * xi + tab.QFbar[e] * xih * xih + detail::quad_form(R, &sc.duF[k * nF], nF));
    }
  };

  lin = qd = 0.0;
  double l0, q0;
  node(0, l0, q0);
  for (int k = 0; k < N; ++k) {
    double l1, q1;
    node(k + 1, l1, q1);
    if (quad == Quadrature::kLeftRiemann) {
      lin += l0 * dt;
      qd += q0 * dt;
    } else {
      lin += 0.5 * (l0 + l1) * dt;
      qd += 0.5 * (q0 + q1) * dt;
    }
    l0 = l1;
    q0 = q1;
  }
  const int iN = buf.regime[N];
  const double xT = buf.s[N * d], xhT = buf.s_hat[N * d], xi = sc.xi[N], xih = sc.xih[N];
  const double G = dc.leader_cost ? tab.GL[iN] : tab.GF[iN];
  const double Gbar = dc.leader_cost ? tab.GLbar[iN] : tab.GFbar[iN];
  if (tab.terminal == TerminalForm::kQuadratic) {
    lin += G * xT * xi + Gbar * xhT * xih;
    qd += 0.5 * (G * xi * xi + Gbar * xih * xih);
  } else {
    lin += Gbar * xih;
  }
}

struct PairedRun {
  SimulationResult base;
  std::vector<double> lin, quad;  // path-major, n x cases
};

PairedRun run_paired(const ProblemSpec& spec, const StrategyProfile& prof, const std::vector<DeltaCase>& cases,
                     std::uint64_t n_paths, std::uint64_t seed, int threads) {
  if (!(prof.grid == spec.grid()) || prof.regimes != spec.regimes())
    throw Error(Errc::kGridMismatch, "strategy profile does not match the problem grid");
  const detail::StepTable tab = detail::tabulate(spec);
  const auto n = static_cast<std::int64_t>(n_paths);
  const std::size_t nc = cases.size();
  PairedRun out;
  out.base.JF_path.resize(n);
  out.base.JL_path.resize(n);
  out.lin.resize(n * nc);
  out.quad.resize(n * nc);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  const int d = prof.state_dim, m1 = spec.dims.m1;

#pragma omp parallel num_threads(nt)
  {
    detail::PathBuffers buf;
    buf.resize(spec.N, d, tab.nF, tab.m0);
    DeltaScratch sc;
    sc.resize(spec.N, tab.nF, tab.m0);
#pragma omp for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
      detail::draw_noise(spec, seed, p, nullptr, buf);
      detail::run_path(tab, prof, spec.x0, Quadrature::kLeftRiemann, buf);
      out.base.JF_path[p] = buf.JF_run + buf.JF_term;
      out.base.JL_path[p] = buf.JL_run + buf.JL_term;
      for (std::size_t c = 0; c < nc; ++c)
        delta_pass(tab, buf, d, m1, Quadrature::kLeftRiemann, cases[c], sc, out.lin[p * nc + c],
                   out.quad[p * nc + c]);
    }
  }
  out.base.JF = estimate(out.base.JF_path, seed);
  out.base.JL = estimate(out.base.JL_path, seed);
  return out;
}

std::vector<double> column(const std::vector<double>& v, std::size_t nc, std::size_t c) {
  std::vector<double> out(v.size() / nc);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = v[p * nc + c];
  return out;
}

MCEstimate paired_diff(const PairedRun& run, std::size_t nc, std::size_t c, double eps, std::uint64_t seed) {
  const std::size_t n = run.lin.size() / nc;
  std::vector<double> diff(n);
  for (std::size_t p = 0; p < n; ++p) diff[p] = eps * run.lin[p * nc + c] + eps * eps * run.quad[p * nc + c];
  return estimate(diff, seed);
}

}  // namespace

PerturbationReport saddle_test(const ProblemSpec& spec, const StrategyProfile& prof, const PerturbationOptions& opts) {
  const auto dirs = opts.directions.empty() ? default_directions(spec.regimes()) : opts.directions;
  std::vector<DeltaCase> cases;
  for (Player pl : {Player::kF1, Player::kF2})
    for (const auto& d : dirs) cases.push_back({pl, &d, false});
  const PairedRun run = run_paired(spec, prof, cases, opts.n_paths, opts.seed, opts.threads);

  PerturbationReport rep;
  rep.baseline_JF = run.base.JF;
  rep.baseline_JL = run.base.JL;
  const std::size_t nc = cases.size();
  for (std::size_t c = 0; c < nc; ++c) {
    const bool minimiser = cases[c].player == Player::kF1;
    for (double eps : opts.eps) {
      PerturbationCase pc{player_name(cases[c].player), cases[c].dir->name, eps,
                          paired_diff(run, nc, c, eps, opts.seed)};
      pc.pass = minimiser ? pc.diff.mean >= -opts.band * pc.diff.se : pc.diff.mean <= opts.band * pc.diff.se;
      if (pc.diff.se == 0 || std::isnan(pc.diff.se)) pc.pass = minimiser ? pc.diff.mean >= 0 : pc.diff.mean <= 0;
      rep.cases.push_back(pc);
    }
    PerturbationCase cv{player_name(cases[c].player), cases[c].dir->name, 0.0,
                        estimate(column(run.quad, nc, c), opts.seed)};
    cv.pass = minimiser ? cv.diff.mean >= -opts.band * cv.diff.se : cv.diff.mean <= opts.band * cv.diff.se;
    rep.curvature.push_back(cv);
  }
  return rep;
}

PerturbationReport leader_test(const ProblemSpec& spec, const StrategyProfile& prof, const FollowerRiccati* follower,
                               const PerturbationOptions& opts, const SolveOptions& solve) {
  const auto dirs = opts.directions.empty() ? default_directions(spec.regimes()) : opts.directions;
  const int m = spec.regimes(), nF = spec.dims.nF();
  const TimeGrid g = spec.grid();

  // Follower response grids, one offset per direction.
  RegimeGrid Kx, Kxhat;
  std::vector<RegimeGrid> offsets(dirs.size());
  if (follower) {
    const FeedbackCoeffs coeffs = feedback_coeffs(spec, *follower, solve.tol);
    Kx = RegimeGrid(g, m, nF, 1);
    Kxhat = RegimeGrid(g, m, nF, 1);
    for (int k = 0; k <= g.N; ++k)
      for (int i = 0; i < m; ++i) {
        Kx(k, i) = coeffs.at(k, i).Kx;
        Kxhat(k, i) = coeffs.at(k, i).Kxhat;
      }
    ProblemSpec homog = spec;
    homog.dyn.b = constant_field(m, 0.0);
    homog.dyn.sigma = constant_field(m, 0.0);
    for (std::size_t c = 0; c < dirs.size(); ++c) {
      RegimeGrid v(g, m, spec.dims.m0, 1);
      for (int k = 0; k <= g.N; ++k)
        for (int i = 0; i < m; ++i) v(k, i).setConstant(dirs[c].value[i]);
      const PhiSolution phi_v = solve_phi(homog, *follower, v, solve);
      offsets[c] = follower_feedback(homog, *follower, coeffs, phi_v.phi, v).F_offset;
    }
  }

  std::vector<DeltaCase> cases;
  for (std::size_t c = 0; c < dirs.size(); ++c) {
    DeltaCase dc{Player::kL, &dirs[c], true};
    if (follower) {
      dc.Kx = &Kx;
      dc.Kxhat = &Kxhat;
      dc.offset = &offsets[c];
    }
    cases.push_back(dc);
  }
  const PairedRun run = run_paired(spec, prof, cases, opts.n_paths, opts.seed, opts.threads);

  PerturbationReport rep;
  rep.baseline_JF = run.base.JF;
  rep.baseline_JL = run.base.JL;
  const std::size_t nc = cases.size();
  for (std::size_t c = 0; c < nc; ++c) {
    ScalingCheck sc;
    sc.player = "L";
    sc.direction = dirs[c].name;
    for (double eps : opts.eps) {
      PerturbationCase pc{"L", dirs[c].name, eps, paired_diff(run, nc, c, eps, opts.seed)};
      pc.pass = pc.diff.mean >= -opts.band * pc.diff.se;
      if (pc.diff.se == 0 || std::isnan(pc.diff.se)) pc.pass = pc.diff.mean >= 0;
      rep.cases.push_back(pc);
      if (eps > 0) sc.ratio.push_back(pc.diff.mean / (eps * eps));
    }
    if (!sc.ratio.empty()) {
      double mean = 0;
      for (double r : sc.ratio) mean += r;
      mean /= static_cast<double>(sc.ratio.size());
      for (double r : sc.ratio) sc.max_rel_dev = std::max(sc.max_rel_dev, std::abs(r / mean - 1.0));
      sc.pass = std::isfinite(sc.max_rel_dev) && sc.max_rel_dev <= 0.25;
      rep.scaling.push_back(sc);
    }
  }
  return rep;
}

ResidualStats hamiltonian_residual(const ProblemSpec& spec, const StrategyProfile& prof, const RegimeGrid& P,
                                   const RegimeGrid& Pbar, const RegimeGrid& phi, const HamiltonianOptions& opts) {
  const TimeGrid g = spec.grid();
  if (!(prof.grid == g) || !(P.grid() == g) || !(Pbar.grid() == g) || !(phi.grid() == g))
    throw Error(Errc::kGridMismatch, "adjoint grids differ from the problem grid");
  const detail::StepTable tab = detail::tabulate(spec);
  const auto n = static_cast<std::int64_t>(opts.n_paths);
  const int N = spec.N, m = spec.regimes(), d = prof.state_dim, nF = tab.nF, m0 = tab.m0;
  const double dt = g.dt();
  std::vector<double> term(n), step_abs(n);
  const int nt = opts.threads > 0 ? opts.threads : omp_get_max_threads();
  const Eigen::MatrixXd& L = spec.generator.rates();

#pragma omp parallel num_threads(nt)
  {
    detail::PathBuffers buf;
    buf.resize(N, d, nF, m0);
#pragma omp for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
      detail::draw_noise(spec, opts.seed, p, nullptr, buf);
      detail::run_path(tab, prof, spec.x0, Quadrature::kLeftRiemann, buf);
      auto rec = [&](int k, int i) {
        return P.value(k, i) * buf.s[k * d] + Pbar.value(k, i) * buf.s_hat[k * d] + phi.value(k, i);
      };
      double prop = rec(0, buf.regime[0]);
      double abs_sum = 0;
      for (int k = 0; k < N; ++k) {
        const int i = buf.regime[k], j = buf.regime[k + 1];
        const std::size_t e = tab.idx(k, i);
        const double x = buf.s[k * d], xh = buf.s_hat[k * d];
        const double Pk = P.value(k, i), Pbk = Pbar.value(k, i), ph = phi.value(k, i);
        const double p_now = rec(k, i);
        const double p_hat = (Pk + Pbk) * xh + ph;
        const double q = Pk * (tab.C[e] * x + tab.Cbar[e] * xh + detail::dot(&tab.DL[e * m0], &buf.uL[k * m0], m0) +
                               detail::dot(&tab.DF[e * nF], &buf.uF[k * nF], nF) + tab.sigma[e]);
        const double q_hat =
            Pk * ((tab.C[e] + tab.Cbar[e]) * xh + detail::dot(&tab.DL[e * m0], &buf.uL_hat[k * m0], m0) +
                  detail::dot(&tab.DF[e * nF], &buf.uF_hat[k * nF], nF) + tab.sigma[e]);
        const double drift = -(tab.A[e] * p_now + tab.Abar[e] * p_hat + tab.C[e] * q + tab.Cbar[e] * q_hat +
                               tab.QF[e] * x + tab.QFbar[e] * xh);
        double compensator = 0;
        for (int l = 0; l < m; ++l)
          if (l != i)
            compensator += L(i, l) * ((P.value(k, l) - Pk) * x + (Pbar.value(k, l) - Pbk) * xh + phi.value(k, l) - ph);
        double jump = 0;
        if (j != i) {
          const double x1 = buf.s[(k + 1) * d], xh1 = buf.s_hat[(k + 1) * d];
          jump = (P.value(k + 1, j) - P.value(k + 1, i)) * x1 + (Pbar.value(k + 1, j) - Pbar.value(k + 1, i)) * xh1 +
                 phi.value(k + 1, j) - phi.value(k + 1, i);
        }
        const double incr = drift * dt + q * buf.dW[k] + jump - compensator * dt;
        abs_sum += std::abs(rec(k + 1, j) - p_now - incr);
        prop += incr;
      }
      const int iN = buf.regime[N];
      const double xT = buf.s[N * d], xhT = buf.s_hat[N * d];
      const double target = spec.terminal_form == TerminalForm::kQuadratic
                                ? spec.follower.G[iN] * xT + spec.follower.Gbar[iN] * xhT
                                : spec.follower.Gbar[iN];
      term[p] = std::abs(prop - target);
      step_abs[p] = abs_sum / N;
    }
  }
  ResidualStats out;
  out.N = N;
  out.terminal = estimate(term, opts.seed);
  for (double v : term) out.terminal_max = std::max(out.terminal_max, v);
  out.step_mean = estimate(step_abs).mean;
  return out;
}

}  // namespace rsg
