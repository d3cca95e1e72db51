#include "rsg/verify.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>

#include <omp.h>

#include "rsg/errors.hpp"
#include "rsg/perturbation.hpp"

namespace rsg {

const char* status_name(CheckResult::Status s) {
  switch (s) {
    case CheckResult::Status::kPass: return "PASS";
    case CheckResult::Status::kFail: return "FAIL";
    case CheckResult::Status::kSkipped: return "SKIP";
  }
  return "?";
}

bool VerifyReport::pass() const {
  for (const auto& c : checks)
    if (c.status == CheckResult::Status::kFail) return false;
  return true;
}

MartingaleStats martingale_stats(const ProblemSpec& spec, std::uint64_t n, std::uint64_t seed, int threads) {
  const int m = spec.regimes();
  const auto np = static_cast<std::int64_t>(n);
  std::vector<double> res(np * m * m);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t p = 0; p < np; ++p) {
    auto rng = path_engine(seed, p, Stream::kChain);
    const ChainPath path = sample_chain(spec.generator, spec.initial_regime, spec.T, rng);
    const Eigen::MatrixXd r = martingale_ledger(path, spec.generator, spec.T).residuals();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) res[(p * m + i) * m + j] = r(i, j);
  }
  MartingaleStats out{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m)};
  std::vector<double> col(np);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      for (std::int64_t p = 0; p < np; ++p) col[p] = res[(p * m + i) * m + j];
      const MCEstimate e = estimate(col, seed);
      out.mean(i, j) = e.mean;
      out.se(i, j) = e.se;
    }
  return out;
}

namespace {

using Status = CheckResult::Status;

CheckResult make(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok ? Status::kPass : Status::kFail, detail};
}

CheckResult skipped(const std::string& name, const std::string& why) { return {name, Status::kSkipped, why}; }

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string summarize(const PerturbationReport& rep) {
  std::size_t failed = 0;
  std::ostringstream os;
  for (const auto& c : rep.cases)
    if (!c.pass) {
      if (failed++ < 3)
        os << " [" << c.player << " v=" << c.direction << " eps=" << c.eps << ": " << num(c.diff.mean) << " +- "
           << num(c.diff.se) << "]";
    }
  for (const auto& c : rep.curvature)
    if (!c.pass) os << " [curvature " << c.player << " v=" << c.direction << ": " << num(c.diff.mean) << "]";
  for (const auto& s : rep.scaling)
    if (!s.pass) os << " [eps^2 scaling v=" << s.direction << ": max rel dev " << num(s.max_rel_dev) << "]";
  return std::to_string(rep.cases.size() - failed) + "/" + std::to_string(rep.cases.size()) + " cases in band" +
         os.str();
}

/// (P, Pbar, phi) whose p = P x + Pbar x_hat + phi is the followers' adjoint,
/// or false when the mode has no regime-deterministic follower layer.
bool adjoint_grids(const ProblemSpec& spec, Mode mode, const SolveOptions& opts, ModeSolution& sol) {
  if (mode == Mode::kStackelberg) return false;
  sol = solve_mode(spec, mode, opts);
  if (mode == Mode::kPricing) sol.phi = sol.pricing.p;
  return true;
}

}  // namespace

VerifyReport run_verify(const ProblemSpec& spec, const VerifyOptions& opts) {
  VerifyReport rep;
  const ModeSolution sol = solve_mode(spec, opts.mode, opts.solve);
  const AssumptionReport ar = check_assumptions(spec, opts.solve.tol);

  {
    RegimeGrid P = sol.follower.P;
    if (opts.corrupt_terminal != 0.0)
      for (int i = 0; i < spec.regimes(); ++i) P.value(spec.N, i) += opts.corrupt_terminal;
    const EnvelopeCheck ec = check_envelope(P, envelope(spec));
    rep.checks.push_back(make("envelope", ec.ok,
                              "worst margin " + num(ec.worst_margin) + " at t = " + num(spec.grid().t(ec.k)) +
                                  ", regime " + std::to_string(ec.regime + 1)));
  }

  if (ar.L3) {
    const LeaderRiccati pl = solve_PL(spec, opts.solve);
    const RegimeGrid block = solve_PL_blockform(spec, opts.solve);
    double diff = 0;
    const int m = spec.regimes();
    for (int k = 0; k <= spec.N; ++k)
      for (int i = 0; i < m; ++i)
        diff = std::max(diff, (pl.P(k, i) - block(k, 0).block(2 * i, 2 * i, 2, 2)).cwiseAbs().maxCoeff());
    rep.checks.push_back(make("cross-solver", diff <= 1e-8, "max |P_L - P_L(block form)| = " + num(diff)));
  } else {
    rep.checks.push_back(skipped("cross-solver", "L3 does not hold"));
  }

  PerturbationOptions po;
  po.n_paths = opts.n_paths;
  po.seed = opts.seed;
  po.threads = opts.threads;
  {
    const PerturbationReport sr = saddle_test(spec, sol.profile, po);
    rep.checks.push_back(make("saddle", sr.pass(), summarize(sr)));
  }
  if (opts.mode == Mode::kFollowers) {
    rep.checks.push_back(skipped("leader", "followers mode: leader control is exogenous"));
  } else {
    const FollowerRiccati* resp = opts.mode == Mode::kPricing ? nullptr : &sol.follower;
    const PerturbationReport lr = leader_test(spec, sol.profile, resp, po, opts.solve);
    rep.checks.push_back(make("leader", lr.pass(), summarize(lr)));
  }

  {
    ModeSolution coarse, fine;
    ProblemSpec spec2 = spec;
    spec2.N = 2 * spec.N;
    if (adjoint_grids(spec, opts.mode, opts.solve, coarse) && adjoint_grids(spec2, opts.mode, opts.solve, fine)) {
      HamiltonianOptions ho;
      ho.n_paths = opts.hamiltonian_paths;
      ho.seed = opts.seed;
      ho.threads = opts.threads;
      const ResidualStats r1 =
          hamiltonian_residual(spec, coarse.profile, coarse.follower.P, coarse.follower.Pbar, coarse.phi, ho);
      const ResidualStats r2 =
          hamiltonian_residual(spec2, fine.profile, fine.follower.P, fine.follower.Pbar, fine.phi, ho);
      const double ratio = r1.terminal.mean / r2.terminal.mean;
      const bool tiny = r1.terminal.mean <= 1e-12 && r2.terminal.mean <= 1e-12;
      rep.checks.push_back(make("hamiltonian", tiny || (ratio >= 1.6 && ratio <= 2.4),
                                "mean terminal residual " + num(r1.terminal.mean) + " (N = " +
                                    std::to_string(spec.N) + "), " + num(r2.terminal.mean) + " (N = " +
                                    std::to_string(spec2.N) + "), ratio " + num(ratio)));
    } else {
      rep.checks.push_back(skipped("hamiltonian", "stackelberg mode: leader control is not regime-deterministic"));
    }
  }

  {
    const MartingaleStats ms = martingale_stats(spec, opts.martingale_paths, opts.seed, opts.threads);
    bool ok = true;
    std::ostringstream os;
    for (int i = 0; i < spec.regimes(); ++i)
      for (int j = 0; j < spec.regimes(); ++j) {
        if (i == j || spec.generator.rate(i, j) == 0.0) continue;
        ok = ok && std::abs(ms.mean(i, j)) <= 3.0 * ms.se(i, j);
        os << " M_" << i + 1 << j + 1 << "(T) = " << num(ms.mean(i, j)) << " +- " << num(ms.se(i, j)) << ";";
      }
    rep.checks.push_back(make("martingale", ok, os.str()));
  }
  return rep;
}

}  // namespace rsg
