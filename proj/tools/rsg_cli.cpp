// rsg: solve, simulate and verify regime-switching Stackelberg games from a
// JSON problem file. Exit codes: 0 success, 1 verification failure, 2 input
// error, 3 solver failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsg/csv.hpp"
#include "rsg/errors.hpp"
#include "rsg/problem_io.hpp"
#include "rsg/simulate.hpp"
#include "rsg/solve.hpp"
#include "rsg/verify.hpp"

namespace fs = std::filesystem;
using namespace rsg;

namespace {

constexpr int kExitOk = 0, kExitVerify = 1, kExitInput = 2, kExitSolver = 3;

struct RunConfig {
  std::string problem;
  std::string out;
  std::uint64_t seed = 1;
  std::uint64_t paths = 1000;
  int steps = 0;  // 0 keeps the problem's value
  std::string mode = "followers";
  std::string scheme = "rk4";
  double tol_invert = Tolerances{}.invert;
};

ProblemSpec load(const RunConfig& cfg) {
  ProblemSpec spec = load_problem(cfg.problem);
  if (cfg.steps > 0) spec.N = cfg.steps;
  return spec;
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.scheme = cfg.scheme == "euler" ? Scheme::kEuler : Scheme::kRk4;
  o.tol.invert = cfg.tol_invert;
  return o;
}

std::string out_dir(const RunConfig& cfg) {
  const std::string dir = cfg.out.empty() ? "." : cfg.out;
  fs::create_directories(dir);
  return dir;
}

bool mode_requirements(const AssumptionReport& r, Mode mode) {
  switch (mode) {
    case Mode::kFollowers: return r.F2 && r.F3 && r.F4 && r.F5;
    case Mode::kStackelberg: return r.F2 && r.L1 && r.L2 && r.L3;
    case Mode::kPricing: return r.F2 && r.L1 && r.L3 && r.rf1_positive && r.rf2_negative && r.pricing_structure;
  }
  return false;
}

int cmd_check(const RunConfig& cfg) {
  const ProblemSpec spec = load(cfg);
  const Mode mode = parse_mode(cfg.mode);
  const AssumptionReport r = check_assumptions(spec, solve_options(cfg).tol);
  const bool ok = mode_requirements(r, mode);

  auto yn = [](bool b) { return b ? "true" : "false"; };
  std::printf("F2 %s  F3 %s  F4 %s  F5 %s  L1 %s  L2 %s  L3 %s\n", yn(r.F2), yn(r.F3), yn(r.F4), yn(r.F5), yn(r.L1),
              yn(r.L2), yn(r.L3));
  std::printf("R_F1 > 0 %s  R_F2 < 0 %s  pricing structure %s\n", yn(r.rf1_positive), yn(r.rf2_negative),
              yn(r.pricing_structure));
  const Constants& c = r.constants;
  std::printf("q0 %.6g  g0 %.6g  c1 %.6g  cbar1 %.6g  cbar2 %.6g  c3 %.6g  underline_c2 %.6g  rho %.6g  rho_bar %.6g%s\n",
              c.q0, c.g0, c.c1, c.cbar1, c.cbar2, c.c3, r.underline_c2, c.varrho, c.varrho_bar,
              c.degenerate ? "  (c1 = 0 limit)" : "");
  for (const auto& d : r.diagnostics) {
    std::printf("  [%s] %s: worst %.6g at t = %.6g, regime %d%s%s\n", d.ok ? "ok" : "FAIL", d.check.c_str(), d.worst,
                d.t, d.regime + 1, d.note.empty() ? "" : "; ", d.note.c_str());
  }
  std::printf("mode %s: %s\n", mode_name(mode), ok ? "requirements hold" : "requirements violated");

  nlohmann::ordered_json j;
  j["mode"] = mode_name(mode);
  j["requirements_hold"] = ok;
  for (auto [k, v] : {std::pair{"F2", r.F2}, {"F3", r.F3}, {"F4", r.F4}, {"F5", r.F5}, {"L1", r.L1}, {"L2", r.L2},
                      {"L3", r.L3}, {"rf1_positive", r.rf1_positive}, {"rf2_negative", r.rf2_negative},
                      {"pricing_structure", r.pricing_structure}})
    j["assumptions"][k] = v;
  j["constants"] = {{"q0", c.q0},       {"g0", c.g0},           {"c1", c.c1},
                    {"cbar1", c.cbar1}, {"cbar2", c.cbar2},     {"c3", c.c3},
                    {"underline_c2", r.underline_c2},           {"varrho", c.varrho},
                    {"varrho_bar", c.varrho_bar},               {"degenerate", c.degenerate}};
  for (const auto& d : r.diagnostics)
    j["diagnostics"].push_back(
        {{"check", d.check}, {"ok", d.ok}, {"worst", d.worst}, {"t", d.t}, {"regime", d.regime + 1}, {"note", d.note}});
  if (!cfg.out.empty()) {
    std::ofstream f(out_dir(cfg) + "/assumptions.json", std::ios::binary);
    f << j.dump(2) << '\n';
  }
  return ok ? kExitOk : kExitVerify;
}

void write_solution(const ProblemSpec& spec, const ModeSolution& sol, const std::string& dir) {
  write_grid_csv(dir + "/P_F.csv", sol.follower.P);
  write_grid_csv(dir + "/Pbar_F.csv", sol.follower.Pbar);
  switch (sol.mode) {
    case Mode::kFollowers:
      write_grid_csv(dir + "/phi.csv", sol.phi);
      write_grid_csv(dir + "/u_L.csv", sol.u_L);
      break;
    case Mode::kStackelberg:
      write_grid_csv(dir + "/P_L.csv", sol.leader.P);
      write_grid_csv(dir + "/Pbar_L.csv", sol.leader.Pbar);
      write_grid_csv(dir + "/tau.csv", sol.leader.tau);
      break;
    case Mode::kPricing:
      write_grid_csv(dir + "/p.csv", sol.pricing.p);
      write_grid_csv(dir + "/y.csv", sol.pricing.y);
      break;
  }
  // Gains: u = Kx s + Kxhat s_hat + offset, long format.
  const StrategyProfile& pr = sol.profile;
  CsvWriter w(dir + "/gains.csv", {"t", "regime", "control", "row", "term", "col", "value"});
  for (int k = 0; k <= spec.N; ++k)
    for (int i = 0; i < spec.regimes(); ++i) {
      auto emit = [&](const char* control, const RegimeGrid& g, const char* term) {
        for (int r = 0; r < g.rows(); ++r)
          for (int c = 0; c < g.cols(); ++c)
            w.row(spec.grid().t(k), i + 1, control, r + 1, term, c + 1, g.value(k, i, r, c));
      };
      emit("u_F", pr.F_Kx, "Kx");
      emit("u_F", pr.F_Kxhat, "Kxhat");
      emit("u_F", pr.F_offset, "offset");
      emit("u_L", pr.L_Kx, "Kx");
      emit("u_L", pr.L_Kxhat, "Kxhat");
      emit("u_L", pr.L_offset, "offset");
    }
}

int cmd_solve(const RunConfig& cfg) {
  const ProblemSpec spec = load(cfg);
  const ModeSolution sol = solve_mode(spec, parse_mode(cfg.mode), solve_options(cfg));
  for (const auto& w : sol.leader.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const std::string dir = out_dir(cfg);
  write_solution(spec, sol, dir);
  std::printf("solved %s mode on N = %d, %d regime(s); CSVs in %s\n", mode_name(sol.mode), spec.N, spec.regimes(),
              dir.c_str());
  return kExitOk;
}

/// p and y along the recorded path: pricing p(t, alpha), y(t, alpha);
/// followers p = P x + Pbar x_hat + phi; stackelberg Y = P X + Pbar X_hat + tau.
void write_adjoint_path(const ModeSolution& sol, const SimulationPath& path, const std::string& file) {
  CsvWriter w(file, {"t", "regime", "p", "y"});
  const double nan = std::nan("");
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    const int i = path.regime[k];
    const int kk = static_cast<int>(k);
    double p = nan, y = nan;
    switch (sol.mode) {
      case Mode::kPricing:
        p = sol.pricing.p.value(kk, i);
        y = sol.pricing.y.value(kk, i);
        break;
      case Mode::kFollowers:
        p = sol.follower.P.value(kk, i) * path.x[k] + sol.follower.Pbar.value(kk, i) * path.x_hat[k] +
            sol.phi.value(kk, i);
        break;
      case Mode::kStackelberg: {
        const Eigen::Vector2d X(path.x[k], path.psi[k]), Xh(path.x_hat[k], path.psi_hat[k]);
        const Eigen::Vector2d Y = sol.leader.P(kk, i) * X + sol.leader.Pbar(kk, i) * Xh + sol.leader.tau(kk, i);
        y = Y(0);
        p = Y(1);
        break;
      }
    }
    w.row(path.t[k], i + 1, p, y);
  }
}

int cmd_simulate(const RunConfig& cfg) {
  const ProblemSpec spec = load(cfg);
  const ModeSolution sol = solve_mode(spec, parse_mode(cfg.mode), solve_options(cfg));
  const std::string dir = out_dir(cfg);
  write_solution(spec, sol, dir);

  SimulationOptions so;
  so.n_paths = cfg.paths;
  so.seed = cfg.seed;
  so.record = 1;
  const SimulationResult res = simulate_paths(spec, sol.profile, so);
  const SimulationPath& path = res.recorded.at(0);

  {
    CsvWriter w(dir + "/chain.csv", {"t", "regime"});
    for (std::size_t k = 0; k < path.t.size(); ++k) w.row(path.t[k], path.regime[k] + 1);
  }
  {
    CsvWriter w(dir + "/chain_jumps.csv", {"time", "from", "to"});
    for (std::size_t j = 0; j < path.chain.jump_times.size(); ++j)
      w.row(path.chain.jump_times[j], path.chain.states[j] + 1, path.chain.states[j + 1] + 1);
  }
  write_adjoint_path(sol, path, dir + "/adjoint_path.csv");
  {
    const int nF = spec.dims.nF(), m0 = spec.dims.m0;
    const bool aug = sol.profile.state_dim == 2;
    std::vector<std::string> header{"t", "regime", "x", "x_hat"};
    if (aug) {
      header.push_back("psi");
      header.push_back("psi_hat");
    }
    for (int r = 0; r < m0; ++r) header.push_back("u_L" + std::to_string(r + 1));
    for (int r = 0; r < spec.dims.m1; ++r) header.push_back("u_F1_" + std::to_string(r + 1));
    for (int r = 0; r < spec.dims.m2; ++r) header.push_back("u_F2_" + std::to_string(r + 1));
    CsvWriter w(dir + "/trajectory.csv", header);
    for (std::size_t k = 0; k < path.t.size(); ++k) {
      std::vector<std::string> row{fmt(path.t[k]), fmt(path.regime[k] + 1), fmt(path.x[k]), fmt(path.x_hat[k])};
      if (aug) {
        row.push_back(fmt(path.psi[k]));
        row.push_back(fmt(path.psi_hat[k]));
      }
      for (int r = 0; r < m0; ++r) row.push_back(fmt(path.u_L[k * m0 + r]));
      for (int r = 0; r < nF; ++r) row.push_back(fmt(path.u_F[k * nF + r]));
      w.write(row);
    }
  }
  {
    CsvWriter w(dir + "/costs.csv", {"quantity", "mean", "se", "n", "seed"});
    w.row("J_F", res.JF.mean, res.JF.se, res.JF.n, res.JF.seed);
    w.row("J_L", res.JL.mean, res.JL.se, res.JL.n, res.JL.seed);
  }
  std::printf("J_F = %.10g +- %.3g, J_L = %.10g +- %.3g over %llu paths (seed %llu); CSVs in %s\n", res.JF.mean,
              res.JF.se, res.JL.mean, res.JL.se, static_cast<unsigned long long>(res.JF.n),
              static_cast<unsigned long long>(cfg.seed), dir.c_str());
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::uint64_t paths_given) {
  const ProblemSpec spec = load(cfg);
  VerifyOptions vo;
  vo.mode = parse_mode(cfg.mode);
  vo.solve = solve_options(cfg);
  vo.seed = cfg.seed;
  if (paths_given) vo.n_paths = cfg.paths;
  const VerifyReport rep = run_verify(spec, vo);
  for (const auto& c : rep.checks) std::printf("%-4s %-13s %s\n", status_name(c.status), c.name.c_str(), c.detail.c_str());
  if (!cfg.out.empty()) {
    CsvWriter w(out_dir(cfg) + "/verify.csv", {"check", "status", "detail"});
    for (const auto& c : rep.checks) {
      std::string detail = c.detail;
      for (char& ch : detail)
        if (ch == ',') ch = ';';
      w.row(c.name, status_name(c.status), detail);
    }
  }
  std::printf("%s\n", rep.pass() ? "all checks passed" : "verification failed");
  return rep.pass() ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime-switching conditional mean-field Stackelberg games: check, solve, simulate, verify"};
  app.require_subcommand(1, 1);
  RunConfig cfg;
  std::uint64_t paths_given = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "problem JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--steps", cfg.steps, "override the number of grid steps N")->check(CLI::PositiveNumber);
    sub->add_option("--mode", cfg.mode, "followers | stackelberg | pricing")
        ->check(CLI::IsMember({"followers", "stackelberg", "pricing"}));
    sub->add_option("--scheme", cfg.scheme, "backward ODE scheme")->check(CLI::IsMember({"rk4", "euler"}));
    sub->add_option("--tol-invert", cfg.tol_invert, "relative invertibility tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--paths", cfg.paths, "Monte Carlo paths")->check(CLI::PositiveNumber)->each([&](const std::string&) {
      paths_given = 1;
    });
  };
  CLI::App* check = app.add_subcommand("check", "report assumptions and constants");
  CLI::App* solve = app.add_subcommand("solve", "solve the Riccati / adjoint equations and write CSVs");
  CLI::App* simulate = app.add_subcommand("simulate", "simulate the closed loop and write trajectory CSVs");
  CLI::App* verify = app.add_subcommand("verify", "run the property battery");
  for (auto* s : {check, solve, simulate, verify}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (check->parsed()) return cmd_check(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    return cmd_verify(cfg, paths_given);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_solver_failure() ? kExitSolver : kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
}
