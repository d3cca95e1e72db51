#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsg/solve.hpp"

namespace rsg {

struct CheckResult {
  enum class Status { kPass, kFail, kSkipped };
  std::string name;
  Status status = Status::kSkipped;
  std::string detail;
};

const char* status_name(CheckResult::Status s);

struct VerifyOptions {
  Mode mode = Mode::kFollowers;
  SolveOptions solve;
  std::uint64_t n_paths = 20000;           // saddle and leader tests
  std::uint64_t hamiltonian_paths = 2000;  // per grid
  std::uint64_t martingale_paths = 100000;
  std::uint64_t seed = 1;
  int threads = 0;
  /// Test hook: added to P_F at t = T after the solve, before the envelope check.
  double corrupt_terminal = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  /// No check failed (skipped checks do not count).
  bool pass() const;
};

/// Property battery: envelope, cross-solver, saddle, leader, Hamiltonian
/// residual (N and 2N) and martingale residuals.
VerifyReport run_verify(const ProblemSpec& spec, const VerifyOptions& opts);

/// Sample mean and standard error of M_ij(T) = [M_ij](T) - <M_ij>(T) over `n` chain paths.
struct MartingaleStats {
  Eigen::MatrixXd mean, se;  // per (i, j); zero on the diagonal
};

MartingaleStats martingale_stats(const ProblemSpec& spec, std::uint64_t n, std::uint64_t seed, int threads = 0);

}  // namespace rsg
