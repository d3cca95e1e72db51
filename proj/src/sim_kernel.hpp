#pragma once

// Flat-table Euler kernel shared by simulate_paths and the perturbation tests.

#include <cstdint>
#include <vector>

#include "rsg/simulate.hpp"

namespace rsg::detail {

/// Coefficients at every (node, regime), flat arrays indexed by idx(k, i)
/// times the entry size.
struct StepTable {
  int N = 0, m = 0, m0 = 0, nF = 0;
  double T = 0, dt = 0;
  TerminalForm terminal = TerminalForm::kQuadratic;
  std::vector<double> A, Abar, C, Cbar, b, sigma, QF, QFbar, QL, QLbar;
  std::vector<double> BL, DL;  // m0 per entry
  std::vector<double> BF, DF;  // nF per entry
  std::vector<double> RF;      // nF * nF per entry, column-major
  std::vector<double> RL;      // m0 * m0 per entry
  std::vector<double> GF, GFbar, GL, GLbar;  // per regime

  std::size_t idx(int k, int i) const { return static_cast<std::size_t>(k) * m + i; }
};

StepTable tabulate(const ProblemSpec& spec);

/// x^T M x for a column-major n x n block.
inline double quad_form(const double* M, const double* x, int n) {
  double s = 0;
  for (int c = 0; c < n; ++c) {
    double col = 0;
    for (int r = 0; r < n; ++r) col += M[c * n + r] * x[r];
    s += x[c] * col;
  }
  return s;
}

/// y^T M x for a column-major n x n block.
inline double bilinear(const double* M, const double* y, const double* x, int n) {
  double s = 0;
  for (int c = 0; c < n; ++c) {
    double col = 0;
    for (int r = 0; r < n; ++r) col += M[c * n + r] * y[r];
    s += x[c] * col;
  }
  return s;
}

inline double dot(const double* a, const double* b, int n) {
  double s = 0;
  for (int r = 0; r < n; ++r) s += a[r] * b[r];
  return s;
}

/// Per-path working storage, reused across paths on one thread.
struct PathBuffers {
  ChainPath chain;
  std::vector<int> regime;          // N + 1
  std::vector<double> dW;           // N
  std::vector<double> s, s_hat;     // (N + 1) * d
  std::vector<double> uF, uF_hat;   // (N + 1) * nF
  std::vector<double> uL, uL_hat;   // (N + 1) * m0
  double JF_run = 0, JF_term = 0, JL_run = 0, JL_term = 0;

  void resize(int N, int d, int nF, int m0);
};

/// Draws the chain and Brownian increments of path `path` and fills the
/// per-node regime and dW arrays.
void draw_noise(const ProblemSpec& spec, std::uint64_t seed, std::uint64_t path, const ChainPath* fixed_chain,
                PathBuffers& buf);

/// Euler-Maruyama state, filter, controls and costs for the noise in `buf`.
void run_path(const StepTable& tab, const StrategyProfile& prof, double x0, Quadrature quad, PathBuffers& buf);

/// Copies the buffers into a standalone trajectory record.
SimulationPath to_record(const ProblemSpec& spec, const StrategyProfile& prof, const PathBuffers& buf);

/// Running-cost integrands at node k for the state and controls stored in buf.
void running_integrands(const StepTable& tab, const PathBuffers& buf, int d, int k, double& fF, double& fL);

}  // namespace rsg::detail
