#include "rsg/regime_ode.hpp"

#include <cmath>

#include "rsg/errors.hpp"

namespace rsg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

RegimeGrid::RegimeGrid(TimeGrid grid, int regimes, int rows, int cols)
    : grid_(grid), m_(regimes), rows_(rows), cols_(cols),
      data_(static_cast<std::size_t>(grid.N + 1) * regimes * rows * cols, 0.0) {}

MatrixXd RegimeGrid::interpolate(double t, int i) const {
  const int N = grid_.N;
  double s = t / grid_.T * N;
  if (s <= 0.0) return (*this)(0, i);
  if (s >= N) return (*this)(N, i);
  const int k = static_cast<int>(s);
  const double w = s - k;
  if (w == 0.0) return (*this)(k, i);
  return (1.0 - w) * (*this)(k, i) + w * (*this)(k + 1, i);
}

double RegimeGrid::max_abs() const {
  double out = 0.0;
  for (double v : data_) out = std::max(out, std::abs(v));
  return out;
}

double RegimeGrid::max_abs_diff(const RegimeGrid& other) const {
  if (other.data_.size() != data_.size()) throw Error(Errc::kGridMismatch, "grids differ in shape");
  double out = 0.0;
  for (std::size_t n = 0; n < data_.size(); ++n) out = std::max(out, std::abs(data_[n] - other.data_[n]));
  return out;
}

void add_markov_coupling(const Generator& gen, const VectorXd& v, int block, VectorXd& out) {
  const int m = gen.size();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const double lam = gen.rate(i, j);
      if (lam == 0.0) continue;
      out.segment(i * block, block) += lam * (v.segment(j * block, block) - v.segment(i * block, block));
    }
}

namespace {

void check_step(const VectorXd& dv, const VectorXd& v, double t, double blowup) {
  if (!dv.allFinite()) throw Error(Errc::kNonFiniteDerivative, "derivative not finite", t);
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > blowup)
    throw Error(Errc::kNonFiniteDerivative, "solution exceeded the blow-up threshold", t);
}

}  // namespace

RegimeGrid integrate_backward(const StackedRhs& rhs, const std::vector<MatrixXd>& terminal, TimeGrid grid,
                              Scheme scheme, double blowup) {
  if (terminal.empty()) throw Error(Errc::kInvalidArgument, "terminal data must cover at least one regime");
  const int m = static_cast<int>(terminal.size());
  const int rows = static_cast<int>(terminal[0].rows()), cols = static_cast<int>(terminal[0].cols());
  const int block = rows * cols;
  RegimeGrid out(grid, m, rows, cols);
  VectorXd v(m * block);
  for (int i = 0; i < m; ++i) {
    if (terminal[i].rows() != rows || terminal[i].cols() != cols)
      throw Error(Errc::kInvalidArgument, "terminal blocks differ in shape");
    v.segment(i * block, block) = Eigen::Map<const VectorXd>(terminal[i].data(), block);
  }
  auto store = [&](int k) {
    auto dst = out.node(k);
    for (int n = 0; n < m * block; ++n) dst[n] = v[n];
  };
  store(grid.N);

  const double h = grid.dt();
  VectorXd k1(m * block), k2(m * block), k3(m * block), k4(m * block), tmp(m * block);
  for (int k = grid.N; k > 0; --k) {
    const double t = grid.t(k);
    const double tm = t - 0.5 * h;
    const double tn = grid.t(k - 1);
    k1.setZero();
    rhs(t, v, k1);
    check_step(k1, v, t, blowup);
    if (scheme == Scheme::kEuler) {
      v -= h * k1;
    } else {
      tmp = v - 0.5 * h * k1;
      k2.setZero();
      rhs(tm, tmp, k2);
      check_step(k2, tmp, tm, blowup);
      tmp = v - 0.5 * h * k2;
      k3.setZero();
      rhs(tm, tmp, k3);
      check_step(k3, tmp, tm, blowup);
      tmp = v - h * k3;
      k4.setZero();
      rhs(tn, tmp, k4);
      check_step(k4, tmp, tn, blowup);
      v -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > blowup)
      throw Error(Errc::kNonFiniteDerivative, "solution exceeded the blow-up threshold", tn);
    store(k - 1);
  }
  return out;
}

LinearBsdeSolution solve_linear_regime_bsde(const RegimeMatrixFn& F, const RegimeMatrixFn& h,
                                            const std::vector<MatrixXd>& g, const Generator& gen, TimeGrid grid,
                                            Scheme scheme) {
  const int m = gen.size();
  if (static_cast<int>(g.size()) != m) throw Error(Errc::kInvalidArgument, "terminal must have one entry per regime");
  const int d = static_cast<int>(g[0].rows());
  auto rhs = [&](double t, const VectorXd& v, VectorXd& dv) {
    for (int i = 0; i < m; ++i)
      dv.segment(i * d, d) = -(F(t, i) * v.segment(i * d, d) + h(t, i));
    VectorXd coupling = VectorXd::Zero(m * d);
    add_markov_coupling(gen, v, d, coupling);
    dv -= coupling;
  };
  LinearBsdeSolution sol;
  sol.v = integrate_backward(rhs, g, grid, scheme);
  sol.jumps = JumpIntegrand(sol.v);
  return sol;
}

}  // namespace rsg
