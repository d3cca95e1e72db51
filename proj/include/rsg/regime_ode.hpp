#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rsg/grid.hpp"
#include "rsg/regime.hpp"

namespace rsg {

/// Values v(t_k, i) on a TimeGrid, one rows x cols block per (node, regime).
/// Blocks are stored column-major, nodes outermost.
class RegimeGrid {
 public:
  RegimeGrid() = default;
  RegimeGrid(TimeGrid grid, int regimes, int rows, int cols = 1);

  const TimeGrid& grid() const { return grid_; }
  int regimes() const { return m_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int block_size() const { return rows_ * cols_; }

  Eigen::Map<Eigen::MatrixXd> operator()(int k, int i) {
    return {data_.data() + offset(k, i), rows_, cols_};
  }
  Eigen::Map<const Eigen::MatrixXd> operator()(int k, int i) const {
    return {data_.data() + offset(k, i), rows_, cols_};
  }
  double value(int k, int i, int r = 0, int c = 0) const { return data_[offset(k, i) + c * rows_ + r]; }
  double& value(int k, int i, int r = 0, int c = 0) { return data_[offset(k, i) + c * rows_ + r]; }

  /// All regimes at node k, stacked (size regimes * block_size).
  std::span<const double> node(int k) const {
    return {data_.data() + offset(k, 0), static_cast<std::size_t>(m_ * block_size())};
  }
  std::span<double> node(int k) {
    return {data_.data() + offset(k, 0), static_cast<std::size_t>(m_ * block_size())};
  }

  /// Linear interpolation in time for regime i.
  Eigen::MatrixXd interpolate(double t, int i) const;

  double max_abs() const;
  double max_abs_diff(const RegimeGrid& other) const;
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t offset(int k, int i) const {
    return (static_cast<std::size_t>(k) * m_ + i) * static_cast<std::size_t>(rows_ * cols_);
  }
  TimeGrid grid_;
  int m_ = 0, rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// Jump integrands v(t_k, j) - v(t_k, i) reconstructed from a solved grid.
class JumpIntegrand {
 public:
  JumpIntegrand() = default;
  explicit JumpIntegrand(RegimeGrid v) : v_(std::move(v)) {}
  Eigen::MatrixXd operator()(int k, int i, int j) const { return v_(k, j) - v_(k, i); }
  const RegimeGrid& source() const { return v_; }

 private:
  RegimeGrid v_;
};

enum class Scheme { kRk4, kEuler };

/// Time derivative of the stacked regime vector: dvdt = f(t, v), both of size
/// regimes * block_size, regime-major.
using StackedRhs = std::function<void(double t, const Eigen::VectorXd& v, Eigen::VectorXd& dvdt)>;

/// Integrates from v(T) = terminal back to t = 0 with step T/N. Throws
/// Error{kNonFiniteDerivative} with the failing time when the derivative is
/// not finite or the solution exceeds `blowup` in max-norm.
RegimeGrid integrate_backward(const StackedRhs& rhs, const std::vector<Eigen::MatrixXd>& terminal,
                              TimeGrid grid, Scheme scheme = Scheme::kRk4, double blowup = 1e12);

/// Adds sum_j lambda_ij (v_j - v_i) to out_i for blocks of size `block`.
void add_markov_coupling(const Generator& gen, const Eigen::VectorXd& v, int block, Eigen::VectorXd& out);

struct LinearBsdeSolution {
  RegimeGrid v;
  JumpIntegrand jumps;
};

using RegimeMatrixFn = std::function<Eigen::MatrixXd(double t, int i)>;

/// Solves v' + F(t,i) v + sum_j lambda_ij [v(j) - v(i)] + h(t,i) = 0,
/// v(T,i) = g[i], for column vectors v. The Brownian integrand is zero.
LinearBsdeSolution solve_linear_regime_bsde(const RegimeMatrixFn& F, const RegimeMatrixFn& h,
                                            const std::vector<Eigen::MatrixXd>& g, const Generator& gen,
                                            TimeGrid grid, Scheme scheme = Scheme::kRk4);

}  // namespace rsg
