#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsg/grid.hpp"
#include "rsg/regime.hpp"

namespace rsg {

/// A coefficient as a function of (t, regime): constant in time, or sampled
/// on its own uniform node set over [0, T] and linearly interpolated.
template <class V>
class CoefficientField {
 public:
  CoefficientField() = default;

  static CoefficientField constant(std::vector<V> per_regime) {
    CoefficientField f;
    for (auto& v : per_regime) f.nodes_.push_back({std::move(v)});
    return f;
  }
  /// per_regime[i] holds K+1 >= 2 samples at t = jT/K.
  static CoefficientField sampled(std::vector<std::vector<V>> per_regime, double T) {
    CoefficientField f;
    f.nodes_ = std::move(per_regime);
    f.T_ = T;
    return f;
  }

  V at(double t, int i) const {
    const auto& n = nodes_[i];
    if (n.size() == 1) return n[0];
    const int K = static_cast<int>(n.size()) - 1;
    double s = t / T_ * K;
    if (s <= 0.0) return n[0];
    if (s >= K) return n[K];
    const int j = static_cast<int>(s);
    const double w = s - j;
    if (w == 0.0) return n[j];
    return V((1.0 - w) * n[j] + w * n[j + 1]);
  }

  int regimes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<std::vector<V>>& nodes() const { return nodes_; }
  bool is_constant() const {
    for (const auto& n : nodes_)
      if (n.size() != 1) return false;
    return true;
  }

 private:
  double T_ = 1.0;
  std::vector<std::vector<V>> nodes_;
};

using ScalarField = CoefficientField<double>;
using MatrixField = CoefficientField<Eigen::MatrixXd>;

struct Dims {
  int m0 = 1;  // leader control
  int m1 = 1;  // follower 1
  int m2 = 1;  // follower 2
  int nF() const { return m1 + m2; }
};

/// How terminal cost terms enter the cost functionals.
/// kQuadratic: (1/2)(G x(T)^2 + G_bar x_hat(T)^2).
/// kLinear:    G_bar x_hat(T) (pricing problems; G must be zero).
enum class TerminalForm { kQuadratic, kLinear };

struct DynamicsCoefficients {
  ScalarField A, Abar, C, Cbar, b, sigma;
  MatrixField B_L, B_F1, B_F2, D_L, D_F1, D_F2;  // 1 x m0, 1 x m1, 1 x m2
};

struct FollowerCost {
  ScalarField Q, Qbar;
  MatrixField R1, R2, S;  // m1 x m1, m2 x m2, m1 x m2
  std::vector<double> G, Gbar;
};

struct LeaderCost {
  ScalarField Q, Qbar;
  MatrixField R;  // m0 x m0
  std::vector<double> G, Gbar;
};

struct ProblemSpec {
  Generator generator;
  double T = 1.0;
  int N = 1000;
  Dims dims;
  double x0 = 0.0;
  int initial_regime = 0;
  TerminalForm terminal_form = TerminalForm::kQuadratic;
  DynamicsCoefficients dyn;
  FollowerCost follower;
  LeaderCost leader;
  /// Exogenous leader control (m0 x 1 per regime) used in followers-only mode.
  MatrixField leader_control;

  /// All coefficients zero (R blocks zero too), shapes set from dims.
  static ProblemSpec zero(const Generator& gen, double T, int N, Dims dims = {});

  int regimes() const { return generator.size(); }
  TimeGrid grid() const { return {T, N}; }

  Eigen::RowVectorXd B_F(double t, int i) const;
  Eigen::RowVectorXd D_F(double t, int i) const;
  /// Assembled [[R1, S], [S^T, R2]].
  Eigen::MatrixXd R_F(double t, int i) const;
};

/// Shape, finiteness and symmetry checks. Throws Error{kInvalidArgument}.
void validate(const ProblemSpec& spec);

/// Scalar helpers for uniform-in-regime fields.
ScalarField constant_field(int m, double value);
MatrixField constant_field(int m, const Eigen::MatrixXd& value);

struct Tolerances {
  double invert = 1e-10;    // relative to the matrix max-norm
  double symmetry = 1e-12;  // relative to the matrix max-norm
};

struct Constants {
  double q0 = 0, g0 = 0, c1 = 0, cbar1 = 0, cbar2 = 0, c3 = 0;
  double varrho = 0, varrho_bar = 0;
  /// c1 = 0: values come from the c1 -> 0 limit.
  bool degenerate = false;
};

/// Maxima are taken over the solver grid nodes and all regimes.
Constants derive_constants(const ProblemSpec& spec);

struct Diagnostic {
  std::string check;
  bool ok = true;
  double worst = 0.0;  // worst value of the tested quantity
  double t = 0.0;      // where it occurred
  int regime = 0;
  std::string note;
};

struct AssumptionReport {
  bool F2 = false, F3 = false, F4 = false, F5 = false;
  bool L1 = false, L2 = false, L3 = false;
  bool rf1_positive = false;   // R_F1 positive definite everywhere
  bool rf2_negative = false;   // R_F2 negative definite everywhere
  bool pricing_structure = false;
  Constants constants;
  double underline_c2 = 0.0;
  std::vector<Diagnostic> diagnostics;
};

AssumptionReport check_assumptions(const ProblemSpec& spec, const Tolerances& tol = {});

/// Nonzero coefficients excluded by the pricing structure, empty if none.
std::vector<std::string> pricing_structure_violations(const ProblemSpec& spec);

}  // namespace rsg
