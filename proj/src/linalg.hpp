#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace rsg::detail {

inline double max_norm(const Eigen::MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double min_singular_value(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().minCoeff();
}

/// Smallest singular value relative to the max-norm (0 for the zero matrix).
inline double relative_margin(const Eigen::MatrixXd& a) {
  const double n = max_norm(a);
  return n == 0.0 ? 0.0 : min_singular_value(a) / n;
}

inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eig(const Eigen::MatrixXd& a) { return sym_eigenvalues(a).minCoeff(); }
inline double max_eig(const Eigen::MatrixXd& a) { return sym_eigenvalues(a).maxCoeff(); }

inline double asymmetry(const Eigen::MatrixXd& a) { return max_norm(a - a.transpose()); }

inline bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol) {
  return asymmetry(a) <= rel_tol * max_norm(a);
}

}  // namespace rsg::detail
