#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace parric {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// (M + M^T)/2.
inline MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Relative asymmetry ||M - M^T||_F / max(1, ||M||_F).
inline double asymmetry(const MatrixXd& m) {
  return (m - m.transpose()).norm() / std::max(1.0, m.norm());
}

/// Relative deviation of two vectors, ||a - b||_inf / (1 + max norm).
inline double rel_deviation(const VectorXd& a, const VectorXd& b) {
  double scale = 1.0 + std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

inline double rel_deviation(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace parric
