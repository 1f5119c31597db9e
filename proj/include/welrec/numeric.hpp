#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace welrec {

/// Branch-stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// Softmax with max-score subtraction.
inline Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  const double m = scores.maxCoeff();
  Eigen::VectorXd p = (scores.array() - m).exp();
  p /= p.sum();
  return p;
}

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  const double m = scores.maxCoeff();
  return m + std::log((scores.array() - m).exp().sum());
}

}  // namespace welrec
