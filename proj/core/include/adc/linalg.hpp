#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace adc {

// Row-major throughout: time is always the leading (row) axis and the inner
// kernels walk rows sequentially.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double silu(double x) { return x * sigmoid(x); }

inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// log(1 + e^x), stable on both tails.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Inverse of softplus: returns b with softplus(b) = y, y > 0.
inline double softplus_inverse(double y) { return std::log(std::expm1(y)); }

inline Vec softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp();
  return e / e.sum();
}

inline bool is_probability_vector(const Vec& p, double tol = 1e-6) {
  if (p.size() == 0 || p.minCoeff() < -tol) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

}  // namespace adc
