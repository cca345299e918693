#pragma once

#include <cmath>
#include <random>

#include <Eigen/Core>

namespace leoho::drl {

/// Numerically stable log-softmax of one head's logits.
template <typename Derived>
Eigen::VectorXd log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  const double max = logits.maxCoeff();
  Eigen::VectorXd shifted = (logits.array() - max).matrix();
  const double log_norm = std::log(shifted.array().exp().sum());
  return (shifted.array() - log_norm).matrix();
}

/// Entropy from log-probabilities; zero-probability entries contribute 0.
inline double entropy_from_log_probs(const Eigen::VectorXd& log_probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < log_probs.size(); ++i) {
    const double p = std::exp(log_probs(i));
    if (p > 0.0) h -= p * log_probs(i);
  }
  return h;
}

/// Inverse-CDF draw from a categorical given log-probabilities.
template <typename Rng>
int sample_categorical(const Eigen::VectorXd& log_probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cdf = 0.0;
  for (Eigen::Index i = 0; i < log_probs.size(); ++i) {
    cdf += std::exp(log_probs(i));
    if (u < cdf) return static_cast<int>(i);
  }
  return static_cast<int>(log_probs.size() - 1);
}

/// Lowest index among the maxima.
inline int argmax_first(const Eigen::VectorXd& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = i;
  return static_cast<int>(best);
}

}  // namespace leoho::drl
