#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "leoho/network.hpp"
#include "leoho/vtrace.hpp"

namespace leoho::drl {

struct LossBreakdown {
  double policy = 0.0;
  double baseline = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

/// V-trace targets of every segment, evaluated with `params`.
std::vector<VtraceOutput> compute_targets(const PolicyParameters& params,
                                          const std::vector<TrajectorySegment>& batch,
                                          const VtraceConfig& cfg);

/// Three-term loss with the targets held fixed:
///   policy   = -sum log pi(a|s) * pg_adv
///   baseline = 1/2 sum (v - V(s))^2
///   entropy  = sum over free heads of H(pi_j(.|s))
///   total    = policy + baseline_coeff * baseline - entropy_coeff * entropy
/// Writes the exact gradient of `total` when `gradient` is non-null.
/// Throws std::domain_error for a non-finite loss.
LossBreakdown loss_with_targets(const PolicyParameters& params,
                                const std::vector<TrajectorySegment>& batch,
                                const std::vector<VtraceOutput>& targets, const VtraceConfig& cfg,
                                Eigen::VectorXd* gradient);

/// Targets from the current parameters followed by loss_with_targets, sharing
/// one forward pass.
LossBreakdown loss_and_gradient(const PolicyParameters& params,
                                const std::vector<TrajectorySegment>& batch,
                                const VtraceConfig& cfg, Eigen::VectorXd* gradient);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  /// Descends along `gradient`.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient);
  long steps() const { return t_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

}  // namespace leoho::drl
