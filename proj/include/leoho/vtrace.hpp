#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "leoho/env.hpp"
#include "leoho/network.hpp"

namespace leoho::drl {

struct VtraceConfig {
  double gamma = 0.95;
  double rho_bar = 1.0;
  double c_bar = 1.0;
  double learning_rate = 3e-4;
  double entropy_coeff = 0.01;
  double baseline_coeff = 0.5;
  /// Episodes (segments) per learner update.
  std::size_t batch_episodes = 4;
  std::size_t actors = 1;
  bool vtrace_enabled = true;
  /// Global-norm clip applied before the optimizer step; 0 disables it.
  double max_grad_norm = 0.0;
  std::vector<std::size_t> hidden{128, 128};
  /// Bound on the segment queue in asynchronous mode.
  std::size_t queue_capacity = 16;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// One actor rollout: L transitions generated under behaviour policy mu.
struct TrajectorySegment {
  std::vector<env::Observation> observations;  // L + 1
  std::vector<env::ActionMatrix> actions;      // L
  /// Per step and UE: 1 when the head was free (UE not yet accessed).
  std::vector<std::vector<std::uint8_t>> active_heads;
  /// Per step and UE: log mu(a_j | s); 0 for inactive heads.
  std::vector<std::vector<double>> behavior_logprobs;
  std::vector<double> rewards;
  /// V(s[L]) under the behaviour parameters; ignored when terminal.
  double bootstrap_value = 0.0;
  bool terminal = true;
  env::MetricsRecord metrics;

  std::size_t length() const { return actions.size(); }
  double behavior_logprob(std::size_t step) const;
  /// Throws std::invalid_argument on inconsistent lengths or non-finite log-probs.
  void validate() const;
};

struct VtraceOutput {
  Eigen::VectorXd targets;        // v[n]
  Eigen::VectorXd pg_advantages;  // rho[n] (r[n] + gamma v[n+1] - V(s[n]))
  Eigen::VectorXd rho;
  Eigen::VectorXd c;
};

/// Backward recursion for the V-trace targets of one segment.
/// `values` holds V(s[0..L-1]) and `bootstrap` stands in for V(s[L]).
/// Throws std::domain_error when an importance ratio is not finite.
VtraceOutput vtrace_from_log_ratios(const Eigen::VectorXd& values, double bootstrap,
                                    const Eigen::VectorXd& rewards,
                                    const Eigen::VectorXd& log_ratios, double gamma,
                                    double rho_bar, double c_bar);

/// Targets of `segment` under the current parameters.
VtraceOutput vtrace_targets(const TrajectorySegment& segment, const PolicyParameters& params,
                            const VtraceConfig& cfg);

}  // namespace leoho::drl
