#include "leoho/vtrace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leoho/loss.hpp"

namespace leoho::drl {

void VtraceConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma: must be in [0, 1)");
  if (!(rho_bar >= 0.0) || !(c_bar >= 0.0))
    throw std::invalid_argument("rho_bar: truncation levels must be >= 0");
  if (rho_bar < c_bar) throw std::invalid_argument("rho_bar: must be >= c_bar");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate: must be > 0");
  if (!(entropy_coeff >= 0.0)) throw std::invalid_argument("entropy_coeff: must be >= 0");
  if (!(baseline_coeff >= 0.0)) throw std::invalid_argument("baseline_coeff: must be >= 0");
  if (batch_episodes < 1) throw std::invalid_argument("batch_episodes: must be >= 1");
  if (actors < 1) throw std::invalid_argument("actors: must be >= 1");
  if (queue_capacity < 1) throw std::invalid_argument("queue_capacity: must be >= 1");
  for (std::size_t w : hidden)
    if (w == 0) throw std::invalid_argument("hidden: widths must be > 0");
}

double TrajectorySegment::behavior_logprob(std::size_t step) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < behavior_logprobs[step].size(); ++j)
    if (active_heads[step][j]) sum += behavior_logprobs[step][j];
  return sum;
}

void TrajectorySegment::validate() const {
  const std::size_t len = actions.size();
  if (observations.size() != len + 1)
    throw std::invalid_argument("segment: observations must have length L+1");
  if (rewards.size() != len || active_heads.size() != len || behavior_logprobs.size() != len)
    throw std::invalid_argument("segment: per-step arrays must have length L");
  for (std::size_t n = 0; n < len; ++n) {
    if (active_heads[n].size() != actions[n].num_ues() ||
        behavior_logprobs[n].size() != actions[n].num_ues())
      throw std::invalid_argument("segment: per-head arrays must have J entries");
    for (double lp : behavior_logprobs[n])
      if (!std::isfinite(lp)) throw std::invalid_argument("segment: non-finite behaviour log-prob");
  }
}

VtraceOutput vtrace_from_log_ratios(const Eigen::VectorXd& values, double bootstrap,
                                    const Eigen::VectorXd& rewards,
                                    const Eigen::VectorXd& log_ratios, double gamma,
                                    double rho_bar, double c_bar) {
  const Eigen::Index len = values.size();
  if (rewards.size() != len || log_ratios.size() != len)
    throw std::invalid_argument("vtrace: length mismatch");
  VtraceOutput out;
  out.rho.resize(len);
  out.c.resize(len);
  out.targets.resize(len);
  out.pg_advantages.resize(len);

  for (Eigen::Index n = 0; n < len; ++n) {
    const double ratio = std::exp(log_ratios(n));
    if (!std::isfinite(ratio)) throw std::domain_error("vtrace: non-finite importance ratio");
    out.rho(n) = std::min(rho_bar, ratio);
    out.c(n) = std::min(c_bar, ratio);
  }

  double acc = 0.0;  // v[n+1] - V(s[n+1])
  for (Eigen::Index n = len; n-- > 0;) {
    const double next_value = (n + 1 < len) ? values(n + 1) : bootstrap;
    const double delta = out.rho(n) * (rewards(n) + gamma * next_value - values(n));
    acc = delta + gamma * out.c(n) * acc;
    out.targets(n) = values(n) + acc;
  }
  for (Eigen::Index n = 0; n < len; ++n) {
    const double next_target = (n + 1 < len) ? out.targets(n + 1) : bootstrap;
    out.pg_advantages(n) = out.rho(n) * (rewards(n) + gamma * next_target - values(n));
  }
  return out;
}

VtraceOutput vtrace_targets(const TrajectorySegment& segment, const PolicyParameters& params,
                            const VtraceConfig& cfg) {
  return compute_targets(params, {segment}, cfg).front();
}

}  // namespace leoho::drl
