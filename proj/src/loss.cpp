#include "leoho/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "leoho/categorical.hpp"

namespace leoho::drl {

namespace {

/// Every observation of the batch stacked row-wise, segment by segment,
/// including the final observation of each segment.
Eigen::MatrixXd stack_observations(const std::vector<TrajectorySegment>& batch,
                                   std::size_t obs_dim, std::vector<Eigen::Index>& starts) {
  Eigen::Index rows = 0;
  starts.clear();
  for (const auto& seg : batch) {
    seg.validate();
    starts.push_back(rows);
    rows += static_cast<Eigen::Index>(seg.observations.size());
  }
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(obs_dim));
  Eigen::Index r = 0;
  for (const auto& seg : batch) {
    for (const auto& obs : seg.observations) {
      if (obs.size() != obs_dim)
        throw std::invalid_argument("loss: observation length does not match the network");
      x.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(obs.data(),
                                                        static_cast<Eigen::Index>(obs_dim));
    }
  }
  return x;
}

/// log pi(a|s) summed over the free heads of one row.
double action_log_prob(const Eigen::MatrixXd& logits, Eigen::Index row,
                       const env::ActionMatrix& action, const std::vector<std::uint8_t>& active,
                       Eigen::Index num_planes) {
  double lp = 0.0;
  for (std::size_t j = 0; j < action.num_ues(); ++j) {
    if (!active[j]) continue;
    const Eigen::VectorXd head =
        log_softmax(logits.block(row, static_cast<Eigen::Index>(j) * num_planes, 1, num_planes)
                        .transpose());
    lp += head(action.choice[j]);
  }
  return lp;
}

std::vector<VtraceOutput> targets_from_forward(const BatchForward& fwd,
                                               const std::vector<TrajectorySegment>& batch,
                                               const std::vector<Eigen::Index>& starts,
                                               const VtraceConfig& cfg, Eigen::Index num_planes) {
  std::vector<VtraceOutput> out;
  out.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& seg = batch[s];
    const auto len = static_cast<Eigen::Index>(seg.length());
    Eigen::VectorXd values = fwd.values.segment(starts[s], len);
    Eigen::VectorXd rewards(len);
    Eigen::VectorXd log_ratios = Eigen::VectorXd::Zero(len);
    for (Eigen::Index n = 0; n < len; ++n) {
      const auto step = static_cast<std::size_t>(n);
      rewards(n) = seg.rewards[step];
      if (cfg.vtrace_enabled)
        log_ratios(n) = action_log_prob(fwd.logits, starts[s] + n, seg.actions[step],
                                        seg.active_heads[step], num_planes) -
                        seg.behavior_logprob(step);
    }
    const double bootstrap = seg.terminal ? 0.0 : fwd.values(starts[s] + len);
    out.push_back(vtrace_from_log_ratios(values, bootstrap, rewards, log_ratios, cfg.gamma,
                                         cfg.rho_bar, cfg.c_bar));
  }
  return out;
}

LossBreakdown evaluate(const BatchForward& fwd, const PolicyParameters& params,
                       const std::vector<TrajectorySegment>& batch,
                       const std::vector<Eigen::Index>& starts,
                       const std::vector<VtraceOutput>& targets, const VtraceConfig& cfg,
                       Eigen::VectorXd* gradient) {
  if (targets.size() != batch.size())
    throw std::invalid_argument("loss: one target set per segment required");
  const auto num_planes = static_cast<Eigen::Index>(params.shape().num_planes);
  const auto rows = fwd.logits.rows();

  LossBreakdown loss;
  Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(rows, fwd.logits.cols());
  Eigen::VectorXd d_values = Eigen::VectorXd::Zero(rows);

  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& seg = batch[s];
    const auto& tgt = targets[s];
    for (std::size_t n = 0; n < seg.length(); ++n) {
      const Eigen::Index row = starts[s] + static_cast<Eigen::Index>(n);
      const auto idx = static_cast<Eigen::Index>(n);
      const double adv = tgt.pg_advantages(idx);
      const double err = tgt.targets(idx) - fwd.values(row);

      loss.baseline += 0.5 * err * err;
      d_values(row) = -cfg.baseline_coeff * err;

      for (std::size_t j = 0; j < seg.actions[n].num_ues(); ++j) {
        if (!seg.active_heads[n][j]) continue;
        const Eigen::Index col = static_cast<Eigen::Index>(j) * num_planes;
        const Eigen::VectorXd log_p =
            log_softmax(fwd.logits.block(row, col, 1, num_planes).transpose());
        const Eigen::VectorXd p = log_p.array().exp().matrix();
        const double h = entropy_from_log_probs(log_p);
        const int a = seg.actions[n].choice[j];

        loss.policy -= log_p(a) * adv;
        loss.entropy += h;

        for (Eigen::Index k = 0; k < num_planes; ++k) {
          const double indicator = (k == a) ? 1.0 : 0.0;
          // d(-log p_a * adv)/dz_k and d(-coef * H)/dz_k with dH/dz_k = -p_k (log p_k + H)
          double g = -adv * (indicator - p(k));
          if (p(k) > 0.0) g += cfg.entropy_coeff * p(k) * (log_p(k) + h);
          d_logits(row, col + k) = g;
        }
      }
    }
  }
  loss.total = loss.policy + cfg.baseline_coeff * loss.baseline - cfg.entropy_coeff * loss.entropy;
  if (!std::isfinite(loss.total)) throw std::domain_error("loss: non-finite value");
  if (gradient != nullptr) *gradient = backward(params, fwd, d_logits, d_values);
  return loss;
}

}  // namespace

std::vector<VtraceOutput> compute_targets(const PolicyParameters& params,
                                          const std::vector<TrajectorySegment>& batch,
                                          const VtraceConfig& cfg) {
  std::vector<Eigen::Index> starts;
  const Eigen::MatrixXd x = stack_observations(batch, params.shape().obs_dim, starts);
  const BatchForward fwd = forward_batch(params, x);
  return targets_from_forward(fwd, batch, starts, cfg,
                              static_cast<Eigen::Index>(params.shape().num_planes));
}

LossBreakdown loss_with_targets(const PolicyParameters& params,
                                const std::vector<TrajectorySegment>& batch,
                                const std::vector<VtraceOutput>& targets, const VtraceConfig& cfg,
                                Eigen::VectorXd* gradient) {
  std::vector<Eigen::Index> starts;
  const Eigen::MatrixXd x = stack_observations(batch, params.shape().obs_dim, starts);
  const BatchForward fwd = forward_batch(params, x);
  return evaluate(fwd, params, batch, starts, targets, cfg, gradient);
}

LossBreakdown loss_and_gradient(const PolicyParameters& params,
                                const std::vector<TrajectorySegment>& batch,
                                const VtraceConfig& cfg, Eigen::VectorXd* gradient) {
  std::vector<Eigen::Index> starts;
  const Eigen::MatrixXd x = stack_observations(batch, params.shape().obs_dim, starts);
  const BatchForward fwd = forward_batch(params, x);
  const auto targets = targets_from_forward(
      fwd, batch, starts, cfg, static_cast<Eigen::Index>(params.shape().num_planes));
  return evaluate(fwd, params, batch, starts, targets, cfg, gradient);
}

AdamOptimizer::AdamOptimizer(std::size_t size, double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient) {
  if (gradient.size() != params.size() || params.size() != m_.size())
    throw std::invalid_argument("AdamOptimizer: size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * gradient;
  v_ = beta2_ * v_ + (1.0 - beta2_) * gradient.cwiseProduct(gradient);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

}  // namespace leoho::drl
