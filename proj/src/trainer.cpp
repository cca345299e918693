#include "leoho/trainer.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>
#include <utility>

#include "leoho/agents.hpp"
#include "leoho/loss.hpp"

namespace leoho::drl {

std::shared_ptr<const PolicyParameters> ParameterStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void ParameterStore::publish(std::shared_ptr<const PolicyParameters> next) {
  std::lock_guard lock(mutex_);
  current_ = std::move(next);
  ++version_;
}

std::size_t ParameterStore::version() const {
  std::lock_guard lock(mutex_);
  return version_;
}

bool SegmentQueue::push(TrajectorySegment segment) {
  std::unique_lock lock(mutex_);
  not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
  if (closed_) return false;
  items_.push_back(std::move(segment));
  not_empty_.notify_one();
  return true;
}

std::optional<TrajectorySegment> SegmentQueue::pop() {
  std::unique_lock lock(mutex_);
  not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
  if (items_.empty()) return std::nullopt;
  TrajectorySegment seg = std::move(items_.front());
  items_.pop_front();
  not_full_.notify_one();
  return seg;
}

void SegmentQueue::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
  not_full_.notify_all();
  not_empty_.notify_all();
}

NetworkShape network_shape_for(const env::ScenarioConfig& scenario, const VtraceConfig& cfg) {
  NetworkShape shape;
  shape.obs_dim = scenario.observation_size();
  shape.num_ues = scenario.num_ues;
  shape.num_planes = scenario.num_planes;
  shape.hidden = cfg.hidden;
  return shape;
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over the pair
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrajectorySegment rollout_episode(env::HandoverEnv& env, const PolicyParameters& params,
                                  env::Rng& policy_rng, std::uint64_t env_seed) {
  TrajectorySegment seg;
  seg.observations.push_back(env.reset(env_seed));
  std::vector<env::StepOutcome> outcomes;
  while (!env.done()) {
    const auto& accessed = env.state().accessed;
    std::vector<std::uint8_t> active(accessed.size());
    for (std::size_t j = 0; j < accessed.size(); ++j) active[j] = accessed[j] ? 0 : 1;
    auto decision = agents::dho_decide(params, seg.observations.back(), accessed, policy_rng,
                                       agents::PolicyMode::sample);
    auto result = env.step(decision.action);
    seg.actions.push_back(std::move(decision.action));
    seg.active_heads.push_back(std::move(active));
    seg.behavior_logprobs.push_back(std::move(decision.head_logprobs));
    seg.rewards.push_back(result.outcome.reward);
    seg.observations.push_back(std::move(result.observation));
    outcomes.push_back(std::move(result.outcome));
  }
  seg.terminal = true;
  seg.bootstrap_value = 0.0;
  seg.metrics = env::episode_metrics(outcomes, env.state(), env.config());
  return seg;
}

namespace {

class Learner {
 public:
  Learner(PolicyParameters initial, const VtraceConfig& cfg)
      : cfg_(cfg),
        params_(std::move(initial)),
        optimizer_(static_cast<std::size_t>(params_.flat().size()), cfg.learning_rate) {}

  void update(const std::vector<TrajectorySegment>& batch, TrainResult& result) {
    Eigen::VectorXd grad;
    loss_and_gradient(params_, batch, cfg_, &grad);
    if (cfg_.max_grad_norm > 0.0) {
      const double norm = grad.norm();
      if (norm > cfg_.max_grad_norm) grad *= cfg_.max_grad_norm / norm;
    }
    optimizer_.step(params_.flat(), grad);

    CurvePoint point;
    for (const auto& seg : batch) {
      result.episode_returns.push_back(seg.metrics.episode_return);
      point.mean_return += seg.metrics.episode_return;
      point.sum_delay += seg.metrics.sum_delay;
      point.sum_collision += seg.metrics.sum_collision();
    }
    const auto n = static_cast<double>(batch.size());
    point.mean_return /= n;
    point.sum_delay /= n;
    point.sum_collision /= n;
    point.episode = result.episode_returns.size();
    result.curve.push_back(point);
    ++result.updates;
  }

  const PolicyParameters& params() const { return params_; }

 private:
  VtraceConfig cfg_;
  PolicyParameters params_;
  AdamOptimizer optimizer_;
};

env::Rng actor_rng(std::uint64_t seed, std::size_t actor_id) {
  return env::Rng(episode_seed(seed ^ static_cast<std::uint64_t>(actor_id), 0x5eedULL));
}

void train_synchronous(const env::ScenarioConfig& scenario, const VtraceConfig& cfg,
                       std::size_t episodes, std::size_t actors, std::uint64_t seed,
                       Learner& learner, TrainResult& result) {
  std::vector<env::HandoverEnv> envs;
  std::vector<env::Rng> rngs;
  for (std::size_t a = 0; a < actors; ++a) {
    envs.emplace_back(scenario);
    rngs.push_back(actor_rng(seed, a));
  }
  std::size_t done = 0;
  while (done < episodes) {
    const std::size_t count = std::min(cfg.batch_episodes, episodes - done);
    const PolicyParameters& snapshot = learner.params();
    std::vector<TrajectorySegment> batch(count);
    auto work = [&](std::size_t actor) {
      for (std::size_t i = actor; i < count; i += actors)
        batch[i] = rollout_episode(envs[actor], snapshot, rngs[actor], episode_seed(seed, done + i));
    };
    if (actors == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t a = 0; a < actors; ++a) pool.emplace_back(work, a);
    }
    learner.update(batch, result);
    done += count;
  }
}

void train_asynchronous(const env::ScenarioConfig& scenario, const VtraceConfig& cfg,
                        std::size_t episodes, std::size_t actors, std::uint64_t seed,
                        Learner& learner, TrainResult& result) {
  ParameterStore store(std::make_shared<const PolicyParameters>(learner.params()));
  SegmentQueue queue(cfg.queue_capacity);
  std::atomic<bool> stop{false};

  std::vector<std::jthread> pool;
  for (std::size_t a = 0; a < actors; ++a) {
    pool.emplace_back([&, a] {
      env::HandoverEnv env(scenario);
      env::Rng rng = actor_rng(seed, a);
      for (std::uint64_t local = 0; !stop.load(); ++local) {
        const auto params = store.snapshot();
        auto seg = rollout_episode(env, *params, rng,
                                   episode_seed(seed ^ (static_cast<std::uint64_t>(a) << 40), local));
        if (!queue.push(std::move(seg))) break;
      }
    });
  }

  std::size_t done = 0;
  while (done < episodes) {
    const std::size_t count = std::min(cfg.batch_episodes, episodes - done);
    std::vector<TrajectorySegment> batch;
    while (batch.size() < count) {
      auto seg = queue.pop();
      if (!seg) break;
      batch.push_back(std::move(*seg));
    }
    learner.update(batch, result);
    store.publish(std::make_shared<const PolicyParameters>(learner.params()));
    done += batch.size();
  }
  stop = true;
  queue.close();
}

}  // namespace

TrainResult train(const env::ScenarioConfig& scenario, const VtraceConfig& cfg,
                  std::size_t episodes, std::size_t actors, std::uint64_t seed) {
  scenario.validate();
  cfg.validate();
  if (actors < 1) throw std::invalid_argument("actors: must be >= 1");

  Learner learner(PolicyParameters::glorot(network_shape_for(scenario, cfg), seed), cfg);
  TrainResult result;
  if (actors == 1 || !cfg.vtrace_enabled)
    train_synchronous(scenario, cfg, episodes, actors, seed, learner, result);
  else
    train_asynchronous(scenario, cfg, episodes, actors, seed, learner, result);
  result.params = learner.params();
  return result;
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve) {
  os << "episode,mean_return,sum_delay,sum_collision\n";
  for (const auto& p : curve)
    os << p.episode << ',' << p.mean_return << ',' << p.sum_delay << ',' << p.sum_collision
       << '\n';
}

}  // namespace leoho::drl
