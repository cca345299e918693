#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "leoho/env.hpp"
#include "leoho/network.hpp"
#include "leoho/vtrace.hpp"

namespace leoho::drl {

/// One learner update worth of statistics.
struct CurvePoint {
  std::size_t episode = 0;  // episodes consumed so far
  double mean_return = 0.0;
  double sum_delay = 0.0;
  double sum_collision = 0.0;
};

struct TrainResult {
  PolicyParameters params;
  std::vector<double> episode_returns;  // in learner consumption order
  std::vector<CurvePoint> curve;
  std::size_t updates = 0;
};

/// Latest learner parameters. Readers get an immutable snapshot.
class ParameterStore {
 public:
  explicit ParameterStore(std::shared_ptr<const PolicyParameters> initial)
      : current_(std::move(initial)) {}
  std::shared_ptr<const PolicyParameters> snapshot() const;
  void publish(std::shared_ptr<const PolicyParameters> next);
  std::size_t version() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const PolicyParameters> current_;
  std::size_t version_ = 0;
};

/// Bounded multi-producer queue of finished segments.
class SegmentQueue {
 public:
  explicit SegmentQueue(std::size_t capacity) : capacity_(capacity) {}
  /// Blocks while full; returns false once closed.
  bool push(TrajectorySegment segment);
  /// Blocks while empty; empty optional once closed and drained.
  std::optional<TrajectorySegment> pop();
  void close();

 private:
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<TrajectorySegment> items_;
  std::size_t capacity_;
  bool closed_ = false;
};

/// Network shape for a scenario's observation and action dimensions.
NetworkShape network_shape_for(const env::ScenarioConfig& scenario, const VtraceConfig& cfg);

/// Seed of the environment used for episode `index` of a run seeded with `seed`.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index);

/// Plays one full episode with actions sampled from `params`.
TrajectorySegment rollout_episode(env::HandoverEnv& env, const PolicyParameters& params,
                                  env::Rng& policy_rng, std::uint64_t env_seed);

/// Actor-learner training. With actors == 1 everything runs on the calling
/// thread and the result is bit-reproducible. With several actors and V-trace
/// enabled, actors run asynchronously against parameter snapshots; with
/// V-trace disabled they are refreshed synchronously before every update.
TrainResult train(const env::ScenarioConfig& scenario, const VtraceConfig& cfg,
                  std::size_t episodes, std::size_t actors, std::uint64_t seed);

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve);

}  // namespace leoho::drl
