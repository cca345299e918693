#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leoho/agents.hpp"
#include "leoho/env.hpp"
#include "leoho/trainer.hpp"
#include "leoho/vtrace.hpp"

namespace leoho::exp {

/// Raised for anything wrong with an experiment description. The CLI maps it
/// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  std::string parameter;  // canonical key, e.g. "scenario.rb_ratio"
  std::vector<double> values;
  std::vector<agents::AgentKind> agents;  // empty: the experiment's agent
};

struct ExperimentSpec {
  env::ScenarioConfig scenario;
  agents::AgentKind agent = agents::AgentKind::random;
  agents::PolicyMode eval_mode = agents::PolicyMode::sample;
  std::string checkpoint;  // load instead of training when set
  drl::VtraceConfig training;
  std::size_t train_episodes = 2000;
  std::size_t eval_episodes = 1000;
  std::optional<SweepSpec> sweep;
  std::filesystem::path output_dir = "out";
  std::uint64_t master_seed = 1;

  // Resource settings relative to J, resolved by finalize().
  std::optional<double> rb_ratio;
  std::optional<int> rb_per_target;
  std::optional<double> preamble_ratio;

  /// Resolves ratio settings into the scenario and validates everything.
  /// Throws ConfigError.
  void finalize();
};

/// Applies one `key = value` setting. Throws ConfigError for unknown keys or
/// unparsable values.
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Maps short sweep names (rb_ratio, preamble_ratio, nu, J) to keys.
std::string canonical_key(const std::string& name);

/// Flat `section.key = value` text; '#' starts a comment. Settings are
/// applied on top of `base`. finalize() is left to the caller.
ExperimentSpec parse_spec(std::istream& in, const std::string& source = "<spec>",
                          ExperimentSpec base = {});
ExperimentSpec parse_spec_file(const std::filesystem::path& path, ExperimentSpec base = {});

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};
Stat mean_std(const std::vector<double>& xs);

struct SummaryRow {
  std::string agent;
  std::string parameter;
  std::string value;
  std::string label;
  std::size_t episodes = 0;
  Stat sum_delay;
  Stat collision_rb;
  Stat collision_prach;
  Stat ho_success;
  Stat episode_return;
  std::optional<std::size_t> episodes_to_threshold;
};

void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, const SummaryRow& row);

struct Evaluation {
  std::vector<env::MetricsRecord> episodes;
  SummaryRow summary;
};

/// Plays `episodes` episodes; episode i uses environment seed master_seed + i.
/// When `trace` is set, every slot is appended as a trace CSV row.
Evaluation evaluate(const env::ScenarioConfig& scenario, agents::Agent& agent,
                    std::size_t episodes, std::uint64_t master_seed, std::ostream* trace);

std::unique_ptr<agents::Agent> make_agent(agents::AgentKind kind,
                                          std::shared_ptr<const drl::PolicyParameters> params,
                                          agents::PolicyMode mode, std::uint64_t seed);

struct RunReport {
  SummaryRow summary;
  std::optional<drl::TrainResult> training;
  std::shared_ptr<const drl::PolicyParameters> params;
};

/// Trains (DHO without checkpoint) and evaluates, writing summary.csv,
/// trace.csv and, when trained, learning_curve.csv and policy.ckpt into
/// spec.output_dir.
RunReport run(const ExperimentSpec& spec);

/// One summary row per (value, agent); writes sweep.csv into spec.output_dir.
std::vector<SummaryRow> sweep(const ExperimentSpec& spec);

struct BehaviorStats {
  double request_fraction = 0.0;
  double no_request_fraction = 0.0;
  std::size_t decisions = 0;
};

/// Share of per-UE decisions among not-yet-accessed UEs that request a handover.
BehaviorStats behavior_stats(const drl::PolicyParameters& params,
                             const env::ScenarioConfig& scenario, std::size_t episodes,
                             agents::PolicyMode mode, std::uint64_t master_seed);

struct AblationCurve {
  env::FeatureMask mask;
  std::vector<drl::CurvePoint> curve;
  drl::TrainResult result;
};

/// Trains one DHO agent per mask on otherwise identical settings; writes
/// ablation.csv (mask, episode, mean_return, sum_delay, sum_collision).
std::vector<AblationCurve> ablation(const ExperimentSpec& spec,
                                    const std::vector<env::FeatureMask>& masks);

/// The local mask, each local feature removed, time+accessed removed, and
/// the centralized mask.
std::vector<env::FeatureMask> default_ablation_masks();

/// First consumed-episode count at which the 5-point moving average of the
/// curve reaches 90 % of its total improvement.
std::optional<std::size_t> episodes_to_threshold(const std::vector<drl::CurvePoint>& curve);

/// Label for a reward trade-off coefficient.
std::string nu_label(double nu);

}  // namespace leoho::exp
