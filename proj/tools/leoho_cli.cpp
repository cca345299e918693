// Command-line front end for the handover lab.
//
//   leoho_cli run      --spec configs/case1.spec --agent dho
//   leoho_cli sweep    --spec configs/rb_sweep.spec
//   leoho_cli eval     --spec configs/case2.spec --agent dho --checkpoint out/policy.ckpt
//   leoho_cli behavior --spec configs/case2.spec --checkpoint out/policy.ckpt
//   leoho_cli ablation --spec configs/case1.spec --episodes 1000
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "leoho/checkpoint.hpp"
#include "leoho/experiment.hpp"

namespace {

using leoho::exp::ConfigError;
using leoho::exp::ExperimentSpec;

constexpr const char* kOutDirVariable = "LEOHO_OUT_DIR";

struct Overrides {
  std::string spec_path;
  std::optional<std::string> agent;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> train_episodes;
  std::optional<std::string> out;
  std::optional<std::size_t> actors;
  std::optional<std::string> vtrace;
  std::optional<std::string> nu;
  std::optional<std::string> rb_ratio;
  std::optional<std::string> preamble_ratio;
  std::optional<std::string> mask;
  std::optional<std::string> checkpoint;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--spec", o.spec_path, "experiment spec file");
  cmd->add_option("--agent", o.agent, "conventional | random | dho");
  cmd->add_option("--mode", o.mode, "DHO action selection: sample | greedy");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--episodes", o.episodes, "evaluation episodes (training episodes for ablation)");
  cmd->add_option("--train-episodes", o.train_episodes, "DHO training episodes");
  cmd->add_option("--out", o.out, std::string("output directory (default $") + kOutDirVariable +
                                      " or ./out)");
  cmd->add_option("--actors", o.actors, "actor threads");
  cmd->add_option("--vtrace", o.vtrace, "on | off");
  cmd->add_option("--nu", o.nu, "reward trade-off coefficient");
  cmd->add_option("--rb-ratio", o.rb_ratio, "RBs per target as a fraction of J");
  cmd->add_option("--preamble-ratio", o.preamble_ratio, "preambles as a fraction of J");
  cmd->add_option("--mask", o.mask, "observation features, e.g. local or centralized");
  cmd->add_option("--checkpoint", o.checkpoint, "load DHO parameters instead of training");
  cmd->add_option("--set", o.set, "extra key=value setting, repeatable");
}

ExperimentSpec build_spec(const Overrides& o, bool ablation_episodes) {
  ExperimentSpec base;
  if (const char* env_out = std::getenv(kOutDirVariable); env_out && *env_out)
    base.output_dir = env_out;
  ExperimentSpec spec =
      o.spec_path.empty() ? base : leoho::exp::parse_spec_file(o.spec_path, std::move(base));

  using leoho::exp::apply_setting;
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + kv + "'");
    apply_setting(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.agent) apply_setting(spec, "agent.kind", *o.agent);
  if (o.mode) apply_setting(spec, "agent.mode", *o.mode);
  if (o.checkpoint) apply_setting(spec, "agent.checkpoint", *o.checkpoint);
  if (o.seed) spec.master_seed = *o.seed;
  if (o.episodes) {
    if (ablation_episodes)
      spec.train_episodes = *o.episodes;
    else
      spec.eval_episodes = *o.episodes;
  }
  if (o.train_episodes) spec.train_episodes = *o.train_episodes;
  if (o.out) spec.output_dir = *o.out;
  if (o.actors) apply_setting(spec, "training.actors", std::to_string(*o.actors));
  if (o.vtrace) apply_setting(spec, "training.vtrace", *o.vtrace);
  if (o.nu) apply_setting(spec, "scenario.nu", *o.nu);
  if (o.rb_ratio) apply_setting(spec, "scenario.rb_ratio", *o.rb_ratio);
  if (o.preamble_ratio) apply_setting(spec, "scenario.preamble_ratio", *o.preamble_ratio);
  if (o.mask) apply_setting(spec, "scenario.mask", *o.mask);
  spec.finalize();
  return spec;
}

void print_row(const leoho::exp::SummaryRow& r) {
  std::cout << r.agent;
  if (!r.parameter.empty()) std::cout << ' ' << r.parameter << '=' << r.value;
  std::cout << " sum_delay=" << r.sum_delay.mean << " (+-" << r.sum_delay.std << ")"
            << " C_R=" << r.collision_rb.mean << " C_P=" << r.collision_prach.mean
            << " H=" << r.ho_success.mean << " return=" << r.episode_return.mean << '\n';
}

int cmd_run(const Overrides& o, bool require_checkpoint) {
  ExperimentSpec spec = build_spec(o, false);
  if (require_checkpoint && spec.agent == leoho::agents::AgentKind::dho && spec.checkpoint.empty())
    throw ConfigError("agent.checkpoint: eval of a dho agent needs --checkpoint");
  auto report = leoho::exp::run(spec);
  print_row(report.summary);
  std::cout << "wrote " << spec.output_dir.string() << '\n';
  return 0;
}

int cmd_sweep(const Overrides& o, const std::string& parameter, const std::string& values) {
  ExperimentSpec spec = build_spec(o, false);
  if (!parameter.empty()) leoho::exp::apply_setting(spec, "sweep.parameter", parameter);
  if (!values.empty()) leoho::exp::apply_setting(spec, "sweep.values", values);
  if (!spec.sweep) throw ConfigError("sweep.parameter: missing (spec file or --parameter)");
  spec.finalize();
  for (const auto& row : leoho::exp::sweep(spec)) print_row(row);
  std::cout << "wrote " << (spec.output_dir / "sweep.csv").string() << '\n';
  return 0;
}

int cmd_behavior(const Overrides& o) {
  ExperimentSpec spec = build_spec(o, false);
  std::shared_ptr<const leoho::drl::PolicyParameters> params;
  if (!spec.checkpoint.empty()) {
    auto loaded = leoho::drl::load_checkpoint(spec.checkpoint);
    leoho::drl::check_compatible(loaded, spec.scenario);
    params = std::make_shared<const leoho::drl::PolicyParameters>(std::move(loaded));
  } else {
    spec.agent = leoho::agents::AgentKind::dho;
    params = leoho::exp::run(spec).params;
  }
  const auto stats = leoho::exp::behavior_stats(*params, spec.scenario, spec.eval_episodes,
                                                spec.eval_mode, spec.master_seed);
  std::filesystem::create_directories(spec.output_dir);
  std::ofstream out(spec.output_dir / "behavior.csv");
  out.precision(10);
  out << "decisions,request_fraction,no_request_fraction\n"
      << stats.decisions << ',' << stats.request_fraction << ',' << stats.no_request_fraction
      << '\n';
  std::cout << "request=" << stats.request_fraction << " no_request=" << stats.no_request_fraction
            << " decisions=" << stats.decisions << '\n';
  return 0;
}

int cmd_ablation(const Overrides& o, const std::vector<std::string>& mask_texts) {
  ExperimentSpec spec = build_spec(o, true);
  std::vector<leoho::env::FeatureMask> masks;
  try {
    for (const auto& m : mask_texts) masks.push_back(leoho::env::FeatureMask::parse(m));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("--masks: ") + e.what());
  }
  if (masks.empty()) masks = leoho::exp::default_ablation_masks();
  for (const auto& c : leoho::exp::ablation(spec, masks)) {
    const auto& last = c.curve.back();
    std::cout << c.mask.to_string() << " final_mean_return=" << last.mean_return << '\n';
  }
  std::cout << "wrote " << (spec.output_dir / "ablation.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEO satellite handover lab"};
  app.require_subcommand(1);

  Overrides o;
  std::string sweep_parameter, sweep_values;
  std::vector<std::string> masks;

  auto* run = app.add_subcommand("run", "train if needed, evaluate, write reports");
  auto* sweep = app.add_subcommand("sweep", "evaluate over a list of parameter values");
  auto* eval = app.add_subcommand("eval", "evaluate a baseline or a saved policy");
  auto* behavior = app.add_subcommand("behavior", "request / no-request fractions of a policy");
  auto* ablation = app.add_subcommand("ablation", "learning curves per observation mask");
  for (auto* cmd : {run, sweep, eval, behavior, ablation}) add_common(cmd, o);
  sweep->add_option("--parameter", sweep_parameter, "setting to sweep, e.g. rb_ratio");
  sweep->add_option("--values", sweep_values, "comma-separated values");
  ablation->add_option("--masks", masks, "masks to train, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(o, false);
    if (eval->parsed()) return cmd_run(o, true);
    if (sweep->parsed()) return cmd_sweep(o, sweep_parameter, sweep_values);
    if (behavior->parsed()) return cmd_behavior(o);
    if (ablation->parsed()) return cmd_ablation(o, masks);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
