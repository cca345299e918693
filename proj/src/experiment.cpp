#include "leoho/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "leoho/checkpoint.hpp"

namespace leoho::exp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  // Fractions such as 1/20 are accepted.
  const auto slash = value.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double num = std::stod(value.substr(0, slash));
      const double den = std::stod(value.substr(slash + 1));
      return num / den;
    }
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v)) throw ConfigError(key + ": expected an integer, got '" + value + "'");
  return static_cast<long long>(v);
}

std::size_t to_count(const std::string& key, const std::string& value) {
  const long long v = to_int(key, value);
  if (v < 0) throw ConfigError(key + ": must be >= 0");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected on/off, got '" + value + "'");
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

std::string canonical_key(const std::string& name) {
  if (name == "rb_ratio" || name == "rb-ratio") return "scenario.rb_ratio";
  if (name == "preamble_ratio" || name == "preamble-ratio") return "scenario.preamble_ratio";
  if (name == "nu") return "scenario.nu";
  if (name == "J") return "scenario.J";
  return name;
}

void apply_setting(ExperimentSpec& spec, const std::string& raw_key, const std::string& value) {
  const std::string key = canonical_key(raw_key);
  auto& sc = spec.scenario;
  auto& tr = spec.training;
  try {
    if (key == "scenario.J") {
      sc.num_ues = to_count(key, value);
    } else if (key == "scenario.K") {
      sc.num_planes = to_count(key, value);
    } else if (key == "scenario.rb") {
      spec.rb_per_target = static_cast<int>(to_int(key, value));
      spec.rb_ratio.reset();
    } else if (key == "scenario.rb_total") {
      sc.rb_total.clear();
      for (const auto& v : split(value, ',')) sc.rb_total.push_back(static_cast<int>(to_int(key, v)));
      spec.rb_ratio.reset();
      spec.rb_per_target.reset();
    } else if (key == "scenario.rb_ratio") {
      spec.rb_ratio = to_double(key, value);
      spec.rb_per_target.reset();
    } else if (key == "scenario.P") {
      sc.preambles = static_cast<int>(to_int(key, value));
      spec.preamble_ratio.reset();
    } else if (key == "scenario.preamble_ratio") {
      spec.preamble_ratio = to_double(key, value);
    } else if (key == "scenario.N") {
      sc.episode_slots = static_cast<int>(to_int(key, value));
    } else if (key == "scenario.tau") {
      sc.slot_duration_s = to_double(key, value);
    } else if (key == "scenario.nu") {
      sc.nu = to_double(key, value);
    } else if (key == "scenario.area_m") {
      sc.area_m = to_double(key, value);
    } else if (key == "scenario.ue_positions") {
      sc.ue_positions.clear();
      if (value != "uniform" && value != "uniform-random") {
        for (const auto& point : split(value, ';')) {
          std::istringstream ps(point);
          double x = 0, y = 0, z = 0;
          if (!(ps >> x >> y >> z)) throw ConfigError(key + ": expected 'x y z; x y z; ...'");
          sc.ue_positions.emplace_back(x, y, z);
        }
      }
    } else if (key == "scenario.seed") {
      sc.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "scenario.mask") {
      sc.mask = env::FeatureMask::parse(value);
    } else if (key == "scenario.terminal") {
      sc.terminal = value;
    } else if (key == "scenario.shadowing_sigma_db") {
      sc.shadowing_sigma_db = to_double(key, value);
    } else if (key == "scenario.dl_eirp_dbw") {
      sc.dl_eirp_dbw = to_double(key, value);
    } else if (key == "scenario.k_iir") {
      sc.k_iir = static_cast<int>(to_int(key, value));
    } else if (key == "scenario.measurement_period_s") {
      sc.measurement_period_s = to_double(key, value);
    } else if (key == "scenario.a3_offset_db") {
      sc.a3_offset_db = to_double(key, value);
    } else if (key == "scenario.a3_trigger_slots") {
      sc.a3_trigger_slots = static_cast<int>(to_int(key, value));
    } else if (key == "scenario.altitude_m") {
      sc.altitude_m = to_double(key, value);
    } else if (key == "agent.kind") {
      spec.agent = agents::parse_agent_kind(value);
    } else if (key == "agent.mode") {
      spec.eval_mode = agents::parse_policy_mode(value);
    } else if (key == "agent.checkpoint") {
      spec.checkpoint = value;
    } else if (key == "training.gamma") {
      tr.gamma = to_double(key, value);
    } else if (key == "training.rho_bar") {
      tr.rho_bar = to_double(key, value);
    } else if (key == "training.c_bar") {
      tr.c_bar = to_double(key, value);
    } else if (key == "training.learning_rate") {
      tr.learning_rate = to_double(key, value);
    } else if (key == "training.entropy_coeff") {
      tr.entropy_coeff = to_double(key, value);
    } else if (key == "training.baseline_coeff") {
      tr.baseline_coeff = to_double(key, value);
    } else if (key == "training.batch_episodes") {
      tr.batch_episodes = to_count(key, value);
    } else if (key == "training.actors") {
      tr.actors = to_count(key, value);
    } else if (key == "training.vtrace") {
      tr.vtrace_enabled = to_bool(key, value);
    } else if (key == "training.max_grad_norm") {
      tr.max_grad_norm = to_double(key, value);
    } else if (key == "training.queue_capacity") {
      tr.queue_capacity = to_count(key, value);
    } else if (key == "training.hidden") {
      tr.hidden.clear();
      for (const auto& v : split(value, ',')) tr.hidden.push_back(to_count(key, v));
    } else if (key == "training.episodes") {
      spec.train_episodes = to_count(key, value);
    } else if (key == "eval.episodes") {
      spec.eval_episodes = to_count(key, value);
    } else if (key == "sweep.parameter") {
      if (!spec.sweep) spec.sweep = SweepSpec{};
      spec.sweep->parameter = canonical_key(value);
    } else if (key == "sweep.values") {
      if (!spec.sweep) spec.sweep = SweepSpec{};
      spec.sweep->values.clear();
      for (const auto& v : split(value, ',')) spec.sweep->values.push_back(to_double(key, v));
    } else if (key == "sweep.agents") {
      if (!spec.sweep) spec.sweep = SweepSpec{};
      spec.sweep->agents.clear();
      for (const auto& v : split(value, ',')) spec.sweep->agents.push_back(agents::parse_agent_kind(v));
    } else if (key == "output.dir") {
      spec.output_dir = value;
    } else if (key == "master_seed") {
      spec.master_seed = static_cast<std::uint64_t>(to_int(key, value));
    } else {
      throw ConfigError(raw_key + ": unknown setting");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void ExperimentSpec::finalize() {
  auto& sc = scenario;
  const std::size_t targets = sc.num_planes >= 2 ? sc.num_planes - 1 : 0;
  if (rb_ratio) {
    const int rb = static_cast<int>(std::lround(*rb_ratio * static_cast<double>(sc.num_ues)));
    sc.rb_total.assign(targets, rb);
  } else if (rb_per_target) {
    sc.rb_total.assign(targets, *rb_per_target);
  } else if (sc.rb_total.size() != targets && sc.rb_total.size() == 1) {
    sc.rb_total.assign(targets, sc.rb_total.front());
  }
  if (preamble_ratio) {
    sc.preambles = std::max(
        1, static_cast<int>(std::lround(*preamble_ratio * static_cast<double>(sc.num_ues))));
  }
  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario.") + e.what());
  }
  try {
    training.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("training.") + e.what());
  }
  if (eval_episodes < 1) throw ConfigError("eval.episodes: must be >= 1");
  if (sweep) {
    if (sweep->parameter.empty()) throw ConfigError("sweep.parameter: missing");
    if (sweep->values.empty()) throw ConfigError("sweep.values: missing");
    ExperimentSpec probe = *this;
    probe.sweep.reset();
    apply_setting(probe, sweep->parameter, format_value(sweep->values.front()));
  }
}

ExperimentSpec parse_spec(std::istream& in, const std::string& source, ExperimentSpec spec) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      apply_setting(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return spec;
}

ExperimentSpec parse_spec_file(const std::filesystem::path& path, ExperimentSpec base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open spec file");
  return parse_spec(in, path.string(), std::move(base));
}

Stat mean_std(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

void write_summary_header(std::ostream& os) {
  os << "agent,parameter,value,label,episodes,sum_delay_mean,sum_delay_std,collision_rb_mean,"
        "collision_rb_std,collision_prach_mean,collision_prach_std,ho_success_mean,"
        "ho_success_std,return_mean,return_std,episodes_to_threshold\n";
}

void write_summary_row(std::ostream& os, const SummaryRow& r) {
  const auto old = os.precision(10);
  os << r.agent << ',' << r.parameter << ',' << r.value << ',' << r.label << ',' << r.episodes
     << ',' << r.sum_delay.mean << ',' << r.sum_delay.std << ',' << r.collision_rb.mean << ','
     << r.collision_rb.std << ',' << r.collision_prach.mean << ',' << r.collision_prach.std << ','
     << r.ho_success.mean << ',' << r.ho_success.std << ',' << r.episode_return.mean << ','
     << r.episode_return.std << ',';
  if (r.episodes_to_threshold) os << *r.episodes_to_threshold;
  os << '\n';
  os.precision(old);
}

Evaluation evaluate(const env::ScenarioConfig& scenario, agents::Agent& agent,
                    std::size_t episodes, std::uint64_t master_seed, std::ostream* trace) {
  env::HandoverEnv env(scenario);
  Evaluation out;
  std::vector<double> delay, crb, cp, h, ret;
  if (trace) {
    trace->precision(10);
    env::write_trace_header(*trace, scenario.num_planes);
  }
  for (std::size_t i = 0; i < episodes; ++i) {
    auto obs = env.reset(master_seed + i);
    agent.begin_episode(env);
    std::vector<env::StepOutcome> outcomes;
    while (!env.done()) {
      auto result = env.step(agent.act(env, obs));
      obs = std::move(result.observation);
      if (trace) env::write_trace_row(*trace, static_cast<long>(i), result.outcome);
      outcomes.push_back(std::move(result.outcome));
    }
    const auto m = env::episode_metrics(outcomes, env.state(), scenario);
    out.episodes.push_back(m);
    delay.push_back(m.sum_delay);
    crb.push_back(m.sum_collision_rb);
    cp.push_back(m.sum_collision_prach);
    h.push_back(m.ho_success);
    ret.push_back(m.episode_return);
  }
  out.summary.episodes = episodes;
  out.summary.sum_delay = mean_std(delay);
  out.summary.collision_rb = mean_std(crb);
  out.summary.collision_prach = mean_std(cp);
  out.summary.ho_success = mean_std(h);
  out.summary.episode_return = mean_std(ret);
  return out;
}

std::unique_ptr<agents::Agent> make_agent(agents::AgentKind kind,
                                          std::shared_ptr<const drl::PolicyParameters> params,
                                          agents::PolicyMode mode, std::uint64_t seed) {
  switch (kind) {
    case agents::AgentKind::conventional:
      return agents::make_conventional_agent();
    case agents::AgentKind::random:
      return agents::make_random_agent(seed);
    case agents::AgentKind::dho:
      if (!params) throw ConfigError("agent.kind: dho needs a trained policy or checkpoint");
      return agents::make_dho_agent(std::move(params), mode, seed);
  }
  throw ConfigError("agent.kind: unsupported");
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

/// Trains or loads the DHO policy of `spec`; returns nullptr for other agents.
std::shared_ptr<const drl::PolicyParameters> obtain_policy(
    const ExperimentSpec& spec, agents::AgentKind kind,
    std::optional<drl::TrainResult>* training) {
  if (kind != agents::AgentKind::dho) return nullptr;
  if (!spec.checkpoint.empty()) {
    auto params = drl::load_checkpoint(spec.checkpoint);
    drl::check_compatible(params, spec.scenario);
    return std::make_shared<const drl::PolicyParameters>(std::move(params));
  }
  auto result = drl::train(spec.scenario, spec.training, spec.train_episodes,
                           spec.training.actors, spec.master_seed);
  auto params = std::make_shared<const drl::PolicyParameters>(result.params);
  if (training) *training = std::move(result);
  return params;
}

}  // namespace

RunReport run(const ExperimentSpec& spec) {
  RunReport report;
  report.params = obtain_policy(spec, spec.agent, &report.training);
  if (report.training) {
    auto curve = open_output(spec.output_dir, "learning_curve.csv");
    curve.precision(10);
    drl::write_curve_csv(curve, report.training->curve);
    drl::save_checkpoint(*report.params, spec.output_dir / "policy.ckpt");
  }
  auto agent = make_agent(spec.agent, report.params, spec.eval_mode, spec.master_seed);
  auto trace = open_output(spec.output_dir, "trace.csv");
  Evaluation eval = evaluate(spec.scenario, *agent, spec.eval_episodes, spec.master_seed, &trace);
  report.summary = eval.summary;
  report.summary.agent = agents::to_string(spec.agent);
  report.summary.label = nu_label(spec.scenario.nu);
  if (report.training)
    report.summary.episodes_to_threshold = episodes_to_threshold(report.training->curve);

  auto summary = open_output(spec.output_dir, "summary.csv");
  write_summary_header(summary);
  write_summary_row(summary, report.summary);
  return report;
}

std::vector<SummaryRow> sweep(const ExperimentSpec& spec) {
  if (!spec.sweep) throw ConfigError("sweep.parameter: no sweep configured");
  const SweepSpec& sw = *spec.sweep;
  std::vector<agents::AgentKind> kinds = sw.agents;
  if (kinds.empty()) kinds.push_back(spec.agent);

  std::vector<SummaryRow> rows;
  for (double value : sw.values) {
    ExperimentSpec point = spec;
    point.sweep.reset();
    apply_setting(point, sw.parameter, format_value(value));
    point.finalize();
    for (auto kind : kinds) {
      std::optional<drl::TrainResult> training;
      auto params = obtain_policy(point, kind, &training);
      auto agent = make_agent(kind, params, point.eval_mode, point.master_seed);
      Evaluation eval =
          evaluate(point.scenario, *agent, point.eval_episodes, point.master_seed, nullptr);
      SummaryRow row = eval.summary;
      row.agent = agents::to_string(kind);
      row.parameter = sw.parameter;
      row.value = format_value(value);
      row.label = nu_label(point.scenario.nu);
      if (training) row.episodes_to_threshold = episodes_to_threshold(training->curve);
      rows.push_back(std::move(row));
    }
  }
  auto out = open_output(spec.output_dir, "sweep.csv");
  write_summary_header(out);
  for (const auto& row : rows) write_summary_row(out, row);
  return rows;
}

BehaviorStats behavior_stats(const drl::PolicyParameters& params,
                             const env::ScenarioConfig& scenario, std::size_t episodes,
                             agents::PolicyMode mode, std::uint64_t master_seed) {
  drl::check_compatible(params, scenario);
  env::HandoverEnv env(scenario);
  env::Rng rng(master_seed);
  std::size_t requests = 0;
  std::size_t waits = 0;
  for (std::size_t i = 0; i < episodes; ++i) {
    auto obs = env.reset(master_seed + i);
    while (!env.done()) {
      const auto accessed = env.state().accessed;
      auto decision = agents::dho_decide(params, obs, accessed, rng, mode);
      for (std::size_t j = 0; j < accessed.size(); ++j) {
        if (accessed[j]) continue;
        if (decision.action.choice[j] > 0)
          ++requests;
        else
          ++waits;
      }
      obs = env.step(decision.action).observation;
    }
  }
  BehaviorStats stats;
  stats.decisions = requests + waits;
  if (stats.decisions > 0) {
    stats.request_fraction = static_cast<double>(requests) / static_cast<double>(stats.decisions);
    stats.no_request_fraction = static_cast<double>(waits) / static_cast<double>(stats.decisions);
  }
  return stats;
}

std::vector<env::FeatureMask> default_ablation_masks() {
  return {
      env::FeatureMask::parse("local"),
      env::FeatureMask::parse("local,-time"),
      env::FeatureMask::parse("local,-accessed"),
      env::FeatureMask::parse("local,-prev"),
      env::FeatureMask::parse("local,-time,-accessed"),
      env::FeatureMask::parse("centralized"),
  };
}

std::vector<AblationCurve> ablation(const ExperimentSpec& spec,
                                    const std::vector<env::FeatureMask>& masks) {
  std::vector<AblationCurve> curves;
  for (const auto& mask : masks) {
    env::ScenarioConfig scenario = spec.scenario;
    scenario.mask = mask;
    if (scenario.observation_size() == 0)
      throw ConfigError("scenario.mask: '" + mask.to_string() + "' leaves an empty observation");
    AblationCurve c;
    c.mask = mask;
    c.result = drl::train(scenario, spec.training, spec.train_episodes, spec.training.actors,
                          spec.master_seed);
    c.curve = c.result.curve;
    curves.push_back(std::move(c));
  }
  auto out = open_output(spec.output_dir, "ablation.csv");
  out.precision(10);
  out << "mask,episode,mean_return,sum_delay,sum_collision\n";
  for (const auto& c : curves)
    for (const auto& p : c.curve)
      out << '"' << c.mask.to_string() << "\"," << p.episode << ',' << p.mean_return << ','
          << p.sum_delay << ',' << p.sum_collision << '\n';
  return curves;
}

std::optional<std::size_t> episodes_to_threshold(const std::vector<drl::CurvePoint>& curve) {
  if (curve.empty()) return std::nullopt;
  constexpr std::size_t window = 5;
  std::vector<double> smooth(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t k = lo; k <= i; ++k) sum += curve[k].mean_return;
    smooth[i] = sum / static_cast<double>(i - lo + 1);
  }
  const double start = smooth.front();
  const double best = *std::max_element(smooth.begin(), smooth.end());
  const double threshold = start + 0.9 * (best - start);
  for (std::size_t i = 0; i < smooth.size(); ++i)
    if (smooth[i] >= threshold) return curve[i].episode;
  return std::nullopt;
}

std::string nu_label(double nu) {
  if (nu > 1.0) return "delay-aware";
  if (nu < 1.0) return "collision-averse";
  return "balanced";
}

}  // namespace leoho::exp
