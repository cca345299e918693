#include "leoho/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace leoho::env {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace

FeatureMask FeatureMask::parse(const std::string& text) {
  FeatureMask m{false, false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "local") {
      m.time_index = m.accessed_vector = m.prev_action = true;
    } else if (item == "centralized") {
      m.time_index = m.accessed_vector = m.prev_action = m.a3_centralized = true;
    } else if (item == "time") {
      m.time_index = true;
    } else if (item == "accessed") {
      m.accessed_vector = true;
    } else if (item == "prev") {
      m.prev_action = true;
    } else if (item == "a3") {
      m.a3_centralized = true;
    } else if (item == "-time") {
      m.time_index = false;
    } else if (item == "-accessed") {
      m.accessed_vector = false;
    } else if (item == "-prev") {
      m.prev_action = false;
    } else {
      throw std::invalid_argument("mask: unknown feature '" + item + "'");
    }
  }
  return m;
}

std::string FeatureMask::to_string() const {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (time_index) add("time");
  if (accessed_vector) add("accessed");
  if (prev_action) add("prev");
  if (a3_centralized) add("a3");
  return out.empty() ? std::string("none") : out;
}

void ScenarioConfig::validate() const {
  if (num_ues < 1) throw std::invalid_argument("J: must be >= 1");
  if (num_planes < 2) throw std::invalid_argument("K: must be >= 2");
  if (rb_total.size() != num_planes - 1)
    throw std::invalid_argument("rb_total: needs one entry per target plane (K-1)");
  for (int r : rb_total)
    if (r < 0) throw std::invalid_argument("rb_total: entries must be >= 0");
  if (preambles < 1) throw std::invalid_argument("P: must be >= 1");
  if (episode_slots < 1) throw std::invalid_argument("N: must be >= 1");
  if (!(slot_duration_s > 0.0)) throw std::invalid_argument("tau: must be > 0");
  if (!(nu >= 0.0)) throw std::invalid_argument("nu: must be >= 0");
  if (!(area_m > 0.0)) throw std::invalid_argument("area_m: must be > 0");
  if (!ue_positions.empty() && ue_positions.size() != num_ues)
    throw std::invalid_argument("ue_positions: needs exactly J entries");
  if (!(shadowing_sigma_db >= 0.0))
    throw std::invalid_argument("shadowing_sigma_db: must be >= 0");
  if (k_iir < 0) throw std::invalid_argument("k_iir: must be >= 0");
  if (!(measurement_period_s > 0.0))
    throw std::invalid_argument("measurement_period_s: must be > 0");
  if (a3_trigger_slots < 1) throw std::invalid_argument("a3_trigger_slots: must be >= 1");
  if (!(altitude_m > 0.0)) throw std::invalid_argument("altitude_m: must be > 0");
  link::profile_by_name(terminal);
}

std::size_t ScenarioConfig::observation_size() const {
  std::size_t n = 0;
  if (mask.time_index) n += 1;
  if (mask.accessed_vector) n += num_ues;
  if (mask.prev_action) n += num_ues * num_planes;
  if (mask.a3_centralized) n += num_ues * (num_planes - 1);
  return n;
}

int ScenarioConfig::samples_per_slot() const {
  return std::max(1, static_cast<int>(std::lround(slot_duration_s / measurement_period_s)));
}

int ScenarioConfig::total_rbs() const {
  int total = 0;
  for (int r : rb_total) total += r;
  return total;
}

Eigen::MatrixXd ActionMatrix::one_hot() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(choice.size()),
                                            static_cast<Eigen::Index>(num_planes));
  for (std::size_t j = 0; j < choice.size(); ++j) m(static_cast<Eigen::Index>(j), choice[j]) = 1.0;
  return m;
}

int EnvState::accessed_count() const {
  return static_cast<int>(std::count(accessed.begin(), accessed.end(), std::uint8_t{1}));
}

bool operator==(const EnvState& a, const EnvState& b) {
  if (a.slot != b.slot || a.accessed != b.accessed || a.rb_remaining != b.rb_remaining ||
      a.prev_action != b.prev_action || a.ue_positions != b.ue_positions ||
      a.constellation.slot_index != b.constellation.slot_index ||
      a.constellation.positions != b.constellation.positions ||
      a.channel_rng != b.channel_rng || a.access_rng != b.access_rng)
    return false;
  const auto& ma = a.measurements;
  const auto& mb = b.measurements;
  if (ma.num_ues() != mb.num_ues() || ma.num_planes() != mb.num_planes()) return false;
  for (std::size_t j = 0; j < ma.num_ues(); ++j)
    for (std::size_t k = 0; k < ma.num_planes(); ++k)
      if (ma.l1(j, k) != mb.l1(j, k) || ma.l3(j, k) != mb.l3(j, k)) return false;
  return true;
}

AdmissionResult admission(const std::vector<int>& requested, const std::vector<int>& rb_remaining,
                          Rng& rng) {
  const std::size_t num_ues = requested.size();
  AdmissionResult out;
  out.command.assign(num_ues, 0);
  out.rb_collision.assign(num_ues, 0);
  out.collision_rate.assign(rb_remaining.size(), 0.0);

  for (std::size_t t = 0; t < rb_remaining.size(); ++t) {
    const int target = static_cast<int>(t) + 1;
    std::vector<std::size_t> requesters;
    for (std::size_t j = 0; j < num_ues; ++j)
      if (requested[j] == target) requesters.push_back(j);

    const auto available = static_cast<std::size_t>(std::max(0, rb_remaining[t]));
    if (requesters.size() <= available) {
      for (std::size_t j : requesters) out.command[j] = target;
      continue;
    }
    // Partial Fisher-Yates: the first `available` slots become the granted set.
    for (std::size_t i = 0; i < available; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, requesters.size() - 1);
      std::swap(requesters[i], requesters[pick(rng)]);
    }
    for (std::size_t i = 0; i < requesters.size(); ++i) {
      if (i < available)
        out.command[requesters[i]] = target;
      else
        out.rb_collision[requesters[i]] = 1;
    }
    out.collision_rate[t] = static_cast<double>(requesters.size() - available) /
                            static_cast<double>(num_ues);
  }
  return out;
}

RachResult rach(const std::vector<int>& command, int preambles, Rng& rng) {
  const std::size_t num_ues = command.size();
  RachResult out;
  out.preamble.assign(num_ues, 0);
  out.collided.assign(num_ues, 0);
  out.newly_accessed.assign(num_ues, 0);

  std::uniform_int_distribution<int> draw(1, preambles);
  std::map<std::pair<int, int>, int> usage;
  for (std::size_t j = 0; j < num_ues; ++j) {
    if (command[j] == 0) continue;
    out.preamble[j] = draw(rng);
    ++usage[{command[j], out.preamble[j]}];
  }
  int collided = 0;
  for (std::size_t j = 0; j < num_ues; ++j) {
    if (command[j] == 0) continue;
    if (usage[{command[j], out.preamble[j]}] > 1) {
      out.collided[j] = 1;
      ++collided;
    } else {
      out.newly_accessed[j] = 1;
    }
  }
  out.collision_rate = static_cast<double>(collided) / static_cast<double>(num_ues);
  return out;
}

Observation observe(const EnvState& state, const ScenarioConfig& config) {
  Observation obs;
  obs.reserve(config.observation_size());
  const std::size_t num_ues = config.num_ues;
  const std::size_t num_planes = config.num_planes;
  if (config.mask.time_index)
    obs.push_back(static_cast<double>(state.slot) / static_cast<double>(config.episode_slots));
  if (config.mask.accessed_vector)
    for (std::size_t j = 0; j < num_ues; ++j) obs.push_back(state.accessed[j] ? 1.0 : 0.0);
  if (config.mask.prev_action)
    for (std::size_t j = 0; j < num_ues; ++j)
      for (std::size_t k = 0; k < num_planes; ++k)
        obs.push_back(state.prev_action[j] == static_cast<int>(k) ? 1.0 : 0.0);
  if (config.mask.a3_centralized)
    for (std::size_t j = 0; j < num_ues; ++j)
      for (std::size_t k = 1; k < num_planes; ++k)
        obs.push_back(state.measurements.a3(j, k) ? 1.0 : 0.0);
  return obs;
}

MetricsRecord episode_metrics(const std::vector<StepOutcome>& outcomes, const EnvState& final_state,
                              const ScenarioConfig& config) {
  if (outcomes.size() != static_cast<std::size_t>(config.episode_slots))
    throw std::invalid_argument("episode_metrics: trace length " +
                                std::to_string(outcomes.size()) + " != N " +
                                std::to_string(config.episode_slots));
  MetricsRecord m;
  for (const auto& o : outcomes) {
    m.sum_delay += o.delay;
    for (double c : o.collision_rb) m.sum_collision_rb += c;
    m.sum_collision_prach += o.collision_prach;
    m.episode_return += o.reward;
  }
  m.ho_success = static_cast<double>(final_state.accessed_count()) /
                 static_cast<double>(config.num_ues);
  return m;
}

HandoverEnv::HandoverEnv(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
  orbital_ = orbital::default_orbital_config(config_.num_planes,
                                             static_cast<std::size_t>(config_.episode_slots),
                                             config_.slot_duration_s, config_.altitude_m);
  profile_ = link::profile_by_name(config_.terminal);
}

Observation HandoverEnv::reset(std::uint64_t seed) {
  const std::size_t num_ues = config_.num_ues;
  state_ = EnvState{};
  state_.channel_rng = make_stream(seed, 1);
  state_.access_rng = make_stream(seed, 2);

  if (config_.ue_positions.empty()) {
    Rng placement = make_stream(seed, 0);
    std::uniform_real_distribution<double> coord(-config_.area_m / 2.0, config_.area_m / 2.0);
    for (std::size_t j = 0; j < num_ues; ++j) {
      const double x = coord(placement);
      const double y = coord(placement);
      state_.ue_positions.emplace_back(x, y, 0.0);
    }
  } else {
    state_.ue_positions = config_.ue_positions;
  }

  state_.accessed.assign(num_ues, 0);
  state_.rb_remaining = config_.rb_total;
  state_.prev_action.assign(num_ues, 0);
  state_.constellation = orbital::initial_state(orbital_);
  state_.measurements = link::MeasurementState(num_ues, config_.num_planes, config_.k_iir,
                                               config_.measurement_period_s,
                                               config_.a3_offset_db);
  measure();
  started_ = true;
  return observe(state_, config_);
}

void HandoverEnv::measure() {
  const std::size_t num_ues = config_.num_ues;
  const std::size_t num_planes = config_.num_planes;
  const int samples = config_.samples_per_slot();
  std::normal_distribution<double> shadow(0.0, 1.0);
  std::vector<double> l1(num_ues * num_planes);
  for (int s = 0; s < samples; ++s) {
    // Sample s of a slot is taken s*T_M after the slot boundary.
    const double offset = static_cast<double>(s) * config_.measurement_period_s;
    for (std::size_t j = 0; j < num_ues; ++j) {
      const auto& ue = state_.ue_positions[j];
      for (std::size_t k = 0; k < num_planes; ++k) {
        const std::size_t i = orbital::nearest_sat(state_.constellation, k, ue);
        const orbital::Vec3 sat = state_.constellation.positions[k][i] +
                                  offset * state_.constellation.velocities[k][i];
        const double d_km = orbital::slant_distance(sat, ue) / 1e3;
        const double noise = config_.shadowing_sigma_db > 0.0
                                 ? config_.shadowing_sigma_db * shadow(state_.channel_rng)
                                 : 0.0;
        l1[j * num_planes + k] =
            link::rsrp_proxy(config_.dl_eirp_dbw, d_km, profile_.carrier_f_ghz, noise);
      }
    }
    state_.measurements.ingest(l1);
  }
}

HandoverEnv::StepResult HandoverEnv::step(const ActionMatrix& action) {
  if (!started_) throw std::logic_error("step: reset() has not been called");
  if (done()) throw std::logic_error("step: episode already finished");
  const std::size_t num_ues = config_.num_ues;
  if (action.choice.size() != num_ues)
    throw std::invalid_argument("step: action has wrong number of UEs");
  for (int a : action.choice)
    if (a < 0 || a >= static_cast<int>(config_.num_planes))
      throw std::invalid_argument("step: action out of range");

  StepOutcome out;
  out.slot = state_.slot + 1;

  // (1) requests from UEs that still need a handover
  out.requested.assign(num_ues, 0);
  for (std::size_t j = 0; j < num_ues; ++j)
    if (!state_.accessed[j] && action.choice[j] > 0) out.requested[j] = action.choice[j];

  // (2) admission against the remaining RBs
  AdmissionResult adm = admission(out.requested, state_.rb_remaining, state_.access_rng);
  out.command = adm.command;
  out.rb_collision = adm.rb_collision;
  out.collision_rb = adm.collision_rate;

  // (3) random access
  RachResult ra = rach(out.command, config_.preambles, state_.access_rng);
  out.preamble = ra.preamble;
  out.prach_collision = ra.collided;
  out.newly_accessed = ra.newly_accessed;
  out.collision_prach = ra.collision_rate;

  // (4) completion: successful UEs hold their RB, colliders hand theirs back
  for (std::size_t j = 0; j < num_ues; ++j) {
    if (!ra.newly_accessed[j]) continue;
    state_.accessed[j] = 1;
    --state_.rb_remaining[static_cast<std::size_t>(out.command[j] - 1)];
  }

  // (5) metrics, using the accessed vector after this slot's completions
  out.accessed_count = state_.accessed_count();
  out.delay = static_cast<double>(static_cast<int>(num_ues) - out.accessed_count) /
              static_cast<double>(num_ues);
  out.collision_total = out.collision_prach;
  for (double c : out.collision_rb) out.collision_total += c;

  // (6) shared reward
  out.reward = -out.delay - config_.nu * out.collision_total;

  // (7) advance
  state_.constellation = orbital::propagate(state_.constellation, orbital_, 1);
  state_.prev_action = action.choice;
  state_.slot += 1;
  measure();

  return {observe(state_, config_), std::move(out)};
}

void write_trace_header(std::ostream& os, std::size_t num_planes) {
  os << "episode,n,D";
  for (std::size_t k = 1; k < num_planes; ++k) os << ",C_R_" << k;
  os << ",C_P,reward,accessed_count\n";
}

void write_trace_row(std::ostream& os, long episode, const StepOutcome& o) {
  os << episode << ',' << o.slot << ',' << o.delay;
  for (double c : o.collision_rb) os << ',' << c;
  os << ',' << o.collision_prach << ',' << o.reward << ',' << o.accessed_count << '\n';
}

}  // namespace leoho::env
