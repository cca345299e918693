#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "leoho/link.hpp"
#include "leoho/orbital.hpp"

namespace leoho::env {

using Rng = std::mt19937_64;
using Observation = std::vector<double>;

/// Which blocks enter the observation vector.
struct FeatureMask {
  bool time_index = true;
  bool accessed_vector = true;
  bool prev_action = true;
  bool a3_centralized = false;

  bool operator==(const FeatureMask&) const = default;
  /// Comma-separated flags, e.g. "time,accessed,prev" or "local,a3".
  static FeatureMask parse(const std::string& text);
  std::string to_string() const;
};

struct ScenarioConfig {
  std::size_t num_ues = 10;           // J
  std::size_t num_planes = 3;         // K, plane 0 serves
  std::vector<int> rb_total{10, 10};  // episode budget per target plane 1..K-1
  int preambles = 50;                 // P per target
  int episode_slots = 20;             // N
  double slot_duration_s = 0.3;       // tau
  double nu = 1.0;
  double area_m = 1000.0;
  /// Empty means uniform placement over the square area centred on the origin.
  std::vector<orbital::Vec3> ue_positions;
  std::uint64_t seed = 0;
  FeatureMask mask;

  std::string terminal = "vsat";
  double shadowing_sigma_db = 2.0;
  double dl_eirp_dbw = 10.0;
  int k_iir = 4;
  double measurement_period_s = 0.15;
  double a3_offset_db = 1.0;
  int a3_trigger_slots = 1;
  double altitude_m = 550e3;

  /// Throws std::invalid_argument whose message starts with the field name.
  void validate() const;
  std::size_t observation_size() const;
  /// L1 samples folded into the L3 filter per slot (tau / T_M, at least 1).
  int samples_per_slot() const;
  int total_rbs() const;
};

/// Per-UE plane choice; 0 means no request this slot.
struct ActionMatrix {
  std::size_t num_planes = 0;
  std::vector<int> choice;

  ActionMatrix() = default;
  ActionMatrix(std::size_t num_ues, std::size_t planes) : num_planes(planes), choice(num_ues, 0) {}

  std::size_t num_ues() const { return choice.size(); }
  /// J x K with exactly one 1 per row.
  Eigen::MatrixXd one_hot() const;
  bool operator==(const ActionMatrix&) const = default;
};

struct EnvState {
  int slot = 0;
  std::vector<std::uint8_t> accessed;
  std::vector<int> rb_remaining;  // index k-1 for target plane k
  std::vector<int> prev_action;
  std::vector<orbital::Vec3> ue_positions;
  orbital::ConstellationState constellation;
  link::MeasurementState measurements;
  Rng channel_rng;
  Rng access_rng;

  int accessed_count() const;
};

bool operator==(const EnvState& a, const EnvState& b);

struct StepOutcome {
  int slot = 0;  // n, 1-based
  std::vector<int> requested;  // h^R: 0 or target plane
  std::vector<int> command;    // h^C: 0 or target plane
  std::vector<int> preamble;   // 0 when no RACH attempt
  std::vector<std::uint8_t> rb_collision;
  std::vector<std::uint8_t> prach_collision;
  std::vector<std::uint8_t> newly_accessed;
  std::vector<double> collision_rb;  // C^R_k, index k-1
  double collision_prach = 0.0;      // C^P
  double collision_total = 0.0;      // C
  double delay = 0.0;                // D
  double reward = 0.0;
  int accessed_count = 0;

  bool operator==(const StepOutcome&) const = default;
};

struct MetricsRecord {
  double sum_delay = 0.0;
  double sum_collision_rb = 0.0;
  double sum_collision_prach = 0.0;
  double ho_success = 0.0;  // H
  double episode_return = 0.0;

  double sum_collision() const { return sum_collision_rb + sum_collision_prach; }
};

struct AdmissionResult {
  std::vector<int> command;
  std::vector<std::uint8_t> rb_collision;
  std::vector<double> collision_rate;  // index k-1
};

/// Grants HO commands per target. Requesters beyond the remaining RBs are
/// NACKed; the granted subset is drawn uniformly without replacement.
AdmissionResult admission(const std::vector<int>& requested, const std::vector<int>& rb_remaining,
                          Rng& rng);

struct RachResult {
  std::vector<int> preamble;
  std::vector<std::uint8_t> collided;
  std::vector<std::uint8_t> newly_accessed;
  double collision_rate = 0.0;
};

/// Preamble draw for every commanded UE; equal (target, preamble) pairs collide.
RachResult rach(const std::vector<int>& command, int preambles, Rng& rng);

/// Feature blocks in order: [n/N], accessed (J), one-hot previous action
/// (J*K, row-major per UE), A3 flags (J*(K-1), row-major per UE).
Observation observe(const EnvState& state, const ScenarioConfig& config);

/// Throws std::invalid_argument when the trace length differs from N.
MetricsRecord episode_metrics(const std::vector<StepOutcome>& outcomes, const EnvState& final_state,
                              const ScenarioConfig& config);

class HandoverEnv {
 public:
  explicit HandoverEnv(ScenarioConfig config);

  Observation reset(std::uint64_t seed);

  struct StepResult {
    Observation observation;
    StepOutcome outcome;
  };
  /// Request, admission, RACH, completion, metrics, reward, then advance.
  /// Throws std::logic_error once the episode is finished.
  StepResult step(const ActionMatrix& action);

  bool done() const { return state_.slot >= config_.episode_slots; }
  const EnvState& state() const { return state_; }
  const ScenarioConfig& config() const { return config_; }
  const orbital::OrbitalConfig& orbital_config() const { return orbital_; }
  const link::TerminalProfile& profile() const { return profile_; }

 private:
  void measure();

  ScenarioConfig config_;
  orbital::OrbitalConfig orbital_;
  link::TerminalProfile profile_;
  EnvState state_;
  bool started_ = false;
};

void write_trace_header(std::ostream& os, std::size_t num_planes);
void write_trace_row(std::ostream& os, long episode, const StepOutcome& outcome);

}  // namespace leoho::env
