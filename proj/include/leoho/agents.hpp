#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "leoho/env.hpp"
#include "leoho/link.hpp"
#include "leoho/network.hpp"

namespace leoho::agents {

enum class AgentKind { conventional, random, dho };
enum class PolicyMode { sample, greedy };

AgentKind parse_agent_kind(const std::string& text);
std::string to_string(AgentKind kind);
PolicyMode parse_policy_mode(const std::string& text);

/// Consecutive slots for which each UE has seen an A3 condition.
struct TriggerCounters {
  std::vector<int> consecutive;
};

/// A3-triggered baseline: once the condition has held for `required_slots`
/// slots in a row, the UE requests the target with the best L3 value (lowest
/// index on ties). Accessed UEs always get 0.
env::ActionMatrix conventional_decide(const link::MeasurementState& measurements,
                                      const std::vector<std::uint8_t>& accessed, double offset_db,
                                      int required_slots, TriggerCounters& counters);

env::ActionMatrix random_decide(env::Rng& rng, const std::vector<std::uint8_t>& accessed,
                                std::size_t num_planes);

struct DhoDecision {
  env::ActionMatrix action;
  /// log pi(a_j|s) per UE; 0 for accessed UEs whose head is forced to 0.
  std::vector<double> head_logprobs;
  double logprob = 0.0;
};

/// Throws std::invalid_argument when the observation does not fit the network.
DhoDecision dho_decide(const drl::PolicyParameters& params, const env::Observation& observation,
                       const std::vector<std::uint8_t>& accessed, env::Rng& rng, PolicyMode mode);

/// Common driver interface used by evaluation.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void begin_episode(const env::HandoverEnv& env) = 0;
  virtual env::ActionMatrix act(const env::HandoverEnv& env, const env::Observation& obs) = 0;
};

std::unique_ptr<Agent> make_conventional_agent();
std::unique_ptr<Agent> make_random_agent(std::uint64_t seed);
std::unique_ptr<Agent> make_dho_agent(std::shared_ptr<const drl::PolicyParameters> params,
                                      PolicyMode mode, std::uint64_t seed);

}  // namespace leoho::agents
