#include "leoho/agents.hpp"

#include <stdexcept>
#include <utility>

#include "leoho/categorical.hpp"

namespace leoho::agents {

AgentKind parse_agent_kind(const std::string& text) {
  if (text == "conventional" || text == "ho") return AgentKind::conventional;
  if (text == "random") return AgentKind::random;
  if (text == "dho") return AgentKind::dho;
  throw std::invalid_argument("agent: unknown kind '" + text + "'");
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::conventional:
      return "conventional";
    case AgentKind::random:
      return "random";
    case AgentKind::dho:
      return "dho";
  }
  return "unknown";
}

PolicyMode parse_policy_mode(const std::string& text) {
  if (text == "sample") return PolicyMode::sample;
  if (text == "greedy") return PolicyMode::greedy;
  throw std::invalid_argument("mode: expected sample or greedy, got '" + text + "'");
}

env::ActionMatrix conventional_decide(const link::MeasurementState& measurements,
                                      const std::vector<std::uint8_t>& accessed, double offset_db,
                                      int required_slots, TriggerCounters& counters) {
  const std::size_t num_ues = accessed.size();
  const std::size_t num_planes = measurements.num_planes();
  counters.consecutive.resize(num_ues, 0);
  env::ActionMatrix action(num_ues, num_planes);
  for (std::size_t j = 0; j < num_ues; ++j) {
    if (accessed[j]) {
      counters.consecutive[j] = 0;
      continue;
    }
    const double serving = measurements.l3(j, 0);
    int best = 0;
    for (std::size_t k = 1; k < num_planes; ++k) {
      const double target = measurements.l3(j, k);
      if (!link::a3_event(serving, target, offset_db)) continue;
      if (best == 0 || target > measurements.l3(j, static_cast<std::size_t>(best)))
        best = static_cast<int>(k);
    }
    counters.consecutive[j] = best > 0 ? counters.consecutive[j] + 1 : 0;
    if (best > 0 && counters.consecutive[j] >= required_slots) action.choice[j] = best;
  }
  return action;
}

env::ActionMatrix random_decide(env::Rng& rng, const std::vector<std::uint8_t>& accessed,
                                std::size_t num_planes) {
  env::ActionMatrix action(accessed.size(), num_planes);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(num_planes) - 1);
  for (std::size_t j = 0; j < accessed.size(); ++j)
    if (!accessed[j]) action.choice[j] = pick(rng);
  return action;
}

DhoDecision dho_decide(const drl::PolicyParameters& params, const env::Observation& observation,
                       const std::vector<std::uint8_t>& accessed, env::Rng& rng, PolicyMode mode) {
  const auto& shape = params.shape();
  if (observation.size() != shape.obs_dim)
    throw std::invalid_argument("dho_decide: observation length does not match the network");
  if (accessed.size() != shape.num_ues)
    throw std::invalid_argument("dho_decide: accessed vector does not match the network");
  const drl::ForwardResult out = drl::forward(params, observation);

  DhoDecision decision;
  decision.action = env::ActionMatrix(shape.num_ues, shape.num_planes);
  decision.head_logprobs.assign(shape.num_ues, 0.0);
  for (std::size_t j = 0; j < shape.num_ues; ++j) {
    if (accessed[j]) continue;
    const Eigen::VectorXd log_p =
        drl::log_softmax(out.logits.row(static_cast<Eigen::Index>(j)).transpose());
    const int a = mode == PolicyMode::sample ? drl::sample_categorical(log_p, rng)
                                             : drl::argmax_first(log_p);
    decision.action.choice[j] = a;
    decision.head_logprobs[j] = log_p(a);
    decision.logprob += log_p(a);
  }
  return decision;
}

namespace {

class ConventionalAgent final : public Agent {
 public:
  void begin_episode(const env::HandoverEnv&) override { counters_ = {}; }
  env::ActionMatrix act(const env::HandoverEnv& env, const env::Observation&) override {
    const auto& cfg = env.config();
    return conventional_decide(env.state().measurements, env.state().accessed, cfg.a3_offset_db,
                               cfg.a3_trigger_slots, counters_);
  }

 private:
  TriggerCounters counters_;
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}
  void begin_episode(const env::HandoverEnv&) override {}
  env::ActionMatrix act(const env::HandoverEnv& env, const env::Observation&) override {
    return random_decide(rng_, env.state().accessed, env.config().num_planes);
  }

 private:
  env::Rng rng_;
};

class DhoAgent final : public Agent {
 public:
  DhoAgent(std::shared_ptr<const drl::PolicyParameters> params, PolicyMode mode,
           std::uint64_t seed)
      : params_(std::move(params)), mode_(mode), rng_(seed) {}
  void begin_episode(const env::HandoverEnv&) override {}
  env::ActionMatrix act(const env::HandoverEnv& env, const env::Observation& obs) override {
    return dho_decide(*params_, obs, env.state().accessed, rng_, mode_).action;
  }

 private:
  std::shared_ptr<const drl::PolicyParameters> params_;
  PolicyMode mode_;
  env::Rng rng_;
};

}  // namespace

std::unique_ptr<Agent> make_conventional_agent() { return std::make_unique<ConventionalAgent>(); }

std::unique_ptr<Agent> make_random_agent(std::uint64_t seed) {
  return std::make_unique<RandomAgent>(seed);
}

std::unique_ptr<Agent> make_dho_agent(std::shared_ptr<const drl::PolicyParameters> params,
                                      PolicyMode mode, std::uint64_t seed) {
  return std::make_unique<DhoAgent>(std::move(params), mode, seed);
}

}  // namespace leoho::agents
