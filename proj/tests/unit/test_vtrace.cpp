#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "leoho/vtrace.hpp"

using namespace leoho::drl;

namespace {

// v_s = V(x_s) + sum_{t>=s} gamma^{t-s} (prod_{i=s}^{t-1} c_i) rho_t delta_t
Eigen::VectorXd direct_sum(const Eigen::VectorXd& values, double bootstrap,
                           const Eigen::VectorXd& rewards, const Eigen::VectorXd& ratios,
                           double gamma, double rho_bar, double c_bar) {
  const Eigen::Index L = values.size();
  auto v_at = [&](Eigen::Index t) { return t < L ? values(t) : bootstrap; };
  Eigen::VectorXd out(L);
  for (Eigen::Index s = 0; s < L; ++s) {
    double acc = values(s);
    for (Eigen::Index t = s; t < L; ++t) {
      double weight = std::pow(gamma, static_cast<double>(t - s));
      for (Eigen::Index i = s; i < t; ++i) weight *= std::min(c_bar, ratios(i));
      const double delta = std::min(rho_bar, ratios(t)) * (rewards(t) + gamma * v_at(t + 1) - v_at(t));
      acc += weight * delta;
    }
    out(s) = acc;
  }
  return out;
}

struct Case {
  Eigen::VectorXd values, rewards, log_ratios;
  double bootstrap;
};

Case random_case(std::mt19937_64& rng, Eigen::Index L) {
  std::normal_distribution<double> n(0.0, 1.0);
  Case c;
  c.values.resize(L);
  c.rewards.resize(L);
  c.log_ratios.resize(L);
  for (Eigen::Index i = 0; i < L; ++i) {
    c.values(i) = n(rng);
    c.rewards(i) = n(rng);
    c.log_ratios(i) = 0.7 * n(rng);
  }
  c.bootstrap = n(rng);
  return c;
}

}  // namespace

TEST(Vtrace, MatchesDirectSumOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_case(rng, 3 + trial % 5);
    const double gamma = 0.9, rho_bar = 1.2, c_bar = 0.9;
    const auto out = vtrace_from_log_ratios(c.values, c.bootstrap, c.rewards, c.log_ratios, gamma,
                                            rho_bar, c_bar);
    const auto expect = direct_sum(c.values, c.bootstrap, c.rewards,
                                   c.log_ratios.array().exp().matrix(), gamma, rho_bar, c_bar);
    for (Eigen::Index i = 0; i < c.values.size(); ++i) EXPECT_NEAR(out.targets(i), expect(i), 1e-10);
  }
}

TEST(Vtrace, OnPolicyGivesNStepReturn) {
  std::mt19937_64 rng(5);
  auto c = random_case(rng, 6);
  c.log_ratios.setZero();
  const double gamma = 0.95;
  const auto out = vtrace_from_log_ratios(c.values, c.bootstrap, c.rewards, c.log_ratios, gamma, 1.0, 1.0);
  for (Eigen::Index s = 0; s < 6; ++s) {
    double ret = 0.0, disc = 1.0;
    for (Eigen::Index t = s; t < 6; ++t) {
      ret += disc * c.rewards(t);
      disc *= gamma;
    }
    ret += disc * c.bootstrap;
    EXPECT_NEAR(out.targets(s), ret, 1e-12);
    EXPECT_EQ(out.rho(s), 1.0);
    EXPECT_EQ(out.c(s), 1.0);
  }
}

TEST(Vtrace, ZeroTruncationReturnsValues) {
  std::mt19937_64 rng(6);
  const auto c = random_case(rng, 5);
  const auto out = vtrace_from_log_ratios(c.values, c.bootstrap, c.rewards, c.log_ratios, 0.9, 0.0, 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(out.targets(i), c.values(i));
}

TEST(Vtrace, PolicyAdvantageUsesNextTarget) {
  std::mt19937_64 rng(8);
  const auto c = random_case(rng, 5);
  const double gamma = 0.9;
  const auto out = vtrace_from_log_ratios(c.values, c.bootstrap, c.rewards, c.log_ratios, gamma, 1.0, 1.0);
  for (Eigen::Index n = 0; n < 5; ++n) {
    const double next = n + 1 < 5 ? out.targets(n + 1) : c.bootstrap;
    const double rho = std::min(1.0, std::exp(c.log_ratios(n)));
    EXPECT_NEAR(out.pg_advantages(n), rho * (c.rewards(n) + gamma * next - c.values(n)), 1e-12);
  }
}

TEST(Vtrace, TruncationShrinksCorrections) {
  std::mt19937_64 rng(21);
  const double inf = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_case(rng, 1);
    const auto full = vtrace_from_log_ratios(c.values, c.bootstrap, c.rewards, c.log_ratios, 0.9, inf, inf);
    const auto cut = vtrace_from_log_ratios(c.values, c.bootstrap, c.rewards, c.log_ratios, 0.9, 1.0, 1.0);
    EXPECT_LE(std::abs(cut.targets(0) - c.values(0)), std::abs(full.targets(0) - c.values(0)) + 1e-12);
  }
}

TEST(Vtrace, NonFiniteRatioThrows) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2), r = Eigen::VectorXd::Zero(2), lr(2);
  lr << 0.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(vtrace_from_log_ratios(v, 0.0, r, lr, 0.9, 1.0, 1.0), std::domain_error);
  lr << 0.0, 1e6;
  EXPECT_THROW(vtrace_from_log_ratios(v, 0.0, r, lr, 0.9, 1.0, 1.0), std::domain_error);
}

TEST(VtraceConfig, Validation) {
  VtraceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.c_bar = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
