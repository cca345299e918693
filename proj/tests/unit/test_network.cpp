#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "leoho/categorical.hpp"
#include "leoho/loss.hpp"
#include "leoho/network.hpp"
#include "leoho/trainer.hpp"

using namespace leoho;
using namespace leoho::drl;

namespace {

NetworkShape shape(std::size_t obs, std::size_t ues, std::size_t planes,
                   std::vector<std::size_t> hidden = {6, 5}) {
  NetworkShape s;
  s.obs_dim = obs;
  s.num_ues = ues;
  s.num_planes = planes;
  s.hidden = std::move(hidden);
  return s;
}

// Random segment with random behaviour log-probs and random masks.
TrajectorySegment random_segment(const NetworkShape& s, std::size_t len, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> act(0, static_cast<int>(s.num_planes) - 1);
  TrajectorySegment seg;
  for (std::size_t n = 0; n <= len; ++n) {
    env::Observation o(s.obs_dim);
    for (auto& x : o) x = u(rng);
    seg.observations.push_back(o);
  }
  for (std::size_t n = 0; n < len; ++n) {
    env::ActionMatrix a(s.num_ues, s.num_planes);
    std::vector<std::uint8_t> active(s.num_ues);
    std::vector<double> lp(s.num_ues, 0.0);
    for (std::size_t j = 0; j < s.num_ues; ++j) {
      active[j] = u(rng) < 0.8;
      if (active[j]) {
        a.choice[j] = act(rng);
        lp[j] = std::log(0.1 + 0.8 * u(rng));
      }
    }
    seg.actions.push_back(a);
    seg.active_heads.push_back(active);
    seg.behavior_logprobs.push_back(lp);
    seg.rewards.push_back(-u(rng));
  }
  seg.terminal = true;
  return seg;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b));
}

}  // namespace

TEST(Shape, ParamCount) {
  const auto s = shape(5, 2, 3, {4});
  // 5->4, 4->6 policy, 4->1 value
  EXPECT_EQ(s.param_count(), (5u * 4 + 4) + (4u * 6 + 6) + (4u * 1 + 1));
}

TEST(Forward, ZeroWeights) {
  PolicyParameters p(shape(5, 2, 3));
  const auto r = forward(p, std::vector<double>(5, 0.7));
  EXPECT_TRUE(r.logits.isZero());
  EXPECT_EQ(r.value, 0.0);
}

TEST(Forward, FiniteAndBatchConsistent) {
  auto p = PolicyParameters::glorot(shape(5, 2, 3), 4);
  p.flat().setRandom();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd obs(7, 5);
  for (Eigen::Index i = 0; i < obs.size(); ++i) obs(i) = u(rng);
  const auto batch = forward_batch(p, obs);
  for (Eigen::Index b = 0; b < 7; ++b) {
    std::vector<double> o(obs.row(b).data(), obs.row(b).data() + 0);
    Eigen::VectorXd row = obs.row(b).transpose();
    const auto single = forward(p, std::vector<double>(row.data(), row.data() + 5));
    EXPECT_TRUE(single.logits.allFinite());
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(single.logits(j, k), batch.logits(b, j * 3 + k), 1e-12);
    EXPECT_NEAR(single.value, batch.values(b), 1e-12);
  }
  EXPECT_THROW(forward(p, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST(Categorical, ShiftInvarianceAndEntropy) {
  Eigen::VectorXd z(3);
  z << 0.3, -1.2, 2.0;
  const Eigen::VectorXd a = log_softmax(z);
  const Eigen::VectorXd b = log_softmax((z.array() + 11.0).matrix());
  EXPECT_TRUE(a.isApprox(b, 1e-12));
  EXPECT_NEAR(a.array().exp().sum(), 1.0, 1e-12);
  EXPECT_NEAR(entropy_from_log_probs(log_softmax(Eigen::VectorXd::Zero(4))), std::log(4.0), 1e-12);
  Eigen::VectorXd det(3);
  det << 0.0, -1e6, -1e6;
  EXPECT_NEAR(entropy_from_log_probs(log_softmax(det)), 0.0, 1e-12);
}

TEST(Glorot, NearUniformPolicyAndZeroValue) {
  const auto p = PolicyParameters::glorot(shape(41, 10, 3, {128, 128}), 1);
  const auto r = forward(p, std::vector<double>(41, 1.0));
  EXPECT_LT(r.logits.cwiseAbs().maxCoeff(), 0.2);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(p.all_finite());
}

TEST(Loss, UniformPolicyEntropy) {
  PolicyParameters p(shape(5, 2, 3));
  std::mt19937_64 rng(2);
  auto seg = random_segment(p.shape(), 1, rng);
  seg.active_heads[0] = {1, 1};
  VtraceConfig cfg;
  const auto l = loss_and_gradient(p, {seg}, cfg, nullptr);
  EXPECT_NEAR(l.entropy, 2.0 * std::log(3.0), 1e-12);
}

TEST(Loss, ZeroAdvantagesGiveZeroPolicyTerm) {
  auto p = PolicyParameters::glorot(shape(5, 2, 3), 3);
  std::mt19937_64 rng(3);
  const auto seg = random_segment(p.shape(), 4, rng);
  VtraceConfig cfg;
  auto targets = compute_targets(p, {seg}, cfg);
  targets[0].pg_advantages.setZero();
  const auto l = loss_with_targets(p, {seg}, targets, cfg, nullptr);
  EXPECT_EQ(l.policy, 0.0);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = PolicyParameters::glorot(shape(5, 2, 3), seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.5);
    for (Eigen::Index i = 0; i < p.flat().size(); ++i) p.flat()(i) += g(rng);
    std::vector<TrajectorySegment> batch{random_segment(p.shape(), 4, rng),
                                         random_segment(p.shape(), 3, rng)};
    VtraceConfig cfg;
    cfg.entropy_coeff = 0.05;
    const auto targets = compute_targets(p, batch, cfg);
    Eigen::VectorXd grad;
    loss_with_targets(p, batch, targets, cfg, &grad);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < p.flat().size(); ++i) {
      auto plus = p, minus = p;
      plus.flat()(i) += h;
      minus.flat()(i) -= h;
      const double fd = (loss_with_targets(plus, batch, targets, cfg, nullptr).total -
                         loss_with_targets(minus, batch, targets, cfg, nullptr).total) /
                        (2 * h);
      if (std::abs(fd) < 1e-7 && std::abs(grad(i)) < 1e-7) continue;
      ASSERT_LT(relative_error(fd, grad(i)), 1e-4) << "param " << i << " fd " << fd << " an " << grad(i);
    }
  }
}

TEST(Loss, CombinedPassMatchesSeparateTargets) {
  auto p = PolicyParameters::glorot(shape(5, 2, 3), 9);
  std::mt19937_64 rng(9);
  const auto seg = random_segment(p.shape(), 5, rng);
  VtraceConfig cfg;
  Eigen::VectorXd g1, g2;
  const auto a = loss_and_gradient(p, {seg}, cfg, &g1);
  const auto b = loss_with_targets(p, {seg}, compute_targets(p, {seg}, cfg), cfg, &g2);
  EXPECT_NEAR(a.total, b.total, 1e-12);
  EXPECT_TRUE(g1.isApprox(g2, 1e-12));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamOptimizer opt(3, 0.01);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 0.0;
  opt.step(x, g);
  EXPECT_NEAR(x(0), -0.01, 1e-9);
  EXPECT_NEAR(x(1), 0.01, 1e-9);
  EXPECT_EQ(x(2), 0.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, MinimisesQuadratic) {
  AdamOptimizer opt(2, 0.05);
  Eigen::VectorXd x(2);
  x << 3.0, -2.0;
  for (int i = 0; i < 2000; ++i) opt.step(x, 2.0 * x);
  EXPECT_LT(x.norm(), 1e-2);
}
