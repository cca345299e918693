#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "leoho/link.hpp"

using namespace leoho::link;

namespace {

// Link budget from physical constants: 4*pi*d*f/c in linear units, then dB.
double budget_oracle(double eirp_dbw, double f_hz, double d_m, double losses_db, double g_over_t,
                     double bandwidth_hz) {
  const double c = 299792458.0;
  const double k_boltzmann = 1.380649e-23;
  const double path = 4.0 * M_PI * d_m * f_hz / c;
  const double fspl_db = 20.0 * std::log10(path);
  return eirp_dbw - fspl_db - losses_db + g_over_t - 10.0 * std::log10(k_boltzmann) -
         10.0 * std::log10(bandwidth_hz);
}

}  // namespace

TEST(Fspl, Examples) {
  EXPECT_NEAR(fspl(30.0, 600.0), 177.55, 0.01);
  EXPECT_DOUBLE_EQ(fspl(1.0, 1.0), 92.45);
  EXPECT_NEAR(fspl(2.0, 600.0), 154.03, 0.01);
}

TEST(Fspl, RejectsNonPositive) {
  EXPECT_THROW(fspl(0.0, 1.0), std::domain_error);
  EXPECT_THROW(fspl(1.0, 0.0), std::domain_error);
  EXPECT_THROW(fspl(-2.0, 5.0), std::domain_error);
}

TEST(Cnr, VsatAt600km) {
  const auto p = vsat_profile();
  const double expect = budget_oracle(33.0 - 30.0 + 43.2, 30e9, 600e3, 0.5 + 0.0 + 0.3, 13.0, 400e6);
  EXPECT_NEAR(cnr(p, 600.0), expect, 0.01);
  EXPECT_NEAR(cnr(p, 600.0), 23.4, 0.05);
}

TEST(Cnr, HandheldAt600km) {
  const auto p = handheld_profile();
  const double expect = budget_oracle(23.0 - 30.0 + 0.0, 2e9, 600e3, 0.1 + 3.0 + 2.2, 1.1, 0.4e6);
  EXPECT_NEAR(cnr(p, 600.0), expect, 0.01);
  EXPECT_NEAR(cnr(p, 600.0), 7.3, 0.05);
}

TEST(Cnr, DistanceLawAndEirpAdditivity) {
  for (const auto& p : {vsat_profile(), handheld_profile()}) {
    EXPECT_NEAR(cnr(p, 600.0) - cnr(p, 1200.0), 20.0 * std::log10(2.0), 1e-12);
    auto q = p;
    q.tx_power_dbm += 3.5;
    EXPECT_NEAR(cnr(q, 800.0), cnr(p, 800.0) + 3.5, 1e-12);
    double prev = cnr(p, 100.0);
    for (double d = 150.0; d < 3000.0; d += 50.0) {
      const double c = cnr(p, d);
      EXPECT_LT(c, prev);
      prev = c;
    }
  }
}

TEST(Profiles, ByNameAndValidation) {
  EXPECT_EQ(profile_by_name("vsat").carrier_f_ghz, 30.0);
  EXPECT_EQ(profile_by_name("handheld").carrier_f_ghz, 2.0);
  EXPECT_THROW(profile_by_name("dish"), std::invalid_argument);
  auto p = vsat_profile();
  p.bandwidth_hz = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = vsat_profile();
  p.atmospheric_loss_db = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(RsrpProxy, Examples) {
  EXPECT_NEAR(rsrp_proxy(10.0, 600.0, 2.0, 0.0), -114.03, 0.01);
  EXPECT_DOUBLE_EQ(rsrp_proxy(10.0, 700.0, 2.0, 1.5), rsrp_proxy(10.0, 700.0, 2.0, 1.5));
  EXPECT_NEAR(rsrp_proxy(10.0, 300.0, 2.0, 0.0) - rsrp_proxy(10.0, 600.0, 2.0, 0.0),
              20.0 * std::log10(2.0), 1e-12);
}

TEST(L3Filter, Examples) {
  EXPECT_DOUBLE_EQ(l3_filter(-100.0, -90.0, 0.5), -95.0);
  EXPECT_DOUBLE_EQ(l3_filter(-100.0, -90.0, 1.0), -90.0);
  double m = -120.0;
  for (int i = 0; i < 200; ++i) m = l3_filter(m, -80.0, 0.5);
  EXPECT_NEAR(m, -80.0, 1e-9);
  EXPECT_THROW(l3_filter(0.0, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(l3_filter(0.0, 0.0, 1.5), std::domain_error);
}

TEST(L3Filter, StaysWithinInputBounds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-130.0, -70.0), b(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double beta = b(rng);
    double m = u(rng);
    double lo = m, hi = m;
    for (int i = 0; i < 50; ++i) {
      const double x = u(rng);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      m = l3_filter(m, x, beta);
      ASSERT_GE(m, lo - 1e-12);
      ASSERT_LE(m, hi + 1e-12);
    }
  }
}

TEST(A3Event, Examples) {
  EXPECT_FALSE(a3_event(-100.0, -99.0, 1.0));
  EXPECT_TRUE(a3_event(-100.0, -98.0, 1.0));
  EXPECT_FALSE(a3_event(-100.0, -100.0, 1.0));
}

TEST(A3Event, InvariantToCommonShift) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-120.0, -80.0), s(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), c = std::round(s(rng));
    EXPECT_EQ(a3_event(a, b, 1.0), a3_event(a + c, b + c, 1.0));
  }
}

TEST(MeasurementState, FilterSettings) {
  MeasurementState m(2, 3, 4, 0.15, 1.0);
  EXPECT_DOUBLE_EQ(m.beta(), 0.5);
  EXPECT_DOUBLE_EQ(m.update_period_s(), 0.3);
  EXPECT_DOUBLE_EQ(forgetting_factor(0), 1.0);
  EXPECT_DOUBLE_EQ(forgetting_factor(8), 0.25);
}

TEST(MeasurementState, FirstSampleSeedsThenFilters) {
  MeasurementState m(1, 2, 4, 0.15, 1.0);
  m.ingest({-100.0, -110.0});
  EXPECT_DOUBLE_EQ(m.l3(0, 0), -100.0);
  EXPECT_DOUBLE_EQ(m.l3(0, 1), -110.0);
  m.ingest({-90.0, -100.0});
  EXPECT_DOUBLE_EQ(m.l3(0, 0), -95.0);
  EXPECT_DOUBLE_EQ(m.l3(0, 1), -105.0);
  EXPECT_DOUBLE_EQ(m.l1(0, 1), -100.0);
  EXPECT_THROW(m.ingest({1.0}), std::invalid_argument);
}

TEST(MeasurementState, A3UsesFilteredValues) {
  MeasurementState m(1, 3, 4, 0.15, 1.0);
  m.set_l3(0, 0, -100.0);
  m.set_l3(0, 1, -98.0);
  m.set_l3(0, 2, -99.0);
  EXPECT_TRUE(m.a3(0, 1));
  EXPECT_FALSE(m.a3(0, 2));
}
