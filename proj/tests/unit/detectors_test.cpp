#include "resdet/detectors.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "resdet/reactor.hpp"
#include "unit/reference_values.hpp"

namespace resdet {
namespace {

using namespace testing;

std::vector<double> chi2_stream(std::size_t n, int dof, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::chi_squared_distribution<double> dist(dof);
  std::vector<double> z(n);
  for (double& v : z) v = dist(rng);
  return z;
}

TEST(ChiSquared, StrictThreshold) {
  ChiSquaredDetector d(7.81);
  EXPECT_FALSE(d.update(7.81, 1));
  EXPECT_FALSE(d.update(std::nextafter(7.81, 0.0), 2));
  const auto alarm = d.update(std::nextafter(7.81, 10.0), 3);
  ASSERT_TRUE(alarm);
  EXPECT_EQ(alarm->k_star, 3);
  EXPECT_EQ(alarm->kind, DetectorKind::chi2);
  EXPECT_DOUBLE_EQ(d.statistic(), std::nextafter(7.81, 10.0));
}

TEST(ChiSquared, InvalidThreshold) {
  EXPECT_THROW(ChiSquaredDetector(0.0), std::invalid_argument);
  EXPECT_THROW(ChiSquaredDetector(-1.0), std::invalid_argument);
  EXPECT_THROW(ChiSquaredDetector{INFINITY}, std::invalid_argument);
}

TEST(Windowed, WindowOfOneEqualsChiSquared) {
  const std::vector<double> z = chi2_stream(100000, 3, 5);
  ChiSquaredDetector chi(7.8);
  WindowedChiSquaredDetector win(7.8, 1);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto a = chi.update(z[k], static_cast<long>(k + 1));
    const auto b = win.update(z[k], static_cast<long>(k + 1));
    ASSERT_EQ(a.has_value(), b.has_value()) << "k=" << k + 1;
    ASSERT_EQ(win.statistic(), z[k]);
  }
}

TEST(Windowed, ConstantStreamWarmUpAndSum) {
  WindowedChiSquaredDetector d(10.0, 4);
  for (long k = 1; k <= 3; ++k) {
    EXPECT_FALSE(d.update(2.5, k));
    EXPECT_FALSE(d.full());
  }
  EXPECT_FALSE(d.update(2.5, 4));
  EXPECT_DOUBLE_EQ(d.statistic(), 10.0);
  EXPECT_FALSE(d.update(2.5, 5));
  const auto alarm = d.update(2.6, 6);
  ASSERT_TRUE(alarm);
  EXPECT_EQ(alarm->k_star, 6);
  EXPECT_NEAR(alarm->statistic, 10.1, 1e-12);
}

TEST(Windowed, NoAlarmBeforeWindowFills) {
  WindowedChiSquaredDetector d(1.0, 5);
  for (long k = 1; k <= 4; ++k) EXPECT_FALSE(d.update(100.0, k));
  EXPECT_TRUE(d.update(100.0, 5));
}

TEST(Windowed, RetainedSumExcludesEvictedValue) {
  WindowedChiSquaredDetector d(100.0, 3);
  d.update(1.0, 1);
  EXPECT_DOUBLE_EQ(d.retained_sum(), 1.0);
  d.update(2.0, 2);
  d.update(4.0, 3);
  EXPECT_DOUBLE_EQ(d.statistic(), 7.0);
  EXPECT_DOUBLE_EQ(d.retained_sum(), 6.0);
}

TEST(Windowed, RunningSumDoesNotDrift) {
  std::mt19937_64 rng(12);
  std::exponential_distribution<double> dist(0.01);
  for (int ell : {1, 7, 50, 1000}) {
    WindowedChiSquaredDetector d(1e300, ell);
    for (long k = 1; k <= 1000000; ++k) {
      d.update(dist(rng), k);
      if (k % 99991 == 0) {
        ASSERT_NEAR(d.statistic(), d.buffer_sum(), 1e-9 * d.buffer_sum()) << "ell=" << ell;
      }
    }
    EXPECT_NEAR(d.statistic(), d.buffer_sum(), 1e-9 * d.buffer_sum());
  }
}

TEST(Windowed, RejectsBadWindow) {
  try {
    WindowedChiSquaredDetector(1.0, 0);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "window must be >= 1");
  }
}

TEST(Cusum, AlarmIsReportedOneStepLateAndResets) {
  const double tau = 5.0, b = 3.0;
  CusumDetector d(tau, b);
  EXPECT_FALSE(d.update(tau + b + 1e-9, 1));
  EXPECT_GT(d.statistic(), tau);
  const auto alarm = d.update(b, 2);
  ASSERT_TRUE(alarm);
  EXPECT_EQ(alarm->k_star, 1);
  EXPECT_NEAR(alarm->statistic, tau + 1e-9, 1e-12);
  EXPECT_EQ(d.statistic(), 0.0);
  // After the reset the next z is consumed normally.
  EXPECT_FALSE(d.update(b + 1.0, 3));
  EXPECT_DOUBLE_EQ(d.statistic(), 1.0);
}

TEST(Cusum, TieAtThresholdDoesNotAlarm) {
  CusumDetector d(5.0, 3.0);
  d.update(8.0, 1);
  EXPECT_EQ(d.statistic(), 5.0);
  EXPECT_FALSE(d.update(3.0, 2));
  EXPECT_EQ(d.statistic(), 5.0);
}

TEST(Cusum, ClampsAtZero) {
  CusumDetector d(5.0, 3.0);
  for (long k = 1; k < 100; ++k) {
    EXPECT_FALSE(d.update(0.0, k));
    EXPECT_EQ(d.statistic(), 0.0);
  }
}

TEST(Cusum, StatisticPropertiesOnRandomStreams) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double tau = 0.5 + uni(rng), b = 0.1 + 0.5 * uni(rng);
    CusumDetector d(tau, b);
    const std::vector<double> z = chi2_stream(5000, 1 + trial % 5, trial);
    double previous = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const long k = static_cast<long>(i + 1);
      const auto alarm = d.update(z[i], k);
      EXPECT_GE(d.statistic(), 0.0);
      if (alarm) {
        EXPECT_GT(previous, tau);
        EXPECT_EQ(alarm->k_star, k - 1);
        EXPECT_EQ(d.statistic(), 0.0);
      } else {
        EXPECT_LE(previous, tau);
        EXPECT_DOUBLE_EQ(d.statistic(), std::max(0.0, previous + z[i] - b));
      }
      previous = d.statistic();
    }
  }
}

TEST(Detector, TypeErasedWrapperDispatches) {
  Detector d(DetectorConfig::windowed(10.0, 2));
  EXPECT_NE(d.as<WindowedChiSquaredDetector>(), nullptr);
  EXPECT_EQ(d.as<CusumDetector>(), nullptr);
  d.update(4.0, 1);
  d.update(5.0, 2);
  EXPECT_DOUBLE_EQ(d.statistic(), 9.0);
  EXPECT_EQ(d.config().window, 2);
  EXPECT_EQ(parse_detector_kind("cusum"), DetectorKind::cusum);
  EXPECT_EQ(to_string(DetectorKind::windowed), "windowed");
  EXPECT_THROW(parse_detector_kind("chi"), std::invalid_argument);
  EXPECT_THROW(DetectorConfig::cusum(1.0, 0.0), std::invalid_argument);
}

TEST(Tuning, ChiSquaredQuantiles) {
  EXPECT_NEAR(tune_chi2(1, 0.05), kChi2Quantile95_dof1, 1e-9);
  EXPECT_NEAR(tune_chi2(1, 0.8), kChi2Quantile20_dof1, 1e-9);
  EXPECT_NEAR(tune_chi2(3, 0.05), kChi2Quantile95_dof3, 1e-9);
  EXPECT_NEAR(tune_chi2(3, 0.05), 7.8147, 1e-4);
}

TEST(Tuning, WindowedQuantiles) {
  EXPECT_NEAR(tune_windowed(3, 4, 0.05), kChi2Quantile95_dof12, 1e-9);
  EXPECT_NEAR(tune_windowed(3, 50, 0.05), kChi2Quantile95_dof150, 1e-8);
  EXPECT_NEAR(tune_windowed(1, 100, 0.05) / 100, kBetaOverEll_p1_ell100, 1e-10);
  EXPECT_NEAR(tune_windowed(1, 10000, 0.05) / 10000, kBetaOverEll_p1_ell10000, 1e-10);
  EXPECT_EQ(tune_windowed(3, 1, 0.05), tune_chi2(3, 0.05));
}

TEST(Tuning, MonotoneInRateAndWindow) {
  for (int p : {1, 2, 3, 6}) {
    double previous = INFINITY;
    for (double rate = 0.001; rate < 0.99; rate += 0.01) {
      const double alpha = tune_chi2(p, rate);
      EXPECT_LT(alpha, previous);
      previous = alpha;
    }
    double previous_ratio = INFINITY;
    double previous_beta = 0.0;
    for (int ell = 1; ell <= 400; ++ell) {
      const double beta = tune_windowed(p, ell, 0.05);
      EXPECT_GT(beta, previous_beta);
      EXPECT_LT(beta / ell, previous_ratio);
      EXPECT_GT(beta / ell, p);
      previous_beta = beta;
      previous_ratio = beta / ell;
    }
  }
}

TEST(Tuning, DomainErrors) {
  EXPECT_THROW(tune_chi2(3, 0.0), std::domain_error);
  EXPECT_THROW(tune_chi2(3, 1.0), std::domain_error);
  EXPECT_THROW(tune_chi2(0, 0.05), std::domain_error);
  EXPECT_THROW(tune_windowed(3, 0, 0.05), std::domain_error);
}

TEST(Tuning, ChiSquaredRateOnRandomStream) {
  const std::vector<double> z = chi2_stream(400000, 3, 9);
  const AlarmFrequency f = replay_alarm_frequency(z, DetectorConfig::chi2(tune_chi2(3, 0.05)));
  EXPECT_NEAR(f.rate, 0.05, 0.002);
}

TEST(CusumTuning, HitsTargetOnTheTuningStream) {
  const std::vector<double> z = chi2_stream(200000, 3, 19);
  const CusumTuning t = tune_cusum_tau(z, 3.0, 3, 0.05);
  EXPECT_TRUE(t.attainable);
  EXPECT_NEAR(cusum_alarm_rate(z, t.tau, 3.0), t.achieved_rate, 0.0);
  EXPECT_NEAR(t.achieved_rate, 0.05, 0.0025);
  EXPECT_GT(t.tau, 1.0);
}

TEST(CusumTuning, LargerBiasNeedsSmallerThreshold) {
  const std::vector<double> z = chi2_stream(200000, 3, 21);
  const double tau4 = tune_cusum_tau(z, 4.0, 3, 0.05).tau;
  const double tau6 = tune_cusum_tau(z, 6.0, 3, 0.05).tau;
  EXPECT_GT(tau4, tau6);
}

TEST(CusumTuning, UnattainableRateIsReported) {
  const std::vector<double> z = chi2_stream(200000, 3, 23);
  const CusumTuning t = tune_cusum_tau(z, 50.0, 3, 0.2);
  EXPECT_FALSE(t.attainable);
  EXPECT_LT(t.achieved_rate, 0.2);
  ASSERT_FALSE(t.diagnostics.empty());
  EXPECT_NE(t.diagnostics.back().find("unattainable"), std::string::npos);
}

TEST(CusumTuning, SmallBiasWarning) {
  const std::vector<double> z = chi2_stream(100000, 3, 25);
  const CusumTuning t = tune_cusum_tau(z, 2.0, 3, 0.05);
  ASSERT_FALSE(t.diagnostics.empty());
  EXPECT_NE(t.diagnostics.front().find("bias too small"), std::string::npos);
}

TEST(CusumTuning, DomainErrors) {
  const ClosedLoopModel model = reactor::model();
  EXPECT_THROW(tune_cusum_tau(model, 3.0, 0.0, 100000, 1), std::domain_error);
  EXPECT_THROW(tune_cusum_tau(model, 3.0, 0.05, 1000, 1), std::invalid_argument);
  EXPECT_THROW(tune_cusum_tau(std::vector<double>{1.0}, 0.0, 3, 0.05), std::domain_error);
}

TEST(Arl, ChiSquaredRunLengthIsGeometric) {
  const ClosedLoopModel model = reactor::model();
  const DetectorConfig cfg = DetectorConfig::chi2(tune_chi2(3, 0.05));
  const ArlEstimate est = estimate_arl(model, cfg, 4000, 51);
  EXPECT_EQ(est.censored_runs, 0u);
  EXPECT_NEAR(est.arl, 20.0, 1.0);
  EXPECT_LT(est.half_width, 1.0);
  EXPECT_NEAR(est.alarm_rate, 1.0 / est.arl, 1e-15);
  EXPECT_NEAR(est.per_step_rate, 0.05, 0.004);
}

TEST(Arl, CensoredRunsAreFlagged) {
  const ClosedLoopModel model = reactor::model();
  const ArlEstimate est = estimate_arl(model, DetectorConfig::chi2(1e9), 3, 1, 500, 10, 0);
  EXPECT_EQ(est.censored_runs, 3u);
  EXPECT_EQ(est.arl, 500.0);
  ASSERT_EQ(est.warnings.size(), 1u);
  EXPECT_NE(est.warnings[0].find("censored"), std::string::npos);
}

TEST(AlarmFrequency, WindowedRateMatchesTargetWithKalmanGain) {
  const ClosedLoopModel model = build_closed_loop(reactor::plant(), reactor::K());
  const DetectorConfig cfg = DetectorConfig::windowed(tune_windowed(3, 4, 0.05), 4);
  const AlarmFrequency f = measure_alarm_frequency(model, cfg, 400000, 61);
  EXPECT_EQ(f.steps, 400000u);
  // Overlapping windows correlate the alarms; the bound is several batch
  // standard errors wide.
  EXPECT_NEAR(f.rate, 0.05, 0.004);
}

}  // namespace
}  // namespace resdet
