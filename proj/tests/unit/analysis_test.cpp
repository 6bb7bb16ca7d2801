#include "fixtures.hpp"

#include <gridshield/analysis.hpp>
#include <gridshield/attack_model.hpp>
#include <gridshield/errors.hpp>
#include <gridshield/experiment.hpp>
#include <gridshield/gic.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace gridshield;
using gridshield::testing::ieee30;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Q_v(0, b) for integer v: e^{-x} sum_{k<v} x^k / k!, x = b^2 / 2.
double upper_gamma_integer(int v, double b) {
  const double x = b * b / 2.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < v; ++k) {
    term *= x / k;
    sum += term;
  }
  return std::exp(-x) * sum;
}

}  // namespace

TEST(GlrtStatistic, Conventions) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  const Support s = topo.columns_of({16, 18});
  const Eigen::MatrixXd h = select_columns(hl, s);
  const Eigen::VectorXd inside = h * Eigen::Vector2d(0.2, -0.1);
  EXPECT_NEAR(glrt_statistic(hl, inside, s, 0.01), inside.squaredNorm() / 0.01, 1e-8);
  Rng rng(1);
  Eigen::VectorXd v = gaussian_noise(hl.rows(), 1.0, rng);
  v -= h * (h.transpose() * h).ldlt().solve(h.transpose() * v);
  EXPECT_NEAR(glrt_statistic(hl, v, s, 0.01), 0.0, 1e-10);
  const Eigen::VectorXd y = gaussian_noise(hl.rows(), 1.0, rng);
  EXPECT_NEAR(glrt_statistic(hl, y, s, 0.01), gic_statistic(hl, y, s, PenaltyConfig{2.0, 0.0}, 0.01) + 4.0, 1e-9);
  EXPECT_THROW(glrt_statistic(hl, y, {}, 0.01), DegenerateSupportError);
  EXPECT_THROW(glrt_statistic(hl, y, s, 0.0), DomainError);
}

TEST(OracleGlrt, NoLoadChangeAndCancellation) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  const Support s = topo.columns_of({14, 20});
  Rng rng(2);
  const Eigen::VectorXd y = gaussian_noise(hl.rows(), 0.01, rng);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(hl.rows());
  EXPECT_EQ(oracle_glrt_statistic(hl, y, s, zero, 0.01), glrt_statistic(hl, y, s, 0.01));

  const Eigen::VectorXd a = select_columns(hl, s) * Eigen::Vector2d(0.05, 0.07);
  const Eigen::VectorXd load = hl * gaussian_noise(topo.state_count(), 1e-4, rng);
  EXPECT_NEAR(oracle_glrt_statistic(hl, a + load, s, load, 0.01), a.squaredNorm() / 0.01, 1e-8);
}

TEST(OracleGlrt, OrthogonalLoadTermCoincides) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  const Support s = topo.columns_of({17, 19});
  const Eigen::MatrixXd h = select_columns(hl, s);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd load = hl * gaussian_noise(topo.state_count(), 1e-3, rng);
    load -= h * (h.transpose() * h).ldlt().solve(h.transpose() * load);
    const Eigen::VectorXd y = h * Eigen::Vector2d(0.1, 0.1) + load + gaussian_noise(hl.rows(), 0.01, rng);
    EXPECT_NEAR(glrt_statistic(hl, y, s, 0.01), oracle_glrt_statistic(hl, y, s, load, 0.01), 1e-10);
  }
}

TEST(OracleGicSelect, MatchesGicWithoutLoadChange) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  const CandidateFamily f(topo.restricted_states(), 6);
  const PenaltyConfig pen{2.0, 1.0};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(hl.rows());
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    const auto atk = sample_attack(topo, 2, 1.2, rng);
    const Eigen::VectorXd y = topo.load_part(atk.a) + gaussian_noise(hl.rows(), 0.01, rng);
    EXPECT_EQ(oracle_gic_select(hl, y, f, pen, zero, 0.01).support, gic_select(hl, y, f, pen, 0.01).support);
  }
  // noiseless separated attack with a load change the oracle removes
  const Support s = topo.columns_of({14, 19});
  const Eigen::VectorXd load = hl * gaussian_noise(topo.state_count(), 1e-3, rng);
  const Eigen::VectorXd y = select_columns(hl, s) * Eigen::Vector2d(0.1, -0.1) + load;
  EXPECT_EQ(oracle_gic_select(hl, y, f, PenaltyConfig{2.0, 0.0}, load, 1e-8).support, s);
}

TEST(MarcumQ, Identities) {
  for (double v : {0.5, 1.0, 2.5}) EXPECT_EQ(marcum_q(v, 1.3, 0.0), 1.0);
  for (double b : {0.1, 0.5, 1.0, 1.96, 3.0})
    EXPECT_NEAR(marcum_q(0.5, 0.0, b), 2.0 * (1.0 - normal_cdf(b)), 1e-14);
  EXPECT_NEAR(marcum_q(2.0, 0.0, 1.5), upper_gamma_integer(2, 1.5), 1e-14);
  EXPECT_NEAR(marcum_q(3.0, 0.0, 2.2), upper_gamma_integer(3, 2.2), 1e-14);
  // Q_1(a, b) with a = b: 1/2 (1 + e^{-a^2} I_0(a^2))
  const double a = 1.7;
  EXPECT_NEAR(marcum_q(1.0, a, a), 0.5 * (1.0 + std::exp(-a * a) * std::cyl_bessel_i(0.0, a * a)), 1e-12);
  EXPECT_THROW(marcum_q(0.4, 0.0, 1.0), DomainError);
  EXPECT_THROW(marcum_q(1.0, -1.0, 1.0), DomainError);
  EXPECT_THROW(marcum_q(1.0, 0.0, -1.0), DomainError);
}

TEST(PfaPdFormulas, LowerBoundAndMonotonicity) {
  const double gamma = glrt_threshold(2, 0.05);
  const auto op = pfa_pd_formulas(2, 0.0, 3.0, gamma);
  EXPECT_EQ(op.p_fa, false_alarm_bounds(2, 0.0, 0.01, gamma).lower);
  EXPECT_NEAR(op.p_fa, 0.05, 1e-12);
  EXPECT_GT(op.p_d, op.p_fa);
  double prev = op.p_fa;
  for (double lam = 0.05; lam < 10.0; lam += 0.25) {
    const double p = pfa_pd_formulas(2, lam, lam, gamma).p_fa;
    EXPECT_GT(p, prev);
    prev = p;
  }
  EXPECT_THROW(pfa_pd_formulas(0, 0.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(pfa_pd_formulas(2, -1.0, 0.0, 1.0), DomainError);
}

TEST(FalseAlarmBounds, MonteCarloAtKnownSupport) {
  const auto& wb = ieee30();
  const auto& hl = wb.topo.load_block();
  const Support s = wb.topo.columns_of({18, 20});
  const double s2 = 0.01, eta = 0.02;
  const double gamma = glrt_threshold(2, 0.05);
  const auto b = false_alarm_bounds(2, eta, s2, gamma);
  const ScenarioPoint point{0, 0.0, 0.05, s2, eta};
  int alarms = 0;
  const int n = 5000;
  for (int i = 0; i < n; ++i)
    alarms += glrt_statistic(hl, simulate_trial(wb, point, false, 31, static_cast<std::uint64_t>(i), Stream::null_trial).dz_L,
                             s, s2) > gamma;
  const double p = alarms / static_cast<double>(n);
  const double slack = 3.0 * std::sqrt(0.25 / n);
  EXPECT_GE(p, b.lower - slack);
  EXPECT_LE(p, b.upper + slack);
}

TEST(CapturedFraction, Bounds) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  Rng rng(5);
  const Eigen::VectorXd load = hl * gaussian_noise(topo.state_count(), 1e-3, rng);
  const double f = captured_fraction(hl, topo.columns_of({16, 17}), load);
  EXPECT_GE(f, 0.0);
  EXPECT_LE(f, 1.0);
  EXPECT_EQ(captured_fraction(hl, topo.columns_of({16}), Eigen::VectorXd::Zero(hl.rows())), 0.0);
}
