#include "fixtures.hpp"

#include <gridshield/errors.hpp>
#include <gridshield/projection.hpp>

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace gridshield;
using gridshield::testing::ieee30;

namespace {

Eigen::MatrixXd random_matrix(Index r, Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST(Projector, StandardBasisVector) {
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(4, 1);
  e1(0, 0) = 1.0;
  const auto p = projector(e1);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  expected(0, 0) = 1.0;
  EXPECT_LT((p.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Projector, SquareInvertibleIsIdentity) {
  const auto p = projector(random_matrix(5, 5, 3));
  EXPECT_LT((p.matrix() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Projector, SymmetricIdempotentAndFixesColumns) {
  const auto& hl = ieee30().topo.load_block();
  const Support s = ieee30().topo.columns_of({14, 16, 19});
  const Eigen::MatrixXd h = select_columns(hl, s);
  const auto p = projector(h);
  const auto& m = p.matrix();
  EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((m * m - m).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((m * h - h).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(m.trace(), 3.0, 1e-10);
}

TEST(Projector, RankDeficientIsDegenerate) {
  Eigen::MatrixXd h = random_matrix(6, 2, 4);
  h.col(1) = 2.0 * h.col(0);
  EXPECT_THROW(projector(h), DegenerateSupportError);
  EXPECT_THROW(projector(Eigen::MatrixXd(6, 0)), DegenerateSupportError);
}

TEST(ProjectionEnergy, OrthogonalAndInside) {
  const Eigen::MatrixXd h = random_matrix(6, 2, 5);
  const auto p = projector(h);
  const Eigen::VectorXd inside = h * Eigen::Vector2d(0.3, -1.2);
  EXPECT_NEAR(projection_energy(p, inside), inside.squaredNorm(), 1e-10);
  const Eigen::VectorXd v = random_matrix(6, 1, 6);
  const Eigen::VectorXd perp = v - p.project(v);
  EXPECT_NEAR(projection_energy(p, perp), 0.0, 1e-12);
  EXPECT_THROW(projection_energy(p, Eigen::VectorXd::Ones(5)), DimensionError);
}

TEST(ProjectionEnergy, Pythagoras) {
  const auto p = projector(random_matrix(10, 3, 7));
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd v = random_matrix(10, 1, 100 + seed);
    const Eigen::VectorXd rest = v - p.project(v);
    EXPECT_NEAR(projection_energy(p, v) + rest.squaredNorm(), v.squaredNorm(), 1e-10);
  }
}

TEST(SupportEnergy, MatchesProjectorAndFlagsDegenerate) {
  const auto& hl = ieee30().topo.load_block();
  const Eigen::VectorXd v = random_matrix(hl.rows(), 1, 8);
  const Support s = ieee30().topo.columns_of({16, 17});
  const auto e = support_energy(hl, s, v);
  ASSERT_TRUE(e.has_value());
  EXPECT_NEAR(*e, projector(select_columns(hl, s)).energy(v), 1e-10);
  EXPECT_EQ(*support_energy(hl, {}, v), 0.0);
  Eigen::MatrixXd dup(hl.rows(), 2);
  dup << hl.col(s[0]), hl.col(s[0]);
  EXPECT_FALSE(support_energy(dup, {0, 1}, v).has_value());
}

TEST(MlAttackEstimate, ConsistencyAndOrthogonality) {
  const Eigen::MatrixXd h = random_matrix(8, 3, 9);
  const Eigen::Vector3d c(0.5, -0.25, 2.0);
  EXPECT_LT((ml_attack_estimate(h, h * c) - c).norm(), 1e-8);
  const Eigen::VectorXd v = random_matrix(8, 1, 10);
  const Eigen::VectorXd perp = v - projector(h).project(v);
  EXPECT_LT(ml_attack_estimate(h, perp).norm(), 1e-10);
}

TEST(MlAttackEstimate, GridSearchOracleOnBus14) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  const Index k = topo.column_of_bus(14);
  const Eigen::VectorXd h = hl.col(k);
  Eigen::VectorXd noise = random_matrix(hl.rows(), 1, 12) * 0.05;
  noise -= h * (h.dot(noise) / h.squaredNorm());
  noise += h * (0.01 / h.norm());  // small in-span component shifts the optimum
  const Eigen::VectorXd dz = h * 0.7 + noise;
  const double c_hat = ml_attack_estimate(h, dz)(0);

  double best_c = 0.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400000; ++i) {
    const double c = -2.0 + 4.0 * i / 400000.0;
    const double obj = (dz - h * c).squaredNorm();
    if (obj < best) best = obj, best_c = c;
  }
  EXPECT_NEAR(c_hat, best_c, 1e-5);
  EXPECT_NEAR(c_hat, 0.7 + 0.01 / h.norm(), 1e-10);
}

TEST(SingleNodeEnergies, MatchesOneColumnProjectors) {
  const auto& topo = ieee30().topo;
  const auto& hl = topo.load_block();
  const Eigen::VectorXd v = random_matrix(hl.rows(), 1, 13);
  const auto e = single_node_energies(hl, topo.restricted_states(), v);
  for (std::size_t i = 0; i < topo.restricted_states().size(); ++i) {
    const Index k = topo.restricted_states()[i];
    EXPECT_NEAR(e(static_cast<Index>(i)), projector(hl.col(k)).energy(v), 1e-10);
  }
}

TEST(ProjectorCache, ConcurrentReadersShareEntries) {
  const auto& hl = ieee30().topo.load_block();
  ProjectorCache cache(hl);
  const auto& ground = ieee30().topo.restricted_states();
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = 0; i < ground.size(); ++i)
        for (std::size_t j = i + 1; j < ground.size(); ++j) ASSERT_NE(cache.get({ground[i], ground[j]}), nullptr);
    });
  for (auto& th : pool) th.join();
  EXPECT_EQ(cache.size(), 15u);
  EXPECT_EQ(cache.get({ground[0], ground[1]}).get(), cache.get({ground[0], ground[1]}).get());
}
