#include <cmath>

#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wasscurve/pfo.hpp"

using namespace wasscurve;

namespace {

const double kPi = boost::math::constants::pi<double>();

}  // namespace

TEST(BoxPartition, Geometry) {
  const BoxPartition p(0.0, 1.0, 4);
  EXPECT_DOUBLE_EQ(p.width(), 0.25);
  EXPECT_DOUBLE_EQ(p.center(0), 0.125);
  EXPECT_EQ(p.box_of(0.0), 0);
  EXPECT_EQ(p.box_of(0.25), 1);
  EXPECT_EQ(p.box_of(1.0), 3);
  EXPECT_EQ(p.centers()->size(), 4);
  EXPECT_THROW(BoxPartition(1.0, 1.0, 3), Error);
}

TEST(SnapshotsFromMap, IdentityAndConstant) {
  const BoxPartition p(0.0, 1.0, 10);
  const auto id = snapshots_from_map([](double x) { return x; }, 500, 4, p, 3);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(id.dataset[i].measure.weights(), id.dataset[0].measure.weights());
  EXPECT_DOUBLE_EQ(id.dataset[3].time, 1.0);
  EXPECT_NEAR(id.dataset[1].time, 1.0 / 3.0, 1e-15);
  const auto c = snapshots_from_map([](double) { return 0.42; }, 500, 4, p, 3);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(c.dataset[i].measure.weights()(4), 1.0);
  EXPECT_EQ(c.clamped, 0);
}

TEST(SnapshotsFromMap, ClampsEscapingParticles) {
  const BoxPartition p(0.0, 1.0, 10);
  const auto r = snapshots_from_map([](double x) { return x + 2.0; }, 100, 2, p, 1);
  EXPECT_EQ(r.clamped, 100);
  EXPECT_DOUBLE_EQ(r.dataset[1].measure.weights()(9), 1.0);
}

TEST(SnapshotsFromMap, LogisticConcentratesNearOne) {
  const BoxPartition p(0.0, 1.0, 50);
  const auto r = snapshots_from_map([](double x) { return logistic_map(x, 4.0); }, 1000, 2, p, 42);
  EXPECT_GT(r.dataset[1].measure.weights()(49), 1.0 / 50.0);
}

TEST(EstimateTransition, IdentityMapIsDiagonalDominant) {
  const BoxPartition p(0.0, 1.0, 8);
  const auto snaps = snapshots_from_map([](double x) { return x; }, 1000, 4, p, 5);
  PfoConfig cfg;
  cfg.epsilon = 0.002;
  const auto Q = estimate_transition(snaps.dataset, cfg);
  for (Eigen::Index i = 0; i < 8; ++i) {
    Eigen::Index arg = 0;
    Q.Q.row(i).maxCoeff(&arg);
    EXPECT_EQ(arg, i);
    EXPECT_NEAR(Q.Q.row(i).sum(), 1.0, 1e-10);
  }
}

TEST(EstimateTransition, TwoBoxSwapHasPositiveObjective) {
  const BoxPartition p(0.0, 1.0, 2);
  const auto& g = p.centers();
  const auto a = DiscreteMeasure::dirac(g, 0), b = DiscreteMeasure::dirac(g, 1);
  const auto data = SnapshotDataset::uniform({0.0, 0.5, 1.0}, {a, b, a}, 1.0);
  const auto Q = estimate_transition(data);
  EXPECT_GT(Q.objective, 0.01);
  EXPECT_EQ(Q.uniform_rows, (std::vector<Eigen::Index>{1}));
  EXPECT_THROW(estimate_transition(SnapshotDataset::uniform({0.0, 1.0}, {a, b}, 1.0)), Error);
}

TEST(MakeTransition, NormalizesRows) {
  Eigen::Matrix3d M;
  M << 2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 3.0;
  const auto Q = make_transition(M);
  EXPECT_DOUBLE_EQ(Q.Q(0, 0), 0.5);
  EXPECT_NEAR(Q.Q(1, 2), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(Q.Q(2, 2), 0.75);
  EXPECT_EQ(Q.uniform_rows, (std::vector<Eigen::Index>{1}));
  EXPECT_THROW(make_transition(-M), Error);
}

TEST(StationaryDistribution, KnownChains) {
  const auto id = stationary_distribution(make_transition(Eigen::Matrix3d::Identity()));
  EXPECT_LE((id.v.array() - 1.0 / 3.0).abs().maxCoeff(), 1e-15);
  EXPECT_FALSE(id.damped);

  Eigen::Matrix2d swap;
  swap << 0.0, 1.0, 1.0, 0.0;
  const auto s = stationary_distribution(make_transition(swap));
  EXPECT_NEAR(s.v(0), 0.5, 1e-10);
  EXPECT_NEAR(s.v(1), 0.5, 1e-10);

  Eigen::Matrix2d absorbing;
  absorbing << 1.0, 0.0, 0.5, 0.5;
  const auto a = stationary_distribution(make_transition(absorbing));
  EXPECT_NEAR(a.v(0), 1.0, 1e-9);
  EXPECT_LE(a.residual, 1e-10);
}

TEST(StationaryDistribution, FixedPointOfRandomChain) {
  Eigen::MatrixXd M = (Eigen::MatrixXd::Random(6, 6).array() + 1.0).matrix();
  const auto Q = make_transition(M);
  const auto r = stationary_distribution(Q, 1e-12);
  EXPECT_LE((r.v.transpose() * Q.Q - r.v.transpose()).lpNorm<1>(), 1e-12);
  EXPECT_NEAR(r.v.sum(), 1.0, 1e-12);
}

TEST(LogisticMap, Values) {
  EXPECT_NEAR(logistic_map(2.0 / 3.0, 3.0), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(logistic_map(0.5, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(logistic_map(0.0, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(logistic_map(1.0, 2.5), 0.0);
  EXPECT_THROW(logistic_map(1.5, 2.0), Error);
  EXPECT_THROW(logistic_map(0.5, 4.5), Error);
}

TEST(Arcsine, DensityCdfAndMass) {
  EXPECT_NEAR(arcsine_density(0.5), 2.0 / kPi, 1e-15);
  EXPECT_NEAR(arcsine_density(0.3), arcsine_density(0.7), 1e-14);
  EXPECT_THROW(arcsine_density(0.0), Error);
  EXPECT_NEAR(arcsine_cdf(0.02), 0.0903, 5e-5);
  boost::math::quadrature::tanh_sinh<double> ts;
  EXPECT_NEAR(ts.integrate([](double x) { return arcsine_density(x); }, 0.0, 1.0), 1.0, 1e-6);
  const auto masses = arcsine_box_masses(BoxPartition(0.0, 1.0, 50));
  EXPECT_NEAR(masses.sum(), 1.0, 1e-14);
  EXPECT_NEAR(masses(0), arcsine_cdf(0.02), 1e-15);
  EXPECT_NEAR(masses(0), masses(49), 1e-14);
}

TEST(MassNear, NearestBoxes) {
  const BoxPartition p(0.0, 1.0, 10);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(10, 0.1);
  EXPECT_NEAR(mass_near(v, p, 0.5, 5), 0.5, 1e-15);
  EXPECT_NEAR(mass_near(v, p, 0.0, 3), 0.3, 1e-15);
}
