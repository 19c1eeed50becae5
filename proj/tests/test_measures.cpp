#include <cmath>

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wasscurve/gaussian.hpp"
#include "wasscurve/measures.hpp"
#include "wasscurve/mm_sinkhorn.hpp"

using namespace wasscurve;

TEST(SupportGrid, UniformAndTensor) {
  const SupportGrid g = SupportGrid::uniform(0.0, 1.0, 5);
  EXPECT_EQ(g.size(), 5);
  EXPECT_EQ(g.dim(), 1);
  EXPECT_DOUBLE_EQ(g.point(4)(0), 1.0);
  const SupportGrid t = SupportGrid::tensor({Eigen::Vector2d(0.0, 1.0), Eigen::Vector3d(0.0, 0.5, 1.0)});
  EXPECT_EQ(t.size(), 6);
  EXPECT_EQ(t.dim(), 2);
  EXPECT_DOUBLE_EQ(t.point(1)(1), 0.5);  // first axis slowest
  EXPECT_DOUBLE_EQ(t.point(3)(0), 1.0);
}

TEST(SupportGrid, Invariants) {
  EXPECT_THROW(SupportGrid(Eigen::MatrixXd(0, 1)), Error);
  Eigen::MatrixXd dup(2, 1);
  dup << 0.3, 0.3;
  EXPECT_THROW(SupportGrid{dup}, Error);
  EXPECT_THROW(SupportGrid(Eigen::MatrixXd::Constant(1, 1, NAN)), Error);
}

TEST(SupportGrid, NearestTiesToLowestIndex) {
  const SupportGrid g = SupportGrid::uniform(0.0, 1.0, 3);
  EXPECT_EQ(g.nearest(Eigen::RowVectorXd::Constant(1, 0.25)), 0);
  EXPECT_EQ(g.nearest(Eigen::RowVectorXd::Constant(1, 0.26)), 1);
  EXPECT_EQ(g.nearest(Eigen::RowVectorXd::Constant(1, 7.0)), 2);
}

TEST(DiscreteMeasure, WeightInvariants) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 3));
  EXPECT_NO_THROW(DiscreteMeasure(g, Eigen::Vector3d(0.2, 0.3, 0.5)));
  EXPECT_THROW(DiscreteMeasure(g, Eigen::Vector3d(0.2, 0.3, 0.6)), Error);
  EXPECT_THROW(DiscreteMeasure(g, Eigen::Vector3d(-0.1, 0.6, 0.5)), Error);
  EXPECT_THROW(DiscreteMeasure(g, Eigen::Vector2d(0.5, 0.5)), Error);
  const auto n = DiscreteMeasure::normalized(g, Eigen::Vector3d(1.0, 1.0, 2.0));
  EXPECT_NEAR(n.weights().sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(n.weights()(2), 0.5);
  const auto d = DiscreteMeasure::dirac(g, 1);
  EXPECT_DOUBLE_EQ(d.mean()(0), 0.5);
}

TEST(MeasureFromSamples, CountsNearest) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 3));
  Eigen::MatrixXd s(4, 1);
  s << 0.1, 0.45, 0.55, 0.95;
  const auto m = measure_from_samples(s, g);
  EXPECT_DOUBLE_EQ(m.weights()(0), 0.25);
  EXPECT_DOUBLE_EQ(m.weights()(1), 0.5);
  EXPECT_DOUBLE_EQ(m.weights()(2), 0.25);
  EXPECT_THROW(measure_from_samples(Eigen::MatrixXd(0, 1), g), Error);
  EXPECT_THROW(measure_from_samples(Eigen::MatrixXd::Zero(2, 2), g), Error);
}

TEST(SnapshotDataset, Invariants) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 2));
  const auto m = DiscreteMeasure::dirac(g, 0);
  EXPECT_THROW(SnapshotDataset::uniform({0.5, 0.2}, {m, m}, 1.0), Error);   // decreasing
  EXPECT_THROW(SnapshotDataset::uniform({0.0, 2.0}, {m, m}, 1.0), Error);   // past horizon
  EXPECT_THROW(SnapshotDataset({{0.0, m, 0.4}, {1.0, m, 0.4}}, 1.0), Error);  // lambdas
  const auto d = SnapshotDataset::uniform({0.0, 0.5, 1.0}, {m, m, m}, 1.0);
  EXPECT_NEAR(d.lambdas().sum(), 1.0, 1e-15);
}

TEST(NormalizeTimestamps, ScalesAndIsIdempotent) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 2));
  const auto m = DiscreteMeasure::dirac(g, 1);
  const auto d = SnapshotDataset::uniform({0.0, 2.5, 10.0}, {m, m, m}, 10.0);
  const auto n = normalize_timestamps(d);
  EXPECT_DOUBLE_EQ(n.horizon(), 1.0);
  EXPECT_DOUBLE_EQ(n[1].time, 0.25);
  EXPECT_DOUBLE_EQ(n.original_horizon(), 10.0);
  const auto nn = normalize_timestamps(n);
  EXPECT_EQ(nn.times(), n.times());
  EXPECT_DOUBLE_EQ(nn.original_horizon(), 10.0);
}

TEST(GaussianMeasure, Validation) {
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalue -1
  EXPECT_THROW(GaussianMeasure(Eigen::Vector2d::Zero(), bad), Error);
  Eigen::Matrix2d asym;
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(GaussianMeasure(Eigen::Vector2d::Zero(), asym), Error);
  EXPECT_NO_THROW(GaussianMeasure(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()));
}

TEST(GaussianMixture, DensityIntegratesToOne) {
  const GaussianMixture m({gaussian_1d(-1.0, 0.5), gaussian_1d(2.0, 1.5)}, Eigen::Vector2d(0.3, 0.7));
  const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return m.density_1d(x); }, -20.0, 20.0, 15, 1e-12);
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_THROW(GaussianMixture({gaussian_1d(0.0, 1.0)}, Eigen::Vector2d(0.5, 0.5)), Error);
}

// Closed-form Gaussian W2 and geodesics.

TEST(GaussianW2, OneDimensionalClosedForm) {
  // (m1 - m2)^2 + (s1 - s2)^2
  EXPECT_NEAR(w2_gaussian_squared(gaussian_1d(0.0, 1.0), gaussian_1d(3.0, 2.0)), 10.0, 1e-12);
  EXPECT_NEAR(w2_gaussian(gaussian_1d(1.0, 0.5), gaussian_1d(1.0, 0.5)), 0.0, 1e-12);
}

TEST(GaussianW2, CommutingCovariances) {
  const GaussianMeasure a(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 4.0).asDiagonal().toDenseMatrix());
  const GaussianMeasure b(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(9.0, 1.0).asDiagonal().toDenseMatrix());
  // 1 + (1 - 3)^2 + (2 - 1)^2
  EXPECT_NEAR(w2_gaussian_squared(a, b), 6.0, 1e-12);
}

TEST(GaussianW2, MetricProperties) {
  Eigen::Matrix2d A, B, C;
  A << 2.0, 0.3, 0.3, 1.0;
  B << 1.0, -0.4, -0.4, 0.8;
  C << 0.5, 0.1, 0.1, 3.0;
  const GaussianMeasure a(Eigen::Vector2d(0.0, 1.0), A);
  const GaussianMeasure b(Eigen::Vector2d(1.0, -1.0), B);
  const GaussianMeasure c(Eigen::Vector2d(-2.0, 0.0), C);
  EXPECT_NEAR(w2_gaussian(a, b), w2_gaussian(b, a), 1e-10);
  EXPECT_LE(w2_gaussian(a, c), w2_gaussian(a, b) + w2_gaussian(b, c) + 1e-12);
  EXPECT_NEAR(w2_gaussian(a, a), 0.0, 1e-7);
}

TEST(GaussianW2, MatchesFineGridTransport) {
  const GridPtr grid = make_grid(SupportGrid::uniform(-10.0, 10.0, 1601));
  auto discretize = [&](double m, double s) {
    Eigen::VectorXd w(grid->size());
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
      const double z = (grid->point(i)(0) - m) / s;
      w(i) = std::exp(-0.5 * z * z);
    }
    return DiscreteMeasure::normalized(grid, w);
  };
  const double lp = two_marginal_w2_exact(discretize(0.0, 1.0), discretize(1.0, 2.0)).cost;
  EXPECT_NEAR(lp, 2.0, 0.01);
}

TEST(GaussianGeodesic, EndpointsAndConstantSpeed) {
  Eigen::Matrix2d A, B;
  A << 1.0, 0.5, 0.5, 2.0;
  B << 3.0, -1.0, -1.0, 1.0;
  const GaussianMeasure a(Eigen::Vector2d(0.0, 0.0), A);
  const GaussianMeasure b(Eigen::Vector2d(2.0, 1.0), B);
  EXPECT_LE((gaussian_geodesic(a, b, 0.0).covariance - A).norm(), 1e-12);
  EXPECT_LE((gaussian_geodesic(a, b, 1.0).covariance - B).norm(), 1e-9);
  const double d = w2_gaussian(a, b);
  for (double t : {0.1, 0.35, 0.5, 0.8}) {
    const auto g = gaussian_geodesic(a, b, t);
    EXPECT_NEAR(w2_gaussian(a, g), t * d, 1e-7);
    EXPECT_NEAR(w2_gaussian(g, b), (1.0 - t) * d, 1e-7);
  }
}

TEST(GaussianGeodesic, OneDimensionalInterpolatesStdDev) {
  const auto g = gaussian_geodesic(gaussian_1d(0.0, 1.0), gaussian_1d(4.0, 3.0), 0.25);
  EXPECT_NEAR(g.mean(0), 1.0, 1e-12);
  EXPECT_NEAR(std::sqrt(g.covariance(0, 0)), 1.5, 1e-12);
}
