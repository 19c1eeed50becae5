#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wasscurve/curve_regression.hpp"

using namespace wasscurve;

namespace {

SnapshotDataset dirac_dataset(const GridPtr& g, const std::vector<double>& t, const std::vector<Eigen::Index>& atoms,
                              double horizon = 1.0) {
  std::vector<DiscreteMeasure> ms;
  for (Eigen::Index a : atoms) ms.push_back(DiscreteMeasure::dirac(g, a));
  return SnapshotDataset::uniform(t, ms, horizon);
}

SnapshotDataset random_dataset(const GridPtr& g, const std::vector<double>& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DiscreteMeasure> ms;
  for (std::size_t i = 0; i < t.size(); ++i) {
    Eigen::VectorXd w(g->size());
    for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = u(rng) < 0.4 ? 0.0 : u(rng);
    w(static_cast<Eigen::Index>(i) % w.size()) += 0.5;
    ms.push_back(DiscreteMeasure::normalized(g, w));
  }
  return SnapshotDataset::uniform(t, ms, 1.0);
}

}  // namespace

TEST(EuclideanOracle, ExactLineHasZeroResidual) {
  std::vector<DiracPoint> pts;
  for (double t : {0.0, 0.3, 0.6, 1.0}) pts.push_back({t, Eigen::RowVectorXd::Constant(1, 2.0 - 3.0 * t), 0.25});
  const auto fit = euclidean_regression_oracle(pts, CurveClass::linear());
  EXPECT_NEAR(fit.params(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(fit.params(1, 0), -1.0, 1e-12);
  EXPECT_NEAR(fit.residual, 0.0, 1e-24);
}

TEST(EuclideanOracle, HandSolvedNormalEquations) {
  std::vector<DiracPoint> pts;
  pts.push_back({0.0, Eigen::RowVectorXd::Constant(1, 0.0), 1.0 / 3.0});
  pts.push_back({0.5, Eigen::RowVectorXd::Constant(1, 1.0), 1.0 / 3.0});
  pts.push_back({1.0, Eigen::RowVectorXd::Constant(1, 0.0), 1.0 / 3.0});
  const auto fit = euclidean_regression_oracle(pts, CurveClass::linear());
  EXPECT_NEAR(fit.params(0, 0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(fit.params(1, 0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(fit.residual, 2.0 / 9.0, 1e-14);
}

TEST(EuclideanOracle, IsStationaryAgainstPerturbation) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<DiracPoint> pts;
  for (double t : {0.0, 0.2, 0.5, 0.7, 1.0}) pts.push_back({t, Eigen::RowVector2d(g(rng), g(rng)), 0.2});
  for (const CurveClass& c : {CurveClass::linear(), CurveClass::quadratic()}) {
    const auto fit = euclidean_regression_oracle(pts, c);
    auto residual = [&](const Eigen::MatrixXd& p) {
      double r = 0.0;
      for (const auto& q : pts) r += q.lambda * (c.evaluate(p, q.t) - q.v).squaredNorm();
      return r;
    };
    EXPECT_NEAR(residual(fit.params), fit.residual, 1e-12);
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd d(fit.params.rows(), 2);
      for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = 0.1 * g(rng);
      EXPECT_GE(residual(fit.params + d), fit.residual - 1e-12);
    }
  }
  EXPECT_THROW(euclidean_regression_oracle({pts[0], pts[0]}, CurveClass::linear()), Error);
}

TEST(Fit, DiracDataRecoversGridLeastSquares) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 11));
  const auto data = dirac_dataset(g, {0.0, 0.5, 1.0}, {1, 5, 8});
  const auto oracle = euclidean_regression_oracle(dirac_points(data), CurveClass::linear());
  const auto exact = fit_exact(data, CurveClass::linear(), {g, g});
  EXPECT_GE(exact.objective, oracle.residual - 1e-12);

  SolverConfig cfg;
  cfg.epsilon = 1e-3;
  cfg.tol = 1e-10;
  cfg.max_iter = 100000;
  const auto r = fit(data, CurveClass::linear(), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.objective, exact.objective - 1e-9);
  EXPECT_LE(r.objective, exact.objective + cfg.epsilon);
  const Eigen::MatrixXd mode = r.coupling.mode_parameters();
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_LE(std::abs(mode(k, 0) - oracle.params(k, 0)), 0.1 + 1e-12);
  EXPECT_EQ(r.coupling.mode(), exact.coupling.mode());
}

TEST(Fit, TimeScalingIsTransparent) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 6));
  const auto unit = random_dataset(g, {0.0, 0.25, 0.5, 1.0}, 7);
  std::vector<Snapshot> scaled;
  for (const auto& s : unit.snapshots()) scaled.push_back({4.0 * s.time, s.measure, s.lambda});
  const auto norm = normalize_timestamps(SnapshotDataset(scaled, 4.0));
  const auto a = fit(unit, CurveClass::linear());
  const auto b = fit(norm, CurveClass::linear());
  EXPECT_LE((a.coupling.weights - b.coupling.weights).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(b.original_horizon, 4.0);
}

TEST(FitExact, QuadraticNeverWorseOnNestedGrids) {
  // x0 + t (x1 - x0) stays representable: difference grid and x2 = 0.
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 5));
  const GridPtr diff = make_grid(SupportGrid::uniform(-1.0, 1.0, 9));
  const GridPtr curv = make_grid(SupportGrid::uniform(-1.0, 1.0, 3));
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto data = random_dataset(g, {0.0, 0.4, 1.0}, 100 + seed);
    const double lin = fit_exact(data, CurveClass::linear(), {g, g}).objective;
    const double quad = fit_exact(data, CurveClass::quadratic(), {g, diff, curv}).objective;
    EXPECT_LE(quad, lin + 1e-12);
  }
}

TEST(FitExact, ObjectiveTrueVanishesOnGridLines) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 5));
  const auto data = dirac_dataset(g, {0.0, 0.5, 1.0}, {0, 2, 4});
  const auto r = fit_exact(data, CurveClass::linear(), {g, g});
  EXPECT_NEAR(r.objective, 0.0, 1e-15);
  EXPECT_NEAR(objective_true(r, data, true), 0.0, 1e-15);
  const auto off = dirac_dataset(g, {0.0, 0.5, 1.0}, {0, 3, 4});
  EXPECT_NEAR(objective_true(fit_exact(off, CurveClass::linear(), {g, g}), off, true), 0.0625 / 3.0, 1e-12);
}

TEST(Fit, Preconditions) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 4));
  const auto two = dirac_dataset(g, {0.0, 1.0}, {0, 3});
  EXPECT_THROW(fit(two, CurveClass::linear()), Error);
  const auto three = dirac_dataset(g, {0.0, 1.0, 2.0}, {0, 3, 1}, 2.0);
  EXPECT_THROW(fit(three, CurveClass::linear(2.0)), Error);
  EXPECT_THROW(fit_exact(three, CurveClass::linear(), {g, g}), Error);
  try {
    fit(two, CurveClass::linear());
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::precondition);
  }
}

TEST(MarginalAt, PushesParametersThroughCurve) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 5));
  RegressionResult r;
  r.curve = CurveClass::linear();
  r.coupling.space = ParameterSpace({g, g});
  r.coupling.weights = Eigen::VectorXd::Zero(25);
  r.coupling.weights(r.coupling.space.encode({0, 4})) = 0.5;  // 0 -> 1
  r.coupling.weights(r.coupling.space.encode({4, 4})) = 0.5;  // stays at 1
  bool extra = true;
  const auto m = marginal_at(r, 0.5, g, &extra);
  EXPECT_FALSE(extra);
  EXPECT_DOUBLE_EQ(m.weights()(2), 0.5);
  EXPECT_DOUBLE_EQ(m.weights()(4), 0.5);
  marginal_at(r, 1.5, g, &extra);
  EXPECT_TRUE(extra);
  const auto far = marginal_at(r, -3.0, g);  // -3 and 1, quantized
  EXPECT_DOUBLE_EQ(far.weights()(0), 0.5);
  EXPECT_DOUBLE_EQ(far.weights()(4), 0.5);
}
