#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wasscurve/experiments.hpp"
#include "wasscurve/gaussian_regression.hpp"
#include "wasscurve/linalg.hpp"

using namespace wasscurve;

namespace {

std::vector<StdDevPoint> stddevs(const std::vector<GaussianSnapshot>& data) {
  std::vector<StdDevPoint> out;
  for (const auto& s : data) out.push_back({s.t, s.lambda, std::sqrt(s.measure.covariance(0, 0))});
  return out;
}

std::vector<GaussianSnapshot> random_2d(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<GaussianSnapshot> out;
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix2d G;
    G << g(rng), g(rng), g(rng), g(rng);
    const Eigen::Matrix2d C = G * G.transpose() + 0.2 * Eigen::Matrix2d::Identity();
    out.push_back({static_cast<double>(i) / (n - 1), 1.0 / n, GaussianMeasure(Eigen::Vector2d(g(rng), g(rng)), C)});
  }
  return out;
}

}  // namespace

TEST(StdDevOracle, ExactGeodesicAndClamping) {
  std::vector<StdDevPoint> pts;
  for (double t : {0.0, 0.5, 1.0}) pts.push_back({t, 1.0 / 3.0, 1.0 + 2.0 * t});
  const auto lin = gaussian_1d_parametric_oracle(pts, CurveKind::linear);
  EXPECT_NEAR(lin.params(0), 1.0, 1e-12);
  EXPECT_NEAR(lin.params(1), 3.0, 1e-12);
  EXPECT_NEAR(lin.residual, 0.0, 1e-20);
  // Unconstrained least squares would end below zero here.
  std::vector<StdDevPoint> down;
  down.push_back({0.0, 1.0 / 3.0, 1.0});
  down.push_back({0.5, 1.0 / 3.0, 0.1});
  down.push_back({1.0, 1.0 / 3.0, 0.05});
  const auto clamped = gaussian_1d_parametric_oracle(down, CurveKind::linear);
  EXPECT_GE(clamped.params(1), 0.0);
  // Quadratic interpolates three points exactly.
  std::vector<StdDevPoint> q;
  for (double t : {0.0, 0.5, 1.0}) q.push_back({t, 1.0 / 3.0, 1.0 + t * t});
  const auto quad = gaussian_1d_parametric_oracle(q, CurveKind::quadratic);
  EXPECT_NEAR(quad.params(2), 1.0, 1e-10);
  EXPECT_NEAR(quad.residual, 0.0, 1e-18);
}

TEST(FitGaussianSdp, OneDimensionalMatchesGeodesicOracle) {
  const auto data = ou_gaussians(8);
  const auto sdp = fit_gaussian_sdp(data, CurveClass::linear());
  const auto oracle = gaussian_1d_parametric_oracle(stddevs(data), CurveKind::linear);
  EXPECT_TRUE(sdp.converged);
  EXPECT_NEAR(sdp.mean_residual, 0.0, 1e-14);
  EXPECT_LE(sdp.objective, oracle.residual * (1.0 + 1e-3));
  EXPECT_NEAR(sdp.objective, oracle.residual, 1e-3 * oracle.residual + 1e-6);
}

TEST(FitGaussianSdp, QuadraticNotWorseThanLinear) {
  const auto data = ou_gaussians(10);
  const auto lin = fit_gaussian_sdp(data, CurveClass::linear());
  const auto quad = fit_gaussian_sdp(data, CurveClass::quadratic());
  EXPECT_LE(quad.objective, lin.objective + 1e-5);
}

TEST(FitGaussianSdp, FeasibleJointCovariance) {
  const auto data = random_2d(4, 3);
  const auto r = fit_gaussian_sdp(data, CurveClass::linear());
  const auto& B = r.blocks;
  EXPECT_EQ(B.order(), 12);
  const double scale = 1.0 + B.C.norm();
  EXPECT_GE(min_eigenvalue(B.C), -1e-5 * scale);
  EXPECT_LE((B.C - B.C.transpose()).norm(), 1e-12 * scale);
  for (int i = 0; i < 4; ++i)
    EXPECT_LE((B.block(B.k + i, B.k + i) - data[static_cast<std::size_t>(i)].measure.covariance).norm(), 1e-5 * scale);
  EXPECT_NEAR(sdp_objective(data, CurveClass::linear(), B.C), r.objective, 1e-9 * scale);
  // The curve's covariance at t = 0 is the x0 block for lines.
  EXPECT_LE((r.curve.covariance(0.0) - B.block(0, 0)).norm(), 1e-9 * scale);
}

TEST(FitGaussianSdp, RotationInvariance) {
  const auto data = random_2d(5, 8);
  const double a = 0.7;
  Eigen::Matrix2d R;
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  auto rotated = data;
  for (auto& s : rotated) {
    s.measure.covariance = R * s.measure.covariance * R.transpose();
    s.measure.mean = R * s.measure.mean;
  }
  const auto r1 = fit_gaussian_sdp(data, CurveClass::linear());
  const auto r2 = fit_gaussian_sdp(rotated, CurveClass::linear());
  EXPECT_NEAR(r1.objective, r2.objective, 1e-4 * (1.0 + r1.objective));
  EXPECT_NEAR(r1.mean_residual, r2.mean_residual, 1e-10);
}

TEST(FitGaussianSdp, Preconditions) {
  auto data = random_2d(3, 1);
  EXPECT_THROW(fit_gaussian_sdp({data[1], data[0]}, CurveClass::linear()), Error);
  AdmmOptions bad;
  bad.rho = -1.0;
  EXPECT_THROW(fit_gaussian_sdp(data, CurveClass::linear(), bad), Error);
}

TEST(GaussianFromSamples, BiasedMoments) {
  Eigen::MatrixXd s(4, 1);
  s << 1.0, 2.0, 3.0, 6.0;
  const auto g = gaussian_from_samples(s);
  EXPECT_DOUBLE_EQ(g.mean(0), 3.0);
  EXPECT_DOUBLE_EQ(g.covariance(0, 0), (4.0 + 1.0 + 0.0 + 9.0) / 4.0);
}

TEST(OuExperiment, VarianceAndTimes) {
  EXPECT_DOUBLE_EQ(ou_variance(0.0), 0.0);
  EXPECT_NEAR(ou_variance(1.0), 2.0 * (1.0 - std::exp(-2.0)), 1e-15);
  const auto t = ou_times(20);
  EXPECT_DOUBLE_EQ(t.front(), 0.1);
  EXPECT_DOUBLE_EQ(t.back(), 1.0);
}
