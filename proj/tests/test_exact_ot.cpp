#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "wasscurve/error.hpp"
#include "wasscurve/exact_ot.hpp"

using namespace wasscurve;

namespace {

// Minimum over all basic feasible solutions (choose rank-many columns).
double enumerate_vertices(const LinearProgram& lp) {
  const Eigen::Index m = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lp.A);
  const Eigen::Index r = lu.rank();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n), 0);
  std::fill(pick.end() - r, pick.end(), 1);
  do {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j)
      if (pick[static_cast<std::size_t>(j)]) cols.push_back(j);
    Eigen::MatrixXd B(m, r);
    for (Eigen::Index k = 0; k < r; ++k) B.col(k) = lp.A.col(cols[static_cast<std::size_t>(k)]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    if (qr.rank() < r) continue;
    const Eigen::VectorXd xb = qr.solve(lp.b);
    if ((B * xb - lp.b).norm() > 1e-9 || xb.minCoeff() < -1e-12) continue;
    double obj = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) obj += lp.c(cols[static_cast<std::size_t>(k)]) * xb(k);
    best = std::min(best, obj);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

LinearProgram transport_lp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& C) {
  const Eigen::Index m = a.size(), n = b.size();
  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(m + n, m * n);
  lp.b.resize(m + n);
  lp.b << a, b;
  lp.c.resize(m * n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      lp.A(i, i * n + j) = 1.0;
      lp.A(m + j, i * n + j) = 1.0;
      lp.c(i * n + j) = C(i, j);
    }
  return lp;
}

}  // namespace

TEST(TransportSimplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::Index m = 2 + trial % 2, n = 3;
    Eigen::VectorXd a(m), b(n);
    for (Eigen::Index i = 0; i < m; ++i) a(i) = 0.1 + u(rng);
    for (Eigen::Index j = 0; j < n; ++j) b(j) = 0.1 + u(rng);
    a /= a.sum();
    b /= b.sum();
    Eigen::MatrixXd C(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) C(i, j) = u(rng);
    const auto plan = transport_simplex(a, b, C);
    EXPECT_NEAR(plan.cost, enumerate_vertices(transport_lp(a, b, C)), 1e-12);
    EXPECT_LE((plan.plan.rowwise().sum() - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((plan.plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(plan.plan.minCoeff(), 0.0);
  }
}

TEST(TransportSimplex, MatchesDenseSimplexOnLargerInstances) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index m = 6, n = 7;
    Eigen::VectorXd a(m), b(n);
    for (Eigen::Index i = 0; i < m; ++i) a(i) = u(rng) < 0.2 ? 0.0 : u(rng);
    for (Eigen::Index j = 0; j < n; ++j) b(j) = 0.05 + u(rng);
    a(0) += 0.1;
    a /= a.sum();
    b /= b.sum();
    Eigen::MatrixXd C(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) C(i, j) = std::pow(i * 0.3 - j * 0.25, 2) + 0.1 * u(rng);
    EXPECT_NEAR(transport_simplex(a, b, C).cost, solve_lp(transport_lp(a, b, C)).objective, 1e-10);
  }
}

TEST(TransportSimplex, OneDimensionalMonotone) {
  // Equal masses on sorted points: the sorted matching is optimal.
  const Eigen::Vector3d a = Eigen::Vector3d::Constant(1.0 / 3.0);
  Eigen::Matrix3d C;
  const double x[] = {0.0, 1.0, 2.0}, y[] = {0.5, 1.5, 4.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = (x[i] - y[j]) * (x[i] - y[j]);
  EXPECT_NEAR(transport_simplex(a, a, C).cost, (0.25 + 0.25 + 4.0) / 3.0, 1e-14);
}

TEST(TransportSimplex, Preconditions) {
  EXPECT_THROW(transport_simplex(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.6), Eigen::Matrix2d::Ones()), Error);
  EXPECT_THROW(transport_simplex(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.5), Eigen::Matrix3d::Ones()), Error);
}

TEST(SolveLp, SmallKnownProblem) {
  // min -x1 - 2 x2  s.t. x1 + x2 + s1 = 4, x2 + s2 = 3
  LinearProgram lp;
  lp.A.resize(2, 4);
  lp.A << 1, 1, 1, 0, 0, 1, 0, 1;
  lp.b = Eigen::Vector2d(4, 3);
  lp.c = Eigen::Vector4d(-1, -2, 0, 0);
  const auto sol = solve_lp(lp);
  EXPECT_NEAR(sol.objective, -7.0, 1e-12);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.x(1), 3.0, 1e-12);
}

TEST(SolveLp, RandomFeasibleMatchesEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    LinearProgram lp;
    lp.A.resize(3, 7);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 7; ++j) lp.A(i, j) = u(rng) - 0.3;
    Eigen::VectorXd x0(7);
    for (Eigen::Index j = 0; j < 7; ++j) x0(j) = u(rng);
    lp.b = lp.A * x0;
    lp.c.resize(7);
    for (Eigen::Index j = 0; j < 7; ++j) lp.c(j) = u(rng);
    EXPECT_NEAR(solve_lp(lp).objective, enumerate_vertices(lp), 1e-9);
  }
}

TEST(SolveLp, RedundantRowsAndInfeasible) {
  LinearProgram lp;
  lp.A.resize(3, 2);
  lp.A << 1, 1, 2, 2, 1, 0;
  lp.b = Eigen::Vector3d(1, 2, 0.25);
  lp.c = Eigen::Vector2d(1, 3);
  EXPECT_NEAR(solve_lp(lp).objective, 0.25 + 3 * 0.75, 1e-12);
  lp.b = Eigen::Vector3d(1, 3, 0.25);
  EXPECT_THROW(solve_lp(lp), Error);
}
