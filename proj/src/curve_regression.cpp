#include "wasscurve/curve_regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "wasscurve/log.hpp"

namespace wasscurve {

namespace {

std::vector<Eigen::VectorXd> distinct_axes(const SupportGrid& grid) {
  std::vector<Eigen::VectorXd> axes;
  for (Eigen::Index k = 0; k < grid.dim(); ++k) {
    std::set<double> values(grid.points().col(k).data(), grid.points().col(k).data() + grid.size());
    Eigen::VectorXd axis(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) axis(i++) = v;
    axes.push_back(axis);
  }
  return axes;
}

GridPtr symmetric_grid(const SupportGrid& data) {
  std::vector<Eigen::VectorXd> axes;
  for (const auto& axis : distinct_axes(data)) {
    const double range = axis.maxCoeff() - axis.minCoeff();
    const Eigen::Index n = axis.size();
    if (range <= 0.0 || n < 2) {
      axes.push_back(Eigen::VectorXd::Zero(1));
    } else {
      axes.push_back(Eigen::VectorXd::LinSpaced(n, -2.0 * range, 2.0 * range));
    }
  }
  return make_grid(SupportGrid::tensor(axes));
}

GridPtr recentred(const SupportGrid& grid, const Eigen::RowVectorXd& centre) {
  std::vector<Eigen::VectorXd> axes;
  const auto old = distinct_axes(grid);
  for (std::size_t k = 0; k < old.size(); ++k) {
    const Eigen::Index n = old[k].size();
    const double span = old[k].maxCoeff() - old[k].minCoeff();
    const double c = centre(static_cast<Eigen::Index>(k));
    if (n < 2 || span <= 0.0) {
      axes.push_back(Eigen::VectorXd::Constant(1, c));
    } else {
      axes.push_back(Eigen::VectorXd::LinSpaced(n, c - span / 4.0, c + span / 4.0));
    }
  }
  return make_grid(SupportGrid::tensor(axes));
}

void check_fit_inputs(const SnapshotDataset& dataset, const CurveClass& curve) {
  require(std::abs(curve.horizon - dataset.horizon()) <= 1e-12,
          "fit: curve horizon differs from dataset horizon");
  if (curve.kind == CurveKind::linear) {
    require(dataset.size() >= 3, "fit: linear regression needs at least 3 snapshots");
  }
}

std::vector<Eigen::VectorXd> targets_of(const SnapshotDataset& dataset) {
  std::vector<Eigen::VectorXd> targets;
  for (const auto& s : dataset.snapshots()) targets.push_back(s.measure.weights());
  return targets;
}

}  // namespace

std::vector<GridPtr> default_parameter_grids(const SnapshotDataset& dataset, const CurveClass& curve) {
  const GridPtr data = dataset.grid_ptr();
  if (curve.kind == CurveKind::linear) return {data, data};
  const GridPtr wide = symmetric_grid(*data);
  return {data, wide, wide};
}

RegressionResult fit(const SnapshotDataset& dataset, const CurveClass& curve, const SolverConfig& config) {
  require(std::abs(dataset.horizon() - 1.0) <= 1e-12,
          "fit: timestamps must be normalized to [0, 1] first");
  check_fit_inputs(dataset, curve);
  const auto grids =
      config.parameter_grids.empty() ? default_parameter_grids(dataset, curve) : config.parameter_grids;

  const auto kernels = build_kernels(dataset, curve, grids, config.epsilon);
  SinkhornOptions opt;
  opt.tol = config.tol;
  opt.max_iter = config.max_iter;
  opt.threads = config.threads;
  opt.force_log_domain = config.force_log_domain;
  const FactoredCoupling state = sinkhorn_solve(kernels, dataset, opt);

  RegressionResult out;
  out.coupling = extract_param_coupling(state);
  out.curve = curve;
  out.objective = transport_objective(state);
  out.iterations = state.iterations;
  out.residual = state.marginal_residual;
  out.epsilon = config.epsilon;
  out.converged = state.converged;
  out.log_domain = state.log_domain;
  out.original_horizon = dataset.original_horizon();
  return out;
}

RegressionResult fit_refined(const SnapshotDataset& dataset, const CurveClass& curve,
                             const SolverConfig& config) {
  const RegressionResult first = fit(dataset, curve, config);
  const Eigen::MatrixXd mode = first.coupling.mode_parameters();
  SolverConfig second = config;
  second.parameter_grids.clear();
  const auto& space = first.coupling.space;
  for (std::size_t k = 0; k < space.slots(); ++k)
    second.parameter_grids.push_back(recentred(space.grid(k), mode.row(static_cast<Eigen::Index>(k))));
  return fit(dataset, curve, second);
}

RegressionResult fit_exact(const SnapshotDataset& dataset, const CurveClass& curve,
                           const std::vector<GridPtr>& grids) {
  check_fit_inputs(dataset, curve);
  const CostModel model = curve_cost_model(dataset, curve, grids);
  const auto sol = solve_multimarginal_lp(model, targets_of(dataset));
  RegressionResult out;
  out.coupling = sol.coupling;
  out.curve = curve;
  out.objective = sol.objective;
  out.converged = true;
  out.original_horizon = dataset.original_horizon();
  return out;
}

DiscreteMeasure marginal_at(const RegressionResult& result, double t, const GridPtr& grid,
                            bool* extrapolated) {
  require(grid != nullptr, "marginal_at: null output grid");
  const auto& space = result.coupling.space;
  require(grid->dim() == space.dim(), "marginal_at: output grid dimension mismatch");
  const bool outside = t < 0.0 || t > result.curve.horizon;
  if (extrapolated != nullptr) *extrapolated = outside;
  if (outside) log_info("marginal_at: extrapolating outside the fitted time range");

  const Eigen::RowVectorXd coeffs = result.curve.coefficients(t).transpose();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid->size());
  for (Eigen::Index p = 0; p < result.coupling.weights.size(); ++p) {
    const double mass = result.coupling.weights(p);
    if (mass <= 0.0) continue;
    const Eigen::RowVectorXd x = coeffs * space.parameters(p);
    w(grid->nearest(x)) += mass;
  }
  return DiscreteMeasure::normalized(grid, std::move(w));
}

EuclideanFit euclidean_regression_oracle(const std::vector<DiracPoint>& points, const CurveClass& curve) {
  require(!points.empty(), "euclidean_regression_oracle: no points");
  const auto n = static_cast<Eigen::Index>(points.size());
  const int k = curve.parameter_count();
  const Eigen::Index d = points.front().v.size();
  Eigen::MatrixXd A(n, k);
  Eigen::MatrixXd V(n, d);
  Eigen::VectorXd lam(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    require(p.v.size() == d, "euclidean_regression_oracle: mixed dimensions");
    require(p.lambda > 0.0, "euclidean_regression_oracle: lambda must be positive");
    A.row(i) = curve.coefficients(p.t).transpose();
    V.row(i) = p.v;
    lam(i) = p.lambda;
  }
  const Eigen::MatrixXd gram = A.transpose() * lam.asDiagonal() * A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lam.cwiseSqrt().asDiagonal() * A);
  const auto& sv = svd.singularValues();
  require(sv.size() == k && sv(k - 1) > 1e-10 * std::max(1.0, sv(0)),
          "euclidean_regression_oracle: rank-deficient design (too few distinct timestamps)");

  EuclideanFit out;
  out.params = gram.ldlt().solve(A.transpose() * lam.asDiagonal() * V);
  out.residual = (lam.asDiagonal() * (A * out.params - V).rowwise().squaredNorm()).sum();
  return out;
}

std::vector<DiracPoint> dirac_points(const SnapshotDataset& dataset) {
  std::vector<DiracPoint> out;
  for (const auto& s : dataset.snapshots()) out.push_back({s.time, s.measure.mean(), s.lambda});
  return out;
}

double objective_true(const RegressionResult& result, const SnapshotDataset& dataset, bool exact,
                      double epsilon) {
  double total = 0.0;
  for (const auto& s : dataset.snapshots()) {
    const DiscreteMeasure nu = marginal_at(result, s.time, dataset.grid_ptr());
    const double w2 = exact ? two_marginal_w2_exact(nu, s.measure).cost
                            : two_marginal_w2(nu, s.measure, epsilon).cost;
    total += s.lambda * w2;
  }
  return total;
}

}  // namespace wasscurve
