#ifndef WASSCURVE_CURVE_REGRESSION_HPP
#define WASSCURVE_CURVE_REGRESSION_HPP

#include <vector>

#include <Eigen/Dense>

#include "wasscurve/curve.hpp"
#include "wasscurve/measures.hpp"
#include "wasscurve/mm_sinkhorn.hpp"

namespace wasscurve {

struct SolverConfig {
  double epsilon = 0.05;  // absolute regularization strength
  double tol = 1e-8;
  int max_iter = 10000;
  int threads = 1;
  bool force_log_domain = false;
  /// One grid per curve parameter; empty means default_parameter_grids.
  std::vector<GridPtr> parameter_grids;
};

struct RegressionResult {
  ParamCoupling coupling;
  CurveClass curve;
  double objective = 0.0;  // <c, Gamma>, the transport surrogate
  int iterations = 0;
  double residual = 0.0;
  double epsilon = 0.0;
  bool converged = false;
  bool log_domain = false;
  double original_horizon = 1.0;
};

/// Linear: x0 and x1 both on the data grid. Quadratic: x0 on the data grid,
/// x1 and x2 on uniform grids spanning [-2 R, 2 R] per axis, R the data range,
/// with as many points per axis as the data grid has distinct coordinates.
std::vector<GridPtr> default_parameter_grids(const SnapshotDataset& dataset, const CurveClass& curve);

/// Entropic multi-marginal fit. Timestamps must be normalized to [0, 1].
RegressionResult fit(const SnapshotDataset& dataset, const CurveClass& curve,
                     const SolverConfig& config = {});

/// Two passes: the second re-centres each parameter grid on the first pass's
/// mode with half the span.
RegressionResult fit_refined(const SnapshotDataset& dataset, const CurveClass& curve,
                             const SolverConfig& config = {});

/// Unregularized fit through the enumerated multi-marginal LP (tiny
/// instances). The curve horizon must equal the dataset horizon.
RegressionResult fit_exact(const SnapshotDataset& dataset, const CurveClass& curve,
                           const std::vector<GridPtr>& grids);

/// One-time marginal of the fitted law, quantized onto `grid`.
/// `extrapolated` is set when t lies outside [0, horizon].
DiscreteMeasure marginal_at(const RegressionResult& result, double t, const GridPtr& grid,
                            bool* extrapolated = nullptr);

struct DiracPoint {
  double t = 0.0;
  Eigen::RowVectorXd v;
  double lambda = 1.0;
};

struct EuclideanFit {
  Eigen::MatrixXd params;  // one parameter per row
  double residual = 0.0;
};

/// Weighted least squares in closed form (normal equations).
EuclideanFit euclidean_regression_oracle(const std::vector<DiracPoint>& points, const CurveClass& curve);

/// Dirac points taken from the means of single-atom snapshots.
std::vector<DiracPoint> dirac_points(const SnapshotDataset& dataset);

/// sum_i lambda_i W2^2(marginal_at(t_i), mu_{t_i}), exact or entropic.
double objective_true(const RegressionResult& result, const SnapshotDataset& dataset, bool exact,
                      double epsilon = 1e-3);

}  // namespace wasscurve

#endif  // WASSCURVE_CURVE_REGRESSION_HPP
