#ifndef WASSCURVE_GAUSSIAN_REGRESSION_HPP
#define WASSCURVE_GAUSSIAN_REGRESSION_HPP

#include <vector>

#include <Eigen/Dense>

#include "wasscurve/curve.hpp"
#include "wasscurve/gaussian.hpp"
#include "wasscurve/measures.hpp"

namespace wasscurve {

/// Joint covariance of (x_1..x_k, y_1..y_N), each block d x d. The y_i
/// diagonal blocks are data and stay fixed.
struct GaussianCouplingBlocks {
  Eigen::Index d = 0;
  int k = 0;
  int n_snapshots = 0;
  Eigen::MatrixXd C;

  Eigen::Index order() const { return (k + n_snapshots) * d; }
  /// Block (a, b) in the (params..., snapshots...) ordering.
  Eigen::MatrixXd block(int a, int b) const { return C.block(a * d, b * d, d, d); }
  Eigen::MatrixXd param_blocks() const { return C.topLeftCorner(k * d, k * d); }
};

/// t -> N(sum_a c_a(t) m_a, sum_ab c_a(t) c_b(t) X_ab).
struct GaussianCurve {
  CurveClass curve;
  Eigen::MatrixXd mean_coeffs;  // k x d
  Eigen::MatrixXd param_cov;    // kd x kd

  Eigen::VectorXd mean(double t) const;
  Eigen::MatrixXd covariance(double t) const;
  GaussianMeasure at(double t) const { return {mean(t), covariance(t)}; }
};

struct GaussianSnapshot {
  double t = 0.0;
  double lambda = 1.0;
  GaussianMeasure measure;
};

struct AdmmOptions {
  double rho = 1.0;
  double tol = 1e-7;  // relative to 1 + |C|_F
  int max_iter = 50000;
  double relaxation = 1.0;  // over-relaxation factor in (0, 2)
  int adapt_every = 10;     // rho update period
};

struct GaussianSdpResult {
  GaussianCouplingBlocks blocks;
  GaussianCurve curve;
  double objective = 0.0;       // covariance part
  double mean_residual = 0.0;   // sum_i lambda_i |m(t_i) - m_i|^2
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes sum_i lambda_i E|phi(x, t_i) - y_i|^2 over joint covariances
/// C >= 0 whose y_i diagonal blocks equal the data covariances (ADMM with
/// PSD projection). Means are regressed separately.
GaussianSdpResult fit_gaussian_sdp(const std::vector<GaussianSnapshot>& data, const CurveClass& curve,
                                   const AdmmOptions& options = {});

/// <Cobj, C> for a candidate joint covariance.
double sdp_objective(const std::vector<GaussianSnapshot>& data, const CurveClass& curve,
                     const Eigen::MatrixXd& C);

struct StdDevFit {
  Eigen::VectorXd params;  // (sigma0, sigma1) or (s0, s1, s2)
  double residual = 0.0;
};

struct StdDevPoint {
  double t = 0.0;
  double lambda = 1.0;
  double sigma = 0.0;
};

/// 1-D geodesic regression on standard deviations: sigma_t = (1-t) s0 + t s1
/// with s0, s1 >= 0. For the quadratic kind, sigma_t = s0 + t s1 + t^2 s2 by
/// unconstrained least squares.
StdDevFit gaussian_1d_parametric_oracle(const std::vector<StdDevPoint>& data, CurveKind kind);

/// Mean and biased (1/n) covariance of samples, one per row.
GaussianMeasure gaussian_from_samples(const Eigen::MatrixXd& samples);

}  // namespace wasscurve

#endif  // WASSCURVE_GAUSSIAN_REGRESSION_HPP
