#include "wasscurve/gaussian_regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "wasscurve/linalg.hpp"
#include "wasscurve/log.hpp"

namespace wasscurve {

namespace {

// sum_i lambda_i (v_i v_i^T) kron I_d, v_i = (c(t_i), -e_i).
Eigen::MatrixXd objective_matrix(const std::vector<GaussianSnapshot>& data, const CurveClass& curve,
                                 Eigen::Index d) {
  const int k = curve.parameter_count();
  const auto N = static_cast<Eigen::Index>(data.size());
  const Eigen::Index m = k + N;
  Eigen::MatrixXd small = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v.head(k) = curve.coefficients(data[static_cast<std::size_t>(i)].t);
    v(k + i) = -1.0;
    small += data[static_cast<std::size_t>(i)].lambda * v * v.transpose();
  }
  return Eigen::kroneckerProduct(small, Eigen::MatrixXd::Identity(d, d));
}

void check_data(const std::vector<GaussianSnapshot>& data) {
  require(!data.empty(), "fit_gaussian_sdp: no snapshots");
  const Eigen::Index d = data.front().measure.dim();
  require(d >= 1, "fit_gaussian_sdp: zero dimension");
  for (const auto& s : data) {
    require(s.measure.dim() == d, "fit_gaussian_sdp: snapshots differ in dimension");
    require(s.lambda > 0.0, "fit_gaussian_sdp: lambda must be positive");
    s.measure.validate();
  }
}

}  // namespace

Eigen::VectorXd GaussianCurve::mean(double t) const {
  return (curve.coefficients(t).transpose() * mean_coeffs).transpose();
}

Eigen::MatrixXd GaussianCurve::covariance(double t) const {
  const Eigen::Index d = mean_coeffs.cols();
  const Eigen::VectorXd c = curve.coefficients(t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index a = 0; a < c.size(); ++a)
    for (Eigen::Index b = 0; b < c.size(); ++b) out += c(a) * c(b) * param_cov.block(a * d, b * d, d, d);
  return (out + out.transpose()) / 2.0;
}

double sdp_objective(const std::vector<GaussianSnapshot>& data, const CurveClass& curve,
                     const Eigen::MatrixXd& C) {
  check_data(data);
  const Eigen::MatrixXd Q = objective_matrix(data, curve, data.front().measure.dim());
  require(C.rows() == Q.rows() && C.cols() == Q.cols(), "sdp_objective: shape mismatch");
  return (Q.array() * C.array()).sum();
}

GaussianSdpResult fit_gaussian_sdp(const std::vector<GaussianSnapshot>& data, const CurveClass& curve,
                                   const AdmmOptions& options) {
  check_data(data);
  require(options.rho > 0.0 && options.tol > 0.0 && options.max_iter >= 1,
          "fit_gaussian_sdp: invalid ADMM options");
  for (std::size_t i = 1; i < data.size(); ++i)
    require(data[i].t > data[i - 1].t, "fit_gaussian_sdp: timestamps not strictly increasing");

  const Eigen::Index d = data.front().measure.dim();
  const int k = curve.parameter_count();
  const int N = static_cast<int>(data.size());
  const Eigen::Index n = (k + N) * d;
  const Eigen::MatrixXd Q = objective_matrix(data, curve, d);

  auto fix_blocks = [&](Eigen::MatrixXd& M) {
    for (int i = 0; i < N; ++i)
      M.block((k + i) * d, (k + i) * d, d, d) = data[static_cast<std::size_t>(i)].measure.covariance;
  };

  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, n);
  Z.topLeftCorner(k * d, k * d).setIdentity();
  fix_blocks(Z);
  Eigen::MatrixXd X = Z;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  double rho = options.rho;

  GaussianSdpResult out;
  for (int it = 1; it <= options.max_iter; ++it) {
    X = Z - U - Q / rho;
    fix_blocks(X);
    const Eigen::MatrixXd Z_old = Z;
    const Eigen::MatrixXd Xr = options.relaxation * X + (1.0 - options.relaxation) * Z_old;
    Z = project_psd(Xr + U);
    U += Xr - Z;

    const double r = (X - Z).norm();
    const double s = rho * (Z - Z_old).norm();
    out.iterations = it;
    out.primal_residual = r;
    out.dual_residual = s;
    const double scale = 1.0 + X.norm();
    if (r <= options.tol * scale && s <= options.tol * scale) {
      out.converged = true;
      break;
    }
    if (it % options.adapt_every != 0) continue;
    if (r > 10.0 * s) {
      rho *= 2.0;
      U /= 2.0;
    } else if (s > 10.0 * r) {
      rho /= 2.0;
      U *= 2.0;
    }
  }
  if (!out.converged) {
    std::ostringstream msg;
    msg << "fit_gaussian_sdp: ADMM not converged after " << out.iterations << " iterations (primal "
        << out.primal_residual << ", dual " << out.dual_residual << ")";
    log_warn(msg.str());
  }

  out.blocks.d = d;
  out.blocks.k = k;
  out.blocks.n_snapshots = N;
  out.blocks.C = (X + X.transpose()) / 2.0;
  out.objective = std::max(0.0, (Q.array() * out.blocks.C.array()).sum());

  // Means: weighted least squares on the data means (minimum norm when the
  // design does not identify every coefficient).
  Eigen::MatrixXd A(N, k);
  Eigen::MatrixXd M(N, d);
  Eigen::VectorXd w(N);
  for (int i = 0; i < N; ++i) {
    const auto& s = data[static_cast<std::size_t>(i)];
    A.row(i) = curve.coefficients(s.t).transpose();
    M.row(i) = s.measure.mean.transpose();
    w(i) = std::sqrt(s.lambda);
  }
  const Eigen::MatrixXd Aw = w.asDiagonal() * A;
  const Eigen::MatrixXd Mw = w.asDiagonal() * M;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aw);
  out.curve.curve = curve;
  out.curve.mean_coeffs = cod.solve(Mw);
  out.mean_residual = (Aw * out.curve.mean_coeffs - Mw).squaredNorm();
  Eigen::MatrixXd P = Z.topLeftCorner(k * d, k * d);
  out.curve.param_cov = (P + P.transpose()) / 2.0;
  return out;
}

StdDevFit gaussian_1d_parametric_oracle(const std::vector<StdDevPoint>& data, CurveKind kind) {
  require(!data.empty(), "gaussian_1d_parametric_oracle: no data");
  const auto n = static_cast<Eigen::Index>(data.size());
  const int k = kind == CurveKind::linear ? 2 : 3;
  const CurveClass curve{kind, 1.0};
  Eigen::MatrixXd A(n, k);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = data[static_cast<std::size_t>(i)];
    require(p.sigma > 0.0, "gaussian_1d_parametric_oracle: sigma must be positive");
    require(p.lambda > 0.0, "gaussian_1d_parametric_oracle: lambda must be positive");
    A.row(i) = curve.coefficients(p.t).transpose();
    y(i) = p.sigma;
    w(i) = std::sqrt(p.lambda);
  }
  const Eigen::MatrixXd Aw = w.asDiagonal() * A;
  const Eigen::VectorXd yw = w.cwiseProduct(y);
  auto residual = [&](const Eigen::VectorXd& x) { return (Aw * x - yw).squaredNorm(); };

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aw);
  StdDevFit best;
  best.params = cod.solve(yw);
  if (kind == CurveKind::quadratic) {
    best.residual = residual(best.params);
    return best;
  }
  require(cod.rank() >= 1, "gaussian_1d_parametric_oracle: degenerate design");
  if (best.params.minCoeff() >= 0.0) {
    best.residual = residual(best.params);
    return best;
  }
  // Active-set enumeration over the nonnegativity constraints.
  best.residual = residual(Eigen::Vector2d::Zero());
  best.params = Eigen::Vector2d::Zero();
  for (int free = 0; free < 2; ++free) {
    const Eigen::VectorXd col = Aw.col(free);
    const double denom = col.squaredNorm();
    if (denom <= 0.0) continue;
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    x(free) = std::max(0.0, col.dot(yw) / denom);
    const double r = residual(x);
    if (r < best.residual) {
      best.residual = r;
      best.params = x;
    }
  }
  return best;
}

GaussianMeasure gaussian_from_samples(const Eigen::MatrixXd& samples) {
  require(samples.rows() >= 1 && samples.cols() >= 1, "gaussian_from_samples: no samples");
  const Eigen::VectorXd mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centred = samples.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(samples.rows());
  cov = (cov + cov.transpose()) / 2.0;
  return {mean, cov};
}

}  // namespace wasscurve
