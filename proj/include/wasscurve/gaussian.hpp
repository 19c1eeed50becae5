#ifndef WASSCURVE_GAUSSIAN_HPP
#define WASSCURVE_GAUSSIAN_HPP

// Closed-form W2 geometry of Gaussian measures.

#include <cmath>

#include "wasscurve/linalg.hpp"
#include "wasscurve/measures.hpp"

namespace wasscurve {

/// Squared W2 distance between two Gaussians:
///   |m0 - m1|^2 + tr(C0 + C1 - 2 (C0^{1/2} C1 C0^{1/2})^{1/2}),
/// clipped at zero against round-off.
template <typename Scalar>
Scalar w2_gaussian_squared(const GaussianMeasureT<Scalar>& a, const GaussianMeasureT<Scalar>& b) {
  require(a.dim() == b.dim(), "w2_gaussian: dimension mismatch");
  const DenseMatrix<Scalar> root_a = sqrtm_psd(a.covariance);
  const DenseMatrix<Scalar> inner = root_a * b.covariance * root_a;
  const DenseMatrix<Scalar> cross = sqrtm_psd((inner + inner.transpose()) / Scalar(2));
  const Scalar value = (a.mean - b.mean).squaredNorm() + a.covariance.trace() +
                       b.covariance.trace() - Scalar(2) * cross.trace();
  return std::max(Scalar(0), value);
}

template <typename Scalar>
Scalar w2_gaussian(const GaussianMeasureT<Scalar>& a, const GaussianMeasureT<Scalar>& b) {
  return std::sqrt(w2_gaussian_squared(a, b));
}

/// McCann interpolant between a and b at time t. Needs C0 strictly positive
/// definite for the C0^{-1/2} factor.
template <typename Scalar>
GaussianMeasureT<Scalar> gaussian_geodesic(const GaussianMeasureT<Scalar>& a,
                                           const GaussianMeasureT<Scalar>& b, Scalar t) {
  require(a.dim() == b.dim(), "gaussian_geodesic: dimension mismatch");
  require(t >= Scalar(0) && t <= Scalar(1), "gaussian_geodesic: t outside [0, 1]");
  if (t == Scalar(0)) return a;
  const DenseMatrix<Scalar> root_a = sqrtm_psd(a.covariance);
  const DenseMatrix<Scalar> inv_root_a = inv_sqrtm_pd(a.covariance);
  const DenseMatrix<Scalar> inner = root_a * b.covariance * root_a;
  const DenseMatrix<Scalar> cross = sqrtm_psd((inner + inner.transpose()) / Scalar(2));
  const DenseMatrix<Scalar> mid = (Scalar(1) - t) * a.covariance + t * cross;
  DenseMatrix<Scalar> cov = inv_root_a * mid * mid * inv_root_a;
  cov = (cov + cov.transpose()) / Scalar(2);

  GaussianMeasureT<Scalar> out;
  out.mean = (Scalar(1) - t) * a.mean + t * b.mean;
  out.covariance = std::move(cov);
  return out;
}

}  // namespace wasscurve

#endif  // WASSCURVE_GAUSSIAN_HPP
