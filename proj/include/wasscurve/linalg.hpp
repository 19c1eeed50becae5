#ifndef WASSCURVE_LINALG_HPP
#define WASSCURVE_LINALG_HPP

// Dense symmetric kernels used by the Gaussian code paths. Everything here is
// templated on the Eigen expression type so float, double and long double
// matrices all work.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include "wasscurve/error.hpp"

namespace wasscurve {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct SymEig {
  DenseVector<Scalar> eigenvalues;   // descending
  DenseMatrix<Scalar> eigenvectors;  // columns, orthonormal
};

namespace detail {

template <typename Derived>
typename Derived::Scalar off_diagonal_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Scalar s(0);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

/// True when ||A - A^T||_F <= tol * max(1, ||A||_F).
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a,
                  typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-12)) {
  if (a.rows() != a.cols()) return false;
  using Scalar = typename Derived::Scalar;
  const Scalar scale = std::max(Scalar(1), a.norm());
  return (a - a.transpose()).norm() <= rel_tol * scale;
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps every (p, q) pair until the off-diagonal Frobenius norm drops below
/// 1e-12 * ||A||_F. Eigenvalues are returned in descending order together with
/// the matching orthonormal eigenvectors.
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  require(input.rows() == input.cols(), "sym_eig: matrix is not square");
  require(is_symmetric(input), "sym_eig: matrix is not symmetric");

  const Eigen::Index n = input.rows();
  DenseMatrix<Scalar> a = (input + input.transpose()) / Scalar(2);
  DenseMatrix<Scalar> v = DenseMatrix<Scalar>::Identity(n, n);

  const Scalar total = a.norm();
  const Scalar stop = Scalar(1e-12) * total;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (!(detail::off_diagonal_norm(a) > stop)) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
        v.applyOnTheRight(p, q, rot);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return a(l, l) > a(r, r); });

  SymEig<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// Rebuilds V f(Lambda) V^T from a decomposition, symmetrized.
template <typename Scalar, typename Fn>
DenseMatrix<Scalar> apply_spectral(const SymEig<Scalar>& eig, Fn&& fn) {
  DenseVector<Scalar> mapped = eig.eigenvalues.unaryExpr(fn);
  DenseMatrix<Scalar> out =
      eig.eigenvectors * mapped.asDiagonal() * eig.eigenvectors.transpose();
  return (out + out.transpose()) / Scalar(2);
}

/// Principal square root of a PSD matrix. Eigenvalues down to
/// -1e-10 * lambda_max are treated as round-off and clipped to zero.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> sqrtm_psd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(a);
  if (eig.eigenvalues.size() == 0) return DenseMatrix<Scalar>(0, 0);
  const Scalar top = std::max(Scalar(0), eig.eigenvalues(0));
  const Scalar floor = -Scalar(1e-10) * top;
  require(eig.eigenvalues.minCoeff() >= floor,
          "sqrtm_psd: matrix has a significantly negative eigenvalue");
  return apply_spectral(eig, [](Scalar x) { return std::sqrt(std::max(Scalar(0), x)); });
}

/// Inverse principal square root of a strictly positive definite matrix.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> inv_sqrtm_pd(const Eigen::MatrixBase<Derived>& a,
                                                   typename Derived::Scalar rel_floor =
                                                       typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(a);
  const Scalar top = eig.eigenvalues.size() ? eig.eigenvalues(0) : Scalar(0);
  require(top > Scalar(0) && eig.eigenvalues.minCoeff() > rel_floor * top,
          "inv_sqrtm_pd: matrix is singular or indefinite");
  return apply_spectral(eig, [](Scalar x) { return Scalar(1) / std::sqrt(x); });
}

/// Frobenius-nearest PSD matrix: clip negative eigenvalues at zero.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> project_psd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return apply_spectral(sym_eig(a), [](Scalar x) { return std::max(Scalar(0), x); });
}

/// Smallest eigenvalue, used by PSD checks.
template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  const auto eig = sym_eig(a);
  return eig.eigenvalues.size() ? eig.eigenvalues.minCoeff() : typename Derived::Scalar(0);
}

}  // namespace wasscurve

#endif  // WASSCURVE_LINALG_HPP
