#ifndef WASSCURVE_MEASURES_HPP
#define WASSCURVE_MEASURES_HPP

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "wasscurve/error.hpp"
#include "wasscurve/linalg.hpp"

namespace wasscurve {

/// Finite support set X in R^d, one point per row. Points are pairwise
/// distinct and the set is never empty.
class SupportGrid {
 public:
  explicit SupportGrid(Eigen::MatrixXd points);

  /// n equally spaced points on [lo, hi] (1-D).
  static SupportGrid uniform(double lo, double hi, Eigen::Index n);
  /// Tensor product of 1-D axes, first axis varying slowest.
  static SupportGrid tensor(const std::vector<Eigen::VectorXd>& axes);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  auto point(Eigen::Index i) const { return points_.row(i); }

  /// Index of the nearest point; ties go to the lowest index.
  Eigen::Index nearest(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  SupportGrid scaled(double factor) const;

  bool operator==(const SupportGrid& other) const { return points_ == other.points_; }

 private:
  Eigen::MatrixXd points_;
};

using GridPtr = std::shared_ptr<const SupportGrid>;

inline GridPtr make_grid(SupportGrid g) { return std::make_shared<const SupportGrid>(std::move(g)); }

/// Weighted atoms on a SupportGrid. Weights are nonnegative and sum to one.
class DiscreteMeasure {
 public:
  DiscreteMeasure(GridPtr grid, Eigen::VectorXd weights);

  /// Rescales nonnegative weights to unit mass before validating.
  static DiscreteMeasure normalized(GridPtr grid, Eigen::VectorXd weights);
  static DiscreteMeasure dirac(GridPtr grid, Eigen::Index index);

  const SupportGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.size(); }

  Eigen::RowVectorXd mean() const;

 private:
  GridPtr grid_;
  Eigen::VectorXd weights_;
};

struct Snapshot {
  double time = 0.0;
  DiscreteMeasure measure;
  double lambda = 0.0;
};

/// N time-stamped measures on one shared grid, with weights lambda_i.
class SnapshotDataset {
 public:
  SnapshotDataset(std::vector<Snapshot> snapshots, double horizon);

  /// lambda_i = 1/N.
  static SnapshotDataset uniform(const std::vector<double>& times,
                                 const std::vector<DiscreteMeasure>& measures, double horizon);

  std::size_t size() const { return snapshots_.size(); }
  const Snapshot& operator[](std::size_t i) const { return snapshots_[i]; }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  double horizon() const { return horizon_; }
  /// Horizon of the raw data before normalization, kept so that couplings
  /// can be mapped back through (T x0, T x1).
  double original_horizon() const { return original_horizon_; }
  const SupportGrid& grid() const { return snapshots_.front().measure.grid(); }
  const GridPtr& grid_ptr() const { return snapshots_.front().measure.grid_ptr(); }
  Eigen::Index dim() const { return grid().dim(); }

  Eigen::VectorXd times() const;
  Eigen::VectorXd lambdas() const;

 private:
  friend SnapshotDataset normalize_timestamps(const SnapshotDataset&);
  std::vector<Snapshot> snapshots_;
  double horizon_;
  double original_horizon_;
};

/// Divides every timestamp by the horizon; idempotent once T = 1.
SnapshotDataset normalize_timestamps(const SnapshotDataset& dataset);

/// Nearest-point quantization of samples (one per row) onto a grid.
DiscreteMeasure measure_from_samples(const Eigen::MatrixXd& samples, GridPtr grid);

template <typename Scalar>
struct GaussianMeasureT {
  DenseVector<Scalar> mean;
  DenseMatrix<Scalar> covariance;

  GaussianMeasureT() = default;
  GaussianMeasureT(DenseVector<Scalar> m, DenseMatrix<Scalar> c)
      : mean(std::move(m)), covariance(std::move(c)) {
    validate();
  }

  Eigen::Index dim() const { return mean.size(); }

  void validate() const {
    require(covariance.rows() == mean.size() && covariance.cols() == mean.size(),
            "GaussianMeasure: covariance shape does not match mean");
    require(is_symmetric(covariance, Scalar(1e-10)), "GaussianMeasure: covariance not symmetric");
    const auto eig = sym_eig(covariance);
    if (eig.eigenvalues.size() == 0) return;
    const Scalar top = std::max(Scalar(0), eig.eigenvalues(0));
    require(eig.eigenvalues.minCoeff() >= -Scalar(1e-10) * top,
            "GaussianMeasure: covariance is not positive semi-definite");
  }
};

using GaussianMeasure = GaussianMeasureT<double>;

inline GaussianMeasure gaussian_1d(double mean, double stddev) {
  return {Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, stddev * stddev)};
}

struct GaussianMixture {
  std::vector<GaussianMeasure> atoms;
  Eigen::VectorXd weights;

  GaussianMixture() = default;
  GaussianMixture(std::vector<GaussianMeasure> a, Eigen::VectorXd w);

  /// Density at x (1-D mixtures only).
  double density_1d(double x) const;
};

}  // namespace wasscurve

#endif  // WASSCURVE_MEASURES_HPP
