#include "wasscurve/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace wasscurve {

namespace {

constexpr double kMassTol = 1e-12;

void check_weights(const Eigen::VectorXd& w, const char* who) {
  require(w.allFinite(), std::string(who) + ": non-finite weight");
  require(w.size() == 0 || w.minCoeff() >= 0.0, std::string(who) + ": negative weight");
  require(std::abs(w.sum() - 1.0) <= kMassTol, std::string(who) + ": weights do not sum to 1");
}

}  // namespace

SupportGrid::SupportGrid(Eigen::MatrixXd points) : points_(std::move(points)) {
  require(points_.rows() >= 1, "SupportGrid: empty point set");
  require(points_.cols() >= 1, "SupportGrid: zero dimension");
  require(points_.allFinite(), "SupportGrid: non-finite coordinate");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(points_.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < points_.cols(); ++k) {
      if (points_(a, k) != points_(b, k)) return points_(a, k) < points_(b, k);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), lex_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    require(points_.row(order[i - 1]) != points_.row(order[i]),
            "SupportGrid: duplicate point");
  }
}

SupportGrid SupportGrid::uniform(double lo, double hi, Eigen::Index n) {
  require(n >= 1, "SupportGrid::uniform: need at least one point");
  require(n == 1 || hi > lo, "SupportGrid::uniform: empty interval");
  Eigen::MatrixXd pts(n, 1);
  if (n == 1) {
    pts(0, 0) = lo;
  } else {
    pts.col(0) = Eigen::VectorXd::LinSpaced(n, lo, hi);
  }
  return SupportGrid(std::move(pts));
}

SupportGrid SupportGrid::tensor(const std::vector<Eigen::VectorXd>& axes) {
  require(!axes.empty(), "SupportGrid::tensor: no axes");
  Eigen::Index total = 1;
  for (const auto& a : axes) {
    require(a.size() >= 1, "SupportGrid::tensor: empty axis");
    total *= a.size();
  }
  const auto d = static_cast<Eigen::Index>(axes.size());
  Eigen::MatrixXd pts(total, d);
  for (Eigen::Index row = 0; row < total; ++row) {
    Eigen::Index rem = row;
    for (Eigen::Index k = d - 1; k >= 0; --k) {
      const auto& axis = axes[static_cast<std::size_t>(k)];
      pts(row, k) = axis(rem % axis.size());
      rem /= axis.size();
    }
  }
  return SupportGrid(std::move(pts));
}

Eigen::Index SupportGrid::nearest(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  require(x.size() == dim(), "SupportGrid::nearest: dimension mismatch");
  Eigen::Index best = 0;
  double best_d = (points_.row(0) - x).squaredNorm();
  for (Eigen::Index i = 1; i < points_.rows(); ++i) {
    const double dist = (points_.row(i) - x).squaredNorm();
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

SupportGrid SupportGrid::scaled(double factor) const {
  require(factor != 0.0, "SupportGrid::scaled: zero factor");
  return SupportGrid(points_ * factor);
}

DiscreteMeasure::DiscreteMeasure(GridPtr grid, Eigen::VectorXd weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
  require(grid_ != nullptr, "DiscreteMeasure: null grid");
  require(weights_.size() == grid_->size(), "DiscreteMeasure: one weight per grid point required");
  check_weights(weights_, "DiscreteMeasure");
}

DiscreteMeasure DiscreteMeasure::normalized(GridPtr grid, Eigen::VectorXd weights) {
  require(weights.size() == 0 || weights.minCoeff() >= 0.0, "DiscreteMeasure: negative weight");
  const double total = weights.sum();
  require(total > 0.0 && std::isfinite(total), "DiscreteMeasure: zero total mass");
  weights /= total;
  // Push the residual rounding onto the largest entry so the sum is 1 to ulp.
  Eigen::Index imax = 0;
  weights.maxCoeff(&imax);
  weights(imax) += 1.0 - weights.sum();
  return DiscreteMeasure(std::move(grid), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::dirac(GridPtr grid, Eigen::Index index) {
  require(grid != nullptr, "DiscreteMeasure: null grid");
  require(index >= 0 && index < grid->size(), "DiscreteMeasure::dirac: index out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid->size());
  w(index) = 1.0;
  return DiscreteMeasure(std::move(grid), std::move(w));
}

Eigen::RowVectorXd DiscreteMeasure::mean() const {
  return weights_.transpose() * grid_->points();
}

SnapshotDataset::SnapshotDataset(std::vector<Snapshot> snapshots, double horizon)
    : snapshots_(std::move(snapshots)), horizon_(horizon), original_horizon_(horizon) {
  require(!snapshots_.empty(), "SnapshotDataset: no snapshots");
  require(horizon_ > 0.0 && std::isfinite(horizon_), "SnapshotDataset: horizon must be positive");
  double lambda_sum = 0.0;
  for (std::size_t i = 0; i < snapshots_.size(); ++i) {
    const auto& s = snapshots_[i];
    require(s.lambda > 0.0, "SnapshotDataset: lambda must be positive");
    require(s.time >= 0.0 && s.time <= horizon_ * (1.0 + 1e-12),
            "SnapshotDataset: timestamp outside [0, T]");
    if (i > 0) {
      require(s.time > snapshots_[i - 1].time, "SnapshotDataset: timestamps not strictly increasing");
      require(s.measure.grid_ptr() == snapshots_[0].measure.grid_ptr() ||
                  s.measure.grid() == snapshots_[0].measure.grid(),
              "SnapshotDataset: snapshots must share one support grid");
    }
    lambda_sum += s.lambda;
  }
  require(std::abs(lambda_sum - 1.0) <= kMassTol, "SnapshotDataset: lambdas do not sum to 1");
}

SnapshotDataset SnapshotDataset::uniform(const std::vector<double>& times,
                                         const std::vector<DiscreteMeasure>& measures,
                                         double horizon) {
  require(times.size() == measures.size(), "SnapshotDataset::uniform: size mismatch");
  require(!times.empty(), "SnapshotDataset::uniform: no snapshots");
  const double lambda = 1.0 / static_cast<double>(times.size());
  std::vector<Snapshot> snaps;
  snaps.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) snaps.push_back({times[i], measures[i], lambda});
  // Rounding of N * (1/N) is well inside the 1e-12 mass tolerance.
  return SnapshotDataset(std::move(snaps), horizon);
}

Eigen::VectorXd SnapshotDataset::times() const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(snapshots_.size()));
  for (std::size_t i = 0; i < snapshots_.size(); ++i) t(static_cast<Eigen::Index>(i)) = snapshots_[i].time;
  return t;
}

Eigen::VectorXd SnapshotDataset::lambdas() const {
  Eigen::VectorXd l(static_cast<Eigen::Index>(snapshots_.size()));
  for (std::size_t i = 0; i < snapshots_.size(); ++i) l(static_cast<Eigen::Index>(i)) = snapshots_[i].lambda;
  return l;
}

SnapshotDataset normalize_timestamps(const SnapshotDataset& dataset) {
  const double T = dataset.horizon();
  require(T > 0.0, "normalize_timestamps: horizon must be positive");
  SnapshotDataset out = dataset;
  if (T == 1.0) return out;
  for (auto& s : out.snapshots_) s.time = std::min(1.0, s.time / T);
  out.horizon_ = 1.0;
  out.original_horizon_ = dataset.original_horizon_;
  return out;
}

DiscreteMeasure measure_from_samples(const Eigen::MatrixXd& samples, GridPtr grid) {
  require(grid != nullptr && grid->size() >= 1, "measure_from_samples: empty grid");
  require(samples.rows() >= 1, "measure_from_samples: empty sample list");
  require(samples.cols() == grid->dim(), "measure_from_samples: dimension mismatch");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(grid->size());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) counts(grid->nearest(samples.row(i))) += 1.0;
  return DiscreteMeasure::normalized(std::move(grid), std::move(counts));
}

GaussianMixture::GaussianMixture(std::vector<GaussianMeasure> a, Eigen::VectorXd w)
    : atoms(std::move(a)), weights(std::move(w)) {
  require(!atoms.empty(), "GaussianMixture: no atoms");
  require(static_cast<Eigen::Index>(atoms.size()) == weights.size(),
          "GaussianMixture: one weight per atom required");
  check_weights(weights, "GaussianMixture");
  for (const auto& atom : atoms)
    require(atom.dim() == atoms.front().dim(), "GaussianMixture: atoms differ in dimension");
}

double GaussianMixture::density_1d(double x) const {
  require(atoms.front().dim() == 1, "GaussianMixture::density_1d: mixture is not 1-D");
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double var = atoms[k].covariance(0, 0);
    if (var <= 0.0) continue;  // point masses carry no density
    const double z = x - atoms[k].mean(0);
    total += weights(static_cast<Eigen::Index>(k)) * kInvSqrt2Pi / std::sqrt(var) *
             std::exp(-0.5 * z * z / var);
  }
  return total;
}

}  // namespace wasscurve
