#ifndef WASSCURVE_PFO_HPP
#define WASSCURVE_PFO_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wasscurve/curve_regression.hpp"
#include "wasscurve/measures.hpp"

namespace wasscurve {

/// n equal boxes on [lo, hi] (1-D) with their midpoints as support grid.
class BoxPartition {
 public:
  BoxPartition(double lo, double hi, Eigen::Index n);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  Eigen::Index size() const { return n_; }
  double width() const { return (hi_ - lo_) / static_cast<double>(n_); }
  const GridPtr& centers() const { return centers_; }
  double center(Eigen::Index i) const { return lo_ + (static_cast<double>(i) + 0.5) * width(); }
  /// Box containing x (the right end belongs to the last box).
  Eigen::Index box_of(double x) const;

 private:
  double lo_;
  double hi_;
  Eigen::Index n_;
  GridPtr centers_;
};

struct TransitionMatrix {
  Eigen::MatrixXd Q;
  Eigen::VectorXd source_marginal;
  std::vector<Eigen::Index> uniform_rows;  // rows with no source mass
  double objective = 0.0;                  // fit objective, a model-mismatch diagnostic
  bool converged = false;
};

struct MapSnapshots {
  SnapshotDataset dataset;
  int clamped = 0;  // particles pulled back into the domain
};

/// Uniform seeded particles pushed through k iterations of f for snapshot
/// k = 0..N-1, quantized onto the box centres; t_i = (i-1)/(N-1).
MapSnapshots snapshots_from_map(const std::function<double(double)>& f, int n_particles, int n_snapshots,
                                const BoxPartition& partition, std::uint64_t seed);

struct PfoConfig {
  double epsilon = 0.05;  // for the unweighted cost sum_i c_i
  double tol = 1e-8;
  int max_iter = 10000;
  int threads = 1;
};

/// Linear-curve fit with both endpoint grids on the box centres, then
/// Q(l, l') = pi(l, l') / p_0(l). Rows without source mass become uniform.
TransitionMatrix estimate_transition(const SnapshotDataset& dataset, const PfoConfig& config = {});

/// Builds a TransitionMatrix from a plain matrix, normalizing rows and
/// replacing empty rows by uniform ones.
TransitionMatrix make_transition(Eigen::MatrixXd Q);

struct StationaryResult {
  Eigen::VectorXd v;
  double residual = 0.0;  // |vQ - v|_1
  int iterations = 0;
  bool damped = false;
};

/// Left power iteration from the uniform vector; damped (alpha = 0.999)
/// restart when the plain iteration does not settle.
StationaryResult stationary_distribution(const TransitionMatrix& Q, double tol = 1e-10,
                                         int max_iter = 100000);

double logistic_map(double x, double r);
double arcsine_density(double x);
double arcsine_cdf(double x);
/// Arcsine mass of every box of a partition of [0, 1].
Eigen::VectorXd arcsine_box_masses(const BoxPartition& partition);

/// Mass of `v` in the `count` boxes whose centres are nearest to x.
double mass_near(const Eigen::VectorXd& v, const BoxPartition& partition, double x, int count = 5);

}  // namespace wasscurve

#endif  // WASSCURVE_PFO_HPP
