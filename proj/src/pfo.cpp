#include "wasscurve/pfo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "wasscurve/log.hpp"

namespace wasscurve {

BoxPartition::BoxPartition(double lo, double hi, Eigen::Index n) : lo_(lo), hi_(hi), n_(n) {
  require(n_ >= 1, "BoxPartition: need at least one box");
  require(std::isfinite(lo_) && std::isfinite(hi_) && hi_ > lo_, "BoxPartition: empty domain");
  Eigen::MatrixXd pts(n_, 1);
  for (Eigen::Index i = 0; i < n_; ++i) pts(i, 0) = center(i);
  centers_ = make_grid(SupportGrid(std::move(pts)));
}

Eigen::Index BoxPartition::box_of(double x) const {
  const auto i = static_cast<Eigen::Index>(std::floor((x - lo_) / width()));
  return std::clamp<Eigen::Index>(i, 0, n_ - 1);
}

MapSnapshots snapshots_from_map(const std::function<double(double)>& f, int n_particles, int n_snapshots,
                                const BoxPartition& partition, std::uint64_t seed) {
  require(static_cast<bool>(f), "snapshots_from_map: missing map");
  require(n_particles >= 1, "snapshots_from_map: need at least one particle");
  require(n_snapshots >= 2, "snapshots_from_map: need at least two snapshots");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(partition.lo(), partition.hi());
  Eigen::MatrixXd x(n_particles, 1);
  for (int p = 0; p < n_particles; ++p) x(p, 0) = unif(rng);

  int clamped = 0;
  std::vector<double> times;
  std::vector<DiscreteMeasure> measures;
  for (int k = 0; k < n_snapshots; ++k) {
    if (k > 0) {
      for (int p = 0; p < n_particles; ++p) {
        double y = f(x(p, 0));
        if (!(y >= partition.lo() && y <= partition.hi())) {
          ++clamped;
          y = std::isnan(y) ? partition.lo() : std::clamp(y, partition.lo(), partition.hi());
        }
        x(p, 0) = y;
      }
    }
    times.push_back(static_cast<double>(k) / static_cast<double>(n_snapshots - 1));
    measures.push_back(measure_from_samples(x, partition.centers()));
  }
  if (clamped > 0) {
    std::ostringstream msg;
    msg << "snapshots_from_map: " << clamped << " particle updates left the domain and were clamped";
    log_warn(msg.str());
  }
  return {SnapshotDataset::uniform(times, measures, 1.0), clamped};
}

TransitionMatrix make_transition(Eigen::MatrixXd Q) {
  require(Q.rows() == Q.cols() && Q.rows() >= 1, "make_transition: matrix must be square");
  require(Q.allFinite() && Q.minCoeff() >= 0.0, "make_transition: entries must be nonnegative");
  TransitionMatrix out;
  const Eigen::Index n = Q.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = Q.row(i).sum();
    if (s <= 0.0) {
      Q.row(i).setConstant(1.0 / static_cast<double>(n));
      out.uniform_rows.push_back(i);
    } else {
      Q.row(i) /= s;
    }
  }
  out.Q = std::move(Q);
  out.source_marginal = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  out.converged = true;
  return out;
}

TransitionMatrix estimate_transition(const SnapshotDataset& dataset, const PfoConfig& config) {
  require(dataset.size() >= 3,
          "estimate_transition: at least 3 snapshots required (with 2 any coupling is optimal)");
  require(dataset.dim() == 1, "estimate_transition: 1-D box partitions only");
  for (const auto& s : dataset.snapshots())
    require(std::abs(s.lambda * static_cast<double>(dataset.size()) - 1.0) <= 1e-9,
            "estimate_transition: snapshot weights must be uniform");
  SolverConfig sc;
  // config.epsilon regularizes the unweighted cost sum_i c_i; the solver
  // works with sum_i lambda_i c_i, lambda_i = 1/N.
  sc.epsilon = config.epsilon / static_cast<double>(dataset.size());
  sc.tol = config.tol;
  sc.max_iter = config.max_iter;
  sc.threads = config.threads;
  const SnapshotDataset data = normalize_timestamps(dataset);
  const RegressionResult fitres = fit(data, CurveClass::linear(), sc);
  const Eigen::MatrixXd pi = fitres.coupling.pair_marginal(0, 1);
  const Eigen::VectorXd& p0 = data[0].measure.weights();

  const Eigen::Index n = pi.rows();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  TransitionMatrix out;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (p0(l) <= 0.0) {
      Q.row(l).setConstant(1.0 / static_cast<double>(n));
      out.uniform_rows.push_back(l);
      continue;
    }
    Q.row(l) = pi.row(l) / p0(l);
    Q.row(l) /= Q.row(l).sum();
  }
  out.Q = std::move(Q);
  out.source_marginal = p0;
  out.objective = fitres.objective;
  out.converged = fitres.converged;
  return out;
}

StationaryResult stationary_distribution(const TransitionMatrix& T, double tol, int max_iter) {
  const Eigen::MatrixXd& Q = T.Q;
  require(Q.rows() == Q.cols() && Q.rows() >= 1, "stationary_distribution: matrix must be square");
  require(tol > 0.0 && max_iter >= 1, "stationary_distribution: invalid options");
  for (Eigen::Index i = 0; i < Q.rows(); ++i)
    require(std::abs(Q.row(i).sum() - 1.0) <= 1e-9 && Q.row(i).minCoeff() >= 0.0,
            "stationary_distribution: matrix is not row-stochastic");

  const Eigen::Index n = Q.rows();
  const Eigen::RowVectorXd u = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  StationaryResult out;
  for (int pass = 0; pass < 2; ++pass) {
    const bool damped = pass == 1;
    const double alpha = damped ? 0.999 : 1.0;
    Eigen::RowVectorXd v = u;
    for (int it = 1; it <= max_iter; ++it) {
      Eigen::RowVectorXd next = alpha * (v * Q) + (1.0 - alpha) * u;
      next /= next.sum();
      out.iterations = it;
      out.residual = (v * Q - v).lpNorm<1>();
      v = next;
      if (out.residual <= tol) break;
    }
    out.residual = (v * Q - v).lpNorm<1>();
    out.v = v.transpose();
    out.damped = damped;
    if (out.residual <= tol) return out;
    if (!damped) log_info("stationary_distribution: plain iteration did not settle, retrying with damping");
  }
  // The damped fixed point need not be stationary for Q itself; accept it when
  // it is stationary for the damped chain.
  const Eigen::RowVectorXd v = out.v.transpose();
  const double damped_res = (0.999 * (v * Q) + 0.001 * u - v).lpNorm<1>();
  require(damped_res <= tol, "stationary_distribution: no convergence even with damping",
          ErrorCategory::solver_divergence);
  out.residual = damped_res;
  return out;
}

double logistic_map(double x, double r) {
  require(x >= 0.0 && x <= 1.0, "logistic_map: x outside [0, 1]");
  require(r >= 0.0 && r <= 4.0, "logistic_map: r outside [0, 4]");
  return std::clamp(r * x * (1.0 - x), 0.0, 1.0);
}

double arcsine_density(double x) {
  require(x > 0.0 && x < 1.0, "arcsine_density: x outside (0, 1)");
  return 1.0 / (M_PI * std::sqrt(x * (1.0 - x)));
}

double arcsine_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 2.0 / M_PI * std::asin(std::sqrt(x));
}

Eigen::VectorXd arcsine_box_masses(const BoxPartition& partition) {
  require(partition.lo() >= 0.0 && partition.hi() <= 1.0, "arcsine_box_masses: partition must lie in [0, 1]");
  Eigen::VectorXd out(partition.size());
  for (Eigen::Index i = 0; i < partition.size(); ++i) {
    const double a = partition.lo() + static_cast<double>(i) * partition.width();
    out(i) = arcsine_cdf(a + partition.width()) - arcsine_cdf(a);
  }
  return out;
}

double mass_near(const Eigen::VectorXd& v, const BoxPartition& partition, double x, int count) {
  require(v.size() == partition.size(), "mass_near: size mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(partition.center(a) - x) < std::abs(partition.center(b) - x);
  });
  double total = 0.0;
  for (int i = 0; i < count && i < static_cast<int>(order.size()); ++i) total += v(order[static_cast<std::size_t>(i)]);
  return total;
}

}  // namespace wasscurve
