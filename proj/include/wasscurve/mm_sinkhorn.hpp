#ifndef WASSCURVE_MM_SINKHORN_HPP
#define WASSCURVE_MM_SINKHORN_HPP

// Entropic multi-marginal transport for costs that decouple across snapshots:
//
//   c(params, y_1, ..., y_N) = sum_i lambda_i c_i(params, y_i).
//
// The optimal multi-coupling has the form
//   Gamma(params, y_1..y_N) = prod_i K_i(params, y_i) a_i(y_i),
// so only the N kernels K_i (|params| x |X| each) and the N potentials a_i
// are ever stored. Marginals are contracted factor by factor in
// O(N |params| |X|) instead of touching the (N + k)-way tensor.

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "wasscurve/curve.hpp"
#include "wasscurve/exact_ot.hpp"
#include "wasscurve/measures.hpp"

namespace wasscurve {

/// Cartesian product of k parameter grids; flat index has the first slot
/// varying slowest.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<GridPtr> grids);

  std::size_t slots() const { return grids_.size(); }
  Eigen::Index size() const { return size_; }
  Eigen::Index dim() const { return grids_.empty() ? 0 : grids_.front()->dim(); }
  const std::vector<GridPtr>& grids() const { return grids_; }
  const SupportGrid& grid(std::size_t slot) const { return *grids_[slot]; }

  /// Per-slot grid indices of a flat index.
  std::vector<Eigen::Index> decode(Eigen::Index flat) const;
  Eigen::Index encode(const std::vector<Eigen::Index>& indices) const;
  /// Parameter values as a (slots x dim) matrix.
  Eigen::MatrixXd parameters(Eigen::Index flat) const;

 private:
  std::vector<GridPtr> grids_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index size_ = 0;
};

/// The decoupled cost: parameter space, support size, per-snapshot weights,
/// and a row generator for the unweighted c_i(params, .).
class CostModel {
 public:
  using RowFn = std::function<void(std::size_t snapshot, Eigen::Index param,
                                   Eigen::Ref<Eigen::VectorXd> out)>;

  CostModel(ParameterSpace space, Eigen::Index support_size, Eigen::VectorXd lambdas, RowFn row);

  const ParameterSpace& space() const { return space_; }
  Eigen::Index params_size() const { return space_.size(); }
  Eigen::Index support_size() const { return support_size_; }
  std::size_t snapshots() const { return static_cast<std::size_t>(lambdas_.size()); }
  const Eigen::VectorXd& lambdas() const { return lambdas_; }

  /// Unweighted c_i(param, y) for every y.
  void cost_row(std::size_t i, Eigen::Index param, Eigen::Ref<Eigen::VectorXd> out) const {
    row_(i, param, out);
  }
  /// Full unweighted table c_i, |params| x |X|.
  Eigen::MatrixXd cost_table(std::size_t i) const;

  /// sum_i lambda_i max c_i: the largest total cost any tuple can incur.
  double cost_scale() const;

 private:
  ParameterSpace space_;
  Eigen::Index support_size_;
  Eigen::VectorXd lambdas_;
  RowFn row_;
};

/// Cost of fitting `curve` to the snapshots of `dataset` with the parameters
/// drawn from `grids` (one grid per curve parameter):
///   c_i(params, y) = |phi(params, t_i) - y|^2.
CostModel curve_cost_model(const SnapshotDataset& dataset, const CurveClass& curve,
                           const std::vector<GridPtr>& grids);

/// Gibbs kernels K_i = exp(-(lambda_i c_i - min lambda_i c_i) / eps), so every
/// entry lies in (0, 1] up to underflow and each kernel attains 1.
class CostKernelSet {
 public:
  CostKernelSet(CostModel model, double epsilon);

  const CostModel& model() const { return model_; }
  const ParameterSpace& space() const { return model_.space(); }
  double epsilon() const { return epsilon_; }
  std::size_t snapshots() const { return kernels_.size(); }
  Eigen::Index params_size() const { return model_.params_size(); }
  Eigen::Index support_size() const { return model_.support_size(); }
  const Eigen::MatrixXd& kernel(std::size_t i) const { return kernels_[i]; }
  /// s_i = lambda_i min c_i / eps, so log K_i = -lambda_i c_i / eps + s_i.
  double shift(std::size_t i) const { return shifts_[i]; }
  /// log K_i recomputed from the cost (immune to the underflow in K_i).
  Eigen::MatrixXd log_kernel(std::size_t i) const;

 private:
  CostModel model_;
  double epsilon_;
  std::vector<Eigen::MatrixXd> kernels_;
  std::vector<double> shifts_;
};

/// build_kernels: curve cost model plus Gibbs kernels in one step.
std::shared_ptr<const CostKernelSet> build_kernels(const SnapshotDataset& dataset,
                                                   const CurveClass& curve,
                                                   const std::vector<GridPtr>& grids,
                                                   double epsilon);

/// Optimizer state. Potentials are a_i in the exponential domain, or log a_i
/// once the solver has switched to log-domain updates. Potentials are zero
/// (or -inf) exactly where the corresponding target weight is zero.
struct FactoredCoupling {
  std::shared_ptr<const CostKernelSet> kernels;
  std::vector<Eigen::VectorXd> potentials;
  bool log_domain = false;
  bool converged = false;
  double marginal_residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  int threads = 1;

  /// All potentials one, i.e. Gamma proportional to the plain Gibbs tensor.
  static FactoredCoupling initial(std::shared_ptr<const CostKernelSet> kernels);
};

/// Distribution over parameter tuples, the projection of Gamma onto params.
struct ParamCoupling {
  ParameterSpace space;
  Eigen::VectorXd weights;

  /// Marginal over one slot's grid.
  Eigen::VectorXd slot_marginal(std::size_t slot) const;
  /// Joint marginal over two slots (rows: slot a, cols: slot b).
  Eigen::MatrixXd pair_marginal(std::size_t a, std::size_t b) const;
  Eigen::Index mode() const;
  Eigen::MatrixXd mode_parameters() const { return space.parameters(mode()); }
};

struct SinkhornOptions {
  double tol = 1e-8;     // max_j |P_{y_j}(Gamma) - p_j|_1
  int max_iter = 10000;  // full sweeps
  int threads = 1;
  bool force_log_domain = false;
};

/// P_{y_j}(Gamma) by the factored contraction.
Eigen::VectorXd project_marginal(const FactoredCoupling& state, std::size_t j);

/// Cyclic Sinkhorn scaling a_j <- a_j * p_j / P_{y_j}(Gamma) over j = 1..N.
/// Throws solver_divergence when a target atom receives zero projected mass
/// even in the log domain (eps too small for the cost scale or a
/// disconnected kernel).
FactoredCoupling sinkhorn_solve(std::shared_ptr<const CostKernelSet> kernels,
                                const std::vector<Eigen::VectorXd>& targets,
                                const SinkhornOptions& options = {});
FactoredCoupling sinkhorn_solve(std::shared_ptr<const CostKernelSet> kernels,
                                const SnapshotDataset& dataset, const SinkhornOptions& options = {});

/// prod_i <K_i[params, .], a_i>, normalized to unit mass.
ParamCoupling extract_param_coupling(const FactoredCoupling& state);

/// <c, Gamma> (entropy term excluded), computed kernel-wise.
double transport_objective(const FactoredCoupling& state);

/// Result of the exact multi-marginal LP on enumerable instances.
struct MultiMarginalLpSolution {
  double objective = 0.0;
  ParamCoupling coupling;
};

/// Solves the unregularized multi-marginal LP by enumerating
/// params x supp(p_1) x ... x supp(p_N). Only for small instances.
MultiMarginalLpSolution solve_multimarginal_lp(const CostModel& model,
                                               const std::vector<Eigen::VectorXd>& targets);

struct TwoMarginalResult {
  double cost = 0.0;  // <c, Pi>, squared W2 estimate
  Eigen::MatrixXd coupling;
  int iterations = 0;
};

/// Entropic two-marginal OT with quadratic ground cost (log-domain Sinkhorn).
/// Returns <c, Pi> of the regularized plan.
TwoMarginalResult two_marginal_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double epsilon);
/// Exact W2^2 via the transportation simplex.
TwoMarginalResult two_marginal_w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Squared Euclidean distances between the points of two grids.
Eigen::MatrixXd squared_distance_matrix(const SupportGrid& a, const SupportGrid& b);

}  // namespace wasscurve

#endif  // WASSCURVE_MM_SINKHORN_HPP
