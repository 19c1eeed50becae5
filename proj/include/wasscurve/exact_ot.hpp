#ifndef WASSCURVE_EXACT_OT_HPP
#define WASSCURVE_EXACT_OT_HPP

// Exact linear-programming solvers: a transportation simplex for two-marginal
// problems and a small dense simplex for general standard-form LPs (used for
// the multi-marginal problem on instances small enough to enumerate).

#include <Eigen/Dense>

namespace wasscurve {

struct TransportPlan {
  double cost = 0.0;
  Eigen::MatrixXd plan;  // rows: supply, cols: demand
  int pivots = 0;
};

/// Minimizes <cost, plan> over plans with row sums `supply` and column sums
/// `demand`. Starts from the north-west corner rule (optimal already for 1-D
/// sorted supports under convex cost) and pivots with MODI reduced costs.
/// Throws if total masses differ by more than 1e-9.
TransportPlan transport_simplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                const Eigen::MatrixXd& cost);

struct LinearProgram {
  Eigen::MatrixXd A;  // equality constraints A x = b
  Eigen::VectorXd b;  // b >= 0 not required; rows are sign-flipped as needed
  Eigen::VectorXd c;  // minimize c^T x, x >= 0
};

struct LinearProgramSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

/// Two-phase dense tableau simplex with Bland's rule. Redundant equality rows
/// are detected and dropped after phase one. Throws on infeasible or unbounded
/// problems.
LinearProgramSolution solve_lp(const LinearProgram& lp);

}  // namespace wasscurve

#endif  // WASSCURVE_EXACT_OT_HPP
