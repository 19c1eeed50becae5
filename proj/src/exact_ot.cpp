#include "wasscurve/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wasscurve/error.hpp"

namespace wasscurve {

namespace {

struct BasicCell {
  Eigen::Index row;
  Eigen::Index col;
  double flow;
};

// Spanning-tree bookkeeping over m row nodes followed by n column nodes.
class BasisTree {
 public:
  BasisTree(Eigen::Index m, Eigen::Index n) : m_(m), n_(n), adjacency_(static_cast<std::size_t>(m + n)) {}

  void rebuild(const std::vector<BasicCell>& cells) {
    for (auto& a : adjacency_) a.clear();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      adjacency_[static_cast<std::size_t>(cells[k].row)].push_back(k);
      adjacency_[static_cast<std::size_t>(m_ + cells[k].col)].push_back(k);
    }
  }

  void potentials(const std::vector<BasicCell>& cells, const Eigen::MatrixXd& cost,
                  Eigen::VectorXd& u, Eigen::VectorXd& v) const {
    const auto total = static_cast<std::size_t>(m_ + n_);
    std::vector<char> seen(total, 0);
    std::vector<Eigen::Index> stack{0};
    u.setZero(m_);
    v.setZero(n_);
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index node = stack.back();
      stack.pop_back();
      for (std::size_t k : adjacency_[static_cast<std::size_t>(node)]) {
        const auto& c = cells[k];
        const Eigen::Index other = node < m_ ? m_ + c.col : c.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        if (node < m_) {
          v(c.col) = cost(c.row, c.col) - u(c.row);
        } else {
          u(c.row) = cost(c.row, c.col) - v(c.col);
        }
        stack.push_back(other);
      }
    }
  }

  // Cells on the tree path from column node `col` back to row node `row`,
  // ordered starting at the column end.
  std::vector<std::size_t> path(const std::vector<BasicCell>& cells, Eigen::Index row,
                                Eigen::Index col) const {
    const auto total = static_cast<std::size_t>(m_ + n_);
    std::vector<std::ptrdiff_t> via(total, -1);
    std::vector<char> seen(total, 0);
    std::vector<Eigen::Index> queue{row};
    seen[static_cast<std::size_t>(row)] = 1;
    const Eigen::Index target = m_ + col;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Eigen::Index node = queue[head];
      if (node == target) break;
      for (std::size_t k : adjacency_[static_cast<std::size_t>(node)]) {
        const auto& c = cells[k];
        const Eigen::Index other = node < m_ ? m_ + c.col : c.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        via[static_cast<std::size_t>(other)] = static_cast<std::ptrdiff_t>(k);
        queue.push_back(other);
      }
    }
    require(seen[static_cast<std::size_t>(target)] != 0, "transport_simplex: basis is not a spanning tree",
            ErrorCategory::solver_divergence);
    std::vector<std::size_t> out;
    Eigen::Index node = target;
    while (node != row) {
      const auto k = static_cast<std::size_t>(via[static_cast<std::size_t>(node)]);
      out.push_back(k);
      const auto& c = cells[k];
      node = node < m_ ? m_ + c.col : c.row;
    }
    return out;
  }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

}  // namespace

TransportPlan transport_simplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                const Eigen::MatrixXd& cost) {
  const Eigen::Index m = supply.size();
  const Eigen::Index n = demand.size();
  require(m >= 1 && n >= 1, "transport_simplex: empty marginal");
  require(cost.rows() == m && cost.cols() == n, "transport_simplex: cost shape mismatch");
  require(supply.minCoeff() >= 0.0 && demand.minCoeff() >= 0.0, "transport_simplex: negative mass");
  require(std::abs(supply.sum() - demand.sum()) <= 1e-9, "transport_simplex: mass mismatch");
  require(cost.allFinite(), "transport_simplex: non-finite cost");

  // North-west corner start: exactly m + n - 1 basic cells.
  std::vector<BasicCell> cells;
  cells.reserve(static_cast<std::size_t>(m + n - 1));
  {
    Eigen::VectorXd s = supply;
    Eigen::VectorXd d = demand;
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    while (true) {
      const bool last = (i == m - 1 && j == n - 1);
      const double f = last ? std::max(0.0, std::min(s(i), d(j))) : std::min(s(i), d(j));
      cells.push_back({i, j, f});
      s(i) -= f;
      d(j) -= f;
      if (last) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (s(i) <= d(j)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> basic =
      Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, n);
  for (const auto& c : cells) basic(c.row, c.col) = 1;

  BasisTree tree(m, n);
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  const double tol = 1e-12 * (1.0 + cost.cwiseAbs().maxCoeff());
  const long max_pivots = 20L * static_cast<long>(m) * static_cast<long>(n) + 1000L;
  int pivots = 0;
  for (;; ++pivots) {
    require(pivots < max_pivots, "transport_simplex: pivot limit exceeded",
            ErrorCategory::solver_divergence);
    tree.rebuild(cells);
    tree.potentials(cells, cost, u, v);

    double best = -tol;
    Eigen::Index enter_row = -1;
    Eigen::Index enter_col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (basic(i, j)) continue;
        const double reduced = cost(i, j) - u(i) - v(j);
        if (reduced < best) {
          best = reduced;
          enter_row = i;
          enter_col = j;
        }
      }
    }
    if (enter_row < 0) break;

    const auto loop = tree.path(cells, enter_row, enter_col);
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = loop.front();
    for (std::size_t k = 0; k < loop.size(); k += 2) {
      if (cells[loop[k]].flow < theta) {
        theta = cells[loop[k]].flow;
        leaving = loop[k];
      }
    }
    for (std::size_t k = 0; k < loop.size(); ++k) {
      cells[loop[k]].flow += (k % 2 == 0) ? -theta : theta;
    }
    basic(cells[leaving].row, cells[leaving].col) = 0;
    cells[leaving] = {enter_row, enter_col, theta};
    basic(enter_row, enter_col) = 1;
  }

  TransportPlan out;
  out.plan = Eigen::MatrixXd::Zero(m, n);
  for (const auto& c : cells) out.plan(c.row, c.col) += std::max(0.0, c.flow);
  out.cost = (out.plan.array() * cost.array()).sum();
  out.pivots = pivots;
  return out;
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DenseSimplex {
 public:
  DenseSimplex(Tableau t, std::vector<Eigen::Index> basis, Eigen::Index n_allowed)
      : t_(std::move(t)), basis_(std::move(basis)), n_allowed_(n_allowed) {}

  // Minimizes cost^T x over the current tableau; cost covers all columns.
  void optimize(const Eigen::VectorXd& cost, int& pivots) {
    const Eigen::Index rows = t_.rows();
    const Eigen::Index rhs = t_.cols() - 1;
    const double tol = 1e-10 * (1.0 + cost.cwiseAbs().maxCoeff());
    int degenerate_streak = 0;
    for (;;) {
      // Reduced costs r_j = c_j - c_B^T T_j.
      Eigen::RowVectorXd reduced = cost.head(n_allowed_).transpose();
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double cb = cost(basis_[static_cast<std::size_t>(r)]);
        if (cb != 0.0) reduced -= cb * t_.row(r).head(n_allowed_);
      }
      const bool bland = degenerate_streak > 50;
      Eigen::Index enter = -1;
      double best = -tol;
      for (Eigen::Index j = 0; j < n_allowed_; ++j) {
        if (reduced(j) < best) {
          enter = j;
          if (bland) break;
          best = reduced(j);
        }
      }
      if (enter < 0) return;

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double a = t_(r, enter);
        if (a <= kPivotTol) continue;
        const double q = t_(r, rhs) / a;
        if (leave < 0 || q < ratio - 1e-14) {
          ratio = q;
          leave = r;
        } else if (q <= ratio + 1e-14 &&
                   basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)]) {
          ratio = std::min(ratio, q);
          leave = r;
        }
      }
      require(leave >= 0, "solve_lp: problem is unbounded", ErrorCategory::solver_divergence);
      degenerate_streak = ratio <= 1e-14 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      ++pivots;
      require(pivots < kMaxPivots, "solve_lp: pivot limit exceeded", ErrorCategory::solver_divergence);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index r = 0; r < t_.rows(); ++r) {
      if (r == row) continue;
      const double f = t_(r, col);
      if (f != 0.0) t_.row(r) -= f * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  void drop_row(Eigen::Index row) {
    const Eigen::Index last = t_.rows() - 1;
    if (row != last) {
      t_.row(row) = t_.row(last);
      basis_[static_cast<std::size_t>(row)] = basis_[static_cast<std::size_t>(last)];
    }
    t_.conservativeResize(last, Eigen::NoChange);
    basis_.pop_back();
  }

  Tableau& tableau() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  void set_allowed(Eigen::Index n) { n_allowed_ = n; }

  static constexpr double kPivotTol = 1e-11;
  static constexpr int kMaxPivots = 1000000;

 private:
  Tableau t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index n_allowed_;
};

}  // namespace

LinearProgramSolution solve_lp(const LinearProgram& lp) {
  const Eigen::Index m = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  require(lp.b.size() == m && lp.c.size() == n, "solve_lp: inconsistent shapes");
  require(n >= 1, "solve_lp: no variables");

  Tableau t = Tableau::Zero(m, n + m + 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double sign = lp.b(r) < 0.0 ? -1.0 : 1.0;
    t.row(r).head(n) = sign * lp.A.row(r);
    t(r, n + r) = 1.0;
    t(r, n + m) = sign * lp.b(r);
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = n + r;

  int pivots = 0;
  DenseSimplex simplex(std::move(t), std::move(basis), n + m);

  // Phase one: minimize the sum of artificials.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  simplex.optimize(phase1, pivots);
  {
    auto& tab = simplex.tableau();
    double infeasibility = 0.0;
    for (Eigen::Index r = 0; r < tab.rows(); ++r)
      if (simplex.basis()[static_cast<std::size_t>(r)] >= n) infeasibility += tab(r, tab.cols() - 1);
    require(infeasibility <= 1e-9 * (1.0 + lp.b.cwiseAbs().sum()), "solve_lp: problem is infeasible",
            ErrorCategory::precondition);
  }

  // Pivot remaining artificials out of the basis; rows where that is
  // impossible are linear combinations of the others.
  for (Eigen::Index r = simplex.tableau().rows() - 1; r >= 0; --r) {
    if (simplex.basis()[static_cast<std::size_t>(r)] < n) continue;
    auto& tab = simplex.tableau();
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab(r, j)) > DenseSimplex::kPivotTol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      simplex.pivot(r, col);
      ++pivots;
    } else {
      simplex.drop_row(r);
    }
  }

  // Phase two on the original columns only.
  simplex.set_allowed(n);
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = lp.c;
  simplex.optimize(phase2, pivots);

  LinearProgramSolution out;
  out.x = Eigen::VectorXd::Zero(n);
  const auto& tab = simplex.tableau();
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    const Eigen::Index j = simplex.basis()[static_cast<std::size_t>(r)];
    if (j < n) out.x(j) = std::max(0.0, tab(r, tab.cols() - 1));
  }
  out.objective = lp.c.dot(out.x);
  out.pivots = pivots;
  return out;
}

}  // namespace wasscurve
