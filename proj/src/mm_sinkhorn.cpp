#include "wasscurve/mm_sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wasscurve/log.hpp"
#include "wasscurve/parallel.hpp"

namespace wasscurve {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPotentialLo = 1e-150;
constexpr double kPotentialHi = 1e150;

// out = K a, row blocks in parallel.
void kernel_times(const Eigen::MatrixXd& K, const Eigen::VectorXd& a, Eigen::VectorXd& out,
                  int threads) {
  out.resize(K.rows());
  parallel_for(K.rows(), threads, [&](Eigen::Index b, Eigen::Index e) {
    out.segment(b, e - b).noalias() = K.middleRows(b, e - b) * a;
  });
}

// out = K^T w, column blocks in parallel.
void kernel_transpose_times(const Eigen::MatrixXd& K, const Eigen::VectorXd& w,
                            Eigen::VectorXd& out, int threads) {
  out.resize(K.cols());
  parallel_for(K.cols(), threads, [&](Eigen::Index b, Eigen::Index e) {
    out.segment(b, e - b).noalias() = K.middleCols(b, e - b).transpose() * w;
  });
}

// ls(p) = log sum_y exp(L(p, y) + f(y)).
Eigen::VectorXd log_row_sums(const Eigen::MatrixXd& L, const Eigen::VectorXd& f) {
  const Eigen::Index P = L.rows();
  Eigen::VectorXd mx = Eigen::VectorXd::Constant(P, kNegInf);
  for (Eigen::Index y = 0; y < L.cols(); ++y) {
    if (f(y) == kNegInf) continue;
    mx = mx.cwiseMax(L.col(y).array().matrix() + Eigen::VectorXd::Constant(P, f(y)));
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(P);
  for (Eigen::Index y = 0; y < L.cols(); ++y) {
    if (f(y) == kNegInf) continue;
    acc.array() += ((L.col(y).array() + f(y)) - mx.array()).exp();
  }
  Eigen::VectorXd out(P);
  for (Eigen::Index p = 0; p < P; ++p) out(p) = mx(p) == kNegInf ? kNegInf : mx(p) + std::log(acc(p));
  return out;
}

// g(y) = log sum_p exp(W(p) + L(p, y)).
Eigen::VectorXd log_col_sums(const Eigen::MatrixXd& L, const Eigen::VectorXd& W, int threads) {
  Eigen::VectorXd out(L.cols());
  parallel_for(L.cols(), threads, [&](Eigen::Index b, Eigen::Index e) {
    for (Eigen::Index y = b; y < e; ++y) {
      const double mx = (L.col(y) + W).maxCoeff();
      if (mx == kNegInf) {
        out(y) = kNegInf;
        continue;
      }
      out(y) = mx + std::log(((L.col(y) + W).array() - mx).exp().sum());
    }
  });
  return out;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (mx == kNegInf) return kNegInf;
  return mx + std::log((v.array() - mx).exp().sum());
}

Eigen::VectorXd safe_log(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return x > 0.0 ? std::log(x) : kNegInf; });
}

// Products (or sums, in the log domain) of all factors except one, via
// prefix/suffix accumulation.
std::vector<Eigen::VectorXd> leave_one_out(const std::vector<Eigen::VectorXd>& s, bool log_domain) {
  const std::size_t N = s.size();
  const Eigen::Index P = N ? s.front().size() : 0;
  const double unit = log_domain ? 0.0 : 1.0;
  std::vector<Eigen::VectorXd> suffix(N + 1, Eigen::VectorXd::Constant(P, unit));
  for (std::size_t i = N; i-- > 0;) {
    suffix[i] = log_domain ? Eigen::VectorXd(suffix[i + 1] + s[i])
                           : Eigen::VectorXd(suffix[i + 1].cwiseProduct(s[i]));
  }
  std::vector<Eigen::VectorXd> out(N);
  Eigen::VectorXd prefix = Eigen::VectorXd::Constant(P, unit);
  for (std::size_t j = 0; j < N; ++j) {
    out[j] = log_domain ? Eigen::VectorXd(prefix + suffix[j + 1])
                        : Eigen::VectorXd(prefix.cwiseProduct(suffix[j + 1]));
    if (log_domain) {
      prefix += s[j];
    } else {
      prefix = prefix.cwiseProduct(s[j]);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> all_log_kernels(const CostKernelSet& k) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(k.snapshots());
  for (std::size_t i = 0; i < k.snapshots(); ++i) out.push_back(k.log_kernel(i));
  return out;
}

// s_i = K_i a_i (or its log) for every snapshot.
std::vector<Eigen::VectorXd> factor_sums(const FactoredCoupling& st,
                                         const std::vector<Eigen::MatrixXd>* log_kernels) {
  const auto& K = *st.kernels;
  std::vector<Eigen::VectorXd> s(K.snapshots());
  for (std::size_t i = 0; i < K.snapshots(); ++i) {
    if (st.log_domain) {
      s[i] = log_row_sums((*log_kernels)[i], st.potentials[i]);
    } else {
      kernel_times(K.kernel(i), st.potentials[i], s[i], st.threads);
    }
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// ParameterSpace / CostModel / kernels

ParameterSpace::ParameterSpace(std::vector<GridPtr> grids) : grids_(std::move(grids)) {
  require(!grids_.empty(), "ParameterSpace: no parameter grids");
  for (const auto& g : grids_) {
    require(g != nullptr, "ParameterSpace: null grid");
    require(g->dim() == grids_.front()->dim(), "ParameterSpace: grids differ in dimension");
  }
  strides_.assign(grids_.size(), 1);
  size_ = 1;
  for (std::size_t k = grids_.size(); k-- > 0;) {
    strides_[k] = size_;
    size_ *= grids_[k]->size();
  }
}

std::vector<Eigen::Index> ParameterSpace::decode(Eigen::Index flat) const {
  std::vector<Eigen::Index> idx(grids_.size());
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    idx[k] = flat / strides_[k];
    flat %= strides_[k];
  }
  return idx;
}

Eigen::Index ParameterSpace::encode(const std::vector<Eigen::Index>& indices) const {
  require(indices.size() == grids_.size(), "ParameterSpace::encode: wrong slot count");
  Eigen::Index flat = 0;
  for (std::size_t k = 0; k < grids_.size(); ++k) flat += indices[k] * strides_[k];
  return flat;
}

Eigen::MatrixXd ParameterSpace::parameters(Eigen::Index flat) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grids_.size()), dim());
  const auto idx = decode(flat);
  for (std::size_t k = 0; k < grids_.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = grids_[k]->point(idx[k]);
  return out;
}

CostModel::CostModel(ParameterSpace space, Eigen::Index support_size, Eigen::VectorXd lambdas,
                     RowFn row)
    : space_(std::move(space)), support_size_(support_size), lambdas_(std::move(lambdas)),
      row_(std::move(row)) {
  require(space_.size() >= 1, "CostModel: empty parameter space");
  require(support_size_ >= 1, "CostModel: empty support");
  require(lambdas_.size() >= 1, "CostModel: no snapshots");
  require(lambdas_.minCoeff() > 0.0, "CostModel: lambda must be positive");
  require(static_cast<bool>(row_), "CostModel: missing cost generator");
}

Eigen::MatrixXd CostModel::cost_table(std::size_t i) const {
  Eigen::MatrixXd table(params_size(), support_size_);
  Eigen::VectorXd row(support_size_);
  for (Eigen::Index p = 0; p < params_size(); ++p) {
    row_(i, p, row);
    table.row(p) = row.transpose();
  }
  return table;
}

double CostModel::cost_scale() const {
  double scale = 0.0;
  Eigen::VectorXd row(support_size_);
  for (std::size_t i = 0; i < snapshots(); ++i) {
    double mx = 0.0;
    for (Eigen::Index p = 0; p < params_size(); ++p) {
      row_(i, p, row);
      mx = std::max(mx, row.maxCoeff());
    }
    scale += lambdas_(static_cast<Eigen::Index>(i)) * mx;
  }
  return scale;
}

CostModel curve_cost_model(const SnapshotDataset& dataset, const CurveClass& curve,
                           const std::vector<GridPtr>& grids) {
  require(static_cast<int>(grids.size()) == curve.parameter_count(),
          "curve_cost_model: one grid per curve parameter required");
  for (const auto& g : grids) {
    require(g != nullptr, "curve_cost_model: null grid");
    require(g->dim() == dataset.dim(), "curve_cost_model: grid dimension differs from data");
  }
  ParameterSpace space(grids);
  const std::size_t N = dataset.size();
  // coefficient matrix: row i holds c_a(t_i)
  Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(N), curve.parameter_count());
  for (std::size_t i = 0; i < N; ++i)
    coeffs.row(static_cast<Eigen::Index>(i)) = curve.coefficients(dataset[i].time).transpose();
  const GridPtr support = dataset.grid_ptr();

  auto row = [space, coeffs, support](std::size_t i, Eigen::Index p, Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::MatrixXd params = space.parameters(p);
    const Eigen::RowVectorXd phi = coeffs.row(static_cast<Eigen::Index>(i)) * params;
    out = (support->points().rowwise() - phi).rowwise().squaredNorm();
  };
  return CostModel(std::move(space), support->size(), dataset.lambdas(), std::move(row));
}

CostKernelSet::CostKernelSet(CostModel model, double epsilon)
    : model_(std::move(model)), epsilon_(epsilon) {
  require(epsilon_ > 0.0 && std::isfinite(epsilon_), "build_kernels: epsilon must be positive");
  const std::size_t N = model_.snapshots();
  const double bytes = 8.0 * static_cast<double>(N) * static_cast<double>(model_.params_size()) *
                       static_cast<double>(model_.support_size());
  require(bytes <= 3.0e9, "build_kernels: kernels would need more than 3 GB; use coarser grids");
  kernels_.resize(N);
  shifts_.resize(N);
  Eigen::VectorXd row(model_.support_size());
  for (std::size_t i = 0; i < N; ++i) {
    const double lambda = model_.lambdas()(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd& K = kernels_[i];
    K.resize(model_.params_size(), model_.support_size());
    for (Eigen::Index p = 0; p < model_.params_size(); ++p) {
      model_.cost_row(i, p, row);
      K.row(p) = (lambda * row).transpose();
    }
    require(K.allFinite(), "build_kernels: non-finite cost");
    const double lo = K.minCoeff();
    shifts_[i] = lo / epsilon_;
    K = (-(K.array() - lo) / epsilon_).exp().matrix();
  }
}

Eigen::MatrixXd CostKernelSet::log_kernel(std::size_t i) const {
  const double lambda = model_.lambdas()(static_cast<Eigen::Index>(i));
  Eigen::MatrixXd table = model_.cost_table(i);
  return ((-lambda / epsilon_) * table.array() + shifts_[i]).matrix();
}

std::shared_ptr<const CostKernelSet> build_kernels(const SnapshotDataset& dataset,
                                                   const CurveClass& curve,
                                                   const std::vector<GridPtr>& grids,
                                                   double epsilon) {
  return std::make_shared<const CostKernelSet>(curve_cost_model(dataset, curve, grids), epsilon);
}

FactoredCoupling FactoredCoupling::initial(std::shared_ptr<const CostKernelSet> kernels) {
  require(kernels != nullptr, "FactoredCoupling: null kernels");
  FactoredCoupling st;
  st.potentials.assign(kernels->snapshots(), Eigen::VectorXd::Ones(kernels->support_size()));
  st.kernels = std::move(kernels);
  return st;
}

// ---------------------------------------------------------------------------
// ParamCoupling

Eigen::VectorXd ParamCoupling::slot_marginal(std::size_t slot) const {
  require(slot < space.slots(), "ParamCoupling::slot_marginal: slot out of range");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.grid(slot).size());
  for (Eigen::Index p = 0; p < weights.size(); ++p) out(space.decode(p)[slot]) += weights(p);
  return out;
}

Eigen::MatrixXd ParamCoupling::pair_marginal(std::size_t a, std::size_t b) const {
  require(a < space.slots() && b < space.slots(), "ParamCoupling::pair_marginal: slot out of range");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(space.grid(a).size(), space.grid(b).size());
  for (Eigen::Index p = 0; p < weights.size(); ++p) {
    const auto idx = space.decode(p);
    out(idx[a], idx[b]) += weights(p);
  }
  return out;
}

Eigen::Index ParamCoupling::mode() const {
  Eigen::Index best = 0;
  weights.maxCoeff(&best);
  return best;
}

// ---------------------------------------------------------------------------
// Sinkhorn

Eigen::VectorXd project_marginal(const FactoredCoupling& state, std::size_t j) {
  require(state.kernels != nullptr, "project_marginal: state has no kernels");
  const auto& K = *state.kernels;
  require(j < K.snapshots(), "project_marginal: snapshot index out of range");
  require(state.potentials.size() == K.snapshots(), "project_marginal: malformed state");

  std::vector<Eigen::MatrixXd> logk;
  if (state.log_domain) logk = all_log_kernels(K);
  const auto s = factor_sums(state, &logk);
  const auto others = leave_one_out(s, state.log_domain);
  if (state.log_domain) {
    const Eigen::VectorXd g = log_col_sums(logk[j], others[j], state.threads);
    return (g + state.potentials[j]).array().exp().matrix();
  }
  Eigen::VectorXd q;
  kernel_transpose_times(K.kernel(j), others[j], q, state.threads);
  return q.cwiseProduct(state.potentials[j]);
}

namespace {

class SinkhornRunner {
 public:
  SinkhornRunner(FactoredCoupling& st, const std::vector<Eigen::VectorXd>& targets,
                 const SinkhornOptions& opt)
      : st_(st), targets_(targets), opt_(opt), K_(*st.kernels) {
    log_targets_.reserve(targets_.size());
    for (const auto& p : targets_) log_targets_.push_back(safe_log(p));
  }

  void run() {
    if (opt_.force_log_domain) switch_to_log();
    s_ = factor_sums(st_, &logk_);
    for (int it = 0; it < opt_.max_iter; ++it) {
      if (!st_.log_domain) {
        if (!exp_sweep()) {
          log_debug("sinkhorn: potentials left the safe range, switching to log domain");
          switch_to_log();
          s_ = factor_sums(st_, &logk_);
          log_sweep();
        }
      } else {
        log_sweep();
      }
      st_.iterations = it + 1;
      st_.marginal_residual = residual();
      st_.residual_history.push_back(st_.marginal_residual);
      if (!std::isfinite(st_.marginal_residual)) {
        throw Error(ErrorCategory::solver_divergence,
                    "sinkhorn_solve: non-finite marginal residual; increase epsilon");
      }
      if (st_.marginal_residual <= opt_.tol) {
        st_.converged = true;
        return;
      }
    }
    std::ostringstream msg;
    msg << "sinkhorn_solve: not converged after " << opt_.max_iter << " sweeps (residual "
        << st_.marginal_residual << ")";
    log_warn(msg.str());
  }

 private:
  // Returns false (leaving a consistent state) when the exponential domain
  // is no longer numerically safe.
  bool exp_sweep() {
    const std::size_t N = K_.snapshots();
    std::vector<Eigen::VectorXd> suffix(N + 1, Eigen::VectorXd::Ones(K_.params_size()));
    for (std::size_t i = N; i-- > 0;) suffix[i] = suffix[i + 1].cwiseProduct(s_[i]);
    Eigen::VectorXd prefix = Eigen::VectorXd::Ones(K_.params_size());
    Eigen::VectorXd q;
    for (std::size_t j = 0; j < N; ++j) {
      const Eigen::VectorXd w = prefix.cwiseProduct(suffix[j + 1]);
      kernel_transpose_times(K_.kernel(j), w, q, st_.threads);
      const Eigen::VectorXd& p = targets_[j];
      Eigen::VectorXd a(p.size());
      for (Eigen::Index y = 0; y < p.size(); ++y) {
        if (p(y) <= 0.0) {
          a(y) = 0.0;
          continue;
        }
        if (!(q(y) > 0.0) || !std::isfinite(q(y))) return false;
        a(y) = p(y) / q(y);
        if (!(a(y) >= kPotentialLo && a(y) <= kPotentialHi)) return false;
      }
      Eigen::VectorXd sj;
      kernel_times(K_.kernel(j), a, sj, st_.threads);
      if (!sj.allFinite()) return false;
      st_.potentials[j] = std::move(a);
      s_[j] = std::move(sj);
      prefix = prefix.cwiseProduct(s_[j]);
    }
    return true;
  }

  void log_sweep() {
    const std::size_t N = K_.snapshots();
    std::vector<Eigen::VectorXd> suffix(N + 1, Eigen::VectorXd::Zero(K_.params_size()));
    for (std::size_t i = N; i-- > 0;) suffix[i] = suffix[i + 1] + s_[i];
    Eigen::VectorXd prefix = Eigen::VectorXd::Zero(K_.params_size());
    for (std::size_t j = 0; j < N; ++j) {
      const Eigen::VectorXd W = prefix + suffix[j + 1];
      const Eigen::VectorXd g = log_col_sums(logk_[j], W, st_.threads);
      const Eigen::VectorXd& lp = log_targets_[j];
      Eigen::VectorXd f(lp.size());
      for (Eigen::Index y = 0; y < lp.size(); ++y) {
        if (lp(y) == kNegInf) {
          f(y) = kNegInf;
          continue;
        }
        if (!std::isfinite(g(y))) {
          throw Error(ErrorCategory::solver_divergence,
                      "sinkhorn_solve: target atom receives zero projected mass (epsilon too small "
                      "for the cost scale, or the kernel is disconnected)");
        }
        f(y) = lp(y) - g(y);
      }
      st_.potentials[j] = std::move(f);
      s_[j] = log_row_sums(logk_[j], st_.potentials[j]);
      prefix += s_[j];
    }
  }

  double residual() const {
    const std::size_t N = K_.snapshots();
    const auto others = leave_one_out(s_, st_.log_domain);
    double worst = 0.0;
    Eigen::VectorXd q;
    for (std::size_t j = 0; j < N; ++j) {
      Eigen::VectorXd m;
      if (st_.log_domain) {
        m = (log_col_sums(logk_[j], others[j], st_.threads) + st_.potentials[j]).array().exp().matrix();
      } else {
        kernel_transpose_times(K_.kernel(j), others[j], q, st_.threads);
        m = q.cwiseProduct(st_.potentials[j]);
      }
      worst = std::max(worst, (m - targets_[j]).lpNorm<1>());
    }
    return worst;
  }

  void switch_to_log() {
    if (st_.log_domain) return;
    for (auto& a : st_.potentials) a = safe_log(a);
    st_.log_domain = true;
    logk_ = all_log_kernels(K_);
  }

  FactoredCoupling& st_;
  const std::vector<Eigen::VectorXd>& targets_;
  std::vector<Eigen::VectorXd> log_targets_;
  const SinkhornOptions& opt_;
  const CostKernelSet& K_;
  std::vector<Eigen::MatrixXd> logk_;
  std::vector<Eigen::VectorXd> s_;
};

}  // namespace

FactoredCoupling sinkhorn_solve(std::shared_ptr<const CostKernelSet> kernels,
                                const std::vector<Eigen::VectorXd>& targets,
                                const SinkhornOptions& options) {
  require(kernels != nullptr, "sinkhorn_solve: null kernels");
  require(options.tol > 0.0, "sinkhorn_solve: tol must be positive");
  require(options.max_iter >= 1, "sinkhorn_solve: max_iter must be at least 1");
  require(targets.size() == kernels->snapshots(), "sinkhorn_solve: one target per snapshot required");
  for (const auto& p : targets) {
    require(p.size() == kernels->support_size(), "sinkhorn_solve: target size differs from support");
    require(p.allFinite() && p.minCoeff() >= 0.0, "sinkhorn_solve: target has negative weight");
    require(std::abs(p.sum() - 1.0) <= 1e-9, "sinkhorn_solve: target is not a distribution");
  }
  FactoredCoupling st = FactoredCoupling::initial(std::move(kernels));
  st.threads = std::max(1, options.threads);
  SinkhornRunner(st, targets, options).run();
  return st;
}

FactoredCoupling sinkhorn_solve(std::shared_ptr<const CostKernelSet> kernels,
                                const SnapshotDataset& dataset, const SinkhornOptions& options) {
  std::vector<Eigen::VectorXd> targets;
  targets.reserve(dataset.size());
  for (const auto& s : dataset.snapshots()) targets.push_back(s.measure.weights());
  return sinkhorn_solve(std::move(kernels), targets, options);
}

ParamCoupling extract_param_coupling(const FactoredCoupling& state) {
  require(state.kernels != nullptr, "extract_param_coupling: state has no kernels");
  if (!state.converged) log_warn("extract_param_coupling: state is not converged");
  std::vector<Eigen::MatrixXd> logk;
  if (state.log_domain) logk = all_log_kernels(*state.kernels);
  const auto s = factor_sums(state, &logk);
  Eigen::VectorXd w;
  if (state.log_domain) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(state.kernels->params_size());
    for (const auto& v : s) total += v;
    const double mx = total.maxCoeff();
    require(std::isfinite(mx), "extract_param_coupling: empty coupling", ErrorCategory::solver_divergence);
    w = (total.array() - mx).exp().matrix();
  } else {
    w = Eigen::VectorXd::Ones(state.kernels->params_size());
    for (const auto& v : s) w = w.cwiseProduct(v);
  }
  const double mass = w.sum();
  require(mass > 0.0 && std::isfinite(mass), "extract_param_coupling: empty coupling",
          ErrorCategory::solver_divergence);
  return {state.kernels->space(), w / mass};
}

double transport_objective(const FactoredCoupling& state) {
  require(state.kernels != nullptr, "transport_objective: state has no kernels");
  const auto& K = *state.kernels;
  const auto& model = K.model();
  std::vector<Eigen::MatrixXd> logk;
  if (state.log_domain) logk = all_log_kernels(K);
  const auto s = factor_sums(state, &logk);
  const auto others = leave_one_out(s, state.log_domain);

  double log_mass = 0.0;
  double mass = 0.0;
  if (state.log_domain) {
    log_mass = log_sum_exp(others[0] + s[0]);
  } else {
    mass = others[0].dot(s[0]);
  }
  require(state.log_domain ? std::isfinite(log_mass) : mass > 0.0,
          "transport_objective: empty coupling", ErrorCategory::solver_divergence);

  double total = 0.0;
  Eigen::VectorXd row(K.support_size());
  for (std::size_t i = 0; i < K.snapshots(); ++i) {
    const double lambda = model.lambdas()(static_cast<Eigen::Index>(i));
    double acc = 0.0;
    for (Eigen::Index p = 0; p < K.params_size(); ++p) {
      if (state.log_domain) {
        if (others[i](p) == kNegInf) continue;
        model.cost_row(i, p, row);
        const Eigen::ArrayXd lw =
            logk[i].row(p).transpose().array() + state.potentials[i].array() + (others[i](p) - log_mass);
        acc += (lw.exp() * row.array()).sum();
      } else {
        if (others[i](p) == 0.0) continue;
        model.cost_row(i, p, row);
        const double inner = (K.kernel(i).row(p).transpose().array() *
                              state.potentials[i].array() * row.array()).sum();
        acc += others[i](p) * inner;
      }
    }
    total += lambda * (state.log_domain ? acc : acc / mass);
  }
  return total;
}

MultiMarginalLpSolution solve_multimarginal_lp(const CostModel& model,
                                               const std::vector<Eigen::VectorXd>& targets) {
  const std::size_t N = model.snapshots();
  require(targets.size() == N, "solve_multimarginal_lp: one target per snapshot required");
  const Eigen::Index P = model.params_size();

  std::vector<std::vector<Eigen::Index>> support(N);
  std::vector<Eigen::MatrixXd> tables(N);
  Eigen::Index tuples = 1;
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < N; ++i) {
    require(targets[i].size() == model.support_size(), "solve_multimarginal_lp: target size mismatch");
    for (Eigen::Index y = 0; y < targets[i].size(); ++y)
      if (targets[i](y) > 0.0) support[i].push_back(y);
    require(!support[i].empty(), "solve_multimarginal_lp: empty target");
    const Eigen::MatrixXd full = model.cost_table(i);
    tables[i].resize(P, static_cast<Eigen::Index>(support[i].size()));
    for (std::size_t k = 0; k < support[i].size(); ++k)
      tables[i].col(static_cast<Eigen::Index>(k)) = full.col(support[i][k]);
    tuples *= static_cast<Eigen::Index>(support[i].size());
    rows += static_cast<Eigen::Index>(support[i].size());
  }
  const Eigen::Index vars = P * tuples;
  require(vars <= 400000 && vars * rows <= 40000000,
          "solve_multimarginal_lp: instance too large for the dense exact solver");

  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(rows, vars);
  lp.b.resize(rows);
  lp.c.resize(vars);
  std::vector<Eigen::Index> row_offset(N, 0);
  for (std::size_t i = 0, off = 0; i < N; ++i) {
    row_offset[i] = static_cast<Eigen::Index>(off);
    for (std::size_t k = 0; k < support[i].size(); ++k)
      lp.b(static_cast<Eigen::Index>(off + k)) = targets[i](support[i][k]);
    off += support[i].size();
  }
  std::vector<Eigen::Index> k(N, 0);
  for (Eigen::Index p = 0; p < P; ++p) {
    for (Eigen::Index t = 0; t < tuples; ++t) {
      Eigen::Index rem = t;
      for (std::size_t i = N; i-- > 0;) {
        const auto n = static_cast<Eigen::Index>(support[i].size());
        k[i] = rem % n;
        rem /= n;
      }
      const Eigen::Index v = p * tuples + t;
      double cost = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        cost += model.lambdas()(static_cast<Eigen::Index>(i)) * tables[i](p, k[i]);
        lp.A(row_offset[i] + k[i], v) = 1.0;
      }
      lp.c(v) = cost;
    }
  }
  const auto sol = solve_lp(lp);
  MultiMarginalLpSolution out;
  out.objective = sol.objective;
  out.coupling.space = model.space();
  out.coupling.weights = Eigen::VectorXd::Zero(P);
  for (Eigen::Index p = 0; p < P; ++p) out.coupling.weights(p) = sol.x.segment(p * tuples, tuples).sum();
  return out;
}

// ---------------------------------------------------------------------------
// Two-marginal transport

Eigen::MatrixXd squared_distance_matrix(const SupportGrid& a, const SupportGrid& b) {
  require(a.dim() == b.dim(), "squared_distance_matrix: dimension mismatch");
  Eigen::MatrixXd out(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j)
    out.col(j) = (a.points().rowwise() - b.point(j)).rowwise().squaredNorm();
  return out;
}

namespace {

struct Restricted {
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;
  Eigen::MatrixXd cost;
};

Restricted restrict_to_support(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(mu.grid().dim() == nu.grid().dim(), "two_marginal_w2: dimension mismatch");
  require(std::abs(mu.weights().sum() - nu.weights().sum()) <= 1e-9, "two_marginal_w2: mass mismatch");
  Restricted r;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu.weights()(i) > 0.0) r.rows.push_back(i);
  for (Eigen::Index j = 0; j < nu.size(); ++j)
    if (nu.weights()(j) > 0.0) r.cols.push_back(j);
  const auto m = static_cast<Eigen::Index>(r.rows.size());
  const auto n = static_cast<Eigen::Index>(r.cols.size());
  r.mu.resize(m);
  r.nu.resize(n);
  r.cost.resize(m, n);
  for (Eigen::Index a = 0; a < m; ++a) r.mu(a) = mu.weights()(r.rows[static_cast<std::size_t>(a)]);
  for (Eigen::Index b = 0; b < n; ++b) r.nu(b) = nu.weights()(r.cols[static_cast<std::size_t>(b)]);
  for (Eigen::Index b = 0; b < n; ++b) {
    const auto y = nu.grid().point(r.cols[static_cast<std::size_t>(b)]);
    for (Eigen::Index a = 0; a < m; ++a)
      r.cost(a, b) = (mu.grid().point(r.rows[static_cast<std::size_t>(a)]) - y).squaredNorm();
  }
  return r;
}

Eigen::MatrixXd expand(const Restricted& r, const Eigen::MatrixXd& plan, Eigen::Index m, Eigen::Index n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, n);
  for (std::size_t a = 0; a < r.rows.size(); ++a)
    for (std::size_t b = 0; b < r.cols.size(); ++b)
      out(r.rows[a], r.cols[b]) = plan(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return out;
}

}  // namespace

TwoMarginalResult two_marginal_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double epsilon) {
  require(epsilon > 0.0, "two_marginal_w2: epsilon must be positive");
  const Restricted r = restrict_to_support(mu, nu);
  const Eigen::Index m = r.mu.size();
  const Eigen::Index n = r.nu.size();
  const Eigen::ArrayXXd scaled = -r.cost.array() / epsilon;
  const Eigen::ArrayXd log_mu = r.mu.array().log();
  const Eigen::ArrayXd log_nu = r.nu.array().log();
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(m);  // dual potentials divided by epsilon
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(n);

  auto lse_rows = [&](const Eigen::ArrayXd& gg) {
    Eigen::ArrayXd out(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const Eigen::ArrayXd v = scaled.row(a).transpose() + gg;
      const double mx = v.maxCoeff();
      out(a) = mx + std::log((v - mx).exp().sum());
    }
    return out;
  };
  auto lse_cols = [&](const Eigen::ArrayXd& ff) {
    Eigen::ArrayXd out(n);
    for (Eigen::Index b = 0; b < n; ++b) {
      const Eigen::ArrayXd v = scaled.col(b) + ff;
      const double mx = v.maxCoeff();
      out(b) = mx + std::log((v - mx).exp().sum());
    }
    return out;
  };

  TwoMarginalResult out;
  constexpr int kMaxIter = 200000;
  constexpr double kTol = 1e-10;
  for (int it = 0; it < kMaxIter; ++it) {
    f = log_mu - lse_rows(g);
    g = log_nu - lse_cols(f);
    out.iterations = it + 1;
    if (it % 10 == 9 || it == 0) {
      const Eigen::ArrayXd row_mass = (lse_rows(g) + f).exp();
      if ((row_mass - r.mu.array()).abs().sum() <= kTol) break;
    }
  }
  Eigen::MatrixXd plan(m, n);
  for (Eigen::Index b = 0; b < n; ++b) plan.col(b) = (scaled.col(b) + f + g(b)).exp().matrix();
  out.cost = (plan.array() * r.cost.array()).sum();
  out.coupling = expand(r, plan, mu.size(), nu.size());
  return out;
}

TwoMarginalResult two_marginal_w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const Restricted r = restrict_to_support(mu, nu);
  const auto plan = transport_simplex(r.mu, r.nu, r.cost);
  TwoMarginalResult out;
  out.cost = plan.cost;
  out.coupling = expand(r, plan.plan, mu.size(), nu.size());
  out.iterations = plan.pivots;
  return out;
}

}  // namespace wasscurve
