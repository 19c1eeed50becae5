#include "wasscurve/gmm_regression.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "wasscurve/exact_ot.hpp"
#include "wasscurve/log.hpp"

namespace wasscurve {

namespace {

GridPtr index_grid(std::size_t K) {
  return make_grid(SupportGrid::uniform(0.0, static_cast<double>(K) - 1.0, static_cast<Eigen::Index>(K)));
}

void check_data(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms) {
  require(!data.empty(), "fit_mixture_curve: no snapshots");
  double lambda_sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    require(s.weights.size() == static_cast<Eigen::Index>(atoms.size()),
            "fit_mixture_curve: one weight per atom required");
    require(s.weights.allFinite() && s.weights.minCoeff() >= 0.0, "fit_mixture_curve: negative weight");
    require(std::abs(s.weights.sum() - 1.0) <= 1e-9, "fit_mixture_curve: weights do not sum to 1");
    require(s.t >= 0.0 && s.t <= 1.0, "fit_mixture_curve: timestamp outside [0, 1]");
    require(s.lambda > 0.0, "fit_mixture_curve: lambda must be positive");
    if (i > 0) require(s.t > data[i - 1].t, "fit_mixture_curve: timestamps not strictly increasing");
    lambda_sum += s.lambda;
  }
  require(std::abs(lambda_sum - 1.0) <= 1e-12, "fit_mixture_curve: lambdas do not sum to 1");
}

std::vector<Eigen::VectorXd> targets_of(const std::vector<MixtureSnapshot>& data) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& s : data) out.push_back(s.weights);
  return out;
}

Eigen::MatrixXd as_square(const Eigen::VectorXd& flat, std::size_t K) {
  const auto k = static_cast<Eigen::Index>(K);
  Eigen::MatrixXd w(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) w(a, b) = flat(a * k + b);
  return w;
}

double normal_cdf(double x, double mean, double sd) {
  if (sd <= 0.0) return x >= mean ? 1.0 : 0.0;
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

}  // namespace

AtomSet::AtomSet(std::vector<GaussianMeasure> atoms) : atoms_(std::move(atoms)) {
  require(!atoms_.empty(), "AtomSet: no atoms");
  const auto K = static_cast<Eigen::Index>(atoms_.size());
  for (const auto& a : atoms_) {
    require(a.dim() == atoms_.front().dim(), "AtomSet: atoms differ in dimension");
    a.validate();
  }
  pairwise_ = Eigen::MatrixXd::Zero(K, K);
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = i + 1; j < K; ++j) {
      const double v = w2_gaussian(atoms_[static_cast<std::size_t>(i)], atoms_[static_cast<std::size_t>(j)]);
      pairwise_(i, j) = v;
      pairwise_(j, i) = v;
    }
}

GaussianMeasure atom_geodesic(const GaussianMeasure& a, const GaussianMeasure& b, double t) {
  require(t >= 0.0 && t <= 1.0, "atom_geodesic: t outside [0, 1]");
  if (t == 0.0) return a;
  const auto eig = sym_eig(a.covariance);
  const double top = eig.eigenvalues.size() ? eig.eigenvalues(0) : 0.0;
  const bool singular = !(top > 0.0 && eig.eigenvalues.minCoeff() > 1e-12 * top);
  if (!singular) return gaussian_geodesic(a, b, t);

  const Eigen::MatrixXd comm = a.covariance * b.covariance - b.covariance * a.covariance;
  const double scale = std::max(1.0, a.covariance.norm() * b.covariance.norm());
  require(comm.norm() <= 1e-10 * scale,
          "atom_geodesic: singular start covariance with non-commuting end covariance");
  const Eigen::MatrixXd root = (1.0 - t) * sqrtm_psd(a.covariance) + t * sqrtm_psd(b.covariance);
  Eigen::MatrixXd cov = root * root;
  cov = (cov + cov.transpose()) / 2.0;
  GaussianMeasure out;
  out.mean = (1.0 - t) * a.mean + t * b.mean;
  out.covariance = cov;
  return out;
}

namespace {

// Lexicographic order on (weights, means, covariances), used to solve every
// pair in one fixed orientation so the distance is exactly symmetric.
bool mixture_less(const GaussianMixture& a, const GaussianMixture& b) {
  auto flat = [](const GaussianMixture& m) {
    std::vector<double> v(m.weights.data(), m.weights.data() + m.weights.size());
    for (const auto& g : m.atoms) {
      v.insert(v.end(), g.mean.data(), g.mean.data() + g.mean.size());
      v.insert(v.end(), g.covariance.data(), g.covariance.data() + g.covariance.size());
    }
    return v;
  };
  return flat(a) < flat(b);
}

MixtureDistance wm_distance_oriented(const GaussianMixture& mu, const GaussianMixture& nu) {
  require(std::abs(mu.weights.sum() - nu.weights.sum()) <= 1e-9, "wm_distance: weight-sum mismatch");
  require(mu.atoms.front().dim() == nu.atoms.front().dim(), "wm_distance: dimension mismatch");
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < mu.weights.size(); ++i)
    if (mu.weights(i) > 0.0) rows.push_back(i);
  for (Eigen::Index j = 0; j < nu.weights.size(); ++j)
    if (nu.weights(j) > 0.0) cols.push_back(j);
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  Eigen::VectorXd a(m);
  Eigen::VectorXd b(n);
  Eigen::MatrixXd cost(m, n);
  for (Eigen::Index i = 0; i < m; ++i) a(i) = mu.weights(rows[static_cast<std::size_t>(i)]);
  for (Eigen::Index j = 0; j < n; ++j) b(j) = nu.weights(cols[static_cast<std::size_t>(j)]);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = w2_gaussian_squared(mu.atoms[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])],
                                       nu.atoms[static_cast<std::size_t>(cols[static_cast<std::size_t>(j)])]);
  const auto plan = transport_simplex(a, b, cost);
  MixtureDistance out;
  out.distance = std::sqrt(std::max(0.0, plan.cost));
  out.coupling = Eigen::MatrixXd::Zero(mu.weights.size(), nu.weights.size());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.coupling(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]) = plan.plan(i, j);
  return out;
}

}  // namespace

MixtureDistance wm_distance(const GaussianMixture& mu, const GaussianMixture& nu) {
  if (!mixture_less(nu, mu)) return wm_distance_oriented(mu, nu);
  MixtureDistance out = wm_distance_oriented(nu, mu);
  out.coupling.transposeInPlace();
  return out;
}

CostModel mixture_cost_model(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms) {
  check_data(data, atoms);
  const std::size_t K = atoms.size();
  const auto P = static_cast<Eigen::Index>(K * K);
  const auto k = static_cast<Eigen::Index>(K);
  auto tables = std::make_shared<std::vector<Eigen::MatrixXd>>(data.size(), Eigen::MatrixXd(P, k));
  for (std::size_t i = 0; i < data.size(); ++i) {
    Eigen::MatrixXd& table = (*tables)[i];
    for (Eigen::Index p = 0; p < P; ++p) {
      const auto g = atom_geodesic(atoms[static_cast<std::size_t>(p / k)],
                                   atoms[static_cast<std::size_t>(p % k)], data[i].t);
      for (Eigen::Index y = 0; y < k; ++y) table(p, y) = w2_gaussian_squared(g, atoms[static_cast<std::size_t>(y)]);
    }
  }
  Eigen::VectorXd lambdas(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) lambdas(static_cast<Eigen::Index>(i)) = data[i].lambda;
  const GridPtr idx = index_grid(K);
  auto row = [tables](std::size_t i, Eigen::Index p, Eigen::Ref<Eigen::VectorXd> out) {
    out = (*tables)[i].row(p).transpose();
  };
  return CostModel(ParameterSpace({idx, idx}), k, lambdas, row);
}

MixtureFitResult fit_mixture_curve(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms,
                                   const MixtureFitConfig& config) {
  require(data.size() >= 3, "fit_mixture_curve: at least 3 snapshots required");
  auto kernels = std::make_shared<const CostKernelSet>(mixture_cost_model(data, atoms), config.epsilon);
  SinkhornOptions opt;
  opt.tol = config.tol;
  opt.max_iter = config.max_iter;
  opt.threads = config.threads;
  const auto state = sinkhorn_solve(kernels, targets_of(data), opt);
  MixtureFitResult out;
  out.w = as_square(extract_param_coupling(state).weights, atoms.size());
  out.objective = transport_objective(state);
  out.residual = state.marginal_residual;
  out.iterations = state.iterations;
  out.converged = state.converged;
  return out;
}

MixtureFitResult fit_mixture_curve_exact(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms) {
  const auto sol = solve_multimarginal_lp(mixture_cost_model(data, atoms), targets_of(data));
  MixtureFitResult out;
  out.w = as_square(sol.coupling.weights, atoms.size());
  out.objective = sol.objective;
  out.converged = true;
  return out;
}

MixtureFitResult fit_mixture_stationary(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms) {
  check_data(data, atoms);
  const std::size_t K = atoms.size();
  const auto k = static_cast<Eigen::Index>(K);
  auto tables = std::make_shared<Eigen::MatrixXd>(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index y = 0; y < k; ++y)
      (*tables)(a, y) = w2_gaussian_squared(atoms[static_cast<std::size_t>(a)], atoms[static_cast<std::size_t>(y)]);
  Eigen::VectorXd lambdas(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) lambdas(static_cast<Eigen::Index>(i)) = data[i].lambda;
  auto row = [tables](std::size_t, Eigen::Index p, Eigen::Ref<Eigen::VectorXd> out) {
    out = tables->row(p).transpose();
  };
  const CostModel model(ParameterSpace({index_grid(K)}), k, lambdas, row);
  const auto sol = solve_multimarginal_lp(model, targets_of(data));
  MixtureFitResult out;
  out.w = sol.coupling.weights.asDiagonal();
  out.objective = sol.objective;
  out.converged = true;
  return out;
}

GaussianMixture mixture_marginal_at(const Eigen::MatrixXd& w, const AtomSet& atoms, double t) {
  const auto k = static_cast<Eigen::Index>(atoms.size());
  require(w.rows() == k && w.cols() == k, "mixture_marginal_at: coupling shape mismatch");
  require(w.minCoeff() >= 0.0 && w.sum() > 0.0, "mixture_marginal_at: invalid coupling");
  std::vector<GaussianMeasure> comps;
  std::vector<double> weights;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      if (w(a, b) <= 0.0) continue;
      comps.push_back(atom_geodesic(atoms[static_cast<std::size_t>(a)], atoms[static_cast<std::size_t>(b)], t));
      weights.push_back(w(a, b));
    }
  Eigen::VectorXd wv = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  wv /= wv.sum();
  Eigen::Index imax = 0;
  wv.maxCoeff(&imax);
  wv(imax) += 1.0 - wv.sum();
  return {std::move(comps), wv};
}

DiscreteMeasure discretize_mixture_1d(const GaussianMixture& mixture, double lo, double hi, Eigen::Index n) {
  require(mixture.atoms.front().dim() == 1, "discretize_mixture_1d: mixture is not 1-D");
  require(n >= 1 && hi > lo, "discretize_mixture_1d: bad interval");
  const double h = (hi - lo) / static_cast<double>(n);
  Eigen::MatrixXd centres(n, 1);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double a = lo + h * static_cast<double>(c);
    centres(c, 0) = a + h / 2.0;
    for (std::size_t k = 0; k < mixture.atoms.size(); ++k) {
      const double m = mixture.atoms[k].mean(0);
      const double sd = std::sqrt(std::max(0.0, mixture.atoms[k].covariance(0, 0)));
      mass(c) += mixture.weights(static_cast<Eigen::Index>(k)) * (normal_cdf(a + h, m, sd) - normal_cdf(a, m, sd));
    }
  }
  return DiscreteMeasure::normalized(make_grid(SupportGrid(centres)), mass);
}

}  // namespace wasscurve
