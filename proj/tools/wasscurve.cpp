// wasscurve command-line front end.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wasscurve/curve_regression.hpp"
#include "wasscurve/experiments.hpp"
#include "wasscurve/gaussian_regression.hpp"
#include "wasscurve/gmm_regression.hpp"
#include "wasscurve/io.hpp"
#include "wasscurve/log.hpp"
#include "wasscurve/pfo.hpp"

namespace fs = std::filesystem;
using namespace wasscurve;

namespace {

enum ExitCode { kOk = 0, kIo = 2, kSchema = 3, kDivergence = 4, kPrecondition = 5, kInternal = 70 };

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::io: return kIo;
    case ErrorCategory::schema: return kSchema;
    case ErrorCategory::solver_divergence: return kDivergence;
    case ErrorCategory::precondition: return kPrecondition;
  }
  return kInternal;
}

struct Common {
  std::optional<double> epsilon;  // unset: command default
  std::optional<double> tol;
  std::optional<int> max_iter;
  int threads = 1;
  std::string lambda = "uniform";
  std::uint64_t seed = 42;
  std::string output = "wasscurve-out";
  bool timing = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--epsilon", c.epsilon, "Entropic regularization (command default if omitted)");
  app->add_option("--tol", c.tol, "Stopping tolerance (command default if omitted)");
  app->add_option("--max-iter", c.max_iter, "Iteration cap (command default if omitted)");
  app->add_option("--threads", c.threads, "Solver threads")->check(CLI::PositiveNumber);
  app->add_option("--lambda", c.lambda, "Snapshot weights: 'uniform' or a file with one weight per line");
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--output", c.output, "Output directory");
  app->add_flag("--timing", c.timing, "Record wall time in result.json (breaks byte-identical reruns)");
}

template <typename T>
T pick(const std::optional<T>& given, T fallback) {
  return given ? *given : fallback;
}

std::vector<double> lambdas_of(const Common& c) {
  if (c.lambda == "uniform") return {};
  return read_lambda_file(c.lambda);
}

Json common_json(const Common& c, double epsilon, double tol, int max_iter) {
  Json j;
  j["epsilon"] = epsilon;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["threads"] = c.threads;
  j["lambda"] = c.lambda;
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j;
}

void check_positive(double x, const char* name) {
  require(std::isfinite(x) && x > 0.0, std::string(name) + " must be positive");
}

std::string objectives_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::ostringstream out;
  out << "name,value\n";
  for (const auto& [name, v] : rows) out << name << "," << format_real(v) << "\n";
  return out.str();
}

Json objectives_json(const std::vector<std::pair<std::string, double>>& rows) {
  Json j;
  for (const auto& [name, v] : rows) j[name] = v;
  return j;
}

void write_result(const Common& c, Json result, double seconds) {
  if (c.timing) result["diagnostics"]["wall_time_s"] = seconds;
  write_file_atomic(fs::path(c.output) / "result.json", result.dump(2) + "\n");
}

std::vector<double> query_times_or(const std::string& text, const std::vector<double>& fallback) {
  return text.empty() ? fallback : parse_real_list(text);
}

// ---------------------------------------------------------------- regress

struct RegressArgs {
  Common common;
  std::string input;
  std::string curve = "linear";
  std::vector<std::string> grids;
  std::string query_times;
  Eigen::Index auto_points = 64;
  bool refine = false;
  bool exact = false;
};

Json run_regress(const RegressArgs& a) {
  const CurveClass curve{parse_curve_kind(a.curve), 1.0};
  std::vector<GridSpec> specs;
  for (const auto& g : a.grids) specs.push_back(parse_grid_spec(g));

  const RawSnapshotFile raw = read_snapshot_csv(a.input);
  const auto d = static_cast<std::size_t>(raw.dim);
  const auto k = static_cast<std::size_t>(curve.parameter_count());
  require(specs.empty() || specs.size() == d || specs.size() == d + k * d,
          "--grid: give one spec per state axis, optionally followed by one per parameter axis (" +
              std::to_string(d) + " or " + std::to_string(d + k * d) + " specs)");

  LoadOptions load;
  load.grid.assign(specs.begin(), specs.begin() + static_cast<std::ptrdiff_t>(std::min(specs.size(), d)));
  load.auto_points = a.auto_points;
  load.lambdas = lambdas_of(a.common);
  const SnapshotDataset data = to_dataset(raw, load);

  SolverConfig sc;
  sc.epsilon = pick(a.common.epsilon, sc.epsilon);
  sc.tol = pick(a.common.tol, sc.tol);
  sc.max_iter = pick(a.common.max_iter, sc.max_iter);
  sc.threads = a.common.threads;
  check_positive(sc.epsilon, "--epsilon");
  check_positive(sc.tol, "--tol");
  require(sc.max_iter >= 1, "--max-iter must be >= 1");
  for (std::size_t s = 0; s < k && specs.size() > d; ++s) {
    std::vector<GridSpec> axes(specs.begin() + static_cast<std::ptrdiff_t>(d + s * d),
                               specs.begin() + static_cast<std::ptrdiff_t>(d + (s + 1) * d));
    sc.parameter_grids.push_back(make_grid(grid_from_specs(axes)));
  }

  RegressionResult r;
  if (a.exact) {
    r = fit_exact(data, curve, sc.parameter_grids.empty() ? default_parameter_grids(data, curve) : sc.parameter_grids);
  } else {
    r = a.refine ? fit_refined(data, curve, sc) : fit(data, curve, sc);
  }
  if (!r.converged && !a.exact) log_warn("regress: Sinkhorn stopped at --max-iter before reaching --tol");

  const double horizon = data.original_horizon();
  std::vector<double> default_times;
  for (const auto& s : data.snapshots()) default_times.push_back(s.time * horizon);
  const auto qt = query_times_or(a.query_times, default_times);

  std::ostringstream marg;
  marg << "t";
  for (std::size_t c = 0; c < d; ++c) marg << ",x" << c + 1;
  marg << ",weight\n";
  Json marginals = Json::array();
  for (double t : qt) {
    const DiscreteMeasure m = marginal_at(r, t / horizon, data.grid_ptr());
    Json entry;
    entry["t"] = t;
    Json w = Json::array();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      w.push_back(m.weights()(i));
      if (m.weights()(i) <= 0.0) continue;
      marg << format_real(t);
      for (Eigen::Index c = 0; c < m.grid().dim(); ++c) marg << "," << format_real(m.grid().point(i)(c));
      marg << "," << format_real(m.weights()(i)) << "\n";
    }
    entry["weights"] = std::move(w);
    marginals.push_back(std::move(entry));
  }

  const double true_obj = objective_true(r, data, /*exact=*/true);
  const std::vector<std::pair<std::string, double>> objs = {{"transport", r.objective}, {"w2_sum", true_obj}};

  Json cfg = common_json(a.common, a.exact ? 0.0 : sc.epsilon, sc.tol, sc.max_iter);
  cfg["input"] = a.input;
  cfg["curve"] = a.curve;
  cfg["grid"] = a.grids;
  cfg["auto_points"] = a.auto_points;
  cfg["refine"] = a.refine;
  cfg["exact"] = a.exact;
  cfg["query_times"] = qt;

  Json out;
  out["command"] = "regress";
  out["config"] = std::move(cfg);
  out["objective"] = r.objective;
  out["objectives"] = objectives_json(objs);
  out["diagnostics"] = {{"iterations", r.iterations}, {"residual", r.residual}, {"converged", r.converged},
                        {"log_domain", r.log_domain}, {"epsilon", r.epsilon}, {"time_scale", horizon}};
  out["state_grid"] = matrix_json(data.grid().points());
  out["coupling"] = coupling_json(r.coupling);
  out["marginals"] = std::move(marginals);

  write_file_atomic(fs::path(a.common.output) / "marginals.csv", marg.str());
  write_file_atomic(fs::path(a.common.output) / "objectives.csv", objectives_csv(objs));
  return out;
}

// ---------------------------------------------------------------- gaussian

struct GaussianArgs {
  Common common;
  std::string input;
  std::string curve = "linear";
  std::string query_times;
  double rho = 1.0;
};

Json run_gaussian(const GaussianArgs& a) {
  const CurveClass curve{parse_curve_kind(a.curve), 1.0};
  const RawSnapshotFile raw = read_snapshot_csv(a.input);
  const auto data = to_gaussian_snapshots(raw, lambdas_of(a.common));
  double horizon = 1.0;
  if (raw.snapshots.back().t > 0.0) horizon = raw.snapshots.back().t;

  AdmmOptions opt;
  opt.tol = pick(a.common.tol, opt.tol);
  opt.max_iter = pick(a.common.max_iter, opt.max_iter);
  opt.rho = a.rho;
  check_positive(opt.tol, "--tol");
  check_positive(opt.rho, "--rho");
  require(opt.max_iter >= 1, "--max-iter must be >= 1");
  const GaussianSdpResult r = fit_gaussian_sdp(data, curve, opt);

  std::vector<std::pair<std::string, double>> objs = {{"sdp", r.objective}, {"mean_residual", r.mean_residual}};
  if (raw.dim == 1) {
    std::vector<StdDevPoint> pts;
    for (const auto& s : data) pts.push_back({s.t, s.lambda, std::sqrt(std::max(0.0, s.measure.covariance(0, 0)))});
    objs.emplace_back("geodesic_1d", gaussian_1d_parametric_oracle(pts, CurveKind::linear).residual);
  }

  std::vector<double> default_times;
  for (const auto& s : data) default_times.push_back(s.t * horizon);
  const auto qt = query_times_or(a.query_times, default_times);
  const Eigen::Index d = raw.dim;
  std::ostringstream csv;
  csv << "t";
  for (Eigen::Index i = 0; i < d; ++i) csv << ",m" << i + 1;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) csv << ",c" << i + 1 << j + 1;
  csv << "\n";
  Json curve_json = Json::array();
  for (double t : qt) {
    const Eigen::VectorXd m = r.curve.mean(t / horizon);
    const Eigen::MatrixXd c = r.curve.covariance(t / horizon);
    csv << format_real(t);
    for (Eigen::Index i = 0; i < d; ++i) csv << "," << format_real(m(i));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) csv << "," << format_real(c(i, j));
    csv << "\n";
    curve_json.push_back({{"t", t}, {"mean", std::vector<double>(m.data(), m.data() + m.size())}, {"covariance", matrix_json(c)}});
  }

  Json cfg = common_json(a.common, 0.0, opt.tol, opt.max_iter);
  cfg["input"] = a.input;
  cfg["curve"] = a.curve;
  cfg["rho"] = opt.rho;
  cfg["relaxation"] = opt.relaxation;
  cfg["adapt_every"] = opt.adapt_every;
  cfg["query_times"] = qt;

  Json out;
  out["command"] = "gaussian";
  out["config"] = std::move(cfg);
  out["objective"] = r.objective;
  out["objectives"] = objectives_json(objs);
  out["diagnostics"] = {{"iterations", r.iterations}, {"primal_residual", r.primal_residual},
                        {"dual_residual", r.dual_residual}, {"converged", r.converged}, {"time_scale", horizon}};
  out["joint_covariance"] = matrix_json(r.blocks.C);
  out["mean_coefficients"] = matrix_json(r.curve.mean_coeffs);
  out["parameter_covariance"] = matrix_json(r.curve.param_cov);
  out["curve"] = std::move(curve_json);

  write_file_atomic(fs::path(a.common.output) / "curve.csv", csv.str());
  write_file_atomic(fs::path(a.common.output) / "objectives.csv", objectives_csv(objs));
  return out;
}

// ---------------------------------------------------------------- gmm

struct GmmArgs {
  Common common;
  std::string input;
  std::string basis;
  std::string query_times;
  bool exact = false;
  Eigen::Index density_points = 200;
};

Json run_gmm(const GmmArgs& a) {
  const AtomSet atoms = read_basis_csv(a.basis);
  const auto data = read_mixture_csv(a.input, atoms.size(), lambdas_of(a.common));

  MixtureFitConfig cfg_fit;
  cfg_fit.epsilon = pick(a.common.epsilon, cfg_fit.epsilon);
  cfg_fit.tol = pick(a.common.tol, cfg_fit.tol);
  cfg_fit.max_iter = pick(a.common.max_iter, cfg_fit.max_iter);
  cfg_fit.threads = a.common.threads;
  check_positive(cfg_fit.epsilon, "--epsilon");
  check_positive(cfg_fit.tol, "--tol");
  require(cfg_fit.max_iter >= 1, "--max-iter must be >= 1");
  const MixtureFitResult r = a.exact ? fit_mixture_curve_exact(data, atoms) : fit_mixture_curve(data, atoms, cfg_fit);
  const MixtureFitResult still = fit_mixture_stationary(data, atoms);
  const std::vector<std::pair<std::string, double>> objs = {{"fit", r.objective}, {"stationary", still.objective}};

  std::vector<double> default_times;
  for (const auto& s : data) default_times.push_back(s.t);
  const auto qt = query_times_or(a.query_times, default_times);
  const bool one_d = atoms[0].dim() == 1;
  double lo = 0.0, hi = 0.0;
  if (one_d) {
    lo = atoms[0].mean(0);
    hi = lo;
    for (const auto& g : atoms.atoms()) {
      const double sd = std::sqrt(g.covariance(0, 0));
      lo = std::min(lo, g.mean(0) - 4.0 * sd);
      hi = std::max(hi, g.mean(0) + 4.0 * sd);
    }
  }
  std::ostringstream comp;
  comp << "t,sigma0,sigma1,weight,mean,variance\n";
  std::ostringstream dens;
  dens << "t,x,density\n";
  const auto K = static_cast<Eigen::Index>(atoms.size());
  for (double t : qt) {
    for (Eigen::Index s0 = 0; s0 < K; ++s0)
      for (Eigen::Index s1 = 0; s1 < K; ++s1) {
        if (r.w(s0, s1) <= kCouplingThreshold) continue;
        const GaussianMeasure g = atom_geodesic(atoms[static_cast<std::size_t>(s0)], atoms[static_cast<std::size_t>(s1)], t);
        comp << format_real(t) << "," << s0 << "," << s1 << "," << format_real(r.w(s0, s1));
        if (one_d) comp << "," << format_real(g.mean(0)) << "," << format_real(g.covariance(0, 0));
        else comp << ",,";
        comp << "\n";
      }
    if (one_d) {
      const GaussianMixture mix = mixture_marginal_at(r.w, atoms, t);
      for (Eigen::Index i = 0; i < a.density_points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(a.density_points - 1);
        dens << format_real(t) << "," << format_real(x) << "," << format_real(mix.density_1d(x)) << "\n";
      }
    }
  }

  Json cfg = common_json(a.common, a.exact ? 0.0 : cfg_fit.epsilon, cfg_fit.tol, cfg_fit.max_iter);
  cfg["input"] = a.input;
  cfg["basis"] = a.basis;
  cfg["exact"] = a.exact;
  cfg["density_points"] = a.density_points;
  cfg["query_times"] = qt;

  Json out;
  out["command"] = "gmm";
  out["config"] = std::move(cfg);
  out["objective"] = r.objective;
  out["objectives"] = objectives_json(objs);
  out["diagnostics"] = {{"iterations", r.iterations}, {"residual", r.residual}, {"converged", r.converged}};
  out["coupling"] = matrix_json(r.w);
  out["stationary_coupling"] = matrix_json(still.w);

  write_file_atomic(fs::path(a.common.output) / "components.csv", comp.str());
  if (one_d) write_file_atomic(fs::path(a.common.output) / "density.csv", dens.str());
  write_file_atomic(fs::path(a.common.output) / "objectives.csv", objectives_csv(objs));
  return out;
}

// ---------------------------------------------------------------- invariant

struct InvariantArgs {
  Common common;
  std::string input;
  double r = 3.0;
  int particles = 1000;
  int snapshots = 6;
  Eigen::Index boxes = 100;
  double lo = 0.0;
  double hi = 1.0;
};

Json run_invariant(const InvariantArgs& a) {
  const BoxPartition part(a.lo, a.hi, a.boxes);
  const SnapshotDataset data = [&] {
    require(a.common.lambda == "uniform", "invariant: snapshot weights are always uniform");
    if (!a.input.empty()) {
      LoadOptions load;
      const RawSnapshotFile raw = read_snapshot_csv(a.input);
      require(raw.dim == 1, "invariant: input must be 1-D");
      // Quantize onto the box centres.
      const double w = part.width();
      load.grid = {{part.lo() + 0.5 * w, part.hi() - 0.5 * w, part.size()}};
      require(part.size() >= 2, "invariant: need at least 2 boxes for file input");
      return to_dataset(raw, load);
    }
    return snapshots_from_map([&](double x) { return logistic_map(x, a.r); }, a.particles, a.snapshots, part,
                              a.common.seed)
        .dataset;
  }();

  PfoConfig pc;
  pc.epsilon = pick(a.common.epsilon, pc.epsilon);
  pc.tol = pick(a.common.tol, pc.tol);
  pc.max_iter = pick(a.common.max_iter, pc.max_iter);
  pc.threads = a.common.threads;
  check_positive(pc.epsilon, "--epsilon");
  check_positive(pc.tol, "--tol");
  require(pc.max_iter >= 1, "--max-iter must be >= 1");
  const TransitionMatrix T = estimate_transition(data, pc);
  const StationaryResult st = stationary_distribution(T);

  const bool arcsine = a.input.empty() && a.r == 4.0 && a.lo == 0.0 && a.hi == 1.0;
  const Eigen::VectorXd ref = arcsine ? arcsine_box_masses(part) : Eigen::VectorXd();
  std::ostringstream hist;
  hist << "box,center,mass" << (arcsine ? ",arcsine" : "") << "\n";
  for (Eigen::Index i = 0; i < part.size(); ++i) {
    hist << i << "," << format_real(part.center(i)) << "," << format_real(st.v(i));
    if (arcsine) hist << "," << format_real(ref(i));
    hist << "\n";
  }
  std::ostringstream trans;
  trans << "row,col,value\n";
  Json triplets = Json::array();
  for (Eigen::Index i = 0; i < T.Q.rows(); ++i)
    for (Eigen::Index j = 0; j < T.Q.cols(); ++j)
      if (T.Q(i, j) > kCouplingThreshold) {
        trans << i << "," << j << "," << format_real(T.Q(i, j)) << "\n";
        triplets.push_back({i, j, T.Q(i, j)});
      }

  std::vector<std::pair<std::string, double>> objs = {{"fit", T.objective}};
  if (arcsine) objs.emplace_back("l1_to_arcsine", (st.v - ref).lpNorm<1>());

  Json cfg = common_json(a.common, pc.epsilon, pc.tol, pc.max_iter);
  cfg["input"] = a.input;
  cfg["map"] = a.input.empty() ? "logistic" : "file";
  cfg["r"] = a.r;
  cfg["particles"] = a.particles;
  cfg["snapshots"] = static_cast<int>(data.size());
  cfg["boxes"] = a.boxes;
  cfg["domain"] = {a.lo, a.hi};

  Json out;
  out["command"] = "invariant";
  out["config"] = std::move(cfg);
  out["objective"] = T.objective;
  out["objectives"] = objectives_json(objs);
  out["diagnostics"] = {{"converged", T.converged},
                        {"uniform_rows", T.uniform_rows},
                        {"stationary_iterations", st.iterations},
                        {"stationary_residual", st.residual},
                        {"damped", st.damped}};
  out["stationary"] = std::vector<double>(st.v.data(), st.v.data() + st.v.size());
  out["transition"] = {{"threshold", kCouplingThreshold}, {"entries", std::move(triplets)}};

  write_file_atomic(fs::path(a.common.output) / "stationary.csv", hist.str());
  write_file_atomic(fs::path(a.common.output) / "transition.csv", trans.str());
  write_file_atomic(fs::path(a.common.output) / "objectives.csv", objectives_csv(objs));
  return out;
}

// ---------------------------------------------------------------- distance

struct DistanceArgs {
  Common common;
  std::string first;
  std::string second;
  std::string basis;
};

Json run_distance(const DistanceArgs& a) {
  std::ostringstream csv;
  csv << "t,distance\n";
  Json rows = Json::array();
  std::string kind;
  if (!a.basis.empty()) {
    kind = "mixture";
    const AtomSet atoms = read_basis_csv(a.basis);
    const auto mu = read_mixture_csv(a.first, atoms.size());
    const auto nu = read_mixture_csv(a.second, atoms.size());
    require(mu.size() == nu.size(), "distance: inputs have different numbers of timestamps");
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double dist = wm_distance(atoms.mixture(mu[i].weights), atoms.mixture(nu[i].weights)).distance;
      csv << format_real(mu[i].t) << "," << format_real(dist) << "\n";
      rows.push_back({{"t", mu[i].t}, {"distance", dist}});
    }
  } else {
    kind = "w2";
    const RawSnapshotFile p = read_snapshot_csv(a.first);
    const RawSnapshotFile q = read_snapshot_csv(a.second);
    require(p.dim == q.dim, "distance: inputs differ in dimension");
    require(p.snapshots.size() == q.snapshots.size(), "distance: inputs have different numbers of timestamps");
    for (std::size_t i = 0; i < p.snapshots.size(); ++i) {
      RawSnapshotFile one_p{p.schema, p.dim, {p.snapshots[i]}};
      RawSnapshotFile one_q{q.schema, q.dim, {q.snapshots[i]}};
      one_p.schema = one_q.schema = InputSchema::atoms;  // exact supports, no quantization
      const DiscreteMeasure mu = to_dataset(one_p)[0].measure;
      const DiscreteMeasure nu = to_dataset(one_q)[0].measure;
      const double dist = std::sqrt(std::max(0.0, two_marginal_w2_exact(mu, nu).cost));
      csv << format_real(p.snapshots[i].t) << "," << format_real(dist) << "\n";
      rows.push_back({{"t", p.snapshots[i].t}, {"distance", dist}});
    }
  }
  Json cfg = common_json(a.common, 0.0, 0.0, 0);
  cfg["first"] = a.first;
  cfg["second"] = a.second;
  cfg["basis"] = a.basis;
  cfg["metric"] = kind;

  Json out;
  out["command"] = "distance";
  out["config"] = std::move(cfg);
  out["objective"] = rows.empty() ? 0.0 : rows[0]["distance"].get<double>();
  out["distances"] = std::move(rows);
  write_file_atomic(fs::path(a.common.output) / "distance.csv", csv.str());
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  Common common;
  std::string what;
  int samples = 1000;
  int snapshots = 0;  // 0: generator default
  double r = 3.0;
  Eigen::Index boxes = 100;
};

Json run_generate(const GenerateArgs& a) {
  const fs::path dir(a.common.output);
  Json cfg;
  cfg["generator"] = a.what;
  cfg["seed"] = a.common.seed;
  cfg["output"] = a.common.output;
  Json files = Json::array();
  if (a.what == "ou") {
    const int n = a.snapshots > 0 ? a.snapshots : 20;
    const auto times = ou_times(n);
    write_file_atomic(dir / "ou.csv", samples_csv(times, ou_samples(times, a.samples, a.common.seed)));
    files.push_back("ou.csv");
    cfg["samples"] = a.samples;
    cfg["snapshots"] = n;
  } else if (a.what == "logistic") {
    const int n = a.snapshots > 0 ? a.snapshots : 6;
    const BoxPartition part(0.0, 1.0, a.boxes);
    std::mt19937_64 rng(a.common.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd x(a.samples, 1);
    for (int p = 0; p < a.samples; ++p) x(p, 0) = unif(rng);
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> blocks;
    for (int k = 0; k < n; ++k) {
      if (k > 0) x = x.unaryExpr([&](double v) { return logistic_map(v, a.r); });
      times.push_back(n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0);
      blocks.push_back(x);
    }
    write_file_atomic(dir / "logistic.csv", samples_csv(times, blocks));
    files.push_back("logistic.csv");
    cfg["samples"] = a.samples;
    cfg["snapshots"] = n;
    cfg["r"] = a.r;
  } else {
    write_file_atomic(dir / "basis.csv", basis_csv(toy_mixture_basis()));
    write_file_atomic(dir / "mixture.csv", mixture_csv(toy_mixture_snapshots()));
    files.push_back("basis.csv");
    files.push_back("mixture.csv");
  }
  Json out;
  out["command"] = "generate";
  out["config"] = std::move(cfg);
  out["files"] = std::move(files);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure-valued curve regression via multi-marginal optimal transport"};
  app.require_subcommand(1);

  RegressArgs ra;
  auto* regress = app.add_subcommand("regress", "Fit a linear or quadratic measure-valued curve to snapshots");
  regress->add_option("input", ra.input, "Samples or atoms CSV")->required()->check(CLI::ExistingFile);
  regress->add_option("--curve", ra.curve, "Curve class")->check(CLI::IsMember({"linear", "quadratic"}));
  regress->add_option("--grid", ra.grids, "lo:hi:n per state axis, then per parameter axis (repeatable)");
  regress->add_option("--query-times", ra.query_times, "Marginal times t1,t2,... (input time units)");
  regress->add_option("--auto-points", ra.auto_points, "Points per axis of the automatic sample grid")->check(CLI::Range(2, 100000));
  regress->add_flag("--refine", ra.refine, "Second pass on parameter grids centred on the first mode");
  regress->add_flag("--exact", ra.exact, "Unregularized LP (tiny instances only)");
  add_common(regress, ra.common);

  GaussianArgs ga;
  auto* gaussian = app.add_subcommand("gaussian", "Gaussian curve fit through the covariance SDP");
  gaussian->add_option("input", ga.input, "Samples or atoms CSV")->required()->check(CLI::ExistingFile);
  gaussian->add_option("--curve", ga.curve, "Curve class")->check(CLI::IsMember({"linear", "quadratic"}));
  gaussian->add_option("--query-times", ga.query_times, "Curve times t1,t2,... (input time units)");
  gaussian->add_option("--rho", ga.rho, "Initial ADMM penalty");
  add_common(gaussian, ga.common);

  GmmArgs ma;
  auto* gmm = app.add_subcommand("gmm", "Curve of Gaussian mixtures over a fixed basis");
  gmm->add_option("input", ma.input, "Mixture weights CSV t,w1..wK")->required()->check(CLI::ExistingFile);
  gmm->add_option("--basis", ma.basis, "Basis CSV m1..md,c11..cdd")->required()->check(CLI::ExistingFile);
  gmm->add_option("--query-times", ma.query_times, "Marginal times t1,t2,...");
  gmm->add_option("--density-points", ma.density_points, "Points of the 1-D density table")->check(CLI::Range(2, 1000000));
  gmm->add_flag("--exact", ma.exact, "Unregularized LP");
  add_common(gmm, ma.common);

  InvariantArgs ia;
  auto* invariant = app.add_subcommand("invariant", "Transition matrix and invariant measure from snapshots");
  invariant->add_option("--input", ia.input, "1-D samples CSV (default: simulate the logistic map)")->check(CLI::ExistingFile);
  invariant->add_option("--r", ia.r, "Logistic parameter")->check(CLI::Range(0.0, 4.0));
  invariant->add_option("--particles", ia.particles, "Simulated particles")->check(CLI::PositiveNumber);
  invariant->add_option("--snapshots", ia.snapshots, "Simulated snapshots")->check(CLI::Range(3, 100000));
  invariant->add_option("--boxes", ia.boxes, "Boxes of the partition")->check(CLI::Range(1, 100000));
  invariant->add_option("--lo", ia.lo, "Domain lower end");
  invariant->add_option("--hi", ia.hi, "Domain upper end");
  add_common(invariant, ia.common);

  DistanceArgs da;
  auto* distance = app.add_subcommand("distance", "W2 between snapshot files, or W_M between mixture files");
  distance->add_option("first", da.first, "First input")->required()->check(CLI::ExistingFile);
  distance->add_option("second", da.second, "Second input")->required()->check(CLI::ExistingFile);
  distance->add_option("--basis", da.basis, "Basis CSV; switches to mixture inputs")->check(CLI::ExistingFile);
  add_common(distance, da.common);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write the bundled experiment data");
  generate->add_option("what", gen.what, "ou | logistic | mixture-toy")->required()->check(CLI::IsMember({"ou", "logistic", "mixture-toy"}));
  generate->add_option("--samples", gen.samples, "Samples per snapshot")->check(CLI::PositiveNumber);
  generate->add_option("--snapshots", gen.snapshots, "Number of snapshots")->check(CLI::Range(2, 100000));
  generate->add_option("--r", gen.r, "Logistic parameter")->check(CLI::Range(0.0, 4.0));
  add_common(generate, gen.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    Json result;
    const Common* common = nullptr;
    if (*regress) result = run_regress(ra), common = &ra.common;
    else if (*gaussian) result = run_gaussian(ga), common = &ga.common;
    else if (*gmm) result = run_gmm(ma), common = &ma.common;
    else if (*invariant) result = run_invariant(ia), common = &ia.common;
    else if (*distance) result = run_distance(da), common = &da.common;
    else result = run_generate(gen), common = &gen.common;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_result(*common, std::move(result), seconds);
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return kInternal;
  }
}
