#ifndef WASSCURVE_GMM_REGRESSION_HPP
#define WASSCURVE_GMM_REGRESSION_HPP

#include <vector>

#include <Eigen/Dense>

#include "wasscurve/gaussian.hpp"
#include "wasscurve/measures.hpp"
#include "wasscurve/mm_sinkhorn.hpp"

namespace wasscurve {

/// Fixed Gaussian basis with cached pairwise W2 distances.
class AtomSet {
 public:
  explicit AtomSet(std::vector<GaussianMeasure> atoms);

  std::size_t size() const { return atoms_.size(); }
  const GaussianMeasure& operator[](std::size_t i) const { return atoms_[i]; }
  const std::vector<GaussianMeasure>& atoms() const { return atoms_; }
  const Eigen::MatrixXd& pairwise_w2() const { return pairwise_; }

  GaussianMixture mixture(const Eigen::VectorXd& weights) const { return {atoms_, weights}; }

 private:
  std::vector<GaussianMeasure> atoms_;
  Eigen::MatrixXd pairwise_;
};

/// Displacement interpolation between two atoms. Falls back to
/// ((1-t) C0^{1/2} + t C1^{1/2})^2 when C0 is singular and C0, C1 commute.
GaussianMeasure atom_geodesic(const GaussianMeasure& a, const GaussianMeasure& b, double t);

struct MixtureDistance {
  double distance = 0.0;
  Eigen::MatrixXd coupling;  // rows: mu atoms, cols: nu atoms
};

/// Discrete OT between mixture weights with ground cost W2^2 between atoms.
MixtureDistance wm_distance(const GaussianMixture& mu, const GaussianMixture& nu);

struct MixtureSnapshot {
  double t = 0.0;
  double lambda = 1.0;
  Eigen::VectorXd weights;  // over the atom set
};

struct MixtureFitConfig {
  double epsilon = 0.05;
  double tol = 1e-9;
  int max_iter = 100000;
  int threads = 1;
};

struct MixtureFitResult {
  Eigen::MatrixXd w;  // K x K, (sigma0, sigma1)
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Multi-marginal cost model over atom-index pairs (sigma0, sigma1):
/// c_i(sigma0, sigma1, nu) = W2^2(geodesic_{t_i}(sigma0, sigma1), nu).
CostModel mixture_cost_model(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms);

/// Entropic fit of a law over atom geodesics.
MixtureFitResult fit_mixture_curve(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms,
                                   const MixtureFitConfig& config = {});

/// Exact LP fit (enumerated; small K and N only).
MixtureFitResult fit_mixture_curve_exact(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms);

/// Best exact fit restricted to constant curves (diagonal w).
MixtureFitResult fit_mixture_stationary(const std::vector<MixtureSnapshot>& data, const AtomSet& atoms);

/// One-time marginal: atoms geodesic_t(sigma0, sigma1) with weights w.
GaussianMixture mixture_marginal_at(const Eigen::MatrixXd& w, const AtomSet& atoms, double t);

/// Weights of a 1-D mixture on n equal cells of [lo, hi] (cell masses from
/// the normal CDF, renormalized), supported at cell centres.
DiscreteMeasure discretize_mixture_1d(const GaussianMixture& mixture, double lo, double hi, Eigen::Index n);

}  // namespace wasscurve

#endif  // WASSCURVE_GMM_REGRESSION_HPP
