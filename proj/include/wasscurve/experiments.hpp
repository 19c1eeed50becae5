#ifndef WASSCURVE_EXPERIMENTS_HPP
#define WASSCURVE_EXPERIMENTS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wasscurve/gaussian_regression.hpp"
#include "wasscurve/gmm_regression.hpp"

namespace wasscurve {

/// Ornstein-Uhlenbeck variance 2 (1 - exp(-2 t)) started from a point mass at 0.
double ou_variance(double t);
/// n equally spaced times on [0.1, 1].
std::vector<double> ou_times(int n = 20);
/// Exact OU marginals N(0, ou_variance(t)) at ou_times(n), uniform lambda.
std::vector<GaussianSnapshot> ou_gaussians(int n = 20);
/// Seeded draws from the OU marginals, one sample matrix per time.
std::vector<Eigen::MatrixXd> ou_samples(const std::vector<double>& times, int per_time, std::uint64_t seed);

/// 1-D four-atom basis and four mixture snapshots at t = 0, 1/3, 2/3, 1.
AtomSet toy_mixture_basis();
std::vector<MixtureSnapshot> toy_mixture_snapshots();

}  // namespace wasscurve

#endif  // WASSCURVE_EXPERIMENTS_HPP
