#include "wasscurve/experiments.hpp"

#include <cmath>
#include <random>

namespace wasscurve {

double ou_variance(double t) { return 2.0 * (1.0 - std::exp(-2.0 * t)); }

std::vector<double> ou_times(int n) {
  require(n >= 2, "ou_times: need at least two times");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(0.1 + 0.9 * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

std::vector<GaussianSnapshot> ou_gaussians(int n) {
  std::vector<GaussianSnapshot> out;
  for (double t : ou_times(n)) out.push_back({t, 1.0 / static_cast<double>(n), gaussian_1d(0.0, std::sqrt(ou_variance(t)))});
  return out;
}

std::vector<Eigen::MatrixXd> ou_samples(const std::vector<double>& times, int per_time, std::uint64_t seed) {
  require(per_time >= 1, "ou_samples: need at least one sample per time");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> out;
  for (double t : times) {
    require(t >= 0.0, "ou_samples: negative time");
    const double sd = std::sqrt(ou_variance(t));
    Eigen::MatrixXd x(per_time, 1);
    for (int p = 0; p < per_time; ++p) x(p, 0) = sd * normal(rng);
    out.push_back(std::move(x));
  }
  return out;
}

AtomSet toy_mixture_basis() {
  return AtomSet({gaussian_1d(-3.0, 0.5), gaussian_1d(-1.0, 1.0), gaussian_1d(1.0, 0.7), gaussian_1d(3.0, 0.4)});
}

std::vector<MixtureSnapshot> toy_mixture_snapshots() {
  const double lam = 0.25;
  return {
      {0.0, lam, Eigen::Vector4d(0.6, 0.25, 0.1, 0.05)},
      {1.0 / 3.0, lam, Eigen::Vector4d(0.4, 0.3, 0.2, 0.1)},
      {2.0 / 3.0, lam, Eigen::Vector4d(0.2, 0.3, 0.3, 0.2)},
      {1.0, lam, Eigen::Vector4d(0.05, 0.15, 0.3, 0.5)},
  };
}

}  // namespace wasscurve
