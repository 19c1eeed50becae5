#ifndef WASSCURVE_IO_HPP
#define WASSCURVE_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wasscurve/gaussian_regression.hpp"
#include "wasscurve/gmm_regression.hpp"
#include "wasscurve/measures.hpp"
#include "wasscurve/mm_sinkhorn.hpp"

namespace wasscurve {

using Json = nlohmann::ordered_json;

/// `lo:hi:n`, n >= 2 points on [lo, hi].
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  Eigen::Index n = 2;
};

GridSpec parse_grid_spec(const std::string& text);
SupportGrid grid_from_specs(const std::vector<GridSpec>& axes);
/// Comma separated reals, e.g. "0,0.5,1".
std::vector<double> parse_real_list(const std::string& text);

enum class InputSchema { samples, atoms };

inline const char* to_string(InputSchema s) { return s == InputSchema::samples ? "samples" : "atoms"; }

/// Rows of one timestamp: points (one per row) and their weights.
struct RawSnapshot {
  double t = 0.0;
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
};

struct RawSnapshotFile {
  InputSchema schema = InputSchema::samples;
  Eigen::Index dim = 0;
  std::vector<RawSnapshot> snapshots;  // increasing t
};

/// Samples CSV `t,x1..xd` or atoms CSV `t,weight,x1..xd`, told apart by the
/// header. Atom weights must sum to 1 per timestamp within 1e-6.
RawSnapshotFile read_snapshot_csv(const std::filesystem::path& path);

struct LoadOptions {
  /// One spec per axis. Empty: samples use `auto_points` per axis over the
  /// data range, atoms use the distinct atom locations.
  std::vector<GridSpec> grid;
  Eigen::Index auto_points = 64;
  /// Per-snapshot weights; empty means uniform. Normalized to unit sum.
  std::vector<double> lambdas;
};

/// Quantizes onto the grid and normalizes timestamps to [0, 1].
SnapshotDataset to_dataset(const RawSnapshotFile& raw, const LoadOptions& options = {});
SnapshotDataset load_snapshots(const std::filesystem::path& path, const LoadOptions& options = {});

/// Weighted mean and biased covariance per timestamp, times normalized.
std::vector<GaussianSnapshot> to_gaussian_snapshots(const RawSnapshotFile& raw,
                                                    const std::vector<double>& lambdas = {});

/// Lambda file: one positive real per line (blank lines ignored).
std::vector<double> read_lambda_file(const std::filesystem::path& path);

/// Basis CSV: header `m1..md,c11..cdd`, covariance row-major.
AtomSet read_basis_csv(const std::filesystem::path& path);
/// Mixture weights CSV: header `t,w1..wK`; times normalized to [0, 1].
std::vector<MixtureSnapshot> read_mixture_csv(const std::filesystem::path& path, std::size_t atoms,
                                              const std::vector<double>& lambdas = {});

std::string basis_csv(const AtomSet& atoms);
std::string mixture_csv(const std::vector<MixtureSnapshot>& data);
std::string samples_csv(const std::vector<double>& times, const std::vector<Eigen::MatrixXd>& samples);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

inline constexpr double kCouplingThreshold = 1e-9;

/// {"threshold", "emitted_mass", "grids", "entries": [[i_1..i_k, w], ...]}
/// keeping entries with weight > threshold.
Json coupling_json(const ParamCoupling& coupling, double threshold = kCouplingThreshold);
Json matrix_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// Shortest round-trip text for a double, as used in every CSV.
std::string format_real(double x);

}  // namespace wasscurve

#endif  // WASSCURVE_IO_HPP
