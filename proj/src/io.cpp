#include "wasscurve/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "wasscurve/log.hpp"

namespace wasscurve {

namespace {

Error schema_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line << ": " << what;
  return Error(ErrorCategory::schema, msg.str());
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

struct CsvLines {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvLines read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "'");
  CsvLines out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (out.header.empty()) {
      out.header = std::move(cells);
      continue;
    }
    if (cells.size() != out.header.size()) {
      std::ostringstream msg;
      msg << "expected " << out.header.size() << " fields, found " << cells.size();
      throw schema_error(path, lineno, msg.str());
    }
    out.rows.emplace_back(lineno, std::move(cells));
  }
  if (in.bad()) throw Error(ErrorCategory::io, "read error on '" + path.string() + "'");
  if (out.header.empty()) throw schema_error(path, 1, "missing header row");
  return out;
}

std::vector<double> row_reals(const std::filesystem::path& path, std::size_t lineno,
                              const std::vector<std::string>& cells) {
  std::vector<double> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!parse_real(cells[c], out[c]))
      throw schema_error(path, lineno, "field " + std::to_string(c + 1) + " is not a finite number: '" + cells[c] + "'");
  return out;
}

void expect_coordinate_columns(const std::filesystem::path& path, const std::vector<std::string>& header,
                               std::size_t first, const std::string& prefix) {
  if (header.size() <= first) throw schema_error(path, 1, "no coordinate columns");
  for (std::size_t c = first; c < header.size(); ++c) {
    const std::string want = prefix + std::to_string(c - first + 1);
    if (header[c] != want) throw schema_error(path, 1, "column " + std::to_string(c + 1) + " must be '" + want + "'");
  }
}

std::vector<double> normalized_lambdas(const std::vector<double>& given, std::size_t n) {
  if (given.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  require(given.size() == n, "lambda count " + std::to_string(given.size()) + " does not match " +
                                 std::to_string(n) + " snapshots");
  double total = 0.0;
  for (double l : given) {
    require(std::isfinite(l) && l > 0.0, "lambdas must be positive");
    total += l;
  }
  std::vector<double> out(given);
  for (double& l : out) l /= total;
  return out;
}

double horizon_of(const std::vector<double>& times) {
  const double last = times.empty() ? 0.0 : times.back();
  return last > 0.0 ? last : 1.0;
}

}  // namespace

GridSpec parse_grid_spec(const std::string& text) {
  const auto parts = split(text, ':');
  GridSpec g;
  double n = 0.0;
  if (parts.size() != 3 || !parse_real(parts[0], g.lo) || !parse_real(parts[1], g.hi) || !parse_real(parts[2], n))
    throw Error(ErrorCategory::schema, "grid spec must be lo:hi:n, got '" + text + "'");
  if (n != std::floor(n) || n < 2.0 || !(g.hi > g.lo))
    throw Error(ErrorCategory::precondition, "grid spec '" + text + "' needs hi > lo and an integer n >= 2");
  g.n = static_cast<Eigen::Index>(n);
  return g;
}

SupportGrid grid_from_specs(const std::vector<GridSpec>& axes) {
  require(!axes.empty(), "grid_from_specs: no axes");
  std::vector<Eigen::VectorXd> pts;
  for (const auto& a : axes) pts.push_back(Eigen::VectorXd::LinSpaced(a.n, a.lo, a.hi));
  return SupportGrid::tensor(pts);
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& cell : split(text, ',')) {
    double x = 0.0;
    if (!parse_real(cell, x)) throw Error(ErrorCategory::schema, "not a number list: '" + text + "'");
    out.push_back(x);
  }
  return out;
}

RawSnapshotFile read_snapshot_csv(const std::filesystem::path& path) {
  const CsvLines csv = read_csv(path);
  if (csv.header.front() != "t") throw schema_error(path, 1, "first column must be 't'");
  RawSnapshotFile out;
  const bool atoms = csv.header.size() >= 2 && csv.header[1] == "weight";
  out.schema = atoms ? InputSchema::atoms : InputSchema::samples;
  const std::size_t first = atoms ? 2 : 1;
  expect_coordinate_columns(path, csv.header, first, "x");
  out.dim = static_cast<Eigen::Index>(csv.header.size() - first);
  if (csv.rows.empty()) throw schema_error(path, 2, "no data rows");

  struct Group {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
    std::size_t first_line = 0;
  };
  std::map<double, Group> groups;
  for (const auto& [lineno, cells] : csv.rows) {
    const auto v = row_reals(path, lineno, cells);
    if (v[0] < 0.0) throw schema_error(path, lineno, "negative timestamp");
    auto& g = groups[v[0]];
    if (g.first_line == 0) g.first_line = lineno;
    double w = 1.0;
    if (atoms) {
      w = v[1];
      if (w < 0.0) throw schema_error(path, lineno, "negative weight");
    }
    g.weights.push_back(w);
    g.points.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(first), v.end());
  }

  for (auto& [t, g] : groups) {
    RawSnapshot s;
    s.t = t;
    const auto n = static_cast<Eigen::Index>(g.points.size());
    s.points.resize(n, out.dim);
    s.weights.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < out.dim; ++c)
        s.points(r, c) = g.points[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      s.weights(r) = g.weights[static_cast<std::size_t>(r)];
    }
    if (atoms) {
      const double total = s.weights.sum();
      if (std::abs(total - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "weights at t=" << format_real(t) << " sum to " << format_real(total) << ", not 1";
        throw schema_error(path, g.first_line, msg.str());
      }
      s.weights /= total;
    } else {
      s.weights.setConstant(1.0 / static_cast<double>(n));
    }
    out.snapshots.push_back(std::move(s));
  }
  return out;
}

SnapshotDataset to_dataset(const RawSnapshotFile& raw, const LoadOptions& options) {
  require(!raw.snapshots.empty(), "to_dataset: no snapshots");
  GridPtr grid;
  if (!options.grid.empty()) {
    require(static_cast<Eigen::Index>(options.grid.size()) == raw.dim,
            "one --grid per state axis required (" + std::to_string(raw.dim) + ")");
    grid = make_grid(grid_from_specs(options.grid));
  } else if (raw.schema == InputSchema::samples) {
    require(options.auto_points >= 2, "to_dataset: auto grid needs >= 2 points per axis");
    std::vector<GridSpec> axes;
    for (Eigen::Index c = 0; c < raw.dim; ++c) {
      double lo = raw.snapshots.front().points(0, c);
      double hi = lo;
      for (const auto& s : raw.snapshots) {
        lo = std::min(lo, s.points.col(c).minCoeff());
        hi = std::max(hi, s.points.col(c).maxCoeff());
      }
      if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
      }
      axes.push_back({lo, hi, options.auto_points});
    }
    grid = make_grid(grid_from_specs(axes));
  } else {
    std::vector<std::vector<double>> pts;
    for (const auto& s : raw.snapshots)
      for (Eigen::Index r = 0; r < s.points.rows(); ++r) {
        auto& p = pts.emplace_back();
        for (Eigen::Index c = 0; c < raw.dim; ++c) p.push_back(s.points(r, c));
      }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), raw.dim);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < raw.dim; ++c) m(r, c) = pts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    grid = make_grid(SupportGrid(std::move(m)));
  }

  std::vector<double> times;
  for (const auto& s : raw.snapshots) times.push_back(s.t);
  const auto lambdas = normalized_lambdas(options.lambdas, raw.snapshots.size());
  std::vector<Snapshot> snaps;
  for (std::size_t i = 0; i < raw.snapshots.size(); ++i) {
    const auto& s = raw.snapshots[i];
    Eigen::VectorXd w = Eigen::VectorXd::Zero(grid->size());
    for (Eigen::Index r = 0; r < s.points.rows(); ++r) w(grid->nearest(s.points.row(r))) += s.weights(r);
    snaps.push_back({s.t, DiscreteMeasure::normalized(grid, std::move(w)), lambdas[i]});
  }
  return normalize_timestamps(SnapshotDataset(std::move(snaps), horizon_of(times)));
}

SnapshotDataset load_snapshots(const std::filesystem::path& path, const LoadOptions& options) {
  return to_dataset(read_snapshot_csv(path), options);
}

std::vector<GaussianSnapshot> to_gaussian_snapshots(const RawSnapshotFile& raw, const std::vector<double>& lambdas) {
  require(!raw.snapshots.empty(), "to_gaussian_snapshots: no snapshots");
  std::vector<double> times;
  for (const auto& s : raw.snapshots) times.push_back(s.t);
  const double horizon = horizon_of(times);
  const auto lam = normalized_lambdas(lambdas, raw.snapshots.size());
  std::vector<GaussianSnapshot> out;
  for (std::size_t i = 0; i < raw.snapshots.size(); ++i) {
    const auto& s = raw.snapshots[i];
    const Eigen::RowVectorXd mean = s.weights.transpose() * s.points;
    const Eigen::MatrixXd centred = s.points.rowwise() - mean;
    Eigen::MatrixXd cov = centred.transpose() * s.weights.asDiagonal() * centred;
    cov = 0.5 * (cov + cov.transpose()).eval();
    out.push_back({s.t / horizon, lam[i], GaussianMeasure(mean.transpose(), cov)});
  }
  return out;
}

std::vector<double> read_lambda_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    double x = 0.0;
    if (!parse_real(line, x) || x <= 0.0) throw schema_error(path, lineno, "expected a positive number");
    out.push_back(x);
  }
  return out;
}

AtomSet read_basis_csv(const std::filesystem::path& path) {
  const CsvLines csv = read_csv(path);
  const std::size_t cols = csv.header.size();
  std::size_t d = 0;
  while ((d + 1) + (d + 1) * (d + 1) <= cols) ++d;
  if (d == 0 || d + d * d != cols) throw schema_error(path, 1, "expected columns m1..md,c11..cdd");
  for (std::size_t a = 0; a < d; ++a)
    if (csv.header[a] != "m" + std::to_string(a + 1)) throw schema_error(path, 1, "column " + std::to_string(a + 1) + " must be 'm" + std::to_string(a + 1) + "'");
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      const std::string want = "c" + std::to_string(a + 1) + std::to_string(b + 1);
      if (csv.header[d + a * d + b] != want) throw schema_error(path, 1, "expected column '" + want + "'");
    }
  if (csv.rows.empty()) throw schema_error(path, 2, "no atoms");
  std::vector<GaussianMeasure> atoms;
  const auto di = static_cast<Eigen::Index>(d);
  for (const auto& [lineno, cells] : csv.rows) {
    const auto v = row_reals(path, lineno, cells);
    Eigen::VectorXd m(di);
    Eigen::MatrixXd c(di, di);
    for (Eigen::Index a = 0; a < di; ++a) m(a) = v[static_cast<std::size_t>(a)];
    for (Eigen::Index a = 0; a < di; ++a)
      for (Eigen::Index b = 0; b < di; ++b) c(a, b) = v[d + static_cast<std::size_t>(a * di + b)];
    try {
      atoms.emplace_back(m, c);
    } catch (const Error& e) {
      throw schema_error(path, lineno, e.what());
    }
  }
  return AtomSet(std::move(atoms));
}

std::vector<MixtureSnapshot> read_mixture_csv(const std::filesystem::path& path, std::size_t atoms,
                                              const std::vector<double>& lambdas) {
  const CsvLines csv = read_csv(path);
  if (csv.header.front() != "t") throw schema_error(path, 1, "first column must be 't'");
  expect_coordinate_columns(path, csv.header, 1, "w");
  if (csv.header.size() - 1 != atoms)
    throw schema_error(path, 1, "expected " + std::to_string(atoms) + " weight columns to match the basis");
  std::vector<MixtureSnapshot> out;
  std::vector<double> times;
  for (const auto& [lineno, cells] : csv.rows) {
    const auto v = row_reals(path, lineno, cells);
    if (!times.empty() && !(v[0] > times.back())) throw schema_error(path, lineno, "timestamps must increase");
    if (v[0] < 0.0) throw schema_error(path, lineno, "negative timestamp");
    Eigen::VectorXd w(static_cast<Eigen::Index>(atoms));
    for (std::size_t k = 0; k < atoms; ++k) w(static_cast<Eigen::Index>(k)) = v[k + 1];
    if (w.minCoeff() < 0.0) throw schema_error(path, lineno, "negative weight");
    if (std::abs(w.sum() - 1.0) > 1e-6) throw schema_error(path, lineno, "weights do not sum to 1");
    times.push_back(v[0]);
    out.push_back({v[0], 0.0, w / w.sum()});
  }
  if (out.empty()) throw schema_error(path, 2, "no data rows");
  const double horizon = horizon_of(times);
  const auto lam = normalized_lambdas(lambdas, out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].t /= horizon;
    out[i].lambda = lam[i];
  }
  return out;
}

std::string format_real(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string basis_csv(const AtomSet& atoms) {
  const Eigen::Index d = atoms[0].dim();
  std::ostringstream out;
  for (Eigen::Index a = 0; a < d; ++a) out << (a ? "," : "") << "m" << a + 1;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) out << ",c" << a + 1 << b + 1;
  out << "\n";
  for (const auto& g : atoms.atoms()) {
    for (Eigen::Index a = 0; a < d; ++a) out << (a ? "," : "") << format_real(g.mean(a));
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) out << "," << format_real(g.covariance(a, b));
    out << "\n";
  }
  return out.str();
}

std::string mixture_csv(const std::vector<MixtureSnapshot>& data) {
  require(!data.empty(), "mixture_csv: no snapshots");
  std::ostringstream out;
  out << "t";
  for (Eigen::Index k = 0; k < data.front().weights.size(); ++k) out << ",w" << k + 1;
  out << "\n";
  for (const auto& s : data) {
    out << format_real(s.t);
    for (Eigen::Index k = 0; k < s.weights.size(); ++k) out << "," << format_real(s.weights(k));
    out << "\n";
  }
  return out.str();
}

std::string samples_csv(const std::vector<double>& times, const std::vector<Eigen::MatrixXd>& samples) {
  require(!times.empty() && times.size() == samples.size(), "samples_csv: one sample block per time");
  const Eigen::Index d = samples.front().cols();
  std::ostringstream out;
  out << "t";
  for (Eigen::Index c = 0; c < d; ++c) out << ",x" << c + 1;
  out << "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(samples[i].cols() == d, "samples_csv: dimension mismatch");
    for (Eigen::Index r = 0; r < samples[i].rows(); ++r) {
      out << format_real(times[i]);
      for (Eigen::Index c = 0; c < d; ++c) out << "," << format_real(samples[i](r, c));
      out << "\n";
    }
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCategory::io, "write failed on '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCategory::io, "cannot rename onto '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  require(j.is_array(), "matrix_from_json: not an array", ErrorCategory::schema);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) == cols,
            "matrix_from_json: ragged rows", ErrorCategory::schema);
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json coupling_json(const ParamCoupling& coupling, double threshold) {
  Json grids = Json::array();
  for (const auto& g : coupling.space.grids()) grids.push_back(matrix_json(g->points()));
  Json entries = Json::array();
  double emitted = 0.0;
  for (Eigen::Index p = 0; p < coupling.weights.size(); ++p) {
    const double w = coupling.weights(p);
    if (!(w > threshold)) continue;
    Json e = Json::array();
    for (Eigen::Index i : coupling.space.decode(p)) e.push_back(i);
    e.push_back(w);
    entries.push_back(std::move(e));
    emitted += w;
  }
  if (emitted < 0.999)
    log_warn("coupling_json: entries above the threshold carry only " + format_real(emitted) + " of the mass");
  Json out;
  out["threshold"] = threshold;
  out["emitted_mass"] = emitted;
  out["grids"] = std::move(grids);
  out["entries"] = std::move(entries);
  return out;
}

}  // namespace wasscurve
