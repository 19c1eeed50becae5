#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "wasscurve/experiments.hpp"
#include "wasscurve/io.hpp"

using namespace wasscurve;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / "wasscurve_io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WASSCURVE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string error_of(const fs::path& p) {
  try {
    read_snapshot_csv(p);
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::schema);
    return e.what();
  }
  return "";
}

}  // namespace

TEST(GridSpec, Parse) {
  const auto g = parse_grid_spec("-1:2.5:7");
  EXPECT_DOUBLE_EQ(g.lo, -1.0);
  EXPECT_DOUBLE_EQ(g.hi, 2.5);
  EXPECT_EQ(g.n, 7);
  EXPECT_THROW(parse_grid_spec("0:1"), Error);
  EXPECT_THROW(parse_grid_spec("1:0:5"), Error);
  EXPECT_THROW(parse_grid_spec("0:1:1"), Error);
  EXPECT_EQ(grid_from_specs({g, parse_grid_spec("0:1:3")}).size(), 21);
  EXPECT_EQ(parse_real_list("0,0.5,1"), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_THROW(parse_real_list("0,x"), Error);
}

TEST(ReadSnapshotCsv, SamplesAndAtoms) {
  const fs::path dir = scratch("read");
  const auto s = read_snapshot_csv(write(dir, "s.csv", "t,x1\n0,0.1\n0,0.2\n2,0.9\n"));
  EXPECT_EQ(s.schema, InputSchema::samples);
  ASSERT_EQ(s.snapshots.size(), 2u);
  EXPECT_EQ(s.snapshots[0].points.rows(), 2);
  EXPECT_DOUBLE_EQ(s.snapshots[1].t, 2.0);
  const auto a = read_snapshot_csv(write(dir, "a.csv", "t,weight,x1,x2\n0,0.5,0,0\n0,0.5,1,1\n1,1,0.5,0.5\n"));
  EXPECT_EQ(a.schema, InputSchema::atoms);
  EXPECT_EQ(a.dim, 2);
  const auto d = to_dataset(a);
  EXPECT_DOUBLE_EQ(d.horizon(), 1.0);
  EXPECT_EQ(d.grid().size(), 3);
}

TEST(ReadSnapshotCsv, ErrorsCarryLineNumbers) {
  const fs::path dir = scratch("errors");
  EXPECT_NE(error_of(write(dir, "h.csv", "time,x\n0,1\n")).find(":1:"), std::string::npos);
  EXPECT_NE(error_of(write(dir, "n.csv", "t,x1\n0,1\n0,abc\n")).find(":3:"), std::string::npos);
  EXPECT_NE(error_of(write(dir, "c.csv", "t,x1\n0,1\n0,1,2\n")).find(":3:"), std::string::npos);
  EXPECT_FALSE(error_of(write(dir, "w.csv", "t,weight,x1\n0,0.5,0\n0,0.4,1\n")).empty());
  EXPECT_FALSE(error_of(write(dir, "e.csv", "t,x1\n")).empty());
  try {
    read_snapshot_csv(dir / "missing.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::io);
  }
}

TEST(MixtureFiles, RoundTrip) {
  const fs::path dir = scratch("mixture");
  const AtomSet basis = toy_mixture_basis();
  const auto data = toy_mixture_snapshots();
  write_file_atomic(dir / "basis.csv", basis_csv(basis));
  write_file_atomic(dir / "mixture.csv", mixture_csv(data));
  const AtomSet back = read_basis_csv(dir / "basis.csv");
  ASSERT_EQ(back.size(), basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    EXPECT_EQ(back[k].mean, basis[k].mean);
    EXPECT_EQ(back[k].covariance, basis[k].covariance);
  }
  const auto mix = read_mixture_csv(dir / "mixture.csv", basis.size());
  ASSERT_EQ(mix.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(mix[i].weights, data[i].weights);
    EXPECT_DOUBLE_EQ(mix[i].t, data[i].t);
  }
  EXPECT_THROW(read_mixture_csv(dir / "mixture.csv", basis.size() + 1), Error);
}

TEST(Json, RealsRoundTripBitExact) {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    EXPECT_EQ(std::stod(format_real(x)), x);
    const Json j = x;
    EXPECT_EQ(Json::parse(j.dump()).get<double>(), x);
  }
  Eigen::MatrixXd m(2, 3);
  m << 0.1, 0.2, 1.0 / 3.0, -4.0, 5e-17, 6.0;
  EXPECT_EQ(matrix_from_json(Json::parse(matrix_json(m).dump())), m);
}

TEST(CouplingJson, ThresholdAndMass) {
  const GridPtr g = make_grid(SupportGrid::uniform(0.0, 1.0, 2));
  ParamCoupling c;
  c.space = ParameterSpace({g, g});
  c.weights = Eigen::Vector4d(0.5, 1e-12, 0.25, 0.25 - 1e-12);
  const Json j = coupling_json(c);
  EXPECT_EQ(j["entries"].size(), 3u);
  EXPECT_NEAR(j["emitted_mass"].get<double>(), 1.0, 1e-11);
  EXPECT_EQ(j["entries"][1][0].get<int>(), 1);
  EXPECT_EQ(j["entries"][1][1].get<int>(), 0);
}

TEST(WriteFileAtomic, ReplacesContents) {
  const fs::path dir = scratch("atomic");
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(read_file(dir / "f.txt"), "two");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
}

TEST(Cli, RerunsAreByteIdentical) {
  const fs::path dir = scratch("rerun");
  ASSERT_EQ(run_cli("generate ou --samples 50 --snapshots 5 --output " + (dir / "data").string()), 0);
  const std::string input = (dir / "data" / "ou.csv").string();
  const std::string run = "regress " + input + " --auto-points 12 --threads 2 --output " + (dir / "a").string();
  const std::vector<std::string> files = {"result.json", "marginals.csv", "objectives.csv"};
  ASSERT_EQ(run_cli(run), 0);
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(read_file(dir / "a" / f));
  ASSERT_EQ(run_cli(run), 0);
  for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(read_file(dir / "a" / files[i]), first[i]) << files[i];
  const Json result = Json::parse(read_file(dir / "a" / "result.json"));
  EXPECT_FALSE(result["diagnostics"].contains("wall_time_s"));
  EXPECT_TRUE(result.contains("objective"));
}

TEST(Cli, DistanceOfIdenticalInputsIsZero) {
  const fs::path dir = scratch("distance");
  const fs::path a = write(dir, "a.csv", "t,weight,x1\n0,0.3,0\n0,0.7,1\n1,1,0.5\n");
  ASSERT_EQ(run_cli("distance " + a.string() + " " + a.string() + " --output " + (dir / "out").string()), 0);
  const std::string csv = read_file(dir / "out" / "distance.csv");
  EXPECT_NE(csv.find(",0\n"), std::string::npos) << csv;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const fs::path bad = write(dir, "bad.csv", "time,x\n0,1\n");
  const fs::path good = write(dir, "good.csv", "t,x1\n0,0\n0.5,0.5\n1,1\n");
  const std::string out = " --output " + (dir / "out").string();
  EXPECT_EQ(run_cli("regress " + (dir / "missing.csv").string() + out), 3);  // CLI11 file check
  EXPECT_EQ(run_cli("regress " + bad.string() + out), 3);
  EXPECT_EQ(run_cli("regress " + good.string() + " --epsilon -1" + out), 5);
  EXPECT_EQ(run_cli("regress " + good.string() + " --bogus" + out), 3);
  EXPECT_EQ(run_cli("regress " + good.string() + " --auto-points 4" + out), 0);
}
