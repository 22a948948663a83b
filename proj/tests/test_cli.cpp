#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"
#include "thermrange/harness/io.hpp"
#include "thermrange/hsrc.hpp"

namespace fs = std::filesystem;
using thermrange::testing::scratch_dir;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const fs::path& scratch) {
  const auto out = scratch / "stdout.txt";
  const auto err = scratch / "stderr.txt";
  const std::string cmd = std::string("'") + THERMRANGE_CLI + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

/// Reads `truth.csv` (row,col,d,T,region) into a map from pixel index to d.
std::vector<double> truth_ranges(const fs::path& path, std::size_t width) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<double> d;
  while (std::getline(in, line)) {
    const auto f = thermrange::text::split(line, ',');
    const auto idx = static_cast<std::size_t>(*thermrange::text::parse_double(f[0]) * width +
                                              *thermrange::text::parse_double(f[1]));
    if (d.size() <= idx) d.resize(idx + 1);
    d[idx] = *thermrange::text::parse_double(f[2]);
  }
  return d;
}

}  // namespace

TEST(Cli, SimulateIsDeterministicAcrossRunsAndWorkers) {
  const auto dir = scratch_dir("cli_sim");
  const auto a = cli("simulate --config ramp-scene --seed 5 --workers 1 --out '" + (dir / "a").string() + "'", dir);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("seed 5"), std::string::npos);
  ASSERT_EQ(cli("simulate --config ramp-scene --seed 5 --workers 1 --out '" + (dir / "b").string() + "'", dir).code, 0);
  ASSERT_EQ(cli("simulate --config ramp-scene --seed 5 --workers 4 --out '" + (dir / "c").string() + "'", dir).code, 0);
  const auto cube = slurp(dir / "a/cube.hsrc");
  ASSERT_FALSE(cube.empty());
  EXPECT_EQ(cube, slurp(dir / "b/cube.hsrc"));
  EXPECT_EQ(cube, slurp(dir / "c/cube.hsrc"));
  EXPECT_EQ(slurp(dir / "a/truth.csv"), slurp(dir / "c/truth.csv"));
  ASSERT_EQ(cli("simulate --config ramp-scene --seed 6 --out '" + (dir / "d").string() + "'", dir).code, 0);
  EXPECT_NE(cube, slurp(dir / "d/cube.hsrc"));
}

TEST(Cli, SinglePixelCubeReadsBack) {
  const auto dir = scratch_dir("cli_1x1");
  const auto r = cli("simulate --config fig1-like --set scene.ranges_m=42 --out '" + dir.string() + "'", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cube = thermrange::read_hsrc(dir / "cube.hsrc");
  EXPECT_EQ(cube.height(), 1u);
  EXPECT_EQ(cube.width(), 1u);
  EXPECT_EQ(thermrange::encode_hsrc(cube), slurp(dir / "cube.hsrc"));
  EXPECT_TRUE(fs::exists(dir / "truth.csv"));
  EXPECT_TRUE(fs::exists(dir / "emissivity_background.csv"));
}

TEST(Cli, EstimateRecoversNoiselessTruthIdenticallyAcrossWorkers) {
  const auto dir = scratch_dir("cli_estimate");
  const std::string scene = "--config ramp-scene --set noise.sigma=0 --set scene.height=2";
  ASSERT_EQ(cli("simulate " + scene + " --out '" + (dir / "sim").string() + "'", dir).code, 0);
  const auto cube = (dir / "sim/cube.hsrc").string();
  const auto one = cli("estimate " + scene + " --cube '" + cube + "' --workers 1 --out '" + (dir / "e1").string() + "'", dir);
  ASSERT_EQ(one.code, 0) << one.err;
  ASSERT_EQ(cli("estimate " + scene + " --cube '" + cube + "' --workers 4 --out '" + (dir / "e4").string() + "'", dir).code, 0);
  for (const auto* f : {"depth.csv", "temperature.csv", "diagnostics.csv", "emissivity_estimates.csv"})
    EXPECT_EQ(slurp(dir / "e1" / f), slurp(dir / "e4" / f)) << f;

  const auto depth = thermrange::harness::read_grid_csv(dir / "e1/depth.csv");
  const auto truth = truth_ranges(dir / "sim/truth.csv", depth.width);
  ASSERT_EQ(depth.values.size(), truth.size());
  for (std::size_t p = 0; p < truth.size(); ++p) EXPECT_LE(std::abs(depth.values[p] - truth[p]), 1.0) << "pixel " << p;
}

TEST(Cli, BispectralWithoutAirEmissionFailsOnCoolScene) {
  const auto dir = scratch_dir("cli_noair");
  const std::string scene = "--config ramp-scene --set noise.sigma=0 --set scene.delta_t_k=-5";
  ASSERT_EQ(cli("simulate " + scene + " --out '" + (dir / "sim").string() + "'", dir).code, 0);
  const auto cube = (dir / "sim/cube.hsrc").string();
  const auto r = cli("estimate " + scene + " --estimator bispectral-no-air --cube '" + cube + "' --out '" +
                         (dir / "noair").string() + "'",
                     dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto depth = thermrange::harness::read_grid_csv(dir / "noair/depth.csv");
  const auto truth = truth_ranges(dir / "sim/truth.csv", depth.width);
  std::size_t failed = 0;
  for (std::size_t p = 0; p < truth.size(); ++p) {
    const double d = depth.values[p];
    failed += !std::isfinite(d) || d <= 0.0 || std::abs(d - truth[p]) > 0.5 * truth[p];
  }
  EXPECT_EQ(failed, truth.size());

  ASSERT_EQ(cli("estimate " + scene + " --estimator bispectral --cube '" + cube + "' --out '" +
                    (dir / "air").string() + "'",
                dir)
                .code,
            0);
  const auto with_air = thermrange::harness::read_grid_csv(dir / "air/depth.csv");
  for (std::size_t p = 0; p < truth.size(); ++p) EXPECT_LT(std::abs(with_air.values[p] - truth[p]), 0.1 * truth[p]);
}

TEST(Cli, MaskedRunFlagsExactlyWhereDifferenceExceedsThreshold) {
  const auto dir = scratch_dir("cli_mask");
  ASSERT_EQ(cli("simulate --config panel-scene --out '" + (dir / "sim").string() + "'", dir).code, 0);
  const auto cube = (dir / "sim/cube.hsrc").string();
  const auto r = cli("estimate --config panel-scene --mask --cube '" + cube + "' --out '" + (dir / "est").string() + "'", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t h = 0, w = 0;
  const auto flagged = thermrange::harness::read_pbm(dir / "est/mask.pbm", h, w);
  const auto diff = thermrange::harness::read_grid_csv(dir / "est/ozone_difference.csv");
  ASSERT_EQ(flagged.size(), diff.values.size());
  std::size_t count = 0;
  for (std::size_t p = 0; p < flagged.size(); ++p) {
    EXPECT_EQ(bool(flagged[p]), diff.values[p] > 4.0) << "pixel " << p;
    count += flagged[p];
  }
  EXPECT_GT(count, 0u);

  ASSERT_EQ(cli("mask --config panel-scene --cube '" + cube + "' --out '" + (dir / "m").string() + "'", dir).code, 0);
  EXPECT_EQ(slurp(dir / "m/mask.pbm"), slurp(dir / "est/mask.pbm"));
  ASSERT_EQ(cli("mask --config panel-scene --threshold 1e9 --cube '" + cube + "' --out '" + (dir / "m2").string() + "'", dir).code, 0);
  const auto none = thermrange::harness::read_pbm(dir / "m2/mask.pbm", h, w);
  EXPECT_EQ(std::count(none.begin(), none.end(), 1), 0);

  ASSERT_EQ(cli("cluster --estimates '" + (dir / "est/emissivity_estimates.csv").string() + "' --k 2 --out '" +
                    (dir / "cl").string() + "'",
                dir)
                .code,
            0);
  EXPECT_TRUE(fs::exists(dir / "cl/cluster_labels.csv"));
}

TEST(Cli, FisherAndMonteCarloWriteReports) {
  const auto dir = scratch_dir("cli_reports");
  const auto f = cli("fisher --config ramp-scene --ranges 30,70,200 --out '" + (dir / "f").string() + "'", dir);
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_TRUE(fs::exists(dir / "f/fisher_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "f/fisher_d70.csv"));
  const auto z = cli("fisher --config ramp-scene --set scene.delta_t_k=0 --set scene.material=flat:1 --ranges 50 --out '" +
                         (dir / "z").string() + "'",
                     dir);
  ASSERT_EQ(z.code, 0) << z.err;
  EXPECT_NE(slurp(dir / "z/fisher_summary.csv").find(",1\n"), std::string::npos);

  const auto m = cli("montecarlo --config ramp-scene --trials 3 --out '" + (dir / "mc").string() + "'", dir);
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_TRUE(fs::exists(dir / "mc/montecarlo_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "mc/montecarlo_trials.csv"));
  EXPECT_TRUE(fs::exists(dir / "mc/resolved.cfg"));
  EXPECT_EQ(cli("montecarlo --config ramp-scene --trials 1 --out '" + (dir / "mc1").string() + "'", dir).code, 2);
}

TEST(Cli, ExitCodesAndErrorLines) {
  const auto dir = scratch_dir("cli_errors");
  EXPECT_EQ(cli("", dir).code, 2);
  EXPECT_EQ(cli("simulate --config no-such-preset --out '" + dir.string() + "'", dir).code, 2);
  const auto bad = cli("simulate --config ramp-scene --set noise.sigma=-1 --out '" + (dir / "x").string() + "'", dir);
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("noise.sigma"), std::string::npos) << bad.err;
  const auto missing = cli("estimate --config ramp-scene --cube /nonexistent.hsrc --out '" + dir.string() + "'", dir);
  EXPECT_EQ(missing.code, 3);
  EXPECT_EQ(missing.err.rfind("error: ", 0), 0u);

  ASSERT_EQ(cli("simulate --config fig1-like --out '" + (dir / "sim").string() + "'", dir).code, 0);
  auto bytes = slurp(dir / "sim/cube.hsrc");
  bytes.resize(bytes.size() - 7);
  std::ofstream(dir / "corrupt.hsrc", std::ios::binary) << bytes;
  const auto corrupt = cli("estimate --config fig1-like --cube '" + (dir / "corrupt.hsrc").string() + "' --out '" +
                               (dir / "e").string() + "'",
                           dir);
  EXPECT_EQ(corrupt.code, 3);
  EXPECT_NE(corrupt.err.find("byte offset " + std::to_string(bytes.size())), std::string::npos) << corrupt.err;

  const auto invalid = cli("estimate --config fig1-like --set hyper.rho=-1 --cube '" + (dir / "sim/cube.hsrc").string() +
                               "' --out '" + (dir / "e2").string() + "'",
                           dir);
  EXPECT_EQ(invalid.code, 2);
  EXPECT_NE(invalid.err.find("hyper.rho"), std::string::npos) << invalid.err;
}
