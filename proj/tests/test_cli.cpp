#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "p4pfr/io.hpp"
#include "test_support.hpp"

using namespace p4pfr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(P4PFR_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("p4pfr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }
  fs::path dir_;
};

}  // namespace

TEST(Io, ParseRejectsMalformed) {
  EXPECT_THROW(io::parse_correspondences("{"), Error);
  EXPECT_THROW(io::parse_correspondences(R"({"world": [], "image": []})"), Error);
  EXPECT_THROW(io::parse_correspondences(R"({"format": "other", "world": [[0,0,0]], "image": [[0,0]]})"), Error);
  EXPECT_THROW(io::parse_correspondences(R"({"format": "planar-p4pfr/1", "world": [[0,0]], "image": [[0,0]]})"), Error);
  EXPECT_THROW(io::parse_correspondences(R"({"format": "planar-p4pfr/1", "world": [[0,0,0],[1,0,0]], "image": [[0,0]]})"), Error);
  EXPECT_THROW(io::parse_correspondences(R"({"format": "planar-p4pfr/1", "world": [[0,0,"a"]], "image": [[0,0]]})"), Error);
}

TEST(Io, CorrespondenceRoundTrip) {
  SceneConfig cfg;
  cfg.seed = 3;
  const auto gt = random_instance(cfg);
  io::CorrespondenceFile f{gt.world3d, gt.image, 1.5};
  const auto back = io::parse_correspondences(io::to_json(f).dump());
  ASSERT_EQ(back.world.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(back.world[i], gt.world3d[i]);
    EXPECT_EQ(back.image[i].x, gt.image[i].x);
    EXPECT_EQ(back.image[i].y, gt.image[i].y);
  }
  EXPECT_EQ(back.image_scale_hint, 1.5);
}

TEST(Io, SolutionRecordRoundTrip) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SceneConfig cfg;
    cfg.seed = seed;
    const auto gt = random_instance(cfg);
    const auto res = solve(gt.world3d, gt.image);
    const auto doc = json::parse(io::solve_document(res, gt.world3d, gt.image).dump(2));
    for (const auto& sj : doc["solutions"]) {
      const auto rec = io::record_from_json(sj);
      const auto again = io::make_record(rec.camera(), gt.world3d, gt.image);
      ASSERT_EQ(again.per_point_err.size(), rec.per_point_err.size());
      for (std::size_t i = 0; i < rec.per_point_err.size(); ++i)
        EXPECT_NEAR(again.per_point_err[i], rec.per_point_err[i], 1e-9);
    }
  }
}

TEST_F(CliTest, SolveEmittedInstance) {
  const auto b = run_cli("bench --n 1 --seed 11 --emit-one " + path("one.json"));
  ASSERT_EQ(b.code, 0) << b.out;
  const auto r = run_cli("solve " + path("one.json") + " --json-out " + path("out.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = json::parse(slurp(path("out.json")));
  EXPECT_EQ(doc["format"], "planar-p4pfr/1");
  ASSERT_GE(doc["solutions"].size(), 1u);
  ASSERT_LE(doc["solutions"].size(), 6u);
  const auto input = io::parse_correspondences(slurp(path("one.json")));
  const double scale = *input.image_scale_hint;
  EXPECT_LE(doc["solutions"][0]["max_reproj_err"].get<double>(), 1e-8 * scale);

  // The sidecar holds the generating camera.
  const auto gt = io::record_from_json(json::parse(slurp(path("one.json.gt.json"))));
  const auto best = io::record_from_json(doc["solutions"][0]);
  EXPECT_NEAR(best.f, gt.f, 1e-8 * gt.f);
  EXPECT_NEAR(best.k, gt.k, 1e-8);
}

TEST_F(CliTest, SolveStdoutIsDeterministic) {
  ASSERT_EQ(run_cli("bench --n 1 --seed 4 --emit-one " + path("one.json")).code, 0);
  const auto a = run_cli("solve " + path("one.json"));
  const auto b = run_cli("solve " + path("one.json"));
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, SolveThreePoints) {
  write("three.json", R"({"format": "planar-p4pfr/1",
    "world": [[0,0,0],[1,0,0],[1,1,0]], "image": [[0.1,0.2],[0.5,0.1],[0.4,0.6]]})");
  const auto r = run_cli("solve " + path("three.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("input: need exactly 4 points"), std::string::npos) << r.out;
}

TEST_F(CliTest, SolveDuplicatedCorrespondence) {
  write("dup.json", R"({"format": "planar-p4pfr/1",
    "world": [[0,0,0],[1,0,0],[1,1,0],[0,0,0]], "image": [[0.1,0.2],[0.5,0.1],[0.4,0.6],[0.1,0.2]]})");
  const auto r = run_cli("solve " + path("dup.json"));
  EXPECT_TRUE(r.code == 1 || r.code == 2);
  if (r.code == 1) {
    EXPECT_NE(r.out.find("degenerate"), std::string::npos) << r.out;
  }
}

TEST_F(CliTest, SolveNonCoplanar) {
  write("nc.json", R"({"format": "planar-p4pfr/1",
    "world": [[0,0,0],[1,0,0],[1,1,0],[0,1,1]], "image": [[0.1,0.2],[0.5,0.1],[0.4,0.6],[0.0,0.5]]})");
  const auto r = run_cli("solve " + path("nc.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("not_coplanar"), std::string::npos) << r.out;
}

TEST_F(CliTest, SolveMalformed) {
  write("bad.json", "{ not json");
  const auto r = run_cli("solve " + path("bad.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("error: input"), std::string::npos);
  EXPECT_EQ(run_cli("solve " + path("missing.json")).code, 1);
}

TEST_F(CliTest, BenchCsvIsDeterministic) {
  const auto a = run_cli("bench --n 10 --seed 7 --out " + path("a.csv"));
  const auto b = run_cli("bench --n 10 --seed 7 --out " + path("b.csv"));
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0);
  const std::string csv = slurp(path("a.csv"));
  EXPECT_EQ(csv, slurp(path("b.csv")));
  EXPECT_EQ(csv.rfind("bin_left,fraction\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_NE(csv.find("\n-19.8,0\n"), std::string::npos);
  for (const char* key : {"median_log10_err=", "p99_log10_err=", "fail_rate=", "mean_solve_us=", "median_solve_us="})
    EXPECT_NE(a.out.find(key), std::string::npos) << key;
}

TEST_F(CliTest, BenchRangeAndBins) {
  const auto r = run_cli("bench --n 5 --seed 1 --bins 0.5 --range -18,-4 --out " + path("h.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = slurp(path("h.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 28);
  EXPECT_NE(csv.find("\n-18,"), std::string::npos);
  EXPECT_NE(csv.find("\n-4.5,"), std::string::npos);
}

TEST_F(CliTest, BenchFlagErrors) {
  EXPECT_EQ(run_cli("bench").code, 1);
  EXPECT_EQ(run_cli("bench --n 0").code, 1);
  EXPECT_EQ(run_cli("bench --n abc").code, 1);
  EXPECT_EQ(run_cli("bench --n 5 --range 3").code, 1);
  EXPECT_EQ(run_cli("bogus").code, 1);
}

TEST_F(CliTest, RansacFourPointsMatchesSolve) {
  ASSERT_EQ(run_cli("bench --n 1 --seed 21 --emit-one " + path("one.json")).code, 0);
  ASSERT_EQ(run_cli("solve " + path("one.json") + " --json-out " + path("s.json")).code, 0);
  const auto r = run_cli("ransac " + path("one.json") + " --threshold 1e-6 --no-refine --json-out " + path("r.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto s = json::parse(slurp(path("s.json")));
  const auto rd = json::parse(slurp(path("r.json")));
  EXPECT_EQ(rd["command"], "ransac");
  EXPECT_EQ(rd["inlier_mask"], json::array({true, true, true, true}));
  const auto b = io::record_from_json(rd["solution"]);
  bool matched = false;
  for (const auto& sj : s["solutions"]) {
    const auto a = io::record_from_json(sj);
    bool same = std::abs(a.f - b.f) <= 1e-9 * a.f && std::abs(a.k - b.k) <= 1e-9;
    for (int i = 0; i < 9; ++i) same = same && std::abs(a.R[i] - b.R[i]) <= 1e-9;
    matched = matched || same;
  }
  EXPECT_TRUE(matched);
}

TEST_F(CliTest, RansacContaminatedFile) {
  const std::uint64_t seed = 0;
  const auto sc = p4pfr::testing::contaminated_scene(seed);
  write("c.json", io::to_json(io::CorrespondenceFile{sc.world, sc.image, std::nullopt}).dump());
  const auto r = run_cli("ransac " + path("c.json") + " --seed 0 --json-out " + path("r.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = json::parse(slurp(path("r.json")));
  EXPECT_EQ(doc["inlier_mask"].get<std::vector<bool>>(), sc.truth_mask);
  EXPECT_GE(doc["iterations_run"].get<int>(), 1);
}

TEST_F(CliTest, RansacFlagErrors) {
  ASSERT_EQ(run_cli("bench --n 1 --emit-one " + path("one.json")).code, 0);
  const auto r = run_cli("ransac " + path("one.json") + " --iters 0");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("iters must be ≥ 1"), std::string::npos) << r.out;
  write("bad.json", "[]");
  EXPECT_EQ(run_cli("ransac " + path("bad.json")).code, 1);
}
