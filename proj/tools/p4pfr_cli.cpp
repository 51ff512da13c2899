// Command-line front end: solve a single 4-point file, run the seeded
// accuracy/timing benchmark, or run the robust estimator on a larger file.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <system_error>

#include "CLI11.hpp"
#include "p4pfr/io.hpp"
#include "p4pfr/robust.hpp"
#include "p4pfr/scene_sim.hpp"
#include "p4pfr/solver.hpp"

namespace {

using p4pfr::Error;
using p4pfr::ErrorKind;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  out << text;
}

// Shortest representation that reads back to the same double.
std::string number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::InvalidInput, "--range must be lo,hi");
  auto parse = [&](std::string_view part) {
    double v = 0.0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), v);
    if (r.ec != std::errc() || r.ptr != part.data() + part.size())
      throw Error(ErrorKind::InvalidInput, "--range must be lo,hi");
    return v;
  };
  const std::string_view sv(s);
  return {parse(sv.substr(0, comma)), parse(sv.substr(comma + 1))};
}

void emit(const json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty())
    std::cout << text;
  else
    write_file(path, text);
}

int cmd_solve(const std::string& input, const std::string& json_out) {
  const auto file = p4pfr::io::parse_correspondences(read_file(input));
  if (file.world.size() != 4) throw Error(ErrorKind::InvalidInput, "need exactly 4 points");
  const auto res = p4pfr::solve(file.world, file.image);
  emit(p4pfr::io::solve_document(res, file.world, file.image), json_out);
  return res.solutions.empty() ? 2 : 0;
}

struct BenchFlags {
  int n = 0;
  std::uint64_t seed = 0;
  double bins = 0.2;
  std::string range = "-20,-3";
  std::string out;
  std::string emit_one;
};

int cmd_bench(const BenchFlags& flags) {
  if (flags.n < 1) throw Error(ErrorKind::InvalidInput, "n must be >= 1");
  const auto range = parse_range(flags.range);
  p4pfr::SceneConfig cfg;
  cfg.seed = flags.seed;

  if (!flags.emit_one.empty()) {
    const auto gt = p4pfr::random_instance(cfg);
    p4pfr::io::CorrespondenceFile file{gt.world3d, gt.image, p4pfr::rms_radius(gt.image)};
    emit(p4pfr::io::to_json(file), flags.emit_one);
    emit(p4pfr::io::ground_truth_document(gt, cfg.seed), flags.emit_one + ".gt.json");
  }

  const auto res = p4pfr::benchmark_histogram(flags.n, cfg, flags.bins, range);
  if (!flags.out.empty()) {
    std::string csv = "bin_left,fraction\n";
    for (std::size_t b = 0; b < res.bin_left.size(); ++b)
      csv += number(res.bin_left[b]) + "," + number(res.fraction[b]) + "\n";
    write_file(flags.out, csv);
  }
  std::cout << "median_log10_err=" << number(res.median_log10_err) << "\n"
            << "p99_log10_err=" << number(res.p99_log10_err) << "\n"
            << "fail_rate=" << number(static_cast<double>(res.failures) / res.n) << "\n"
            << "mean_solve_us=" << number(res.mean_solve_us) << "\n"
            << "median_solve_us=" << number(res.median_solve_us) << "\n";
  return 0;
}

struct RansacFlags {
  double threshold = 2.0;
  int iters = 1000;
  std::uint64_t seed = 0;
  bool no_refine = false;
  std::string json_out;
};

int cmd_ransac(const std::string& input, const RansacFlags& flags) {
  p4pfr::RansacConfig cfg;
  cfg.inlier_threshold = flags.threshold;
  cfg.max_iters = flags.iters;
  cfg.seed = flags.seed;
  cfg.refine = !flags.no_refine;
  cfg.validate();
  const auto file = p4pfr::io::parse_correspondences(read_file(input));
  if (file.world.size() < 4) throw Error(ErrorKind::InvalidInput, "need at least 4 points");
  const auto res = p4pfr::ransac_pose(file.world, file.image, cfg);
  if (!res) {
    std::cerr << "no model found\n";
    return 2;
  }
  emit(p4pfr::io::ransac_document(*res, file.world, file.image), flags.json_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar absolute pose with unknown focal length and radial distortion"};
  app.require_subcommand(1);

  std::string solve_input, solve_out;
  auto* solve = app.add_subcommand("solve", "Solve a 4-point correspondence file");
  solve->add_option("file", solve_input, "Correspondence file")->required();
  solve->add_option("--json-out", solve_out, "Write the result document here instead of stdout");

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Seeded accuracy and timing benchmark");
  bench->add_option("--n", bench_flags.n, "Number of instances")->required();
  bench->add_option("--seed", bench_flags.seed, "Seed of the first instance");
  bench->add_option("--bins", bench_flags.bins, "Histogram bin width in log10 units");
  bench->add_option("--range", bench_flags.range, "Histogram range lo,hi in log10 units");
  bench->add_option("--out", bench_flags.out, "Histogram CSV path");
  bench->add_option("--emit-one", bench_flags.emit_one,
                    "Write the first instance as a correspondence file (plus <path>.gt.json)");

  std::string ransac_input;
  RansacFlags ransac_flags;
  auto* ransac = app.add_subcommand("ransac", "Robust estimation on a correspondence file");
  ransac->add_option("file", ransac_input, "Correspondence file")->required();
  ransac->add_option("--threshold", ransac_flags.threshold, "Inlier threshold in image units");
  ransac->add_option("--iters", ransac_flags.iters, "Maximum number of samples");
  ransac->add_option("--seed", ransac_flags.seed, "Sampling seed");
  ransac->add_flag("--no-refine", ransac_flags.no_refine, "Skip the final Gauss-Newton refinement");
  ransac->add_option("--json-out", ransac_flags.json_out, "Write the result document here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(solve_input, solve_out);
    if (*bench) return cmd_bench(bench_flags);
    if (*ransac) return cmd_ransac(ransac_input, ransac_flags);
  } catch (const Error& e) {
    std::cerr << "error: " << p4pfr::to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
