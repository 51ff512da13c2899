#pragma once

// Synthetic scenes with known pose, focal length and distortion, and the
// seeded benchmark that measures solver accuracy and run time over many
// random instances.
//
// Generator: world points uniform in [-e, e]^2 of a plane placed with a
// uniformly random rotation; the camera looks at a point near the centroid
// from a depth in depth_range, with the optical axis at most max_view_angle
// off the plane normal and a uniformly random roll. f and k are uniform in
// their ranges (image units are normalized so that f ~ 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "p4pfr/camera.hpp"
#include "p4pfr/error.hpp"
#include "p4pfr/solver.hpp"

namespace p4pfr {

struct SceneConfig {
  std::uint64_t seed = 0;
  int n_points = 4;
  double world_extent = 1.0;
  std::pair<double, double> f_range{0.5, 5.0};
  std::pair<double, double> k_range{-0.6, 0.1};
  std::pair<double, double> depth_range{2.0, 10.0};
  double max_view_angle = 60.0;  // degrees
  double center_jitter = 0.1;    // fraction of world_extent
  double min_area_fraction = 0.05;
  int max_attempts = 1000;

  void validate() const {
    if (n_points < 4) throw Error(ErrorKind::InvalidInput, "n_points must be >= 4");
    if (!(world_extent > 0.0)) throw Error(ErrorKind::InvalidInput, "world_extent must be positive");
    if (!(f_range.first > 0.0) || f_range.second < f_range.first)
      throw Error(ErrorKind::InvalidInput, "f_range must be positive and non-empty");
    if (k_range.second < k_range.first) throw Error(ErrorKind::InvalidInput, "k_range is empty");
    if (!(depth_range.first > 0.0) || depth_range.second < depth_range.first)
      throw Error(ErrorKind::InvalidInput, "depth_range must be positive and non-empty");
  }
};

struct GroundTruth {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double f = 1.0;
  double k = 0.0;
  std::vector<Eigen::Vector3d> world3d;
  std::vector<ImagePoint> image;
  std::vector<double> depths;

  Camera camera() const { return {R, t, f, k}; }
};

inline double rms_radius(std::span<const ImagePoint> image) {
  double s = 0.0;
  for (const auto& p : image) s += p.r2;
  return std::sqrt(s / static_cast<double>(image.size()));
}

inline double max_triangle_area(std::span<const Eigen::Vector2d> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t l = j + 1; l < pts.size(); ++l) {
        const Eigen::Vector2d a = pts[j] - pts[i], b = pts[l] - pts[i];
        best = std::max(best, 0.5 * std::abs(a.x() * b.y() - a.y() * b.x()));
      }
  return best;
}

inline GroundTruth random_instance(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double e = cfg.world_extent;
  const double min_area = cfg.min_area_fraction * 4.0 * e * e;
  const double max_angle = cfg.max_view_angle * std::numbers::pi / 180.0;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    std::vector<Eigen::Vector2d> planar(cfg.n_points);
    for (auto& p : planar) p = {uniform(-e, e), uniform(-e, e)};
    if (max_triangle_area(planar) < min_area) continue;

    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    const Eigen::Matrix3d G = q.toRotationMatrix();
    const Eigen::Vector3d g(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));

    GroundTruth gt;
    gt.world3d.reserve(cfg.n_points);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : planar) {
      gt.world3d.push_back(G * Eigen::Vector3d(p.x(), p.y(), 0.0) + g);
      centroid += p;
    }
    centroid /= static_cast<double>(cfg.n_points);

    // Optical axis: tilted from the plane normal by theta towards azimuth phi.
    const double theta = uniform(0.0, max_angle);
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double side = unit(rng) < 0.5 ? 1.0 : -1.0;
    const Eigen::Vector3d normal = side * G.col(2);
    const Eigen::Vector3d tangent = std::cos(phi) * G.col(0) + std::sin(phi) * G.col(1);
    const Eigen::Vector3d axis = -(std::cos(theta) * normal + std::sin(theta) * tangent);

    const Eigen::Vector2d target2 =
        centroid + cfg.center_jitter * e * Eigen::Vector2d(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    const Eigen::Vector3d target = G * Eigen::Vector3d(target2.x(), target2.y(), 0.0) + g;
    const double depth = uniform(cfg.depth_range.first, cfg.depth_range.second);
    const Eigen::Vector3d center = target - depth * axis;

    const double roll = uniform(0.0, 2.0 * std::numbers::pi);
    Eigen::Vector3d x_axis = axis.unitOrthogonal();
    x_axis = Eigen::AngleAxisd(roll, axis) * x_axis;
    const Eigen::Vector3d y_axis = axis.cross(x_axis);
    gt.R.row(0) = x_axis.transpose();
    gt.R.row(1) = y_axis.transpose();
    gt.R.row(2) = axis.transpose();
    gt.t = -gt.R * center;
    gt.f = uniform(cfg.f_range.first, cfg.f_range.second);
    gt.k = uniform(cfg.k_range.first, cfg.k_range.second);

    bool ok = true;
    const Camera cam = gt.camera();
    for (const auto& X : gt.world3d) {
      const auto img = project(cam, X);
      if (!img) {
        ok = false;
        break;
      }
      gt.image.push_back(*img);
      gt.depths.push_back((cam.R * X + cam.t).z());
    }
    if (ok) return gt;
  }
  throw Error(ErrorKind::GenerationExhausted, "scene generation exhausted its attempts");
}

/// Largest relative deviation of a solution from ground truth. Rotation error
/// is the Frobenius distance, translation is relative to |t|, f relative to
/// f, and k is measured as the change of k r^2 at the RMS image radius.
inline double pose_parameter_error(const PoseSolution& sol, const GroundTruth& gt) {
  const double rho = rms_radius(gt.image);
  const double er = (sol.R - gt.R).norm();
  const double et = (sol.t - gt.t).norm() / gt.t.norm();
  const double ef = std::abs(sol.f - gt.f) / gt.f;
  const double ek = std::abs(sol.k - gt.k) * rho * rho;
  return std::max({er, et, ef, ek});
}

struct BenchmarkResult {
  std::vector<double> bin_left;
  std::vector<double> fraction;
  int n = 0;
  int failures = 0;
  int max_solution_count = 0;
  int ground_truth_found = 0;  // instances with a solution within gt_tol
  double median_log10_err = 0.0;
  double p99_log10_err = 0.0;
  double mean_solve_us = 0.0;
  double median_solve_us = 0.0;
  std::vector<double> log10_errors;  // per instance, +inf on failure
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  const std::size_t i = std::min(v.size() - 1, idx == 0 ? 0 : idx - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(i), v.end());
  return v[i];
}

/// Solves n seeded instances (seeds config.seed + i) and histograms the
/// log10 of the best solution's max reprojection error, in units of the RMS
/// image radius. Failures (no solution or a thrown stage error) are counted
/// and left out of the bins.
inline BenchmarkResult benchmark_histogram(int n, const SceneConfig& config, double bin_width = 0.2,
                                           std::pair<double, double> range = {-20.0, -3.0},
                                           double gt_tol = 1e-6,
                                           const SolverOptions& opt = {}) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "n must be >= 1");
  if (!(bin_width > 0.0) || !(range.second > range.first))
    throw Error(ErrorKind::InvalidInput, "invalid histogram bins");

  BenchmarkResult res;
  res.n = n;
  const int nbins = std::max(1, static_cast<int>(std::lround((range.second - range.first) / bin_width)));
  std::vector<long> counts(nbins, 0);
  std::vector<double> times;
  times.reserve(n);
  res.log10_errors.reserve(n);

  for (int i = 0; i < n; ++i) {
    SceneConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(i);
    const GroundTruth gt = random_instance(cfg);

    SolveResult sr;
    bool failed = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      sr = solve(gt.world3d, gt.image, opt);
    } catch (const Error&) {
      failed = true;
    }
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());

    if (failed || sr.solutions.empty()) {
      ++res.failures;
      res.log10_errors.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    res.max_solution_count = std::max(res.max_solution_count, static_cast<int>(sr.solutions.size()));
    bool found = false;
    for (const auto& s : sr.solutions) found = found || pose_parameter_error(s, gt) <= gt_tol;
    if (found) ++res.ground_truth_found;

    const double err = sr.solutions.front().max_reproj_err / rms_radius(gt.image);
    const double lg = std::clamp(std::log10(err), range.first, range.second);
    res.log10_errors.push_back(lg);
    const int bin = std::clamp(static_cast<int>(std::floor((lg - range.first) / bin_width)), 0, nbins - 1);
    ++counts[bin];
  }

  res.bin_left.resize(nbins);
  res.fraction.resize(nbins);
  for (int b = 0; b < nbins; ++b) {
    // Rounded so that edges print as the decimal values they stand for.
    res.bin_left[b] = std::round((range.first + b * bin_width) * 1e9) / 1e9;
    res.fraction[b] = static_cast<double>(counts[b]) / static_cast<double>(n);
  }
  res.median_log10_err = percentile(res.log10_errors, 0.5);
  res.p99_log10_err = percentile(res.log10_errors, 0.99);
  double sum = 0.0;
  for (double t : times) sum += t;
  res.mean_solve_us = sum / static_cast<double>(n);
  res.median_solve_us = percentile(times, 0.5);
  return res;
}

}  // namespace p4pfr
