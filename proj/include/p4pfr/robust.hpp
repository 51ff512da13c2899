#pragma once

// Hypothesize-and-verify estimation over n >= 4 coplanar correspondences with
// the four-point solver as hypothesis generator, followed by Gauss-Newton
// refinement of (R, t, f, k) on the inliers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "p4pfr/camera.hpp"
#include "p4pfr/error.hpp"
#include "p4pfr/plane.hpp"
#include "p4pfr/solver.hpp"

namespace p4pfr {

struct RansacConfig {
  int max_iters = 1000;
  double inlier_threshold = 2.0;
  double confidence = 0.999;
  std::uint64_t seed = 0;
  bool refine = true;
  int refine_iters = 10;
  double min_sample_area = 1e-3;  // relative to the squared diameter of the point set
  double refine_threshold_factor = 5.0;

  void validate() const {
    if (max_iters < 1) throw Error(ErrorKind::InvalidInput, "iters must be ≥ 1");
    if (!(inlier_threshold > 0.0)) throw Error(ErrorKind::InvalidInput, "threshold must be > 0");
    if (!(confidence > 0.0 && confidence < 1.0))
      throw Error(ErrorKind::InvalidInput, "confidence must be in (0, 1)");
  }
};

struct RobustResult {
  PoseSolution solution;
  std::vector<bool> inlier_mask;
  std::vector<double> errors;  // reprojection error of every correspondence
  int iterations_run = 0;
  std::vector<double> score_history;  // MSAC cost of each improvement
};

/// Parameter order of the refinement state: rotation increment (3, applied
/// as R <- exp(omega) R), translation (3), focal length, distortion.
using Jacobian28 = Eigen::Matrix<double, 2, 8>;

/// Predicted distorted image point and its Jacobian with respect to the
/// refinement parameters. None when the point cannot be projected.
inline std::optional<std::pair<Eigen::Vector2d, Jacobian28>> projection_jacobian(
    const Camera& cam, const Eigen::Vector3d& X) {
  const Eigen::Vector3d rx = cam.R * X;
  const Eigen::Vector3d pc = rx + cam.t;
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double iz = 1.0 / pc.z();
  const double u = pc.x() * iz, v = pc.y() * iz;
  const double xu = cam.f * u, yu = cam.f * v;
  const double rho = xu * xu + yu * yu;
  const double disc = 1.0 - 4.0 * cam.k * rho;
  if (!(disc > 0.0)) return std::nullopt;
  const double s = std::sqrt(disc);
  const double g = 2.0 / (1.0 + s);
  const double common = 4.0 / (s * (1.0 + s) * (1.0 + s));
  const double dg_drho = cam.k * common;
  const double dg_dk = rho * common;

  Eigen::Matrix2d d_dist;  // d(xd, yd) / d(xu, yu)
  const Eigen::Vector2d pu(xu, yu);
  d_dist = g * Eigen::Matrix2d::Identity() + 2.0 * dg_drho * pu * pu.transpose();

  Eigen::Matrix<double, 2, 3> d_proj;  // d(xu, yu) / d pc
  d_proj << cam.f * iz, 0.0, -cam.f * pc.x() * iz * iz, 0.0, cam.f * iz, -cam.f * pc.y() * iz * iz;
  const Eigen::Matrix<double, 2, 3> d_pc = d_dist * d_proj;

  Jacobian28 J;
  J.block<2, 3>(0, 0) = -d_pc * skew(rx);
  J.block<2, 3>(0, 3) = d_pc;
  J.col(6) = d_dist * Eigen::Vector2d(u, v);
  J.col(7) = pu * dg_dk;
  return std::make_pair(Eigen::Vector2d(xu * g, yu * g), J);
}

inline Camera apply_increment(const Camera& cam, const Eigen::Matrix<double, 8, 1>& delta) {
  Camera out = cam;
  out.R = rotation_exp(delta.head<3>()) * cam.R;
  // Re-orthonormalize to keep R on the rotation manifold.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(out.R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.R = svd.matrixU() * svd.matrixV().transpose();
  out.t = cam.t + delta.segment<3>(3);
  out.f = cam.f + delta(6);
  out.k = cam.k + delta(7);
  return out;
}

inline double inlier_cost(const Camera& cam, std::span<const Eigen::Vector3d> world3d,
                          std::span<const ImagePoint> image, const std::vector<bool>& mask) {
  double cost = 0.0;
  for (std::size_t i = 0; i < world3d.size(); ++i) {
    if (!mask[i]) continue;
    const double e = point_reprojection_error(cam, world3d[i], image[i]);
    cost += e * e;
  }
  return cost;
}

/// Gauss-Newton on the summed squared reprojection error of the masked
/// correspondences, with step halving. The returned solution never has a
/// higher inlier cost than the initial one.
inline PoseSolution refine(const PoseSolution& initial, std::span<const Eigen::Vector3d> world3d,
                           std::span<const ImagePoint> image, const std::vector<bool>& inlier_mask,
                           int max_iters = 10) {
  if (world3d.size() != image.size() || inlier_mask.size() != image.size())
    throw Error(ErrorKind::InvalidInput, "refine: size mismatch");
  const auto m = static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
  if (m < 4) throw Error(ErrorKind::InvalidInput, "refine needs at least 4 inliers");

  Camera cam = initial.camera();
  double cost = inlier_cost(cam, world3d, image, inlier_mask);
  if (!std::isfinite(cost)) return initial;

  for (int it = 0; it < max_iters && cost > 0.0; ++it) {
    Eigen::MatrixXd J(2 * m, 8);
    Eigen::VectorXd r(2 * m);
    int row = 0;
    for (std::size_t i = 0; i < world3d.size(); ++i) {
      if (!inlier_mask[i]) continue;
      const auto pj = projection_jacobian(cam, world3d[i]);
      if (!pj) return initial;
      r.segment<2>(row) = pj->first - Eigen::Vector2d(image[i].x, image[i].y);
      J.block<2, 8>(row, 0) = pj->second;
      row += 2;
    }
    Eigen::VectorXd scale = J.colwise().norm().transpose();
    for (int c = 0; c < 8; ++c) scale(c) = scale(c) > 0.0 ? 1.0 / scale(c) : 1.0;
    const Eigen::MatrixXd Js = J * scale.asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Js);
    qr.setThreshold(1e-12);
    if (qr.rank() < 8) break;
    Eigen::Matrix<double, 8, 1> delta = scale.asDiagonal() * qr.solve(-r);

    bool improved = false;
    for (int halving = 0; halving < 20; ++halving) {
      const Camera trial = apply_increment(cam, delta);
      const double c = trial.f > 0.0 ? inlier_cost(trial, world3d, image, inlier_mask)
                                     : std::numeric_limits<double>::infinity();
      if (c < cost) {
        improved = cost - c > 1e-15 * cost;
        cam = trial;
        cost = c;
        break;
      }
      delta *= 0.5;
    }
    if (!improved) break;
  }

  PoseSolution out = initial;
  out.R = cam.R;
  out.t = cam.t;
  out.f = cam.f;
  out.k = cam.k;
  return out;
}

namespace detail {

struct Score {
  int inliers = 0;
  double cost = std::numeric_limits<double>::infinity();

  bool better_than(const Score& o) const {
    return inliers > o.inliers || (inliers == o.inliers && cost < o.cost);
  }
};

inline Score msac_score(const Camera& cam, std::span<const Eigen::Vector3d> world3d,
                        std::span<const ImagePoint> image, double thr,
                        std::vector<double>* errors = nullptr) {
  Score s;
  s.cost = 0.0;
  const double thr2 = thr * thr;
  if (errors) errors->assign(world3d.size(), 0.0);
  for (std::size_t i = 0; i < world3d.size(); ++i) {
    const double e = point_reprojection_error(cam, world3d[i], image[i]);
    if (errors) (*errors)[i] = e;
    if (e <= thr) ++s.inliers;
    s.cost += std::min(e * e, thr2);
  }
  return s;
}

inline int required_iterations(int inliers, int n, double confidence, int max_iters) {
  const double w = static_cast<double>(inliers) / static_cast<double>(n);
  const double p_good = w * w * w * w;
  if (p_good >= 1.0) return 1;
  if (p_good <= 0.0) return max_iters;
  const double needed = std::log(1.0 - confidence) / std::log(1.0 - p_good);
  return static_cast<int>(std::min<double>(max_iters, std::ceil(needed)));
}

}  // namespace detail

/// Seeded MSAC over random 4-subsets. All points must lie on one plane.
inline std::optional<RobustResult> ransac_pose(std::span<const Eigen::Vector3d> world3d,
                                               std::span<const ImagePoint> image,
                                               const RansacConfig& cfg,
                                               const SolverOptions& opt = {}) {
  cfg.validate();
  const int n = static_cast<int>(world3d.size());
  if (n < 4 || world3d.size() != image.size())
    throw Error(ErrorKind::InvalidInput, "need at least 4 correspondences");

  const PlaneFrame plane = canonicalize_plane(world3d, opt.coplanarity_tol, opt.collinear_tol);
  const double diam = diameter(world3d);
  const double min_area = cfg.min_sample_area * diam * diam;

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  RobustResult best;
  detail::Score best_score;
  bool have_model = false;
  int needed = cfg.max_iters;
  int it = 0;
  for (; it < std::min(needed, cfg.max_iters); ++it) {
    for (int j = 0; j < 4; ++j) {
      std::uniform_int_distribution<int> pick(j, n - 1);
      std::swap(idx[j], idx[pick(rng)]);
    }
    std::array<WorldPoint, 4> wsub;
    std::array<ImagePoint, 4> isub;
    std::array<Eigen::Vector2d, 4> psub;
    for (int j = 0; j < 4; ++j) {
      wsub[j] = plane.points[idx[j]];
      isub[j] = image[idx[j]];
      psub[j] = {wsub[j].X, wsub[j].Y};
    }
    double area = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        for (int c = b + 1; c < 4; ++c) {
          const Eigen::Vector2d u = psub[b] - psub[a], v = psub[c] - psub[a];
          area = std::max(area, 0.5 * std::abs(u.x() * v.y() - u.y() * v.x()));
        }
    if (area <= min_area) continue;

    SolveResult sr;
    try {
      sr = solve_planar(wsub, isub, opt);
    } catch (const Error&) {
      continue;
    }
    for (auto& sol : sr.solutions) {
      compose_with_plane(sol, plane.plane_to_world);
      const detail::Score s = detail::msac_score(sol.camera(), world3d, image, cfg.inlier_threshold);
      if (!have_model || s.better_than(best_score)) {
        have_model = true;
        best_score = s;
        best.solution = sol;
        best.score_history.push_back(s.cost);
        needed = detail::required_iterations(s.inliers, n, cfg.confidence, cfg.max_iters);
      }
    }
  }
  best.iterations_run = it;
  if (!have_model || best_score.inliers < 4) return std::nullopt;

  detail::msac_score(best.solution.camera(), world3d, image, cfg.inlier_threshold, &best.errors);
  auto mask_from = [&](const std::vector<double>& errs) {
    std::vector<bool> mask(errs.size());
    for (std::size_t i = 0; i < errs.size(); ++i) mask[i] = errs[i] <= cfg.inlier_threshold;
    return mask;
  };
  best.inlier_mask = mask_from(best.errors);

  if (cfg.refine) {
    // The first round fits every point within refine_threshold_factor times
    // the threshold, so inliers that a noisy four-point model misses by a
    // small margin can be recovered; later rounds fit the strict inliers.
    // Each round re-classifies at the strict threshold.
    for (int round = 0; round < 4; ++round) {
      const double fit_thr = round == 0 ? cfg.refine_threshold_factor * cfg.inlier_threshold
                                        : cfg.inlier_threshold;
      std::vector<bool> fit_mask(best.errors.size());
      for (std::size_t i = 0; i < fit_mask.size(); ++i) fit_mask[i] = best.errors[i] <= fit_thr;
      const PoseSolution refined = refine(best.solution, world3d, image, fit_mask, cfg.refine_iters);
      std::vector<double> errs;
      const detail::Score s =
          detail::msac_score(refined.camera(), world3d, image, cfg.inlier_threshold, &errs);
      if (s.inliers < 4 || best_score.better_than(s)) break;
      std::vector<bool> mask = mask_from(errs);
      const bool same = mask == best.inlier_mask;
      best.solution = refined;
      best.errors = std::move(errs);
      best.inlier_mask = std::move(mask);
      best_score = s;
      best.score_history.push_back(s.cost);
      if (same && round > 0) break;
    }
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < best.errors.size(); ++i)
    if (best.inlier_mask[i]) worst = std::max(worst, best.errors[i]);
  best.solution.max_reproj_err = worst;
  return best;
}

}  // namespace p4pfr
