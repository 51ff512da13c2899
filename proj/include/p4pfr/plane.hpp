#pragma once

// Mapping coplanar 3D points into the canonical plane Z = 0 and the
// similarity normalization applied before solving.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "p4pfr/camera.hpp"
#include "p4pfr/error.hpp"

namespace p4pfr {

struct PlaneFrame {
  std::vector<WorldPoint> points;
  RigidTransform plane_to_world;  // (X, Y, 0) -> original 3D point
  double residual = 0.0;          // max out-of-plane distance
};

inline double diameter(std::span<const Eigen::Vector3d> pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

/// Total-least-squares plane fit. When the points already lie in a plane
/// Z = c the returned transform is the pure translation (0, 0, c).
inline PlaneFrame canonicalize_plane(std::span<const Eigen::Vector3d> pts,
                                     double coplanarity_tol = 1e-6,
                                     double collinear_tol = 1e-10) {
  if (pts.size() < 3) throw Error(ErrorKind::InvalidInput, "need at least 3 world points");
  for (const auto& p : pts)
    if (!p.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite world point");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  Eigen::MatrixX3d centered(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) centered.row(i) = (pts[i] - centroid).transpose();

  Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centered, Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= collinear_tol * sv(0))
    throw Error(ErrorKind::DegenerateScene, "world points are collinear");

  Eigen::Vector3d normal = svd.matrixV().col(2);
  if (normal.z() < 0.0 || (normal.z() == 0.0 && (normal.y() < 0.0 || (normal.y() == 0.0 && normal.x() < 0.0))))
    normal = -normal;

  PlaneFrame out;
  out.plane_to_world.R = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), normal)
                             .toRotationMatrix();
  out.plane_to_world.t = normal * normal.dot(centroid);

  const RigidTransform to_plane = out.plane_to_world.inverse();
  out.points.reserve(pts.size());
  for (const auto& p : pts) {
    const Eigen::Vector3d q = to_plane(p);
    out.points.push_back({q.x(), q.y()});
    out.residual = std::max(out.residual, std::abs(q.z()));
  }
  if (out.residual > coplanarity_tol * diameter(pts))
    throw Error(ErrorKind::NotCoplanar, "world points are not coplanar");
  return out;
}

/// World: X' = (X + world_shift) * world_scale. Image: x' = x * image_scale.
/// The image is never shifted so the distortion centre stays at the origin.
struct Normalization {
  Eigen::Vector2d world_shift = Eigen::Vector2d::Zero();
  double world_scale = 1.0;
  double image_scale = 1.0;

  WorldPoint apply(const WorldPoint& p) const {
    return {(p.X + world_shift.x()) * world_scale, (p.Y + world_shift.y()) * world_scale};
  }
  WorldPoint invert(const WorldPoint& p) const {
    return {p.X / world_scale - world_shift.x(), p.Y / world_scale - world_shift.y()};
  }
  ImagePoint apply(const ImagePoint& p) const { return {p.x * image_scale, p.y * image_scale}; }
  ImagePoint invert(const ImagePoint& p) const { return {p.x / image_scale, p.y / image_scale}; }

  // Model parameters under the image scaling x -> s x: f -> s f, k -> k / s^2.
  double focal_to_original(double f_norm) const { return f_norm / image_scale; }
  double distortion_to_original(double k_norm) const { return k_norm * image_scale * image_scale; }
};

struct NormalizedPoints {
  std::vector<WorldPoint> world;
  std::vector<ImagePoint> image;
  Normalization norm;
};

inline NormalizedPoints normalize_points(std::span<const WorldPoint> world,
                                         std::span<const ImagePoint> image) {
  constexpr double kTargetRms = 1.4142135623730951;
  constexpr double kMinRms = 1e-14;
  NormalizedPoints out;
  if (world.empty() || image.empty())
    throw Error(ErrorKind::InvalidInput, "empty point set");

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : world) centroid += Eigen::Vector2d(p.X, p.Y);
  centroid /= static_cast<double>(world.size());
  double wsq = 0.0;
  for (const auto& p : world) wsq += (Eigen::Vector2d(p.X, p.Y) - centroid).squaredNorm();
  const double world_rms = std::sqrt(wsq / static_cast<double>(world.size()));

  double isq = 0.0;
  for (const auto& p : image) isq += p.x * p.x + p.y * p.y;
  const double image_rms = std::sqrt(isq / static_cast<double>(image.size()));

  if (!(world_rms >= kMinRms) || !(image_rms >= kMinRms))
    throw Error(ErrorKind::DegenerateScene, "point spread too small to normalize");

  out.norm.world_shift = -centroid;
  out.norm.world_scale = kTargetRms / world_rms;
  out.norm.image_scale = kTargetRms / image_rms;
  out.world.reserve(world.size());
  out.image.reserve(image.size());
  for (const auto& p : world) out.world.push_back(out.norm.apply(p));
  for (const auto& p : image) out.image.push_back(out.norm.apply(p));
  return out;
}

}  // namespace p4pfr
