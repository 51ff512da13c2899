#pragma once

// Camera model shared by the solver, the simulator and the refiner:
// pinhole projection with focal length f followed by one-parameter
// division-model distortion centred at the image origin.

#include <array>
#include <cmath>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace p4pfr {

/// Point in the canonical world plane Z = 0.
struct WorldPoint {
  double X = 0.0;
  double Y = 0.0;
};

/// Distorted image observation; r2 caches x^2 + y^2.
struct ImagePoint {
  double x = 0.0;
  double y = 0.0;
  double r2 = 0.0;

  ImagePoint() = default;
  ImagePoint(double x_, double y_) : x(x_), y(y_), r2(x_ * x_ + y_ * y_) {}
};

struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d operator()(const Eigen::Vector3d& p) const { return R * p + t; }
  RigidTransform inverse() const { return {R.transpose(), -R.transpose() * t}; }
};

/// Radial gain r_d / r_u of the forward division model as a function of the
/// undistorted squared radius. Written as 2 / (1 + sqrt(1 - 4 k r_u^2)), which
/// is the branch of k r_u r_d^2 - r_d + r_u = 0 that tends to r_u as k -> 0.
inline std::optional<double> forward_gain(double ru2, double k) {
  const double disc = 1.0 - 4.0 * k * ru2;
  if (disc < 0.0) return std::nullopt;
  return 2.0 / (1.0 + std::sqrt(disc));
}

inline std::optional<Eigen::Vector2d> distort_forward(double xu, double yu, double k) {
  const auto g = forward_gain(xu * xu + yu * yu, k);
  if (!g) return std::nullopt;
  return Eigen::Vector2d(xu * *g, yu * *g);
}

inline Eigen::Vector2d undistort(double xd, double yd, double k) {
  const double d = 1.0 + k * (xd * xd + yd * yd);
  return {xd / d, yd / d};
}

/// Absolute camera: x_cam = R * X_world + t, projected with focal f and
/// distorted with division parameter k.
struct Camera {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double f = 1.0;
  double k = 0.0;
};

/// Returns none behind the camera or outside the invertible distortion range.
inline std::optional<ImagePoint> project(const Camera& cam, const Eigen::Vector3d& X) {
  const Eigen::Vector3d pc = cam.R * X + cam.t;
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double xu = cam.f * pc.x() / pc.z();
  const double yu = cam.f * pc.y() / pc.z();
  const auto d = distort_forward(xu, yu, cam.k);
  if (!d) return std::nullopt;
  return ImagePoint((*d)(0), (*d)(1));
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

inline Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& omega) {
  const double angle = omega.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

}  // namespace p4pfr
