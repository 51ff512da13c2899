#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "p4pfr/camera.hpp"
#include "p4pfr/plane.hpp"

using namespace p4pfr;

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

}  // namespace

TEST(Distortion, ZeroKIsIdentity) {
  const auto d = distort_forward(0.3, -0.7, 0.0);
  ASSERT_TRUE(d);
  EXPECT_EQ((*d)(0), 0.3);
  EXPECT_EQ((*d)(1), -0.7);
}

TEST(Distortion, CentreIsFixed) {
  for (double k : {-0.5, 0.0, 0.2}) {
    const auto d = distort_forward(0.0, 0.0, k);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->norm(), 0.0);
  }
}

TEST(Distortion, QuadraticBranch) {
  const auto d = distort_forward(1.0, 0.0, -0.25);
  ASSERT_TRUE(d);
  const double rd = (std::sqrt(2.0) - 1.0) / 0.5;
  EXPECT_NEAR((*d)(0), rd, 1e-15);
  EXPECT_NEAR(rd / (1.0 - 0.25 * rd * rd), 1.0, 1e-15);
}

TEST(Distortion, OutsideInvertibleRange) {
  // 1 - 4 k r^2 < 0
  EXPECT_FALSE(distort_forward(1.0, 0.0, 0.3));
}

TEST(DistortionProperty, RoundTrip) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> uk(-1.0, 0.3), ur(-2.0, 2.0);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const double k = uk(rng), xu = ur(rng), yu = ur(rng);
    const auto d = distort_forward(xu, yu, k);
    if (!d) continue;
    const Eigen::Vector2d u = undistort((*d)(0), (*d)(1), k);
    ASSERT_LE((u - Eigen::Vector2d(xu, yu)).norm(), 1e-12 * (1.0 + std::hypot(xu, yu)))
        << "k=" << k << " xu=" << xu << " yu=" << yu;
    ++checked;
  }
  EXPECT_GT(checked, 50000);
}

TEST(Project, OpticalAxis) {
  Camera cam{Eigen::Matrix3d::Identity(), {0, 0, 5}, 1.0, 0.0};
  const auto p = project(cam, {0, 0, 0});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->x, 0.0);
  EXPECT_EQ(p->y, 0.0);
}

TEST(Project, Pinhole) {
  Camera cam{Eigen::Matrix3d::Identity(), {0, 0, 2}, 2.0, 0.0};
  const auto p = project(cam, {1, 0, 0});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->x, 1.0);
  EXPECT_EQ(p->y, 0.0);
  EXPECT_EQ(p->r2, 1.0);
}

TEST(Project, BehindCamera) {
  Camera cam{Eigen::Matrix3d::Identity(), {0, 0, -1}, 1.0, 0.0};
  EXPECT_FALSE(project(cam, {0, 0, 0}));
  EXPECT_FALSE(project(cam, {0.2, 0.1, 1.0}));
}

TEST(ProjectProperty, JointSceneScaling) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uc(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    Camera cam{random_rotation(rng), {u(rng), u(rng), 5.0 + u(rng)}, 1.0 + 0.5 * u(rng), -0.2 * std::abs(u(rng))};
    const Eigen::Vector3d X = cam.R.transpose() * Eigen::Vector3d(u(rng), u(rng), 0.0);  // depth t.z
    const double c = uc(rng);
    Camera scaled = cam;
    scaled.t *= c;
    const auto a = project(cam, X), b = project(scaled, c * X);
    ASSERT_TRUE(a && b);
    EXPECT_NEAR(a->x, b->x, 1e-12);
    EXPECT_NEAR(a->y, b->y, 1e-12);
  }
}

TEST(Rotation, ExpIsOrthonormal) {
  const Eigen::Matrix3d R = rotation_exp({0.3, -1.2, 0.5});
  EXPECT_LE((R.transpose() * R - Eigen::Matrix3d::Identity()).norm(), 1e-14);
  EXPECT_NEAR(R.determinant(), 1.0, 1e-14);
  EXPECT_EQ(rotation_exp(Eigen::Vector3d::Zero()), Eigen::Matrix3d::Identity());
}

TEST(Plane, AlreadyCanonical) {
  const std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const auto pf = canonicalize_plane(pts);
  EXPECT_LE((pf.plane_to_world.R - Eigen::Matrix3d::Identity()).norm(), 1e-15);
  EXPECT_LE(pf.plane_to_world.t.norm(), 1e-15);
  EXPECT_EQ(pf.residual, 0.0);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(pf.points[i].X, pts[i].x(), 1e-15);
    EXPECT_NEAR(pf.points[i].Y, pts[i].y(), 1e-15);
  }
}

TEST(Plane, OffsetPlane) {
  const std::vector<Eigen::Vector3d> pts{{0, 0, 5}, {1, 0, 5}, {1, 1, 5}, {0, 1, 5}};
  const auto pf = canonicalize_plane(pts);
  EXPECT_LE((pf.plane_to_world.t - Eigen::Vector3d(0, 0, 5)).norm(), 1e-14);
  EXPECT_LE(pf.residual, 1e-14);
}

TEST(Plane, RotatedSquareIsCongruent) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Matrix3d G = random_rotation(rng);
    const Eigen::Vector3d g(0.3, -2.0, 1.5);
    const std::vector<Eigen::Vector3d> sq{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    std::vector<Eigen::Vector3d> pts;
    for (const auto& p : sq) pts.push_back(G * p + g);
    const auto pf = canonicalize_plane(pts);
    EXPECT_LE(pf.residual, 1e-12);
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d back = pf.plane_to_world({pf.points[i].X, pf.points[i].Y, 0.0});
      EXPECT_LE((back - pts[i]).norm(), 1e-12);
      for (int j = 0; j < 4; ++j) {
        const double d2 = std::hypot(pf.points[i].X - pf.points[j].X, pf.points[i].Y - pf.points[j].Y);
        EXPECT_NEAR(d2, (sq[i] - sq[j]).norm(), 1e-12);
      }
    }
  }
}

TEST(Plane, NotCoplanar) {
  const std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0.1}};
  try {
    canonicalize_plane(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCoplanar);
  }
}

TEST(Plane, Collinear) {
  const std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  try {
    canonicalize_plane(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateScene);
  }
}

TEST(Normalize, Fixpoint) {
  const std::vector<WorldPoint> w{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const std::vector<ImagePoint> im{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const auto np = normalize_points(w, im);
  EXPECT_NEAR(np.norm.world_scale, 1.0, 1e-15);
  EXPECT_NEAR(np.norm.image_scale, 1.0, 1e-15);
  EXPECT_EQ(np.norm.world_shift.norm(), 0.0);
}

TEST(Normalize, ShiftedSquare) {
  const std::vector<WorldPoint> w{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<ImagePoint> im{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const auto np = normalize_points(w, im);
  EXPECT_NEAR(np.norm.world_shift.x(), -1.0, 1e-15);
  EXPECT_NEAR(np.norm.world_shift.y(), -1.0, 1e-15);
  EXPECT_NEAR(np.norm.world_scale, 1.0, 1e-15);
}

TEST(Normalize, ImageScaleAndParameterMapping) {
  const std::vector<WorldPoint> w{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  std::vector<ImagePoint> im{{0.1, 0.3}, {-0.4, 0.2}, {-0.3, -0.5}, {0.6, -0.1}};
  const auto a = normalize_points(w, im);
  for (auto& p : im) p = ImagePoint(p.x * 100.0, p.y * 100.0);
  const auto b = normalize_points(w, im);
  EXPECT_NEAR(b.norm.image_scale / a.norm.image_scale, 0.01, 1e-15);
  // f_orig = f_norm / image_scale, k_orig = k_norm * image_scale^2
  EXPECT_NEAR(b.norm.focal_to_original(2.0), 2.0 / b.norm.image_scale, 1e-12);
  EXPECT_NEAR(b.norm.distortion_to_original(-0.3), -0.3 * b.norm.image_scale * b.norm.image_scale, 1e-18);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(a.image[i].x, b.image[i].x, 1e-14);
    EXPECT_NEAR(a.image[i].y, b.image[i].y, 1e-14);
  }
}

TEST(Normalize, ApplyInvertRoundTrip) {
  Normalization n;
  n.world_shift = {0.37, -12.5};
  n.world_scale = 0.0123;
  n.image_scale = 417.0;
  const WorldPoint w{3.25, -7.5};
  const WorldPoint w2 = n.invert(n.apply(w));
  EXPECT_NEAR(w2.X, w.X, 1e-14 * std::abs(w.X));
  EXPECT_NEAR(w2.Y, w.Y, 1e-14 * std::abs(w.Y));
  const ImagePoint p{0.125, -3.5};
  const ImagePoint p2 = n.invert(n.apply(p));
  EXPECT_NEAR(p2.x, p.x, 1e-14 * std::abs(p.x));
  EXPECT_NEAR(p2.y, p.y, 1e-14 * std::abs(p.y));
}

TEST(Normalize, DegenerateSpread) {
  const std::vector<WorldPoint> w(4, WorldPoint{1, 1});
  const std::vector<ImagePoint> im{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  try {
    normalize_points(w, im);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateScene);
  }
}
