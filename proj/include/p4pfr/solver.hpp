#pragma once

// Minimal solver for absolute pose of a camera with unknown focal length and
// one-parameter division-model distortion from four coplanar points.
//
// The camera of the plane is P = diag(1, 1, w) [r1 r2 t] with w = 1/f, acting
// on U = (X, Y, 1). The cross-product constraint u x P U = 0 for the
// undistorted observation u = (x, y, 1 + k r^2) gives, per point,
//   row 3:  y (p11 X + p12 Y + p14) - x (p21 X + p22 Y + p24) = 0
//   row 2:  (1 + k r^2)(p11 X + p12 Y + p14) - x (p31 X + p32 Y + p34) = 0
// Row 3 over four points leaves a one-parameter family n1 + beta n2 for the
// first two rows. Row 2 over three points fixes the third row as a linear
// function of (beta, k beta, k, 1); row 2 of the fourth point yields k as a
// rational function of beta. The orthogonality and equal-norm conditions on
// the first two columns then reduce to det(B(beta)) = 0, a degree 8
// polynomial carrying the squared denominator of k(beta); removing it leaves
// a sextic in beta.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "p4pfr/camera.hpp"
#include "p4pfr/error.hpp"
#include "p4pfr/plane.hpp"
#include "p4pfr/poly.hpp"

namespace p4pfr {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix34d = Eigen::Matrix<double, 3, 4>;

struct SolverOptions {
  double coplanarity_tol = 1e-6;
  double collinear_tol = 1e-10;
  double rank_tol = 1e-10;
  double area_tol = 1e-10;
  double det_tol = 1e-12;
  double deflate_tol = 1e-8;
  double w2_min = 1e-14;
  double den_tol = 1e-12;
  double w2_consistency_tol = 1e-3;
  int beta_polish_iters = 3;
  RootOptions roots;
};

/// First two camera rows (p11, p12, p14, p21, p22, p24) = n1 + beta * n2.
struct NullspaceBasis {
  Vector6d n1 = Vector6d::Zero();
  Vector6d n2 = Vector6d::Zero();

  Vector6d at(double beta) const { return n1 + beta * n2; }
};

/// C (p31, p32, p34)^T = D (beta, k beta, k, 1)^T and M = C^-1 D.
struct Row2System {
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  Matrix34d D = Matrix34d::Zero();
  Matrix34d M = Matrix34d::Zero();

  Eigen::Vector3d third_row(double beta, double k) const {
    return M * Eigen::Vector4d(beta, k * beta, k, 1.0);
  }
};

/// q31 k beta + q32 k + q33 beta + q34 = 0, i.e. k = -(q33 beta + q34) / (q31 beta + q32).
struct KRational {
  double q31 = 0.0, q32 = 0.0, q33 = 0.0, q34 = 0.0;

  Poly numerator() const { return Poly{q34, q33}; }
  Poly denominator() const { return Poly{q32, q31}; }
  double denominator_at(double beta) const { return q31 * beta + q32; }
  double k_at(double beta) const { return -(q33 * beta + q34) / (q31 * beta + q32); }
};

/// Rows of B(beta) (w^2, 1)^T = 0 after clearing the squared denominator.
struct BetaPolyMatrix {
  Poly q11, q12, q21, q22;

  Eigen::Matrix2d at(double beta) const {
    Eigen::Matrix2d b;
    b << poly_eval(q11, beta), poly_eval(q12, beta), poly_eval(q21, beta), poly_eval(q22, beta);
    return b;
  }
};

struct BetaPolynomial {
  Poly sextic;
  Poly det8;
  double remainder1 = 0.0;
  double remainder2 = 0.0;
};

struct TripleSelection {
  std::array<int, 3> triple{0, 1, 2};
  int fourth = 3;
};

enum class RejectReason {
  NegativeFocalSquared,
  DenominatorVanishes,
  RowsInconsistent,
  CheiralityFailed,
  DistortionSingular,
};

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::NegativeFocalSquared: return "negative_focal_squared";
    case RejectReason::DenominatorVanishes: return "denominator_vanishes";
    case RejectReason::RowsInconsistent: return "rows_inconsistent";
    case RejectReason::CheiralityFailed: return "cheirality_failed";
    case RejectReason::DistortionSingular: return "distortion_singular";
  }
  return "unknown";
}

struct Rejection {
  double beta = 0.0;
  RejectReason reason = RejectReason::CheiralityFailed;
};

struct Candidate {
  double beta = 0.0;
  double w = 0.0;
  double k = 0.0;
  Eigen::Matrix3d P = Eigen::Matrix3d::Zero();  // includes w in the third row
};

struct PoseSolution {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double f = 1.0;
  double k = 0.0;

  // Internal parameters in the normalized frame.
  double beta = 0.0;
  double w = 1.0;
  double k_normalized = 0.0;
  Eigen::Matrix3d camera_normalized = Eigen::Matrix3d::Zero();

  std::array<double, 4> depths{};
  std::array<double, 4> reproj_errors{};
  double max_reproj_err = 0.0;

  Camera camera() const { return {R, t, f, k}; }
};

struct SolveResult {
  std::vector<PoseSolution> solutions;
  std::vector<Rejection> rejections;
  int degree = 0;  // degree of the beta polynomial after trimming
};

namespace detail {

inline void require_four(std::size_t nw, std::size_t ni) {
  if (nw != 4 || ni != 4) throw Error(ErrorKind::InvalidInput, "need exactly 4 points");
}

inline double triangle_area(const WorldPoint& a, const WorldPoint& b, const WorldPoint& c) {
  return 0.5 * std::abs((b.X - a.X) * (c.Y - a.Y) - (c.X - a.X) * (b.Y - a.Y));
}

}  // namespace detail

inline NullspaceBasis row3_nullspace(std::span<const WorldPoint> world,
                                     std::span<const ImagePoint> image,
                                     const SolverOptions& opt = {}) {
  detail::require_four(world.size(), image.size());
  Eigen::Matrix<double, 4, 6> A;
  for (int i = 0; i < 4; ++i) {
    const double X = world[i].X, Y = world[i].Y, x = image[i].x, y = image[i].y;
    A.row(i) << y * X, y * Y, y, -x * X, -x * Y, -x;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 6>> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(3) <= opt.rank_tol * sv(0))
    throw Error(ErrorKind::RankDeficient, "row-3 constraint matrix is rank deficient");
  return {svd.matrixV().col(4), svd.matrixV().col(5)};
}

/// Picks the three world points spanning the largest triangle; ties go to
/// the lexicographically first triple.
inline TripleSelection select_triple(std::span<const WorldPoint> world,
                                     const SolverOptions& opt = {}) {
  if (world.size() != 4) throw Error(ErrorKind::InvalidInput, "need exactly 4 points");
  static constexpr std::array<TripleSelection, 4> kTriples{{
      {{0, 1, 2}, 3}, {{0, 1, 3}, 2}, {{0, 2, 3}, 1}, {{1, 2, 3}, 0}}};
  TripleSelection best = kTriples[0];
  double best_area = -1.0;
  for (const auto& t : kTriples) {
    const double a = detail::triangle_area(world[t.triple[0]], world[t.triple[1]], world[t.triple[2]]);
    if (a > best_area) {
      best_area = a;
      best = t;
    }
  }
  double diam2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double dx = world[i].X - world[j].X, dy = world[i].Y - world[j].Y;
      diam2 = std::max(diam2, dx * dx + dy * dy);
    }
  if (!(best_area > opt.area_tol * diam2))
    throw Error(ErrorKind::DegenerateScene, "all point triples are collinear");
  return best;
}

inline Row2System build_row2_system(std::span<const WorldPoint, 3> world,
                                    std::span<const ImagePoint, 3> image,
                                    const NullspaceBasis& basis,
                                    const SolverOptions& opt = {}) {
  Row2System sys;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d U(world[i].X, world[i].Y, 1.0);
    const double a0 = basis.n1.head<3>().dot(U);
    const double a1 = basis.n2.head<3>().dot(U);
    const double r2 = image[i].r2;
    sys.C.row(i) = image[i].x * U.transpose();
    sys.D.row(i) << a1, r2 * a1, r2 * a0, a0;
  }
  const double cn = sys.C.norm();
  if (!(std::abs(sys.C.determinant()) > opt.det_tol * cn * cn * cn))
    throw Error(ErrorKind::SingularC, "row-2 system matrix C is singular");
  sys.M = sys.C.partialPivLu().solve(sys.D);
  return sys;
}

inline KRational k_rational(const WorldPoint& world4, const ImagePoint& image4,
                            const NullspaceBasis& basis, const Row2System& sys) {
  const Eigen::Vector3d U(world4.X, world4.Y, 1.0);
  const double a0 = basis.n1.head<3>().dot(U);
  const double a1 = basis.n2.head<3>().dot(U);
  const double r2 = image4.r2;
  // Third-row contribution x4 * U^T M, over (beta, k beta, k, 1).
  const Eigen::RowVector4d m = image4.x * (U.transpose() * sys.M);

  KRational kr;
  kr.q31 = r2 * a1 - m(1);
  kr.q32 = r2 * a0 - m(2);
  kr.q33 = a1 - m(0);
  kr.q34 = a0 - m(3);

  const double scale = std::abs(r2 * a1) + std::abs(r2 * a0) + std::abs(a1) + std::abs(a0) +
                       m.cwiseAbs().sum();
  const double qmax = std::max({std::abs(kr.q31), std::abs(kr.q32), std::abs(kr.q33), std::abs(kr.q34)});
  if (!(qmax > 1e-14 * scale))
    throw Error(ErrorKind::DegenerateInstance, "fourth-point constraint vanishes");
  return kr;
}

inline BetaPolyMatrix build_beta_matrix(const NullspaceBasis& basis, const Row2System& sys,
                                        const KRational& kr) {
  const Poly p11{basis.n1(0), basis.n2(0)};
  const Poly p12{basis.n1(1), basis.n2(1)};
  const Poly p21{basis.n1(3), basis.n2(3)};
  const Poly p22{basis.n1(4), basis.n2(4)};
  const Poly den = kr.denominator();
  const Poly num = kr.numerator();

  // den * p3j = (M_j0 beta + M_j3) den - (M_j1 beta + M_j2) num, using k den = -num.
  auto scaled_third = [&](int j) {
    return poly_sub(poly_mul(Poly{sys.M(j, 3), sys.M(j, 0)}, den),
                    poly_mul(Poly{sys.M(j, 2), sys.M(j, 1)}, num));
  };
  const Poly s31 = scaled_third(0);
  const Poly s32 = scaled_third(1);
  const Poly den2 = poly_mul(den, den);

  BetaPolyMatrix bm;
  // f1 = w^2 (p11 p12 + p21 p22) + p31 p32
  bm.q11 = poly_mul(poly_add(poly_mul(p11, p12), poly_mul(p21, p22)), den2);
  bm.q12 = poly_mul(s31, s32);
  // f2 = w^2 (p11^2 + p21^2 - p12^2 - p22^2) + p31^2 - p32^2
  bm.q21 = poly_mul(poly_sub(poly_add(poly_mul(p11, p11), poly_mul(p21, p21)),
                             poly_add(poly_mul(p12, p12), poly_mul(p22, p22))),
                    den2);
  bm.q22 = poly_sub(poly_mul(s31, s31), poly_mul(s32, s32));
  return bm;
}

inline BetaPolynomial beta_polynomial(const BetaPolyMatrix& bm, const KRational& kr,
                                      const SolverOptions& opt = {}) {
  BetaPolynomial out;
  out.det8 = poly_sub(poly_mul(bm.q11, bm.q22), poly_mul(bm.q12, bm.q21));
  const double norm = out.det8.max_abs();
  if (!(norm > 0.0)) throw Error(ErrorKind::DegenerateInstance, "determinant polynomial vanishes");

  const Deflation first = poly_deflate_linear_stable(out.det8, kr.q32, kr.q31);
  const Deflation second = poly_deflate_linear_stable(first.quotient, kr.q32, kr.q31);
  out.remainder1 = first.remainder;
  out.remainder2 = second.remainder;
  if (std::abs(out.remainder1) > opt.deflate_tol * norm ||
      std::abs(out.remainder2) > opt.deflate_tol * norm)
    throw Error(ErrorKind::DeflationFailed, "denominator does not divide det(B) twice");
  out.sextic = second.quotient;
  return out;
}

/// det(B)(beta) / den(beta)^2 and its derivative, evaluated from the
/// unexpanded factors g1 (s31^2 - s32^2) - g2 s31 s32 with s3j = den * p3j and
/// g1, g2 the first-two-row products. Used to polish roots of the sextic
/// without the cancellation present in its expanded coefficients.
inline std::pair<double, double> beta_residual(double beta, const NullspaceBasis& basis,
                                               const Row2System& sys, const KRational& kr) {
  const Vector6d v = basis.at(beta);
  const Vector6d& dv = basis.n2;
  const double g1 = v(0) * v(1) + v(3) * v(4);
  const double dg1 = dv(0) * v(1) + v(0) * dv(1) + dv(3) * v(4) + v(3) * dv(4);
  const double g2 = v(0) * v(0) + v(3) * v(3) - v(1) * v(1) - v(4) * v(4);
  const double dg2 = 2.0 * (v(0) * dv(0) + v(3) * dv(3) - v(1) * dv(1) - v(4) * dv(4));

  const double den = kr.q31 * beta + kr.q32;
  const double num = kr.q33 * beta + kr.q34;
  double s[2], ds[2];
  for (int j = 0; j < 2; ++j) {
    const double a = sys.M(j, 0) * beta + sys.M(j, 3);
    const double b = sys.M(j, 1) * beta + sys.M(j, 2);
    s[j] = a * den - b * num;
    ds[j] = sys.M(j, 0) * den + a * kr.q31 - sys.M(j, 1) * num - b * kr.q33;
  }
  const double value = g1 * (s[0] * s[0] - s[1] * s[1]) - g2 * s[0] * s[1];
  const double deriv = dg1 * (s[0] * s[0] - s[1] * s[1]) +
                       g1 * 2.0 * (s[0] * ds[0] - s[1] * ds[1]) -
                       dg2 * s[0] * s[1] - g2 * (ds[0] * s[1] + s[0] * ds[1]);
  return {value, deriv};
}

inline double polish_beta(double beta, const NullspaceBasis& basis, const Row2System& sys,
                          const KRational& kr, int iters = 3) {
  auto [h, dh] = beta_residual(beta, basis, sys, kr);
  for (int it = 0; it < iters && h != 0.0 && dh != 0.0; ++it) {
    const double cand = beta - h / dh;
    const auto [hc, dhc] = beta_residual(cand, basis, sys, kr);
    if (!(std::abs(hc) < std::abs(h))) break;
    beta = cand;
    h = hc;
    dh = dhc;
  }
  return beta;
}

inline std::variant<Candidate, Rejection> recover_candidate(double beta, const BetaPolyMatrix& bm,
                                                            const KRational& kr,
                                                            const NullspaceBasis& basis,
                                                            const Row2System& sys,
                                                            const SolverOptions& opt = {}) {
  const double den = kr.denominator_at(beta);
  if (std::abs(den) <= opt.den_tol * (std::abs(kr.q31 * beta) + std::abs(kr.q32)))
    return Rejection{beta, RejectReason::DenominatorVanishes};

  const Eigen::Matrix2d B = bm.at(beta);
  const int pivot = std::abs(B(0, 0)) >= std::abs(B(1, 0)) ? 0 : 1;
  const int other = 1 - pivot;
  if (B(pivot, 0) == 0.0) return Rejection{beta, RejectReason::NegativeFocalSquared};
  const double w2 = -B(pivot, 1) / B(pivot, 0);
  if (!(w2 > opt.w2_min)) return Rejection{beta, RejectReason::NegativeFocalSquared};

  const double resid = std::abs(B(other, 0) * w2 + B(other, 1));
  if (resid > opt.w2_consistency_tol * (std::abs(B(other, 0)) * w2 + std::abs(B(other, 1))))
    return Rejection{beta, RejectReason::RowsInconsistent};

  Candidate c;
  c.beta = beta;
  c.w = std::sqrt(w2);
  c.k = -(kr.q33 * beta + kr.q34) / den;
  const Vector6d rows = basis.at(beta);
  c.P.row(0) = rows.head<3>().transpose();
  c.P.row(1) = rows.tail<3>().transpose();
  c.P.row(2) = sys.third_row(beta, c.k).transpose();
  return c;
}

/// Pose in the frame of the given (normalized, planar) points. depths holds
/// the signed projective depths lambda_i of lambda u = P U after the sign fix.
inline std::variant<PoseSolution, Rejection> extract_pose(const Eigen::Matrix3d& P_in, double w,
                                                          double k,
                                                          std::span<const WorldPoint> world,
                                                          std::span<const ImagePoint> image,
                                                          double beta = 0.0) {
  detail::require_four(world.size(), image.size());
  Eigen::Matrix3d P = P_in;

  std::array<double, 4> lambda{};
  int negative = 0, positive = 0;
  for (int i = 0; i < 4; ++i) {
    const double third = P.row(2).dot(Eigen::Vector3d(world[i].X, world[i].Y, 1.0));
    lambda[i] = third / (1.0 + k * image[i].r2);
    if (lambda[i] > 0.0) ++positive;
    else if (lambda[i] < 0.0) ++negative;
  }
  if (negative == 4) {
    P = -P;
    for (double& l : lambda) l = -l;
  } else if (positive != 4) {
    return Rejection{beta, RejectReason::CheiralityFailed};
  }
  for (int i = 0; i < 4; ++i)
    if (!(1.0 + k * image[i].r2 > 0.0)) return Rejection{beta, RejectReason::DistortionSingular};

  Eigen::Matrix3d Pn = P;
  Pn.row(2) /= w;
  const double s = 0.5 * (Pn.col(0).norm() + Pn.col(1).norm());
  Eigen::Matrix<double, 3, 2> cols = Pn.leftCols<2>() / s;
  // Nearest pair of orthonormal columns: U V^T from the thin SVD.
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(cols, Eigen::ComputeFullU | Eigen::ComputeFullV);
  cols = svd.matrixU().leftCols<2>() * svd.matrixV().transpose();

  PoseSolution sol;
  sol.R.col(0) = cols.col(0);
  sol.R.col(1) = cols.col(1);
  sol.R.col(2) = cols.col(0).cross(cols.col(1));
  sol.t = Pn.col(2) / s;
  sol.f = 1.0 / w;
  sol.k = k;
  sol.beta = beta;
  sol.w = w;
  sol.k_normalized = k;
  sol.camera_normalized = P;
  sol.depths = lambda;
  return sol;
}

/// Maps a pose solved on normalized planar points back to the original
/// planar coordinates and image scale.
inline void denormalize(PoseSolution& sol, const Normalization& norm) {
  const Eigen::Vector2d c = -norm.world_shift;
  sol.t = sol.t / norm.world_scale - sol.R.col(0) * c.x() - sol.R.col(1) * c.y();
  sol.f = norm.focal_to_original(sol.f);
  sol.k = norm.distortion_to_original(sol.k);
}

/// Distance between the observed point and the reprojection of X; +inf when
/// X is behind the camera or outside the invertible distortion range.
inline double point_reprojection_error(const Camera& cam, const Eigen::Vector3d& X,
                                       const ImagePoint& obs) {
  const auto p = project(cam, X);
  if (!p) return std::numeric_limits<double>::infinity();
  return std::hypot(p->x - obs.x, p->y - obs.y);
}

inline std::vector<double> reprojection_error(const PoseSolution& sol,
                                              std::span<const Eigen::Vector3d> world3d,
                                              std::span<const ImagePoint> image) {
  if (world3d.size() != image.size())
    throw Error(ErrorKind::InvalidInput, "world and image sizes differ");
  const Camera cam = sol.camera();
  std::vector<double> out;
  out.reserve(world3d.size());
  for (std::size_t i = 0; i < world3d.size(); ++i) {
    const Eigen::Vector3d pc = cam.R * world3d[i] + cam.t;
    const double xu = cam.f * pc.x() / pc.z();
    const double yu = cam.f * pc.y() / pc.z();
    const auto d = distort_forward(xu, yu, cam.k);
    if (!d) throw Error(ErrorKind::DistortionSingular, "forward distortion has no real solution");
    out.push_back(std::hypot((*d)(0) - image[i].x, (*d)(1) - image[i].y));
  }
  return out;
}

/// Runs the elimination on four points already expressed in the plane Z = 0.
/// Poses refer to that planar frame; depths and reprojection errors are not
/// filled in.
inline SolveResult solve_planar(std::span<const WorldPoint> world, std::span<const ImagePoint> image,
                                const SolverOptions& opt = {}) {
  detail::require_four(world.size(), image.size());
  const NormalizedPoints np = normalize_points(world, image);
  const NullspaceBasis basis = row3_nullspace(np.world, np.image, opt);
  const TripleSelection sel = select_triple(np.world, opt);

  const std::array<WorldPoint, 3> wt{np.world[sel.triple[0]], np.world[sel.triple[1]], np.world[sel.triple[2]]};
  const std::array<ImagePoint, 3> it{np.image[sel.triple[0]], np.image[sel.triple[1]], np.image[sel.triple[2]]};
  const Row2System sys = build_row2_system(wt, it, basis, opt);
  const KRational kr = k_rational(np.world[sel.fourth], np.image[sel.fourth], basis, sys);
  const BetaPolyMatrix bm = build_beta_matrix(basis, sys, kr);
  const BetaPolynomial bp = beta_polynomial(bm, kr, opt);

  SolveResult out;
  out.degree = bp.sextic.degree(opt.roots.trim_tol);
  if (out.degree < 1) return out;
  const RootSet roots = real_roots(bp.sextic, opt.roots);
  std::vector<double> betas;
  betas.reserve(roots.real_roots.size());
  for (double r : roots.real_roots) {
    const double b = polish_beta(r, basis, sys, kr, opt.beta_polish_iters);
    const bool dup = std::any_of(betas.begin(), betas.end(), [&](double o) {
      return std::abs(o - b) <= opt.roots.root_merge_tol * (1.0 + std::abs(b));
    });
    if (!dup) betas.push_back(b);
  }
  for (double beta : betas) {
    const auto cand = recover_candidate(beta, bm, kr, basis, sys, opt);
    if (const auto* rej = std::get_if<Rejection>(&cand)) {
      out.rejections.push_back(*rej);
      continue;
    }
    const auto& c = std::get<Candidate>(cand);
    auto pose = extract_pose(c.P, c.w, c.k, np.world, np.image, beta);
    if (const auto* rej = std::get_if<Rejection>(&pose)) {
      out.rejections.push_back(*rej);
      continue;
    }
    PoseSolution& sol = std::get<PoseSolution>(pose);
    denormalize(sol, np.norm);
    out.solutions.push_back(sol);
  }
  return out;
}

/// Fills camera-frame depths and reprojection errors against the given
/// correspondences (first four are used for the fixed-size fields) and
/// returns the maximum error.
inline double score_solution(PoseSolution& sol, std::span<const Eigen::Vector3d> world3d,
                             std::span<const ImagePoint> image) {
  const Camera cam = sol.camera();
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(4, world3d.size()); ++i) {
    sol.depths[i] = (cam.R * world3d[i] + cam.t).z();
    sol.reproj_errors[i] = point_reprojection_error(cam, world3d[i], image[i]);
    worst = std::max(worst, sol.reproj_errors[i]);
  }
  sol.max_reproj_err = worst;
  return worst;
}

inline void compose_with_plane(PoseSolution& sol, const RigidTransform& plane_to_world) {
  const Eigen::Matrix3d R = sol.R * plane_to_world.R.transpose();
  sol.t = sol.t - R * plane_to_world.t;
  sol.R = R;
}

inline void sort_by_error(std::vector<PoseSolution>& sols) {
  std::stable_sort(sols.begin(), sols.end(), [](const PoseSolution& a, const PoseSolution& b) {
    return a.max_reproj_err < b.max_reproj_err;
  });
}

/// Full pipeline from four coplanar 3D points and their distorted image
/// observations. Returns up to six physically valid solutions ordered by
/// maximum reprojection error.
inline SolveResult solve(std::span<const Eigen::Vector3d> world3d, std::span<const ImagePoint> image,
                         const SolverOptions& opt = {}) {
  detail::require_four(world3d.size(), image.size());
  for (const auto& p : image)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorKind::InvalidInput, "non-finite image point");
  const PlaneFrame plane = canonicalize_plane(world3d, opt.coplanarity_tol, opt.collinear_tol);
  SolveResult out = solve_planar(plane.points, image, opt);
  for (auto& sol : out.solutions) {
    compose_with_plane(sol, plane.plane_to_world);
    score_solution(sol, world3d, image);
  }
  sort_by_error(out.solutions);
  return out;
}

}  // namespace p4pfr
