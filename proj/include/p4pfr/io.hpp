#pragma once

// JSON documents read and written by the command-line tool:
// correspondence files, solution records, and the ground-truth sidecar.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "p4pfr/camera.hpp"
#include "p4pfr/error.hpp"
#include "p4pfr/robust.hpp"
#include "p4pfr/scene_sim.hpp"
#include "p4pfr/solver.hpp"

namespace p4pfr::io {

using nlohmann::json;

inline constexpr const char* kFormat = "planar-p4pfr/1";

struct CorrespondenceFile {
  std::vector<Eigen::Vector3d> world;
  std::vector<ImagePoint> image;
  std::optional<double> image_scale_hint;
};

struct SolutionRecord {
  std::array<double, 9> R{};
  std::array<double, 3> t{};
  double f = 0.0;
  double k = 0.0;
  double max_reproj_err = 0.0;
  std::vector<double> per_point_err;

  Camera camera() const {
    Camera c;
    for (int i = 0; i < 9; ++i) c.R(i / 3, i % 3) = R[i];
    c.t = {t[0], t[1], t[2]};
    c.f = f;
    c.k = k;
    return c;
  }
};

namespace detail {

inline double finite_number(const json& v, const char* what) {
  if (!v.is_number()) throw Error(ErrorKind::InvalidInput, std::string(what) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorKind::InvalidInput, std::string(what) + ": non-finite value");
  return d;
}

inline std::vector<std::vector<double>> rows(const json& doc, const char* key, std::size_t width) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw Error(ErrorKind::InvalidInput, std::string("missing array '") + key + "'");
  std::vector<std::vector<double>> out;
  for (const auto& row : doc[key]) {
    if (!row.is_array() || row.size() != width)
      throw Error(ErrorKind::InvalidInput,
                  std::string("'") + key + "' rows must have " + std::to_string(width) + " entries");
    std::vector<double> r;
    for (const auto& v : row) r.push_back(finite_number(v, key));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

inline CorrespondenceFile parse_correspondences(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::InvalidInput, "document must be an object");
  if (!doc.contains("format") || doc["format"] != kFormat)
    throw Error(ErrorKind::InvalidInput, std::string("format must be '") + kFormat + "'");

  CorrespondenceFile out;
  for (const auto& r : detail::rows(doc, "world", 3)) out.world.emplace_back(r[0], r[1], r[2]);
  for (const auto& r : detail::rows(doc, "image", 2)) out.image.emplace_back(r[0], r[1]);
  if (out.world.size() != out.image.size())
    throw Error(ErrorKind::InvalidInput, "world and image arrays differ in length");
  if (out.world.empty()) throw Error(ErrorKind::InvalidInput, "no correspondences");
  if (doc.contains("image_scale_hint"))
    out.image_scale_hint = detail::finite_number(doc["image_scale_hint"], "image_scale_hint");
  return out;
}

inline json to_json(const CorrespondenceFile& f) {
  json doc;
  doc["format"] = kFormat;
  doc["world"] = json::array();
  for (const auto& p : f.world) doc["world"].push_back({p.x(), p.y(), p.z()});
  doc["image"] = json::array();
  for (const auto& p : f.image) doc["image"].push_back({p.x, p.y});
  if (f.image_scale_hint) doc["image_scale_hint"] = *f.image_scale_hint;
  return doc;
}

inline SolutionRecord make_record(const Camera& cam, std::span<const Eigen::Vector3d> world,
                                  std::span<const ImagePoint> image) {
  SolutionRecord rec;
  for (int i = 0; i < 9; ++i) rec.R[i] = cam.R(i / 3, i % 3);
  rec.t = {cam.t.x(), cam.t.y(), cam.t.z()};
  rec.f = cam.f;
  rec.k = cam.k;
  for (std::size_t i = 0; i < world.size(); ++i) {
    rec.per_point_err.push_back(point_reprojection_error(cam, world[i], image[i]));
    rec.max_reproj_err = std::max(rec.max_reproj_err, rec.per_point_err.back());
  }
  return rec;
}

// Non-finite errors (points that cannot be reprojected) are written as null.
inline json to_json(const SolutionRecord& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json doc;
  doc["R"] = r.R;
  doc["t"] = r.t;
  doc["f"] = r.f;
  doc["k"] = r.k;
  doc["max_reproj_err"] = num(r.max_reproj_err);
  doc["per_point_err"] = json::array();
  for (double e : r.per_point_err) doc["per_point_err"].push_back(num(e));
  return doc;
}

inline SolutionRecord record_from_json(const json& doc) {
  auto num = [](const json& v) {
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
  };
  SolutionRecord r;
  r.R = doc.at("R").get<std::array<double, 9>>();
  r.t = doc.at("t").get<std::array<double, 3>>();
  r.f = doc.at("f").get<double>();
  r.k = doc.at("k").get<double>();
  r.max_reproj_err = num(doc.at("max_reproj_err"));
  for (const auto& e : doc.at("per_point_err")) r.per_point_err.push_back(num(e));
  return r;
}

inline json solve_document(const SolveResult& res, std::span<const Eigen::Vector3d> world,
                           std::span<const ImagePoint> image) {
  json doc;
  doc["format"] = kFormat;
  doc["command"] = "solve";
  doc["solutions"] = json::array();
  for (const auto& s : res.solutions) doc["solutions"].push_back(to_json(make_record(s.camera(), world, image)));
  doc["rejections"] = json::array();
  for (const auto& r : res.rejections)
    doc["rejections"].push_back({{"beta", r.beta}, {"reason", std::string(to_string(r.reason))}});
  return doc;
}

inline json ransac_document(const RobustResult& res, std::span<const Eigen::Vector3d> world,
                            std::span<const ImagePoint> image) {
  json doc;
  doc["format"] = kFormat;
  doc["command"] = "ransac";
  doc["solution"] = to_json(make_record(res.solution.camera(), world, image));
  doc["inlier_mask"] = res.inlier_mask;
  doc["iterations_run"] = res.iterations_run;
  return doc;
}

inline json ground_truth_document(const GroundTruth& gt, std::uint64_t seed) {
  SolutionRecord rec = make_record(gt.camera(), gt.world3d, gt.image);
  json doc = to_json(rec);
  doc["format"] = kFormat;
  doc["seed"] = seed;
  return doc;
}

}  // namespace p4pfr::io
