#include "lanecluster/objects.hpp"

#include <cmath>
#include <stdexcept>

#include "lanecluster/errors.hpp"

namespace lanecluster {

DetectionBox make_detection_box(Vec3 center, double yaw, double length, double width,
                                double height, int class_id, double confidence) {
  if (!(length > 0.0) || !(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("box extents must be positive");
  }
  // u points along the length axis, v to its left.
  const Vec2 u{std::sin(yaw), std::cos(yaw)};
  const Vec2 v{-u.z, u.x};
  const double hl = 0.5 * length, hw = 0.5 * width, hh = 0.5 * height;

  // Bottom face CCW seen from above, then the same footprint on the top face.
  const Vec2 footprint[4] = {
      hl * u + hw * v,
      -1.0 * hl * u + hw * v,
      -1.0 * hl * u + -1.0 * hw * v,
      hl * u + -1.0 * hw * v,
  };

  DetectionBox box;
  box.center = center;
  box.class_id = class_id;
  box.confidence = confidence;
  for (int i = 0; i < 4; ++i) {
    box.corners[i] = {center.x + footprint[i].x, center.y - hh, center.z + footprint[i].z};
    box.corners[i + 4] = {center.x + footprint[i].x, center.y + hh, center.z + footprint[i].z};
  }
  validate_box(box);
  return box;
}

void validate_box(const DetectionBox& box) {
  if (!(box.confidence >= 0.0 && box.confidence <= 1.0)) {
    throw ValidationError("confidence outside [0,1]");
  }
  auto finite3 = [](Vec3 p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
  };
  if (!finite3(box.center)) throw ValidationError("box center must be finite");
  Vec3 bottom{}, top{};
  for (int i = 0; i < 4; ++i) {
    if (!finite3(box.corners[i]) || !finite3(box.corners[i + 4])) {
      throw ValidationError("box corners must be finite");
    }
    bottom = bottom + box.corners[i];
    top = top + box.corners[i + 4];
  }
  const Vec3 mid{0.125 * (bottom.x + top.x), 0.125 * (bottom.y + top.y),
                 0.125 * (bottom.z + top.z)};
  const double err = std::abs(mid.x - box.center.x) + std::abs(mid.y - box.center.y) +
                     std::abs(mid.z - box.center.z);
  if (err > 1e-6) {
    throw ValidationError("corner centroid does not match box center");
  }
}

Vec2 bev_center(const DetectionBox& box) { return {box.center.x, box.center.z}; }

double short_side(const DetectionBox& box) {
  // Footprint edges from the fixed bottom-face ordering.
  const Vec2 c0{box.corners[0].x, box.corners[0].z};
  const Vec2 c1{box.corners[1].x, box.corners[1].z};
  const Vec2 c2{box.corners[2].x, box.corners[2].z};
  const double e01 = norm(c1 - c0);
  const double e12 = norm(c2 - c1);
  if (e01 < 1e-12 || e12 < 1e-12) {
    throw ValidationError("box footprint has zero area");
  }
  return std::min(e01, e12);
}

std::vector<double> encode_feature(const DetectionBox& box, const RegionOfInterest& roi) {
  std::vector<double> feat;
  feat.reserve(28);
  auto push = [&](Vec3 p) {
    Vec2 n = normalize(roi, {p.x, p.z});
    feat.push_back(n.x);
    feat.push_back(p.y);  // height is not normalized
    feat.push_back(n.z);
  };
  push(box.center);
  for (const Vec3& c : box.corners) push(c);
  feat.push_back(box.confidence);
  return feat;
}

}  // namespace lanecluster
