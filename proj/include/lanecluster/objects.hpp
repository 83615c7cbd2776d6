#pragma once

#include <array>
#include <vector>

#include "lanecluster/lane_graph.hpp"

namespace lanecluster {

/// 3D point; y is the height axis, (x, z) is the BEV plane.
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

/// One 3D object detection: cuboid center, its 8 corners, class id and the
/// class confidence score. Corner ordering is fixed as bottom face
/// counter-clockwise (seen from above), then top face counter-clockwise;
/// ground-truth boxes carry confidence exactly 1.
struct DetectionBox {
  Vec3 center;
  std::array<Vec3, 8> corners;
  int class_id{0};
  double confidence{1.0};
};

/// Builds a box from pose and extents. Yaw is the BEV heading of the length
/// axis, measured from +z toward +x.
DetectionBox make_detection_box(Vec3 center, double yaw, double length, double width,
                                double height, int class_id = 0, double confidence = 1.0);

/// Throws ValidationError when confidence is outside [0,1], any coordinate is
/// non-finite, or the opposite-face centroids do not average to the center.
void validate_box(const DetectionBox& box);

/// BEV center C_j: the cuboid center with the height component dropped.
Vec2 bev_center(const DetectionBox& box);

/// Short bounding box side length W_j: the shorter of the two horizontal
/// footprint edges. Throws on a zero-area footprint.
double short_side(const DetectionBox& box);

/// 28-value encoding: (x_n, height, z_n) for the center and each corner in
/// order, then the confidence. x/z are ROI-normalized, height stays in meters.
std::vector<double> encode_feature(const DetectionBox& box, const RegionOfInterest& roi);

}  // namespace lanecluster
