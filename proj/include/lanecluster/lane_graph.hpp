#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lanecluster/matrix.hpp"

namespace lanecluster {

/// 2D point in the BEV plane. x is lateral, z is longitudinal, both in meters.
struct Vec2 {
  double x{0.0};
  double z{0.0};
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.z}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.z}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.z == b.z; }

double dot(Vec2 a, Vec2 b);
double norm(Vec2 v);
double l1_norm(Vec2 v);
bool is_finite(Vec2 v);

/// BEV rectangle the lane graph covers. Defaults match a 50m forward,
/// +-25m lateral field of view.
struct RegionOfInterest {
  double x_min{-25.0};
  double x_max{25.0};
  double z_min{1.0};
  double z_max{50.0};

  double width() const { return x_max - x_min; }
  double depth() const { return z_max - z_min; }
  double area() const { return width() * depth(); }
  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.z >= z_min && p.z <= z_max;
  }
  void validate() const;  // throws on empty extents
};

/// Affine map of p into [0,1]^2. Points outside the ROI are clamped and the
/// clamp is reported through `clamped`.
Vec2 normalize(const RegionOfInterest& roi, Vec2 p, bool& clamped);
Vec2 normalize(const RegionOfInterest& roi, Vec2 p);
/// Exact inverse of normalize for in-ROI points.
Vec2 denormalize(const RegionOfInterest& roi, Vec2 p_norm);
/// Same affine map without clamping; matching costs and losses use this so
/// out-of-ROI control points keep distinct coordinates.
Vec2 to_roi_units(const RegionOfInterest& roi, Vec2 p);

/// Quadratic Bezier centerline with three control points in meters.
/// Construction rejects non-finite points and the fully collapsed curve
/// p0 == p1 == p2 (closest-point would lose uniqueness). A loop with
/// p0 == p2 but p1 elsewhere is allowed.
struct BezierCurve {
  Vec2 p0, p1, p2;

  BezierCurve(Vec2 a, Vec2 b, Vec2 c);
};

/// B(t) = (1-t)^2 p0 + 2t(1-t) p1 + t^2 p2. Throws std::domain_error for t
/// outside [0,1].
Vec2 bezier_point(const BezierCurve& curve, double t);

/// Derivative B'(t); valid on [0,1], no domain check (used for tangents).
Vec2 bezier_derivative(const BezierCurve& curve, double t);

struct CurveProjection {
  double t{0.0};         // parameter of the closest point, in [0,1]
  double distance{0.0};  // meters
};

/// Closest point of the curve to q. Minimizes ||B(t)-q|| by solving the cubic
/// stationarity condition of the squared distance analytically, polishing the
/// roots with Newton steps, and comparing against the endpoints.
CurveProjection closest_point(const BezierCurve& curve, Vec2 q);

/// n samples at uniform t in [0,1], endpoints included. n >= 2.
std::vector<Vec2> sample_curve(const BezierCurve& curve, std::size_t n);

/// Set of centerlines plus their connectivity. incidence(i,j) = true means
/// centerline j follows centerline i. The diagonal is always false.
struct LaneGraph {
  std::vector<BezierCurve> curves;
  std::vector<std::uint8_t> incidence;  // row-major size() x size()
  std::optional<std::vector<double>> existence;

  LaneGraph() = default;
  explicit LaneGraph(std::vector<BezierCurve> cs);

  std::size_t size() const { return curves.size(); }
  bool connected(std::size_t i, std::size_t j) const;
  void connect(std::size_t i, std::size_t j);
  /// Existence probability of curve i, or `fallback` when none are stored.
  double existence_or(std::size_t i, double fallback = 1.0) const;
  /// All (i,j) pairs with incidence(i,j) true.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  void validate() const;  // throws ValidationError on broken invariants
};

/// Pairwise distances: entry (i,j) is the distance from curve i to center j.
Matrix distance_matrix(const LaneGraph& graph, const std::vector<Vec2>& centers);

}  // namespace lanecluster
