#include "lanecluster/lane_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lanecluster/errors.hpp"

namespace lanecluster {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
double norm(Vec2 v) { return std::hypot(v.x, v.z); }
double l1_norm(Vec2 v) { return std::abs(v.x) + std::abs(v.z); }
bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.z); }

void RegionOfInterest::validate() const {
  if (!(x_min < x_max) || !(z_min < z_max)) {
    throw ValidationError("region of interest has empty extent");
  }
}

Vec2 normalize(const RegionOfInterest& roi, Vec2 p, bool& clamped) {
  double nx = (p.x - roi.x_min) / roi.width();
  double nz = (p.z - roi.z_min) / roi.depth();
  clamped = nx < 0.0 || nx > 1.0 || nz < 0.0 || nz > 1.0;
  return {std::clamp(nx, 0.0, 1.0), std::clamp(nz, 0.0, 1.0)};
}

Vec2 normalize(const RegionOfInterest& roi, Vec2 p) {
  bool clamped = false;
  return normalize(roi, p, clamped);
}

Vec2 denormalize(const RegionOfInterest& roi, Vec2 p_norm) {
  return {roi.x_min + p_norm.x * roi.width(), roi.z_min + p_norm.z * roi.depth()};
}

Vec2 to_roi_units(const RegionOfInterest& roi, Vec2 p) {
  return {(p.x - roi.x_min) / roi.width(), (p.z - roi.z_min) / roi.depth()};
}

BezierCurve::BezierCurve(Vec2 a, Vec2 b, Vec2 c) : p0(a), p1(b), p2(c) {
  if (!is_finite(p0) || !is_finite(p1) || !is_finite(p2)) {
    throw std::invalid_argument("bezier control points must be finite");
  }
  if (p0 == p1 && p1 == p2) {
    throw std::invalid_argument("bezier curve collapsed to a single point");
  }
}

Vec2 bezier_point(const BezierCurve& curve, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("bezier parameter outside [0,1]: " + std::to_string(t));
  }
  double u = 1.0 - t;
  return u * u * curve.p0 + 2.0 * t * u * curve.p1 + t * t * curve.p2;
}

Vec2 bezier_derivative(const BezierCurve& curve, double t) {
  return 2.0 * (1.0 - t) * (curve.p1 - curve.p0) + 2.0 * t * (curve.p2 - curve.p1);
}

namespace {

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 = 0, largest-degree terms may be
// zero. Roots are not deduplicated; callers polish and clamp.
int cubic_roots(double c3, double c2, double c1, double c0, double out[3]) {
  const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return 0;
  if (std::abs(c3) < 1e-14 * scale) {
    // quadratic (or lower)
    if (std::abs(c2) < 1e-14 * scale) {
      if (std::abs(c1) < 1e-14 * scale) return 0;
      out[0] = -c0 / c1;
      return 1;
    }
    double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return 0;
    double sq = std::sqrt(disc);
    // Citardauq form avoids cancellation when c1 dominates.
    double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
    int n = 0;
    out[n++] = q / c2;
    if (q != 0.0) out[n++] = c0 / q;
    return n;
  }

  // normalized monic cubic x^3 + a x^2 + b x + c
  double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  // depressed: x = y - a/3 -> y^3 + p y + q
  double p = b - a * a / 3.0;
  double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  double shift = -a / 3.0;
  double disc = q * q / 4.0 + p * p * p / 27.0;

  if (std::abs(p) < 1e-30 && std::abs(q) < 1e-30) {
    out[0] = shift;
    return 1;
  }
  if (disc > 0.0) {
    double sq = std::sqrt(disc);
    double u = std::cbrt(-q / 2.0 + sq);
    double v = std::cbrt(-q / 2.0 - sq);
    out[0] = u + v + shift;
    return 1;
  }
  // three real roots, trigonometric form
  double m = 2.0 * std::sqrt(-p / 3.0);
  double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
  double theta = std::acos(arg) / 3.0;
  for (int k = 0; k < 3; ++k) {
    out[k] = m * std::cos(theta - 2.0 * M_PI * k / 3.0) + shift;
  }
  return 3;
}

}  // namespace

CurveProjection closest_point(const BezierCurve& curve, Vec2 q) {
  if (!is_finite(q)) throw std::invalid_argument("query point must be finite");

  // d(t) = B(t) - q = a t^2 + b t + e
  const Vec2 a = curve.p0 - 2.0 * curve.p1 + curve.p2;
  const Vec2 b = 2.0 * (curve.p1 - curve.p0);
  const Vec2 e = curve.p0 - q;

  // Stationarity of the squared distance: half of d/dt ||d(t)||^2.
  const double c3 = 2.0 * dot(a, a);
  const double c2 = 3.0 * dot(a, b);
  const double c1 = dot(b, b) + 2.0 * dot(a, e);
  const double c0 = dot(b, e);

  auto sq_dist = [&](double t) {
    Vec2 d = (a * t + b) * t + e;
    return dot(d, d);
  };

  double roots[3];
  int n = cubic_roots(c3, c2, c1, c0, roots);

  double cand[5] = {0.0, 1.0};
  int nc = 2;
  for (int i = 0; i < n; ++i) {
    double t = roots[i];
    // Newton polish on the cubic before accepting.
    for (int it = 0; it < 3; ++it) {
      double f = ((c3 * t + c2) * t + c1) * t + c0;
      double df = (3.0 * c3 * t + 2.0 * c2) * t + c1;
      if (df == 0.0) break;
      t -= f / df;
    }
    if (t < -1e-9 || t > 1.0 + 1e-9) continue;
    cand[nc++] = std::clamp(t, 0.0, 1.0);
  }

  double best_t = cand[0];
  double best = sq_dist(cand[0]);
  for (int i = 1; i < nc; ++i) {
    double d = sq_dist(cand[i]);
    if (d < best || (d == best && cand[i] < best_t)) {
      best = d;
      best_t = cand[i];
    }
  }
  return {best_t, std::sqrt(std::max(best, 0.0))};
}

std::vector<Vec2> sample_curve(const BezierCurve& curve, std::size_t n) {
  if (n < 2) throw std::invalid_argument("need at least two samples");
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(bezier_point(curve, static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  return pts;
}

LaneGraph::LaneGraph(std::vector<BezierCurve> cs)
    : curves(std::move(cs)), incidence(curves.size() * curves.size(), 0) {}

bool LaneGraph::connected(std::size_t i, std::size_t j) const {
  return incidence[i * size() + j] != 0;
}

void LaneGraph::connect(std::size_t i, std::size_t j) {
  if (i >= size() || j >= size()) throw std::out_of_range("edge index outside graph");
  if (i == j) throw std::invalid_argument("self-connection is not representable");
  incidence[i * size() + j] = 1;
}

double LaneGraph::existence_or(std::size_t i, double fallback) const {
  return existence ? (*existence)[i] : fallback;
}

std::vector<std::pair<std::size_t, std::size_t>> LaneGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (connected(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

void LaneGraph::validate() const {
  const std::size_t n = size();
  if (incidence.size() != n * n) {
    throw ValidationError("incidence dimension does not match curve count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (connected(i, i)) throw ValidationError("incidence diagonal must be false");
  }
  if (existence) {
    if (existence->size() != n) {
      throw ValidationError("existence length does not match curve count");
    }
    for (double p : *existence) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("existence probability outside [0,1]");
      }
    }
  }
}

Matrix distance_matrix(const LaneGraph& graph, const std::vector<Vec2>& centers) {
  Matrix d(graph.size(), centers.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
      d(i, j) = closest_point(graph.curves[i], centers[j]).distance;
    }
  }
  return d;
}

}  // namespace lanecluster
