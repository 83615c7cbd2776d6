#include "lanecluster/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lanecluster/errors.hpp"
#include "lanecluster/rng.hpp"

namespace lanecluster {

namespace {

constexpr double kEdgeMargin = 1.0;    // keep curves this far inside the ROI
constexpr double kBoxHeight = 1.5;     // meters, every synthetic box
constexpr double kOutlierPad = 0.5;    // extra clearance beyond the short side
constexpr std::size_t kMaxRejects = 10000;

BezierCurve straight(Vec2 a, Vec2 b) { return BezierCurve{a, (a + b) * 0.5, b}; }

// Lateral slot centers for n side-by-side lanes, centered on x = 0.
std::vector<double> lane_slots(std::size_t n, double gap) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = (static_cast<double>(i) - static_cast<double>(n - 1) / 2.0) * gap;
  return xs;
}

LaneGraph build_graph(const SceneSpec& spec, const RegionOfInterest& roi) {
  const double z_lo = roi.z_min + kEdgeMargin;
  const double z_hi = roi.z_max - kEdgeMargin;
  const double z_mid = (z_lo + z_hi) / 2.0;
  const std::size_t n = spec.n_lanes;
  std::vector<BezierCurve> curves;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  switch (spec.pattern) {
    case LanePattern::parallel: {
      for (double x : lane_slots(n, spec.lane_gap))
        curves.push_back(straight({x, z_lo}, {x, z_hi}));
      break;
    }
    case LanePattern::fork: {
      if (n < 2) throw ValidationError("generate_scene: fork needs at least 2 lanes");
      curves.push_back(straight({0.0, z_lo}, {0.0, z_mid}));
      for (double x : lane_slots(n - 1, spec.lane_gap)) {
        edges.emplace_back(0, curves.size());
        curves.push_back(straight({0.0, z_mid}, {x, z_hi}));
      }
      break;
    }
    case LanePattern::merge: {
      if (n < 2) throw ValidationError("generate_scene: merge needs at least 2 lanes");
      for (double x : lane_slots(n - 1, spec.lane_gap)) {
        edges.emplace_back(curves.size(), n - 1);
        curves.push_back(straight({x, z_lo}, {0.0, z_mid}));
      }
      curves.push_back(straight({0.0, z_mid}, {0.0, z_hi}));
      break;
    }
    case LanePattern::mixed: {
      // Slots 0..2 hold a fork group, the rest straight lanes; the final
      // lane bends into a gentle arc so curvature is exercised too.
      if (n < 4) throw ValidationError("generate_scene: mixed needs at least 4 lanes");
      const std::vector<double> xs = lane_slots(n, spec.lane_gap);
      curves.push_back(straight({xs[1], z_lo}, {xs[1], z_mid}));
      edges.emplace_back(0, 1);
      curves.push_back(straight({xs[1], z_mid}, {xs[0], z_hi}));
      edges.emplace_back(0, 2);
      curves.push_back(straight({xs[1], z_mid}, {xs[2], z_hi}));
      for (std::size_t i = 3; i + 1 < n; ++i)
        curves.push_back(straight({xs[i], z_lo}, {xs[i], z_hi}));
      const double xa = xs[n - 1];
      curves.push_back(BezierCurve{{xa, z_lo}, {xa + 2.0, z_mid}, {xa, z_hi}});
      break;
    }
  }
  for (const BezierCurve& c : curves)
    if (!roi.contains(c.p0) || !roi.contains(c.p1) || !roi.contains(c.p2))
      throw ValidationError("generate_scene: lanes do not fit inside the ROI");
  LaneGraph graph(std::move(curves));
  for (const auto& [a, b] : edges) graph.connect(a, b);
  return graph;
}

DetectionBox place_box(Vec2 pos, double yaw, const SceneSpec& spec) {
  return make_detection_box({pos.x, kBoxHeight / 2.0, pos.z}, yaw,
                            spec.footprint_length, spec.footprint_width, kBoxHeight,
                            /*class_id=*/0, /*confidence=*/1.0);
}

}  // namespace

void SceneSpec::validate() const {
  if (!(lane_gap > 0.0)) throw ValidationError("SceneSpec: lane_gap must be positive");
  if (!(lateral_noise_sigma >= 0.0))
    throw ValidationError("SceneSpec: lateral_noise_sigma must be non-negative");
  if (!(footprint_length > 0.0) || !(footprint_width > 0.0))
    throw ValidationError("SceneSpec: footprint sides must be positive");
  if (!std::isfinite(lane_gap) || !std::isfinite(lateral_noise_sigma) ||
      !std::isfinite(footprint_length) || !std::isfinite(footprint_width))
    throw ValidationError("SceneSpec: fields must be finite");
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.gt_graph = build_graph(spec, scene.roi);
  const std::size_t n_curves = scene.gt_graph.size();

  SeededRng rng(spec.seed);
  const double short_w = std::min(spec.footprint_length, spec.footprint_width);
  const double clip = 0.95 * short_w;
  std::vector<std::size_t> labels;

  // On-lane objects, lane by lane. Draw order per object is fixed: t, then
  // lateral offset (two uniforms via Box-Muller even when sigma is 0).
  for (std::size_t i = 0; i < n_curves; ++i) {
    const BezierCurve& curve = scene.gt_graph.curves[i];
    for (std::size_t j = 0; j < spec.objects_per_lane; ++j) {
      const double t = rng.uniform(0.05, 0.95);
      const double off =
          std::clamp(rng.normal(0.0, spec.lateral_noise_sigma), -clip, clip);
      const Vec2 on = bezier_point(curve, t);
      Vec2 tangent = bezier_derivative(curve, t);
      const double tn = norm(tangent);
      tangent = (tn > 0.0) ? tangent * (1.0 / tn) : Vec2{0.0, 1.0};
      const Vec2 normal{tangent.z, -tangent.x};
      const double yaw = std::atan2(tangent.x, tangent.z);
      scene.objects.push_back(place_box(on + normal * off, yaw, spec));
      labels.push_back(i);
    }
  }

  // Outliers: rejection-sampled positions clear of every centerline so the
  // membership rule can only ever put them in the outlier set.
  const double margin = short_w + kOutlierPad;
  for (std::size_t j = 0; j < spec.n_outliers; ++j) {
    Vec2 pos;
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kMaxRejects; ++attempt) {
      pos.x = rng.uniform(scene.roi.x_min + kEdgeMargin, scene.roi.x_max - kEdgeMargin);
      pos.z = rng.uniform(scene.roi.z_min + kEdgeMargin, scene.roi.z_max - kEdgeMargin);
      double nearest = std::numeric_limits<double>::infinity();
      for (const BezierCurve& c : scene.gt_graph.curves)
        nearest = std::min(nearest, closest_point(c, pos).distance);
      if (nearest >= margin) {
        placed = true;
        break;
      }
    }
    if (!placed)
      throw ValidationError("generate_scene: no room for outliers clear of the lanes");
    const double yaw = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    scene.objects.push_back(place_box(pos, yaw, spec));
    labels.push_back(n_curves);  // outlier column
  }

  scene.gen_membership = MembershipMatrix(scene.objects.size(), n_curves + 1);
  for (std::size_t r = 0; r < labels.size(); ++r) scene.gen_membership(r, labels[r]) = 1.0;
  return scene;
}

LaneGraph perturb_graph(const LaneGraph& graph, double noise_sigma, double drop_prob,
                        std::uint64_t seed, const RegionOfInterest& roi) {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("perturb_graph: noise_sigma must be non-negative");
  if (!(drop_prob >= 0.0) || !(drop_prob <= 1.0))
    throw std::invalid_argument("perturb_graph: drop_prob must be in [0,1]");
  roi.validate();

  SeededRng rng(seed);
  const std::size_t n = graph.size();
  std::vector<BezierCurve> kept;
  std::vector<double> existence;
  std::vector<std::size_t> old_index;
  for (std::size_t i = 0; i < n; ++i) {
    // Fixed draw order per curve: six jitters, drop coin, existence jitter.
    Vec2 pts[3] = {graph.curves[i].p0, graph.curves[i].p1, graph.curves[i].p2};
    for (Vec2& p : pts) {
      Vec2 u = to_roi_units(roi, p);
      u.x += rng.normal(0.0, noise_sigma);
      u.z += rng.normal(0.0, noise_sigma);
      p = denormalize(roi, u);
    }
    const bool drop = rng.uniform() < drop_prob;
    const double exist = std::clamp(1.0 - std::fabs(rng.normal(0.0, noise_sigma)),
                                    0.05, 1.0);
    if (drop) continue;
    kept.push_back(BezierCurve{pts[0], pts[1], pts[2]});
    existence.push_back(exist);
    old_index.push_back(i);
  }
  LaneGraph out(std::move(kept));
  for (std::size_t a = 0; a < old_index.size(); ++a)
    for (std::size_t b = 0; b < old_index.size(); ++b)
      if (a != b && graph.connected(old_index[a], old_index[b])) out.connect(a, b);
  out.existence = std::move(existence);
  return out;
}

}  // namespace lanecluster
