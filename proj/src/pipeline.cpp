#include "lanecluster/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lanecluster/errors.hpp"

namespace lanecluster {

namespace {

constexpr double kHuberDelta = 1e-3;   // normalized units
constexpr double kSigmaC = 1.0;        // meters, distance-to-logit scale
constexpr double kOutlierDist = 2.0;   // meters, implied distance of the outlier set
constexpr double kOutlierWeight = 0.1;

double huber_grad(double d) {
  if (std::fabs(d) < kHuberDelta) return d / kHuberDelta;
  return d > 0.0 ? 1.0 : -1.0;
}

void bernstein(double t, double b[3]) {
  const double s = 1.0 - t;
  b[0] = s * s;
  b[1] = 2.0 * t * s;
  b[2] = t * t;
}

double clustering_from_logits(const LogitMatrix* logits,
                              const MembershipMatrix& z_bar) {
  if (logits) {
    if (logits->rows != z_bar.rows || logits->cols != z_bar.cols)
      throw std::invalid_argument("build_labels: logits shape must match z_bar");
    return clustering_loss(*logits, z_bar, kOutlierWeight);
  }
  const LogitMatrix uniform(z_bar.rows, z_bar.cols);
  return clustering_loss(uniform, z_bar, kOutlierWeight);
}

}  // namespace

LabelBundle build_labels(const LaneGraph& pred, const LaneGraph& gt,
                         const std::vector<DetectionBox>& objects,
                         const LogitMatrix* logits, double alpha,
                         const RegionOfInterest& roi) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("build_labels: alpha must be non-negative");
  LabelBundle bundle;
  bundle.match = match_graphs(pred, gt, roi);
  bundle.z_star = true_membership(gt, objects);
  bundle.z_bar = target_membership(bundle.z_star, bundle.match, pred.size());
  bundle.losses.lane_graph_loss = lane_graph_loss(pred, gt, bundle.match, roi);
  bundle.losses.clustering_loss = clustering_from_logits(logits, bundle.z_bar);
  bundle.losses.alpha = alpha;
  bundle.losses.total =
      total_loss(bundle.losses.lane_graph_loss, bundle.losses.clustering_loss, alpha);
  return bundle;
}

DescentResult descend_curves(const LaneGraph& pred, const LaneGraph& gt,
                             const std::vector<DetectionBox>& objects,
                             const LogitMatrix* logits, double alpha, double lr,
                             std::size_t steps, const RegionOfInterest& roi) {
  if (!(lr > 0.0)) throw std::invalid_argument("descend_curves: lr must be positive");
  if (steps < 1) throw std::invalid_argument("descend_curves: steps must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("descend_curves: alpha must be non-negative");
  roi.validate();

  // Matching and targets are frozen here; re-matching between calls is the
  // caller's loop.
  const GraphMatch match = match_graphs(pred, gt, roi);
  const MembershipMatrix z_star = true_membership(gt, objects);
  const MembershipMatrix z_bar = target_membership(z_star, match, pred.size());
  const std::size_t n_curves = pred.size();
  const std::size_t n_objects = objects.size();
  if (logits && (logits->rows != n_objects || logits->cols != n_curves + 1))
    throw std::invalid_argument("descend_curves: logits shape must be objects x (curves + 1)");

  std::vector<Vec2> centers(n_objects);
  for (std::size_t j = 0; j < n_objects; ++j) centers[j] = bev_center(objects[j]);

  // Parameters: control points in ROI units so one lr fits both axes.
  std::vector<Vec2> theta(n_curves * 3);
  for (std::size_t i = 0; i < n_curves; ++i) {
    theta[3 * i + 0] = to_roi_units(roi, pred.curves[i].p0);
    theta[3 * i + 1] = to_roi_units(roi, pred.curves[i].p1);
    theta[3 * i + 2] = to_roi_units(roi, pred.curves[i].p2);
  }
  std::vector<Vec2> gt_units(gt.size() * 3);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    gt_units[3 * g + 0] = to_roi_units(roi, gt.curves[g].p0);
    gt_units[3 * g + 1] = to_roi_units(roi, gt.curves[g].p1);
    gt_units[3 * g + 2] = to_roi_units(roi, gt.curves[g].p2);
  }
  std::size_t n_matched = 0;
  for (int g : match.est_to_gt)
    if (g >= 0) ++n_matched;

  const auto rebuild = [&](const std::vector<Vec2>& params) {
    std::vector<BezierCurve> cs;
    cs.reserve(n_curves);
    for (std::size_t i = 0; i < n_curves; ++i)
      cs.push_back(BezierCurve{denormalize(roi, params[3 * i + 0]),
                               denormalize(roi, params[3 * i + 1]),
                               denormalize(roi, params[3 * i + 2])});
    LaneGraph graph(std::move(cs));
    graph.incidence = pred.incidence;
    graph.existence = pred.existence;
    return graph;
  };

  DescentResult result;
  result.graph = rebuild(theta);
  double initial_total = 0.0;
  LogitMatrix scores(n_objects, n_curves + 1);
  Matrix proj_t(n_objects, n_curves), proj_d(n_objects, n_curves);

  for (std::size_t step = 0; step <= steps; ++step) {
    // Distance-derived logits on top of the frozen offsets.
    for (std::size_t j = 0; j < n_objects; ++j) {
      for (std::size_t i = 0; i < n_curves; ++i) {
        const CurveProjection p = closest_point(result.graph.curves[i], centers[j]);
        proj_t(j, i) = p.t;
        proj_d(j, i) = p.distance;
        scores(j, i) = (logits ? (*logits)(j, i) : 0.0) - p.distance / kSigmaC;
      }
      scores(j, n_curves) =
          (logits ? (*logits)(j, n_curves) : 0.0) - kOutlierDist / kSigmaC;
    }
    const double lx = lane_graph_loss(result.graph, gt, match, roi);
    const double lc = (n_objects > 0 && alpha != 0.0)
                          ? clustering_loss(scores, z_bar, kOutlierWeight)
                          : 0.0;
    const double total = total_loss(lx, lc, alpha);
    result.trace.push_back({step, lx, lc, total});
    if (step == 0) initial_total = total;
    if (total > 10.0 * initial_total + 1e-9) {
      std::ostringstream msg;
      msg << "descend_curves: diverged at step " << step << " (total " << total
          << " vs initial " << initial_total << ")";
      throw NumericalError(msg.str());
    }
    if (step == steps) break;

    std::vector<Vec2> grad(n_curves * 3, Vec2{0.0, 0.0});
    // Lane-graph term: Huber-smoothed L1 toward the matched true control
    // points; unmatched curves only feed the constant existence BCE.
    if (n_matched > 0) {
      const double scale = 1.0 / (3.0 * static_cast<double>(n_matched));
      for (std::size_t i = 0; i < n_curves; ++i) {
        const int g = match.est_to_gt[i];
        if (g < 0) continue;
        for (std::size_t k = 0; k < 3; ++k) {
          const Vec2 d = theta[3 * i + k] - gt_units[3 * static_cast<std::size_t>(g) + k];
          grad[3 * i + k].x += scale * huber_grad(d.x);
          grad[3 * i + k].z += scale * huber_grad(d.z);
        }
      }
    }
    // Clustering term: d(total)/d(logit) from the softmax, chained through
    // score = -D/sigma and the envelope derivative dD/dP_k at the frozen
    // projection parameter.
    if (alpha != 0.0 && n_objects > 0) {
      const MembershipMatrix probs = softmax_rows(scores);
      const double inv_n = 1.0 / static_cast<double>(n_objects);
      for (std::size_t j = 0; j < n_objects; ++j) {
        const double w =
            z_bar(j, n_curves) == 1.0 ? kOutlierWeight : 1.0;
        for (std::size_t i = 0; i < n_curves; ++i) {
          const double coeff =
              alpha * w * (probs(j, i) - z_bar(j, i)) * inv_n * (-1.0 / kSigmaC);
          const double dist = proj_d(j, i);
          if (coeff == 0.0 || dist < 1e-9) continue;
          const double t = proj_t(j, i);
          double b[3];
          bernstein(t, b);
          const Vec2 dir =
              (bezier_point(result.graph.curves[i], t) - centers[j]) * (1.0 / dist);
          for (std::size_t k = 0; k < 3; ++k) {
            grad[3 * i + k].x += coeff * b[k] * dir.x * roi.width();
            grad[3 * i + k].z += coeff * b[k] * dir.z * roi.depth();
          }
        }
      }
    }
    for (std::size_t p = 0; p < theta.size(); ++p) theta[p] = theta[p] - grad[p] * lr;
    result.graph = rebuild(theta);
  }
  return result;
}

}  // namespace lanecluster
