#include "lanecluster/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lanecluster/errors.hpp"

namespace lanecluster {

MembershipMatrix softmax_rows(const LogitMatrix& logits) {
  for (double v : logits.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax_rows: non-finite logit");
  }
  MembershipMatrix out(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < logits.cols; ++c) mx = std::max(mx, logits(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      sum += out(r, c);
    }
    for (std::size_t c = 0; c < logits.cols; ++c) out(r, c) /= sum;
  }
  return out;
}

namespace {

void check_clustering_inputs(const LogitMatrix& logits, const MembershipMatrix& target) {
  if (!logits.same_shape(target)) {
    throw ValidationError("clustering loss: logits and target shapes differ");
  }
  if (!is_one_hot(target)) {
    throw ValidationError("clustering loss: target must be one-hot");
  }
}

}  // namespace

double clustering_loss(const LogitMatrix& logits, const MembershipMatrix& target,
                       double outlier_weight) {
  check_clustering_inputs(logits, target);
  if (logits.rows == 0) return 0.0;

  const std::size_t outlier = target.cols - 1;
  MembershipMatrix p = softmax_rows(logits);
  double sum = 0.0;
  for (std::size_t r = 0; r < target.rows; ++r) {
    std::size_t c = argmax_row(target, r);
    double w = (c == outlier) ? outlier_weight : 1.0;
    sum += w * -std::log(std::max(p(r, c), 1e-300));
  }
  return sum / static_cast<double>(target.rows);
}

Matrix clustering_loss_grad(const LogitMatrix& logits, const MembershipMatrix& target,
                            double outlier_weight) {
  check_clustering_inputs(logits, target);
  Matrix grad(logits.rows, logits.cols);
  if (logits.rows == 0) return grad;

  const std::size_t outlier = target.cols - 1;
  const double inv_n = 1.0 / static_cast<double>(logits.rows);
  MembershipMatrix p = softmax_rows(logits);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    double w = (argmax_row(target, r) == outlier) ? outlier_weight : 1.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      grad(r, c) = w * (p(r, c) - target(r, c)) * inv_n;
    }
  }
  return grad;
}

double lane_graph_loss(const LaneGraph& est, const LaneGraph& gt, const GraphMatch& match,
                       const RegionOfInterest& roi) {
  if (match.est_to_gt.size() != est.size() || match.gt_to_est.size() != gt.size()) {
    throw ValidationError("lane_graph_loss: matching does not cover the graphs");
  }

  double l1_sum = 0.0;
  std::size_t n_matched = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    int g = match.est_to_gt[i];
    if (g < 0) continue;
    const BezierCurve& a = est.curves[i];
    const BezierCurve& b = gt.curves[static_cast<std::size_t>(g)];
    double l1 = l1_norm(to_roi_units(roi, a.p0) - to_roi_units(roi, b.p0)) +
                l1_norm(to_roi_units(roi, a.p1) - to_roi_units(roi, b.p1)) +
                l1_norm(to_roi_units(roi, a.p2) - to_roi_units(roi, b.p2));
    l1_sum += l1 / 3.0;
    ++n_matched;
  }
  double l1_term = n_matched ? l1_sum / static_cast<double>(n_matched) : 0.0;

  constexpr double eps = 1e-7;
  double bce_sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    double p = std::clamp(est.existence_or(i), eps, 1.0 - eps);
    bce_sum += (match.est_to_gt[i] >= 0) ? -std::log(p) : -std::log(1.0 - p);
  }
  double bce_term = est.size() ? bce_sum / static_cast<double>(est.size()) : 0.0;

  return l1_term + bce_term;
}

double refine_loss(const std::vector<Vec2>& pred_centers, const std::vector<Vec2>& gt_centers) {
  if (pred_centers.size() != gt_centers.size()) {
    throw ValidationError("refine_loss: center list lengths differ");
  }
  if (pred_centers.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred_centers.size(); ++i) {
    sum += l1_norm(pred_centers[i] - gt_centers[i]);
  }
  return sum / static_cast<double>(pred_centers.size());
}

std::vector<DetectionBox> replace_centers(const std::vector<DetectionBox>& boxes,
                                          const std::vector<Vec3>& centers) {
  if (boxes.size() != centers.size()) {
    throw ValidationError("replace_centers: list lengths differ");
  }
  std::vector<DetectionBox> out;
  out.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    DetectionBox b = boxes[i];
    const Vec3 delta = centers[i] - b.center;
    b.center = centers[i];
    for (Vec3& c : b.corners) c = c + delta;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<DetectionBox> replace_centers(const std::vector<DetectionBox>& boxes,
                                          const std::vector<Vec2>& centers) {
  std::vector<Vec3> lifted;
  lifted.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double y = i < boxes.size() ? boxes[i].center.y : 0.0;
    lifted.push_back({centers[i].x, y, centers[i].z});
  }
  return replace_centers(boxes, lifted);
}

double total_loss(double lane_graph, double clustering, double alpha) {
  if (lane_graph < 0.0 || clustering < 0.0) {
    throw std::invalid_argument("total_loss: losses must be non-negative");
  }
  return lane_graph + alpha * clustering;
}

}  // namespace lanecluster
