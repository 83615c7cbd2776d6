#pragma once

#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/matching.hpp"
#include "lanecluster/matrix.hpp"
#include "lanecluster/membership.hpp"
#include "lanecluster/objects.hpp"

namespace lanecluster {

/// Pre-softmax membership scores, N_objects x (N_curves + 1), outlier last.
using LogitMatrix = Matrix;

/// Loss breakdown for one sample. total = lane_graph_loss + alpha * clustering_loss;
/// the refinement loss is reported separately.
struct LossReport {
  double lane_graph_loss{0.0};
  double clustering_loss{0.0};
  double refine_loss{0.0};
  double total{0.0};
  double alpha{1.0};
};

/// Numerically stable (max-subtracted) row softmax.
MembershipMatrix softmax_rows(const LogitMatrix& logits);

/// Weighted clustering cross-entropy, mean over objects. Rows whose target is
/// the outlier column are weighted by outlier_weight; an empty matrix gives 0.
/// Throws when the target is not one-hot or shapes differ.
double clustering_loss(const LogitMatrix& logits, const MembershipMatrix& target,
                       double outlier_weight = 0.1);

/// d(clustering_loss)/d(logits): per row, w_j * (softmax - target) / N.
Matrix clustering_loss_grad(const LogitMatrix& logits, const MembershipMatrix& target,
                            double outlier_weight = 0.1);

/// Surrogate lane-graph loss: mean L1 over matched control points in
/// ROI-normalized coordinates plus binary cross-entropy of the existence
/// probabilities (matched -> 1, unmatched -> 0, clamped at eps = 1e-7).
double lane_graph_loss(const LaneGraph& est, const LaneGraph& gt, const GraphMatch& match,
                       const RegionOfInterest& roi = {});

/// Mean L1 distance between paired centers, in meters.
double refine_loss(const std::vector<Vec2>& pred_centers, const std::vector<Vec2>& gt_centers);

/// Rigidly translates each box so its center lands on the given one;
/// orientation, extents, class and confidence are untouched. The Vec2
/// overload keeps the original height.
std::vector<DetectionBox> replace_centers(const std::vector<DetectionBox>& boxes,
                                          const std::vector<Vec3>& centers);
std::vector<DetectionBox> replace_centers(const std::vector<DetectionBox>& boxes,
                                          const std::vector<Vec2>& centers);

double total_loss(double lane_graph, double clustering, double alpha = 1.0);

}  // namespace lanecluster
