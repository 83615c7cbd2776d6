#pragma once

#include <cstddef>
#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/losses.hpp"
#include "lanecluster/matching.hpp"
#include "lanecluster/membership.hpp"
#include "lanecluster/objects.hpp"

namespace lanecluster {

/// Everything the supervision step produces for one sample: memberships in
/// true index space (z_star), the same labels transported into predicted
/// index space (z_bar), the curve matching that did the transport, and the
/// loss breakdown.
struct LabelBundle {
  MembershipMatrix z_star;
  MembershipMatrix z_bar;
  GraphMatch match;
  LossReport losses;
};

/// Runs the label pipeline: match curves, derive true memberships from
/// geometry, transport them through the matching, and score the prediction.
/// `logits`, when given, must be shaped N_objects x (pred curves + 1) and
/// feeds the clustering loss; when null the loss is evaluated against
/// uniform logits (diagnostic mode).
LabelBundle build_labels(const LaneGraph& pred, const LaneGraph& gt,
                         const std::vector<DetectionBox>& objects,
                         const LogitMatrix* logits = nullptr, double alpha = 1.0,
                         const RegionOfInterest& roi = {});

struct DescentTraceRow {
  std::size_t step;          // 0 is the pre-update state
  double lane_graph_loss;    // exact L1 form
  double clustering_loss;
  double total;
};

struct DescentResult {
  LaneGraph graph;
  std::vector<DescentTraceRow> trace;  // steps + 1 rows
};

/// Gradient descent on the predicted control points with the matching and
/// membership targets frozen at step 0. The lane-graph term descends a
/// Huber-smoothed L1 (delta 1e-3 normalized) while the trace reports exact
/// L1. The clustering term re-derives logits from curve-center distances
/// (score -D/1m, constant outlier score -2m/1m) on top of the frozen
/// `logits` offsets, so geometry receives an analytic gradient through the
/// projection points; alpha = 0 removes that term entirely. Throws
/// NumericalError when the total rises above 10x its initial value.
DescentResult descend_curves(const LaneGraph& pred, const LaneGraph& gt,
                             const std::vector<DetectionBox>& objects,
                             const LogitMatrix* logits, double alpha, double lr,
                             std::size_t steps, const RegionOfInterest& roi = {});

}  // namespace lanecluster
