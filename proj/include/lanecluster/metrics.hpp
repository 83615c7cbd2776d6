#pragma once

#include <utility>
#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/matching.hpp"

namespace lanecluster {

struct ThresholdPr {
  double threshold;  // meters
  double precision;
  double recall;
};

/// STSU-style lane-graph scores. m_f is the mean centerline F1 over the
/// thresholds in per_threshold, detect the fraction of true centerlines
/// recovered by their matched estimate, c_f the F1 of the connectivity
/// edges after transporting estimated edges into true index space.
struct EvalReport {
  double m_f{0.0};
  double detect{0.0};
  double c_f{0.0};
  std::vector<ThresholdPr> per_threshold;
};

/// Precision/recall of estimated centerlines against true ones at a distance
/// threshold. Each curve is sampled at 100 uniform parameters; a sample
/// counts when its exact distance to the nearest curve on the other side is
/// below the threshold. Empty sample sets are vacuously perfect, so an empty
/// estimate scores (1, 0) against a nonempty truth.
std::pair<double, double> centerline_pr(const LaneGraph& est, const LaneGraph& gt,
                                        double threshold);

/// Mean centerline F1 over thresholds {0.5, 1.0, 1.5} meters.
double m_f_score(const LaneGraph& est, const LaneGraph& gt);

/// Fraction of true centerlines whose matched estimate stays within
/// `threshold` mean sampled distance. Unmatched true centerlines count as
/// missed; an empty truth scores 1.
double detect_score(const LaneGraph& est, const LaneGraph& gt,
                    double threshold = 1.0);

/// F1 between estimated incidence edges mapped through the matching and the
/// true incidence edges. Edges touching an unmatched estimate are dropped.
/// No edges on either side scores 1.
double connectivity_f(const LaneGraph& est, const LaneGraph& gt,
                      const GraphMatch& match);

EvalReport evaluate(const LaneGraph& est, const LaneGraph& gt,
                    const RegionOfInterest& roi = {});

}  // namespace lanecluster
