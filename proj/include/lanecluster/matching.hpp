#pragma once

#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/matrix.hpp"

namespace lanecluster {

/// Result of a minimum-cost assignment. Unassigned rows/columns (rectangular
/// input) are marked -1; total_cost sums only the real assigned pairs.
struct Assignment {
  std::vector<int> row_to_col;
  std::vector<int> col_to_row;
  double total_cost{0.0};
};

/// Minimum-total-cost, maximum-cardinality assignment of min(R,C) pairs.
/// Rectangular matrices are padded square with a constant sentinel; padded
/// pairs come back as unmatched. Deterministic: rows are processed in index
/// order and ties in the augmenting search resolve toward lower column
/// indices. Throws on NaN costs.
Assignment hungarian(const Matrix& cost);

/// Matching cost between estimated and true centerlines: mean L1 distance
/// over the three control-point pairs in ROI-normalized coordinates plus
/// (1 - existence) of the estimate.
Matrix curve_match_cost(const LaneGraph& est, const LaneGraph& gt,
                        const RegionOfInterest& roi = {});

/// Bipartite matching of estimated to true centerlines. The two index maps
/// are mutually inverse on their matched domains; the outlier set of the
/// estimated graph is always paired with the outlier set of the true graph.
struct GraphMatch {
  std::vector<int> est_to_gt;  // -1 where unmatched
  std::vector<int> gt_to_est;  // -1 where unmatched
};

GraphMatch match_graphs(const LaneGraph& est, const LaneGraph& gt,
                        const RegionOfInterest& roi = {});

}  // namespace lanecluster
