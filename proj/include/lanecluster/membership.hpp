#pragma once

#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/matching.hpp"
#include "lanecluster/matrix.hpp"
#include "lanecluster/objects.hpp"

namespace lanecluster {

/// Row-stochastic object-to-centerline distribution of size
/// N_objects x (N_curves + 1); the last column is the outlier set. Label
/// matrices are exactly one-hot.
using MembershipMatrix = Matrix;

inline std::size_t outlier_column(const MembershipMatrix& m) { return m.cols - 1; }

/// Lowest-index argmax of row r.
std::size_t argmax_row(const Matrix& m, std::size_t r);

bool is_row_stochastic(const Matrix& m, double tol = 1e-9);
bool is_one_hot(const Matrix& m);

/// True membership Z*: each object goes to its closest centerline when that
/// distance is strictly below the object's short side length W_j, otherwise
/// to the outlier column. Distance ties break toward the lower curve index.
MembershipMatrix true_membership(const LaneGraph& gt,
                                 const std::vector<DetectionBox>& objects);

/// Target membership: transports Z* from true-curve columns onto estimated
/// curves through the graph matching. Objects of unmatched true curves and
/// outlier objects land in the estimated outlier column.
MembershipMatrix target_membership(const MembershipMatrix& z_star, const GraphMatch& match,
                                   std::size_t n_est);

/// Fraction of rows whose argmax columns agree. Throws on shape mismatch.
double membership_accuracy(const MembershipMatrix& pred, const MembershipMatrix& target);

}  // namespace lanecluster
