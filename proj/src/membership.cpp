#include "lanecluster/membership.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lanecluster/errors.hpp"

namespace lanecluster {

std::size_t argmax_row(const Matrix& m, std::size_t r) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < m.cols; ++c) {
    if (m(r, c) > m(r, best)) best = c;
  }
  return best;
}

bool is_row_stochastic(const Matrix& m, double tol) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) {
      double v = m(r, c);
      if (!(v >= 0.0 && v <= 1.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

bool is_one_hot(const Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::size_t ones = 0;
    for (std::size_t c = 0; c < m.cols; ++c) {
      double v = m(r, c);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        return false;
      }
    }
    if (ones != 1) return false;
  }
  return true;
}

MembershipMatrix true_membership(const LaneGraph& gt,
                                 const std::vector<DetectionBox>& objects) {
  const std::size_t n_curves = gt.size();
  MembershipMatrix z(objects.size(), n_curves + 1);
  for (std::size_t j = 0; j < objects.size(); ++j) {
    const Vec2 center = bev_center(objects[j]);
    const double w = short_side(objects[j]);

    std::size_t closest = n_curves;  // outlier unless a curve qualifies
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_curves; ++i) {
      double d = closest_point(gt.curves[i], center).distance;
      if (d < best) {
        best = d;
        closest = i;
      }
    }
    // Strict threshold: the object is on the lane only if D < W.
    if (closest == n_curves || !(best < w)) closest = n_curves;
    z(j, closest) = 1.0;
  }
  return z;
}

MembershipMatrix target_membership(const MembershipMatrix& z_star, const GraphMatch& match,
                                   std::size_t n_est) {
  const std::size_t n_gt = z_star.cols == 0 ? 0 : z_star.cols - 1;
  if (match.gt_to_est.size() != n_gt || match.est_to_gt.size() != n_est) {
    throw ValidationError("target_membership: matching does not cover the graphs");
  }
  MembershipMatrix z(z_star.rows, n_est + 1);
  for (std::size_t j = 0; j < z_star.rows; ++j) {
    std::size_t gt_col = argmax_row(z_star, j);
    if (z_star(j, gt_col) != 1.0) {
      throw ValidationError("target_membership: z_star must be one-hot");
    }
    std::size_t dest = n_est;  // estimated outlier column
    if (gt_col < n_gt) {
      int e = match.gt_to_est[gt_col];
      if (e >= 0) dest = static_cast<std::size_t>(e);
      // A true curve without an estimated partner sends its objects to the
      // outlier column; nothing else keeps the row one-hot.
    }
    z(j, dest) = 1.0;
  }
  return z;
}

double membership_accuracy(const MembershipMatrix& pred, const MembershipMatrix& target) {
  if (!pred.same_shape(target)) {
    throw ValidationError("membership_accuracy: shape mismatch");
  }
  if (pred.rows == 0) return 1.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < pred.rows; ++r) {
    if (argmax_row(pred, r) == argmax_row(target, r)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.rows);
}

}  // namespace lanecluster
