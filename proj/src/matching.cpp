#include "lanecluster/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lanecluster {

namespace {
constexpr double kPadSentinel = 1e6;
}

Assignment hungarian(const Matrix& cost) {
  const std::size_t n_rows = cost.rows;
  const std::size_t n_cols = cost.cols;
  for (double c : cost.data) {
    if (std::isnan(c)) throw std::invalid_argument("hungarian: NaN cost");
  }

  Assignment out;
  out.row_to_col.assign(n_rows, -1);
  out.col_to_row.assign(n_cols, -1);
  if (n_rows == 0 || n_cols == 0) return out;

  // Square padded matrix, 1-based potentials formulation.
  const std::size_t dim = std::max(n_rows, n_cols);
  auto padded = [&](std::size_t r, std::size_t c) {
    return (r < n_rows && c < n_cols) ? cost(r, c) : kPadSentinel;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<int> p(dim + 1, 0), way(dim + 1, 0);
  for (std::size_t i = 1; i <= dim; ++i) {
    p[0] = static_cast<int>(i);
    std::size_t j0 = 0;
    std::vector<double> minv(dim + 1, inf);
    std::vector<char> used(dim + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = static_cast<std::size_t>(p[j0]);
      std::size_t j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        double cur = padded(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = static_cast<int>(j0);
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[static_cast<std::size_t>(p[j])] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = static_cast<std::size_t>(way[j0]);
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= dim; ++j) {
    std::size_t r = static_cast<std::size_t>(p[j]) - 1;
    std::size_t c = j - 1;
    if (r < n_rows && c < n_cols) {
      out.row_to_col[r] = static_cast<int>(c);
      out.col_to_row[c] = static_cast<int>(r);
    }
  }
  // Canonical row-order sum so total_cost matches what a caller recomputes
  // from row_to_col, independent of the augmenting order above.
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (out.row_to_col[r] >= 0) {
      out.total_cost += cost(r, static_cast<std::size_t>(out.row_to_col[r]));
    }
  }
  return out;
}

Matrix curve_match_cost(const LaneGraph& est, const LaneGraph& gt,
                        const RegionOfInterest& roi) {
  Matrix cost(est.size(), gt.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    const BezierCurve& a = est.curves[i];
    const double existence_penalty = 1.0 - est.existence_or(i);
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const BezierCurve& b = gt.curves[j];
      double l1 = l1_norm(to_roi_units(roi, a.p0) - to_roi_units(roi, b.p0)) +
                  l1_norm(to_roi_units(roi, a.p1) - to_roi_units(roi, b.p1)) +
                  l1_norm(to_roi_units(roi, a.p2) - to_roi_units(roi, b.p2));
      cost(i, j) = l1 / 3.0 + existence_penalty;
    }
  }
  return cost;
}

GraphMatch match_graphs(const LaneGraph& est, const LaneGraph& gt,
                        const RegionOfInterest& roi) {
  Assignment a = hungarian(curve_match_cost(est, gt, roi));
  return {a.row_to_col, a.col_to_row};
}

}  // namespace lanecluster
