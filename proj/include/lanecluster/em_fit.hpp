#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/membership.hpp"

namespace lanecluster {

/// Mixture model over BEV points: k Bezier centerlines act as cluster
/// centers with an isotropic Gaussian kernel in curve distance,
///   f_i(c) = 1/(2 pi sigma^2) * exp(-D_i(c)^2 / (2 sigma^2)),
/// plus a uniform outlier component of constant density outlier_density.
struct EmConfig {
  std::size_t k{1};
  double sigma{1.0};           // meters
  double outlier_density{1.0 / (50.0 * 49.0)};  // uniform over the default ROI
  std::size_t max_iters{100};
  double tol{1e-6};            // log-likelihood delta for convergence
  std::uint64_t seed{0};

  void validate() const;
};

struct EmState {
  std::vector<BezierCurve> curves;
  std::vector<double> mixing;  // k+1 weights, last is the outlier component
  MembershipMatrix responsibilities;
  double log_likelihood{0.0};
  std::size_t iterations{0};
  std::size_t monotonicity_violations{0};  // iterations where LL dropped by > 1e-6
};

struct EmTracePoint {
  std::size_t iteration;
  double log_likelihood;
  double delta;
};

/// Posterior responsibilities of each point over curves + outlier, computed
/// in log space. Throws NumericalError when a row has zero total density
/// (possible only with outlier_density == 0).
MembershipMatrix e_step(const std::vector<Vec2>& points,
                        const std::vector<BezierCurve>& curves,
                        const std::vector<double>& mixing, const EmConfig& config);

/// Weighted curve refit: per curve, two rounds of projecting points onto the
/// current curve and solving the responsibility-weighted least-squares system
/// for the control points. Mixing weights become the responsibility column
/// means. Curves with near-zero total weight are frozen.
std::pair<std::vector<BezierCurve>, std::vector<double>> m_step(
    const std::vector<Vec2>& points, const MembershipMatrix& responsibilities,
    const std::vector<BezierCurve>& curves);

/// sum_j log( sum_i pi_i f_i(c_j) + pi_A * outlier_density )
double log_likelihood(const std::vector<Vec2>& points,
                      const std::vector<BezierCurve>& curves,
                      const std::vector<double>& mixing, const EmConfig& config);

/// Full EM loop from a seeded initialization; deterministic for a fixed
/// seed. Requires at least 3k points. `trace`, when given, receives one
/// entry per iteration.
EmState fit(const std::vector<Vec2>& points, const EmConfig& config,
            std::vector<EmTracePoint>* trace = nullptr);

}  // namespace lanecluster
