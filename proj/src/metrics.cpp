#include "lanecluster/metrics.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace lanecluster {

namespace {

constexpr std::size_t kSamples = 100;
constexpr double kThresholds[] = {0.5, 1.0, 1.5};

double min_distance_to_graph(const LaneGraph& graph, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const BezierCurve& c : graph.curves)
    best = std::min(best, closest_point(c, p).distance);
  return best;
}

// Fraction of samples from `from` lying within `threshold` of some curve of
// `to`. No samples (empty `from`) is vacuously 1; empty `to` leaves every
// sample uncovered.
double coverage(const LaneGraph& from, const LaneGraph& to, double threshold) {
  if (from.size() == 0) return 1.0;
  std::size_t hit = 0, total = 0;
  for (const BezierCurve& c : from.curves) {
    for (const Vec2& p : sample_curve(c, kSamples)) {
      if (min_distance_to_graph(to, p) < threshold) ++hit;
      ++total;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

double f1(double precision, double recall) {
  const double s = precision + recall;
  if (s == 0.0) return 0.0;
  return 2.0 * precision * recall / s;
}

}  // namespace

std::pair<double, double> centerline_pr(const LaneGraph& est, const LaneGraph& gt,
                                        double threshold) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("centerline_pr: threshold must be positive");
  return {coverage(est, gt, threshold), coverage(gt, est, threshold)};
}

double m_f_score(const LaneGraph& est, const LaneGraph& gt) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double thr : kThresholds) {
    const auto [p, r] = centerline_pr(est, gt, thr);
    sum += f1(p, r);
    ++n;
  }
  return sum / static_cast<double>(n);
}

double detect_score(const LaneGraph& est, const LaneGraph& gt, double threshold) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("detect_score: threshold must be positive");
  if (gt.size() == 0) return 1.0;
  const GraphMatch match = match_graphs(est, gt);
  std::size_t detected = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int e = match.gt_to_est[i];
    if (e < 0) continue;
    double sum = 0.0;
    for (const Vec2& p : sample_curve(gt.curves[i], kSamples))
      sum += closest_point(est.curves[static_cast<std::size_t>(e)], p).distance;
    if (sum / static_cast<double>(kSamples) < threshold) ++detected;
  }
  return static_cast<double>(detected) / static_cast<double>(gt.size());
}

double connectivity_f(const LaneGraph& est, const LaneGraph& gt,
                      const GraphMatch& match) {
  if (match.est_to_gt.size() != est.size() || match.gt_to_est.size() != gt.size())
    throw std::invalid_argument("connectivity_f: match does not fit the graphs");
  std::set<std::pair<std::size_t, std::size_t>> gt_edges;
  for (const auto& e : gt.edges()) gt_edges.insert(e);
  std::set<std::pair<std::size_t, std::size_t>> transported;
  for (const auto& [i, j] : est.edges()) {
    const int a = match.est_to_gt[i];
    const int b = match.est_to_gt[j];
    if (a < 0 || b < 0) continue;
    transported.insert({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  if (transported.empty() && gt_edges.empty()) return 1.0;
  if (transported.empty() || gt_edges.empty()) return 0.0;
  std::size_t tp = 0;
  for (const auto& e : transported)
    if (gt_edges.count(e)) ++tp;
  const double precision = static_cast<double>(tp) / static_cast<double>(transported.size());
  const double recall = static_cast<double>(tp) / static_cast<double>(gt_edges.size());
  return f1(precision, recall);
}

EvalReport evaluate(const LaneGraph& est, const LaneGraph& gt,
                    const RegionOfInterest& roi) {
  EvalReport report;
  double sum = 0.0;
  for (double thr : kThresholds) {
    const auto [p, r] = centerline_pr(est, gt, thr);
    report.per_threshold.push_back({thr, p, r});
    sum += f1(p, r);
  }
  report.m_f = sum / static_cast<double>(std::size(kThresholds));
  report.detect = detect_score(est, gt);
  report.c_f = connectivity_f(est, gt, match_graphs(est, gt, roi));
  return report;
}

}  // namespace lanecluster
