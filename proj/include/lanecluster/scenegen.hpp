#pragma once

#include <cstdint>
#include <vector>

#include "lanecluster/lane_graph.hpp"
#include "lanecluster/membership.hpp"
#include "lanecluster/objects.hpp"

namespace lanecluster {

enum class LanePattern { parallel, fork, merge, mixed };

/// Recipe for a synthetic BEV scene. Lanes are laid out inside the default
/// ROI; objects_per_lane boxes ride each centerline with clipped lateral
/// noise, n_outliers boxes land well clear of every centerline.
struct SceneSpec {
  std::size_t n_lanes{3};
  LanePattern pattern{LanePattern::parallel};
  double lane_gap{3.5};                  // meters between adjacent centerlines
  std::size_t objects_per_lane{5};
  double lateral_noise_sigma{0.0};       // meters
  std::size_t n_outliers{0};
  double footprint_length{4.5};          // meters
  double footprint_width{2.0};           // meters
  std::uint64_t seed{0};

  void validate() const;  // throws ValidationError
};

struct Scene {
  LaneGraph gt_graph;
  std::vector<DetectionBox> objects;
  MembershipMatrix gen_membership;  // one-hot, object row -> lane column
  RegionOfInterest roi;
};

/// Deterministic scene synthesis. On-lane objects sit at uniform random t in
/// [0.05, 0.95] with lateral offset drawn N(0, sigma) and clipped inside the
/// footprint short side, so their generation label survives the membership
/// rule whenever the noise is moderate. Outliers are rejection-placed at
/// least short-side + 0.5 m from every centerline. Throws ValidationError
/// when the requested lanes do not fit the ROI.
Scene generate_scene(const SceneSpec& spec);

/// Imperfect copy of a graph: control points jittered by N(0, noise_sigma)
/// in ROI-normalized units, curves dropped i.i.d. with drop_prob, existence
/// set just below 1. Deterministic under seed.
LaneGraph perturb_graph(const LaneGraph& graph, double noise_sigma,
                        double drop_prob, std::uint64_t seed,
                        const RegionOfInterest& roi = {});

}  // namespace lanecluster
