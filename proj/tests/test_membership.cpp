#include <vector>

#include "doctest.h"
#include "lanecluster/errors.hpp"
#include "lanecluster/membership.hpp"
#include "lanecluster/scenegen.hpp"
#include "oracles.hpp"

using namespace lanecluster;

namespace {

LaneGraph straight_lanes(std::initializer_list<double> xs) {
  std::vector<BezierCurve> cs;
  for (double x : xs) cs.push_back(BezierCurve{{x, 2.0}, {x, 25.0}, {x, 49.0}});
  return LaneGraph(std::move(cs));
}

// 4 x 2 m footprint box at a BEV position, facing +z: short side W = 2.
DetectionBox car_at(double x, double z) {
  return make_detection_box({x, 0.75, z}, 0.0, 4.0, 2.0, 1.5);
}

}  // namespace

TEST_SUITE("membership") {

TEST_CASE("argmax_row takes the lowest index on ties") {
  Matrix m(1, 4);
  m(0, 1) = 5.0;
  m(0, 3) = 5.0;
  CHECK(argmax_row(m, 0) == 1);
}

TEST_CASE("row stochastic and one-hot predicates") {
  Matrix soft(2, 3);
  soft(0, 0) = 0.2; soft(0, 1) = 0.3; soft(0, 2) = 0.5;
  soft(1, 0) = 1.0;
  CHECK(is_row_stochastic(soft));
  CHECK_FALSE(is_one_hot(soft));

  Matrix hot(2, 3);
  hot(0, 2) = 1.0;
  hot(1, 0) = 1.0;
  CHECK(is_one_hot(hot));
  CHECK(is_row_stochastic(hot));

  Matrix bad(1, 2);
  bad(0, 0) = 0.7;
  bad(0, 1) = 0.7;
  CHECK_FALSE(is_row_stochastic(bad));
  CHECK_FALSE(is_one_hot(bad));
}

TEST_CASE("true membership basic geometry") {
  const LaneGraph g = straight_lanes({0.0, 6.0});

  SUBCASE("object on the first lane") {
    const auto z = true_membership(g, {car_at(0.0, 20.0)});
    REQUIRE(z.rows == 1);
    REQUIRE(z.cols == 3);
    CHECK(z(0, 0) == 1.0);
    CHECK(is_one_hot(z));
  }
  SUBCASE("object nearer the second lane") {
    const auto z = true_membership(g, {car_at(5.0, 20.0)});
    CHECK(z(0, 1) == 1.0);
  }
  SUBCASE("distance gate is strict") {
    // W = 2 exactly; an object at distance exactly 2 is an outlier,
    // a hair inside is on-lane.
    const auto at_gate = true_membership(g, {car_at(2.0, 20.0)});
    CHECK(at_gate(0, 2) == 1.0);
    const auto inside = true_membership(g, {car_at(2.0 - 1e-9, 20.0)});
    CHECK(inside(0, 0) == 1.0);
  }
  SUBCASE("equidistant object goes to the lower curve index") {
    const auto z = true_membership(g, {car_at(3.0, 20.0)});
    CHECK(z(0, 2) == 1.0);  // 3 m from both: outside the 2 m gate, outlier
    const LaneGraph close = straight_lanes({0.0, 3.0});
    const auto z2 = true_membership(close, {car_at(1.5, 20.0)});
    CHECK(z2(0, 0) == 1.0);
  }
  SUBCASE("far object is an outlier") {
    const auto z = true_membership(g, {car_at(-20.0, 20.0)});
    CHECK(z(0, 2) == 1.0);
  }
}

TEST_CASE("true membership degenerate shapes") {
  SUBCASE("no objects") {
    const auto z = true_membership(straight_lanes({0.0}), {});
    CHECK(z.rows == 0);
    CHECK(z.cols == 2);
  }
  SUBCASE("no curves: everything is an outlier") {
    const auto z = true_membership(LaneGraph{}, {car_at(0.0, 20.0), car_at(5.0, 30.0)});
    REQUIRE(z.cols == 1);
    CHECK(z(0, 0) == 1.0);
    CHECK(z(1, 0) == 1.0);
  }
}

TEST_CASE("true membership agrees with the naive oracle on scenes") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    SceneSpec spec;
    spec.n_lanes = 3;
    spec.pattern = seed % 2 ? LanePattern::fork : LanePattern::parallel;
    spec.objects_per_lane = 4;
    spec.lateral_noise_sigma = 0.4;
    spec.n_outliers = 3;
    spec.seed = seed;
    const Scene scene = generate_scene(spec);
    const auto ours = true_membership(scene.gt_graph, scene.objects);
    const auto ref = oracles::naive_membership(scene.gt_graph, scene.objects);
    REQUIRE(ours.same_shape(ref));
    for (std::size_t i = 0; i < ours.data.size(); ++i) CHECK(ours.data[i] == ref.data[i]);
  }
}

TEST_CASE("target membership transports labels through the match") {
  // z_star over 2 true curves + outlier.
  MembershipMatrix z_star(3, 3);
  z_star(0, 0) = 1.0;
  z_star(1, 1) = 1.0;
  z_star(2, 2) = 1.0;

  SUBCASE("identity match") {
    const GraphMatch match{{0, 1}, {0, 1}};
    const auto z = target_membership(z_star, match, 2);
    REQUIRE(z.same_shape(z_star));
    for (std::size_t i = 0; i < z.data.size(); ++i) CHECK(z.data[i] == z_star.data[i]);
  }
  SUBCASE("swapped match permutes columns") {
    const GraphMatch match{{1, 0}, {1, 0}};
    const auto z = target_membership(z_star, match, 2);
    CHECK(z(0, 1) == 1.0);
    CHECK(z(1, 0) == 1.0);
    CHECK(z(2, 2) == 1.0);
  }
  SUBCASE("unmatched true curve sends objects to the outlier column") {
    const GraphMatch match{{0}, {0, -1}};
    const auto z = target_membership(z_star, match, 1);
    REQUIRE(z.cols == 2);
    CHECK(z(0, 0) == 1.0);
    CHECK(z(1, 1) == 1.0);  // its curve has no estimated partner
    CHECK(z(2, 1) == 1.0);  // outlier stays outlier
  }
  SUBCASE("more estimated curves than true ones") {
    const GraphMatch match{{0, 1, -1}, {0, 1}};
    const auto z = target_membership(z_star, match, 3);
    REQUIRE(z.cols == 4);
    CHECK(z(0, 0) == 1.0);
    CHECK(z(1, 1) == 1.0);
    CHECK(z(2, 3) == 1.0);
  }
  SUBCASE("shape and one-hot validation") {
    const GraphMatch short_match{{0}, {0}};
    CHECK_THROWS_AS(target_membership(z_star, short_match, 1), ValidationError);
    MembershipMatrix soft(1, 3);
    soft(0, 0) = 0.5;
    soft(0, 1) = 0.5;
    CHECK_THROWS_AS(target_membership(soft, GraphMatch{{0, 1}, {0, 1}}, 2),
                    ValidationError);
  }
}

TEST_CASE("membership accuracy") {
  MembershipMatrix a(2, 3), b(2, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  b(0, 0) = 1.0;
  b(1, 2) = 1.0;
  CHECK(membership_accuracy(a, b) == 0.5);
  CHECK(membership_accuracy(a, a) == 1.0);
  CHECK(membership_accuracy(MembershipMatrix(0, 3), MembershipMatrix(0, 3)) == 1.0);
  CHECK_THROWS_AS(membership_accuracy(a, MembershipMatrix(2, 4)), ValidationError);
}

}  // TEST_SUITE
