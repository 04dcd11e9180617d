// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rigidflow/decoder.hpp"
#include "rigidflow/rng.hpp"

using namespace rigidflow;

namespace {

OrientedBox make_box(double cx, double cy, double l, double w, double yaw,
                     double score = 1.0) {
  OrientedBox box;
  box.center = {cx, cy, 0.5};
  box.size = {l, w, 1.0};
  box.yaw = yaw;
  box.score = score;
  return box;
}

// Monte-Carlo IoU oracle: samples uniformly inside the smaller box (exact
// area l*w), measures the fraction landing in the other, and combines with
// the exact areas. Sampling the smaller box keeps the estimator variance
// inside the 1e-3 budget.
double monte_carlo_iou(const OrientedBox& box_a, const OrientedBox& box_b, int samples,
                       Rng& rng) {
  const OrientedBox& a = box_a.footprint_area() <= box_b.footprint_area() ? box_a : box_b;
  const OrientedBox& b = box_a.footprint_area() <= box_b.footprint_area() ? box_b : box_a;
  const Eigen::Matrix2d ra = rot2(a.yaw);
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Vector2d local(rng.uniform(-0.5, 0.5) * a.size.x(),
                                rng.uniform(-0.5, 0.5) * a.size.y());
    const Eigen::Vector2d p = ra * local + a.center.head<2>();
    // membership in b, written out independently of OrientedBox
    const double c = std::cos(b.yaw), sn = std::sin(b.yaw);
    const Eigen::Vector2d d = p - b.center.head<2>();
    const double u = c * d.x() + sn * d.y();
    const double v = -sn * d.x() + c * d.y();
    if (std::abs(u) <= 0.5 * b.size.x() && std::abs(v) <= 0.5 * b.size.y()) ++hits;
  }
  const double inter = a.footprint_area() * hits / static_cast<double>(samples);
  const double uni = a.footprint_area() + b.footprint_area() - inter;
  return inter / uni;
}

// O(n^2) reference suppression.
std::vector<OrientedBox> nms_oracle(std::vector<OrientedBox> boxes, double tau,
                                    double overlap) {
  std::erase_if(boxes, [&](const OrientedBox& b) { return b.score < tau; });
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const OrientedBox& a, const OrientedBox& b) { return a.score > b.score; });
  std::vector<OrientedBox> kept;
  for (const auto& c : boxes) {
    bool ok = true;
    for (const auto& k : kept)
      if (ground_iou(c, k) > overlap) ok = false;
    if (ok) kept.push_back(c);
  }
  return kept;
}

}  // namespace

TEST_CASE("ground-plane IoU") {
  SUBCASE("identical boxes give exactly 1") {
    const auto a = make_box(1.0, 2.0, 3.0, 1.5, 0.7);
    CHECK(ground_iou(a, a) == 1.0);
  }
  SUBCASE("axis-aligned unit squares offset by half overlap by a third") {
    const auto a = make_box(0.0, 0.0, 1.0, 1.0, 0.0);
    const auto b = make_box(0.5, 0.0, 1.0, 1.0, 0.0);
    CHECK(ground_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("disjoint boxes give 0") {
    CHECK(ground_iou(make_box(0, 0, 1, 1, 0), make_box(5, 5, 1, 1, 0.4)) == 0.0);
  }
  SUBCASE("45-degree rotation against itself matches Monte Carlo") {
    Rng rng(31);
    const auto a = make_box(0.0, 0.0, 1.0, 1.0, 0.0);
    const auto b = make_box(0.0, 0.0, 1.0, 1.0, kPi / 4.0);
    const double mc = monte_carlo_iou(a, b, 1000000, rng);
    CHECK(std::abs(ground_iou(a, b) - mc) < 1e-3);
  }
  SUBCASE("random pairs stay in [0,1], symmetric, and match Monte Carlo") {
    Rng rng(37);
    for (int trial = 0; trial < 25; ++trial) {
      const auto a = make_box(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 3),
                              rng.uniform(1, 3), rng.uniform(-kPi, kPi));
      const auto b = make_box(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(1, 3),
                              rng.uniform(1, 3), rng.uniform(-kPi, kPi));
      const double ab = ground_iou(a, b);
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
      CHECK(ab == doctest::Approx(ground_iou(b, a)).epsilon(1e-12));
      CHECK(std::abs(ab - monte_carlo_iou(a, b, 1000000, rng)) < 1e-3);
    }
  }
}

TEST_CASE("non-maximum suppression") {
  SUBCASE("the lower-scoring duplicate is suppressed") {
    const auto kept = nms({make_box(0, 0, 2, 1, 0.1, 0.9), make_box(0, 0, 2, 1, 0.1, 0.8)},
                          0.5, 0.1);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);
  }
  SUBCASE("disjoint boxes both survive, sorted by score") {
    const auto kept =
        nms({make_box(0, 0, 2, 1, 0.0, 0.7), make_box(10, 0, 2, 1, 0.0, 0.9)}, 0.5, 0.1);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].score == 0.9);
    CHECK(kept[1].score == 0.7);
  }
  SUBCASE("boxes under the detection threshold disappear") {
    CHECK(nms({make_box(0, 0, 2, 1, 0.0, 0.4)}, 0.5, 0.1).empty());
  }
  SUBCASE("straddling overlaps match the quadratic oracle") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<OrientedBox> boxes;
      for (int b = 0; b < 8; ++b)
        boxes.push_back(make_box(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(1, 3),
                                 rng.uniform(1, 3), rng.uniform(-kPi, kPi),
                                 rng.uniform(0, 1)));
      const auto fast = nms(boxes, 0.3, 0.25);
      const auto slow = nms_oracle(boxes, 0.3, 0.25);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i].score == slow[i].score);
      // anti-chain: no kept pair exceeds the overlap threshold
      for (std::size_t i = 0; i < fast.size(); ++i)
        for (std::size_t j = i + 1; j < fast.size(); ++j)
          CHECK(ground_iou(fast[i], fast[j]) <= 0.25);
    }
  }
}

TEST_CASE("medians") {
  SUBCASE("lower median picks an observed value") {
    CHECK(lower_median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(lower_median({4.0, 1.0, 3.0, 2.0}) == 2.0);  // even: lower of the two
    CHECK(lower_median({5.0}) == 5.0);
    CHECK_THROWS_AS(lower_median({}), std::invalid_argument);
  }
  SUBCASE("circular median survives the wrap") {
    const std::vector<double> near_pi{kPi - 0.05, -kPi + 0.03, kPi - 0.01};
    const double med = circular_median(near_pi);
    const double dist = std::abs(wrap_angle(med - kPi));
    CHECK(dist < 0.06);
  }
  SUBCASE("circular median is enumeration-order invariant") {
    std::vector<double> angles{0.4, -0.2, 0.1, 0.15, -0.05};
    const double a = circular_median(angles);
    std::reverse(angles.begin(), angles.end());
    CHECK(circular_median(angles) == a);
  }
}

namespace {

GridSpec pooling_grid() {
  GridSpec spec;
  spec.origin = {-10.0, -10.0, -1.0};
  spec.voxel_size = {1.0, 1.0, 1.0};
  spec.extents = {20, 20, 2};
  spec.sample_cap = 8;
  return spec;
}

}  // namespace

TEST_CASE("object motion pooling") {
  const GridSpec grid = pooling_grid();
  const auto box = make_box(0.0, 0.0, 6.0, 6.0, 0.0);

  SUBCASE("uniform fields pool to the shared value exactly") {
    const auto m = PlanarRigidMotion::world(0.21, {1.5, -0.25});
    MotionField field;
    for (int i = 8; i < 12; ++i)
      for (int j = 8; j < 12; ++j) field[{i, j}] = m;
    const auto pooled = pool_object_motion(field, box, grid);
    CHECK(pooled.theta == m.theta);
    CHECK(pooled.t == m.t);
  }
  SUBCASE("a single outlier cannot move the median") {
    const auto majority = PlanarRigidMotion::world(0.1, {1.0, 2.0});
    MotionField field;
    field[{9, 9}] = majority;
    field[{10, 9}] = majority;
    field[{9, 10}] = majority;
    field[{10, 10}] = majority;
    field[{11, 10}] = PlanarRigidMotion::world(3.0, {-50.0, 40.0});
    const auto pooled = pool_object_motion(field, box, grid);
    CHECK(pooled.theta == majority.theta);
    CHECK(pooled.t == majority.t);
  }
  SUBCASE("even counts use the lower median per component") {
    MotionField field;
    field[{9, 9}] = PlanarRigidMotion::world(0.1, {1.0, 10.0});
    field[{10, 9}] = PlanarRigidMotion::world(0.2, {2.0, 20.0});
    field[{9, 10}] = PlanarRigidMotion::world(0.3, {3.0, 30.0});
    field[{10, 10}] = PlanarRigidMotion::world(0.4, {4.0, 40.0});
    const auto pooled = pool_object_motion(field, box, grid);
    CHECK(pooled.t.x() == 2.0);
    CHECK(pooled.t.y() == 20.0);
  }
  SUBCASE("pooling is invariant to cell enumeration order by construction") {
    // std::map iteration is ordered; feed the same motions at permuted cells
    MotionField field_a, field_b;
    const std::vector<PlanarRigidMotion> ms{
        PlanarRigidMotion::world(0.1, {1, 5}), PlanarRigidMotion::world(0.3, {3, 1}),
        PlanarRigidMotion::world(0.2, {2, 9})};
    field_a[{9, 9}] = ms[0];
    field_a[{10, 9}] = ms[1];
    field_a[{9, 10}] = ms[2];
    field_b[{9, 9}] = ms[2];
    field_b[{10, 9}] = ms[0];
    field_b[{9, 10}] = ms[1];
    const auto pa = pool_object_motion(field_a, box, grid);
    const auto pb = pool_object_motion(field_b, box, grid);
    CHECK(pa.theta == pb.theta);
    CHECK(pa.t == pb.t);
  }
  SUBCASE("an empty footprint is an error naming the box") {
    MotionField field;
    field[{0, 0}] = PlanarRigidMotion::world(0, {0, 0});  // far from the box
    CHECK_THROWS_AS(pool_object_motion(field, box, grid), std::runtime_error);
  }
  SUBCASE("local-tagged entries are rejected") {
    MotionField field;
    field[{10, 10}] = PlanarRigidMotion::local(0.1, {0, 0}, {1, 1});
    CHECK_THROWS_AS(pool_object_motion(field, box, grid), std::invalid_argument);
  }
}

TEST_CASE("ego pooling over the background") {
  const GridSpec grid = pooling_grid();
  const auto bg = PlanarRigidMotion::world(-0.02, {0.8, 0.1});

  SUBCASE("with no boxes every cell is background") {
    MotionField field;
    field[{1, 1}] = bg;
    field[{15, 3}] = bg;
    const auto pooled = pool_ego_motion(field, {}, grid);
    CHECK(pooled.theta == bg.theta);
    CHECK(pooled.t == bg.t);
  }
  SUBCASE("in-box cells are excluded no matter their value") {
    const auto box = make_box(0.0, 0.0, 6.0, 6.0, 0.0);
    MotionField field;
    field[{9, 9}] = PlanarRigidMotion::world(2.0, {99.0, -99.0});
    field[{10, 10}] = PlanarRigidMotion::world(-2.0, {77.0, 66.0});
    field[{1, 1}] = bg;
    field[{18, 2}] = bg;
    field[{2, 17}] = bg;
    const auto pooled = pool_ego_motion(field, {box}, grid);
    CHECK(pooled.theta == bg.theta);
    CHECK(pooled.t == bg.t);
  }
  SUBCASE("an all-covered field is an error") {
    const auto box = make_box(0.0, 0.0, 40.0, 40.0, 0.0);
    MotionField field;
    field[{10, 10}] = bg;
    CHECK_THROWS_AS(pool_ego_motion(field, {box}, grid), std::runtime_error);
    CHECK_THROWS_AS(pool_ego_motion(MotionField{}, {}, grid), std::runtime_error);
  }
}

TEST_CASE("ego pose <-> background motion conversions") {
  SUBCASE("identity maps to identity exactly") {
    const auto bg = ego_pose_to_background_motion(PlanarRigidMotion::world(0.0, {0, 0}));
    CHECK(bg.theta == 0.0);
    CHECK(bg.t == Eigen::Vector2d(0, 0));
  }
  SUBCASE("round trips are tight") {
    Rng rng(53);
    for (int i = 0; i < 5000; ++i) {
      const auto ego = PlanarRigidMotion::world(rng.uniform(-kPi, kPi),
                                                {rng.uniform(-5, 5), rng.uniform(-5, 5)});
      const auto back = background_motion_to_ego_pose(ego_pose_to_background_motion(ego));
      CHECK(back.theta == ego.theta);  // pure negation, exact
      CHECK((back.t - ego.t).norm() < 1e-12);
    }
  }
  SUBCASE("a static point's flow under the pose equals the background motion flow") {
    const auto ego = PlanarRigidMotion::world(0.1, {1.0, -0.5});
    const auto bg = ego_pose_to_background_motion(ego);
    const Eigen::Vector3d p(10.0, 0.0, 1.0);
    const Eigen::Vector2d expected = rot2(ego.theta).transpose() * (p.head<2>() - ego.t);
    const Eigen::Vector3d via_bg = flow_from_local_motion(p, Eigen::Vector2d(0, 0), bg);
    CHECK(std::abs(via_bg.x() - (expected.x() - p.x())) < 1e-12);
    CHECK(std::abs(via_bg.y() - (expected.y() - p.y())) < 1e-12);
  }
}

TEST_CASE("ground truth synthesis") {
  const GridSpec grid = pooling_grid();
  PointCloud cloud;
  for (int i = -8; i < 8; ++i)
    for (int j = -8; j < 8; ++j) cloud.points.emplace_back(i + 0.5, j + 0.5, 0.0);
  const auto vox = voxelize(cloud, grid);
  const auto identity = PlanarRigidMotion::world(0.0, {0.0, 0.0});

  SUBCASE("a static scene has zero flow everywhere") {
    const auto gt = synthesize_gt({}, {}, identity, cloud, vox);
    for (const auto& v : gt.flow) CHECK(v == Eigen::Vector3d(0, 0, 0));
    for (const auto& [g, m] : gt.cell_world) {
      CHECK(m.theta == 0.0);
      CHECK(m.t == Eigen::Vector2d(0, 0));
    }
  }
  SUBCASE("a translating object moves exactly its box points") {
    const auto box = make_box(0.0, 0.0, 4.0, 4.0, 0.0);
    const auto motion = PlanarRigidMotion::world(0.0, {1.0, 0.0});
    const auto gt = synthesize_gt({box}, {motion}, identity, cloud, vox);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (box.footprint_contains(cloud.points[i].head<2>()))
        CHECK(gt.flow[i] == Eigen::Vector3d(1, 0, 0));
      else
        CHECK(gt.flow[i] == Eigen::Vector3d(0, 0, 0));
    }
  }
  SUBCASE("a rotating ego bends the background flow") {
    const auto ego = PlanarRigidMotion::world(0.1, {0.0, 0.0});
    PointCloud single;
    single.points.emplace_back(10.0, 0.0, 0.0);
    const auto flow = synthesize_point_flow({}, {}, ego, single);
    CHECK(flow[0].x() == doctest::Approx(10.0 * (std::cos(0.1) - 1.0)).epsilon(1e-12));
    CHECK(flow[0].y() == doctest::Approx(-10.0 * std::sin(0.1)).epsilon(1e-12));
  }
  SUBCASE("overlapping boxes resolve to the higher score and count a warning") {
    const auto box_low = make_box(0.0, 0.0, 4.0, 4.0, 0.0, 0.5);
    const auto box_high = make_box(0.5, 0.0, 4.0, 4.0, 0.0, 0.9);
    const auto m_low = PlanarRigidMotion::world(0.0, {1.0, 0.0});
    const auto m_high = PlanarRigidMotion::world(0.0, {0.0, 1.0});
    PointCloud single;
    single.points.emplace_back(0.25, 0.0, 0.0);  // inside both footprints
    int warnings = 0;
    const auto flow =
        synthesize_point_flow({box_low, box_high}, {m_low, m_high}, identity, single, &warnings);
    CHECK(warnings == 1);
    CHECK(flow[0] == Eigen::Vector3d(0, 1, 0));
  }
  SUBCASE("synthesis followed by pooling recovers the motions bitwise") {
    const auto box = make_box(0.0, 0.0, 6.0, 6.0, 0.3);
    const auto motion = PlanarRigidMotion::world(0.17, {0.9, -1.1});
    const auto gt = synthesize_gt({box}, {motion}, identity, cloud, vox);
    const auto pooled = pool_object_motion(gt.cell_world, box, grid);
    CHECK(pooled.theta == motion.theta);
    CHECK(pooled.t == motion.t);
    const auto bg = pool_ego_motion(gt.cell_world, {box}, grid);
    CHECK(bg.theta == 0.0);
    CHECK(bg.t == Eigen::Vector2d(0, 0));
  }
  SUBCASE("local targets are the world targets reframed at each cell") {
    const auto box = make_box(0.0, 0.0, 6.0, 6.0, 0.0);
    const auto motion = PlanarRigidMotion::world(0.17, {0.9, -1.1});
    const auto gt = synthesize_gt({box}, {motion}, identity, cloud, vox);
    for (const auto& [g, local] : gt.cell_local) {
      const auto expected = world_to_local(gt.cell_world.at(g), grid.ground_cell_center(g));
      CHECK(local.theta == expected.theta);
      CHECK(local.t == expected.t);
    }
  }
}
