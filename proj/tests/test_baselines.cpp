// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "rigidflow/baselines.hpp"
#include "rigidflow/rng.hpp"

using namespace rigidflow;

namespace {

std::vector<Eigen::Vector3d> random_points(int n, Rng& rng, double extent) {
  std::vector<Eigen::Vector3d> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i)
    points.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                        rng.uniform(-extent, extent));
  return points;
}

double fit_cost(const RigidMotion3D& m, const std::vector<Eigen::Vector3d>& src,
                const std::vector<Eigen::Vector3d>& dst) {
  double cost = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i)
    cost += (m.apply(src[i]) - dst[i]).squaredNorm();
  return cost;
}

}  // namespace

TEST_CASE("fit_rigid") {
  Rng rng(83);
  const auto src = random_points(40, rng, 5.0);

  SUBCASE("identical sets fit the identity with zero residual") {
    const auto m = fit_rigid(src, src);
    CHECK((m.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.translation.norm() < 1e-12);
    CHECK(fit_cost(m, src, src) < 1e-20);
  }
  SUBCASE("a pure shift is recovered exactly") {
    std::vector<Eigen::Vector3d> dst = src;
    for (auto& p : dst) p += Eigen::Vector3d(0.1, 0.0, 0.0);
    const auto m = fit_rigid(src, dst);
    CHECK((m.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m.translation - Eigen::Vector3d(0.1, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("a pure yaw is recovered to 1e-10") {
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    std::vector<Eigen::Vector3d> dst = src;
    for (auto& p : dst) p = r * p;
    const auto m = fit_rigid(src, dst);
    CHECK(std::abs(m.yaw() - 0.3) < 1e-10);
    CHECK((m.rotation - r).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("the fit is a global minimum under random perturbations") {
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const Eigen::Vector3d t(0.4, -0.2, 0.9);
    std::vector<Eigen::Vector3d> dst = src;
    for (auto& p : dst) p = r * p + t;
    // noise keeps the optimum away from an exact zero-cost solution
    Rng noise_rng(84);
    for (auto& p : dst)
      p += Eigen::Vector3d(noise_rng.normal(), noise_rng.normal(), noise_rng.normal()) * 0.05;
    const auto m = fit_rigid(src, dst);
    const double best = fit_cost(m, src, dst);
    for (int trial = 0; trial < 1000; ++trial) {
      RigidMotion3D perturbed = m;
      const Eigen::Vector3d axis(noise_rng.normal(), noise_rng.normal(), noise_rng.normal());
      perturbed.rotation =
          Eigen::AngleAxisd(1e-3 * noise_rng.uniform(), axis.normalized()).toRotationMatrix() *
          m.rotation;
      perturbed.translation += Eigen::Vector3d(noise_rng.normal(), noise_rng.normal(),
                                               noise_rng.normal()) *
                               1e-3;
      CHECK(fit_cost(perturbed, src, dst) >= best);
    }
  }
  SUBCASE("degenerate inputs are rejected") {
    const std::vector<Eigen::Vector3d> two{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(fit_rigid(two, two), std::invalid_argument);
    std::vector<Eigen::Vector3d> line;
    for (int i = 0; i < 10; ++i) line.emplace_back(i * 0.5, 0.0, 0.0);
    CHECK_THROWS_AS(fit_rigid(line, line), std::runtime_error);
  }
}

TEST_CASE("icp") {
  SUBCASE("identical clouds converge to the identity in one iteration") {
    Rng rng(89);
    PointCloud cloud;
    cloud.points = random_points(200, rng, 10.0);
    const auto result = icp(cloud, cloud);
    CHECK(result.converged);
    CHECK(result.iterations == 1);
    CHECK((result.motion.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(result.motion.translation.norm() < 1e-12);
    CHECK(result.mean_residual < 1e-12);
  }
  SUBCASE("a displaced copy is recovered to 1e-6") {
    Rng rng(97);
    PointCloud src;
    src.points = random_points(500, rng, 10.0);
    PointCloud dst = src;
    for (auto& p : dst.points) p += Eigen::Vector3d(0.2, 0.1, 0.0);
    const auto result = icp(src, dst);
    CHECK(result.converged);
    CHECK((result.motion.translation - Eigen::Vector3d(0.2, 0.1, 0.0)).norm() < 1e-6);
    CHECK(result.motion.angle() < 1e-6);
  }
  SUBCASE("the association residual never increases on noise-free data") {
    Rng rng(101);
    PointCloud src;
    src.points = random_points(400, rng, 10.0);
    PointCloud dst = src;
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(0.25, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (auto& p : dst.points) p = r * p + Eigen::Vector3d(0.5, -0.3, 0.0);
    const auto result = icp(src, dst);
    for (std::size_t i = 1; i < result.residual_history.size(); ++i)
      CHECK(result.residual_history[i] <= result.residual_history[i - 1] + 1e-12);
    CHECK(result.converged);
    CHECK(std::abs(result.motion.yaw() - 0.25) < 1e-6);
  }
  SUBCASE("empty clouds are an error") {
    PointCloud empty, one;
    one.points.emplace_back(0, 0, 0);
    CHECK_THROWS_AS(icp(empty, one), std::invalid_argument);
    CHECK_THROWS_AS(icp(one, empty), std::invalid_argument);
  }
}

TEST_CASE("fit_planar_from_flow") {
  Rng rng(103);
  std::vector<Eigen::Vector2d> points;
  for (int i = 0; i < 50; ++i)
    points.emplace_back(rng.uniform(-8, 8), rng.uniform(-8, 8));

  SUBCASE("zero flow fits the identity") {
    const std::vector<Eigen::Vector2d> flows(points.size(), Eigen::Vector2d::Zero());
    const auto fit = fit_planar_from_flow(points, flows);
    CHECK(std::abs(fit.motion.theta) < 1e-12);
    CHECK(fit.motion.t.norm() < 1e-12);
    CHECK(fit.rms_residual < 1e-12);
  }
  SUBCASE("flow generated by a known motion is recovered to 1e-10") {
    const auto truth = PlanarRigidMotion::world(0.2, {1.0, 0.0});
    std::vector<Eigen::Vector2d> flows;
    for (const auto& p : points)
      flows.push_back(rot2(truth.theta) * p + truth.t - p);
    const auto fit = fit_planar_from_flow(points, flows);
    CHECK(std::abs(fit.motion.theta - 0.2) < 1e-10);
    CHECK((fit.motion.t - truth.t).norm() < 1e-10);
    CHECK(fit.rms_residual < 1e-10);
  }
  SUBCASE("flows no rigid motion explains keep a provable residual") {
    // one local motion applied about two different origins: the endpoints
    // change their mutual distance, so every rigid fit must miss by at least
    // |D' - D| / 2 in rms over the two points
    const Eigen::Vector2d p(0.0, 0.0), q(4.0, 1.0);
    const Eigen::Vector2d o_p(1.0, 0.0), o_q(2.0, 3.0);
    const double theta = 0.3;
    const std::vector<Eigen::Vector2d> two{p, q};
    const std::vector<Eigen::Vector2d> flows{planar_flow(p, o_p, theta, {0.2, 0.1}),
                                             planar_flow(q, o_q, theta, {0.2, 0.1})};
    const double d_before = (p - q).norm();
    const double d_after = ((p + flows[0]) - (q + flows[1])).norm();
    REQUIRE(std::abs(d_after - d_before) > 1e-3);
    const auto fit = fit_planar_from_flow(two, flows);
    CHECK(fit.rms_residual >= std::abs(d_after - d_before) / 2.0 - 1e-12);
    CHECK(fit.rms_residual > 0.0);
    // at the generating rotation, the unmet translation disagreement is the
    // closed-form claim-1 inconsistency of the two origins
    const Eigen::Vector2d t_p = flows[0] + (Eigen::Matrix2d::Identity() - rot2(theta)) * p;
    const Eigen::Vector2d t_q = flows[1] + (Eigen::Matrix2d::Identity() - rot2(theta)) * q;
    CHECK(std::abs((t_p - t_q).norm() - claim1_inconsistency(o_p, o_q, theta)) < 1e-12);
  }
  SUBCASE("agrees with fit_rigid restricted to the plane") {
    Rng inner(107);
    for (int trial = 0; trial < 50; ++trial) {
      const auto truth = PlanarRigidMotion::world(inner.uniform(-0.8, 0.8),
                                                  {inner.uniform(-2, 2), inner.uniform(-2, 2)});
      std::vector<Eigen::Vector2d> flows;
      std::vector<Eigen::Vector3d> src3, dst3;
      for (const auto& p : points) {
        const Eigen::Vector2d moved = rot2(truth.theta) * p + truth.t;
        flows.push_back(moved - p);
        src3.emplace_back(p.x(), p.y(), 0.0);
        dst3.emplace_back(moved.x(), moved.y(), 0.0);
      }
      const auto planar = fit_planar_from_flow(points, flows);
      const auto rigid = fit_rigid(src3, dst3);
      CHECK(std::abs(planar.motion.theta - rigid.yaw()) < 1e-9);
      CHECK((planar.motion.t - rigid.translation.head<2>()).norm() < 1e-9);
    }
  }
  SUBCASE("degenerate inputs are rejected") {
    const std::vector<Eigen::Vector2d> one{{1.0, 1.0}};
    CHECK_THROWS_AS(fit_planar_from_flow(one, one), std::invalid_argument);
    const std::vector<Eigen::Vector2d> same{{1.0, 1.0}, {1.0, 1.0}};
    const std::vector<Eigen::Vector2d> flows{{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(fit_planar_from_flow(same, flows), std::runtime_error);
  }
}
