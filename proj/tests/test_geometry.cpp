#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "obbtrack/geometry.hpp"
#include "obbtrack/rng.hpp"
#include "support.hpp"

using namespace obbtrack;

TEST(WrapAngle, StaysInHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5 + 4 * kPi), 0.5, 1e-12);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-100, 100);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-9);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-9);
  }
}

TEST(OrientedBox, RejectsBadInput) {
  EXPECT_THROW(OrientedBox({0, 0, 0}, {0, 1, 1}, 0), InvalidInput);
  EXPECT_THROW(OrientedBox({0, 0, 0}, {1, -1, 1}, 0), InvalidInput);
  EXPECT_THROW(OrientedBox({NAN, 0, 0}, {1, 1, 1}, 0), InvalidInput);
  EXPECT_THROW(OrientedBox({0, 0, 0}, {1, 1, 1}, INFINITY), InvalidInput);
  EXPECT_THROW(OrientedBox({0, 0, 0}, {1, 1, 1}, 0, "X", 1.5), InvalidInput);
}

TEST(OrientedBox, WrapsYawOnConstruction) {
  const OrientedBox b({0, 0, 0}, {1, 1, 1}, 3 * kPi);
  EXPECT_NEAR(b.yaw(), kPi, 1e-12);
}

TEST(OrientedBox, FootprintIsCounterClockwiseWithExpectedArea) {
  const OrientedBox b({1, 2, 0}, {4, 2, 1}, 0.7);
  const auto fp = b.footprint();
  std::vector<detail::Point2> poly(fp.begin(), fp.end());
  EXPECT_NEAR(detail::polygon_area(poly), 8.0, 1e-12);
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose p(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-kPi, kPi));
    const PlanarPose id = compose(p, inverse(p));
    EXPECT_NEAR(id.x, 0.0, 1e-9);
    EXPECT_NEAR(id.y, 0.0, 1e-9);
    EXPECT_NEAR(wrap_angle(id.heading), 0.0, 1e-12);
  }
}

TEST(Transform, MapAndSensorAreInverse) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose robot(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi));
    const PlanarPose mount(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-kPi, kPi));
    const OrientedBox b({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2)}, {1.2, 0.8, 0.7},
                        rng.uniform(-kPi, kPi), "MW");
    const OrientedBox back = transform_to_map(transform_to_sensor(b, robot, mount), robot, mount);
    EXPECT_NEAR(back.center().x, b.center().x, 1e-9);
    EXPECT_NEAR(back.center().y, b.center().y, 1e-9);
    EXPECT_DOUBLE_EQ(back.center().z, b.center().z);
    EXPECT_NEAR(yaw_difference(back.yaw(), b.yaw()), 0.0, 1e-9);
  }
}

TEST(Transform, KnownRotation) {
  const PlanarPose robot(1.0, 0.0, kPi / 2);
  const OrientedBox b({2.0, 0.0, 0.5}, {1, 1, 1}, 0.0);
  const OrientedBox m = transform_to_map(b, robot);
  EXPECT_NEAR(m.center().x, 1.0, 1e-12);
  EXPECT_NEAR(m.center().y, 2.0, 1e-12);
  EXPECT_NEAR(m.yaw(), kPi / 2, 1e-12);
}

TEST(Iou, IdenticalBoxesGiveOne) {
  const OrientedBox b({0.3, -1, 0.4}, {1.6, 0.8, 0.82}, 0.9);
  EXPECT_NEAR(iou_3d(b, b), 1.0, 1e-12);
}

TEST(Iou, DisjointBoxesGiveZero) {
  const OrientedBox a({0, 0, 0}, {1, 1, 1}, 0.3);
  EXPECT_EQ(iou_3d(a, a.with_center({5, 0, 0})), 0.0);
  EXPECT_EQ(iou_3d(a, a.with_center({0, 0, 2})), 0.0);
}

TEST(Iou, HalfTurnIsIndistinguishable) {
  const OrientedBox a({0, 0, 0}, {2, 1, 1}, 0.4);
  EXPECT_NEAR(iou_3d(a, a.with_yaw(0.4 + kPi)), 1.0, 1e-12);
}

TEST(Iou, AxisAlignedMatchesClosedForm) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const Vec3 ca{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 cb{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 ea{rng.uniform(0.2, 2), rng.uniform(0.2, 2), rng.uniform(0.2, 2)};
    const Vec3 eb{rng.uniform(0.2, 2), rng.uniform(0.2, 2), rng.uniform(0.2, 2)};
    const OrientedBox a(ca, ea, 0.0);
    const OrientedBox b(cb, eb, 0.0);
    EXPECT_NEAR(iou_3d(a, b), test::aabb_iou(ca, ea, cb, eb), 1e-9);
    // a quarter turn swaps length and width
    const OrientedBox bq(cb, {eb.y, eb.x, eb.z}, kPi / 2);
    EXPECT_NEAR(iou_3d(a, bq), test::aabb_iou(ca, ea, cb, eb), 1e-9);
  }
}

TEST(Iou, RotatedMatchesMonteCarlo) {
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    const auto [a, b] = test::random_overlapping_pair(rng);
    const double mc = test::monte_carlo_iou(a, b, 200000, 1000 + i);
    EXPECT_NEAR(iou_3d(a, b), mc, 0.01) << "pair " << i;
  }
}

TEST(Iou, SymmetricAndBounded) {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto [a, b] = test::random_overlapping_pair(rng);
    const double ab = iou_3d(a, b);
    EXPECT_NEAR(ab, iou_3d(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(Iou, InvariantUnderRigidMotion) {
  Rng rng(19);
  for (int i = 0; i < 500; ++i) {
    const auto [a, b] = test::random_overlapping_pair(rng);
    const PlanarPose g(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-kPi, kPi));
    EXPECT_NEAR(iou_3d(transform_to_map(a, g), transform_to_map(b, g)), iou_3d(a, b), 1e-9);
  }
}

TEST(ClipConvex, SquareClippedBySquare) {
  using P = detail::Point2;
  std::vector<P> s{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<P> c{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_NEAR(detail::polygon_area(detail::clip_convex(s, c)), 1.0, 1e-12);
}

TEST(YawDifference, SmallestWrappedMagnitude) {
  EXPECT_NEAR(yaw_difference(kPi - 0.1, -kPi + 0.1), 0.2, 1e-12);
  EXPECT_NEAR(yaw_difference(0.0, kPi), kPi, 1e-12);
  EXPECT_THROW(yaw_difference(NAN, 0.0), InvalidInput);
}

TEST(SymmetryHypotheses, CountsAndSpacing) {
  EXPECT_EQ(symmetry_hypotheses(0.2, {"A", {1, 1, 1}, 0}).size(), 1u);
  const auto two = symmetry_hypotheses(0.2, {"B", {1, 1, 1}, 1});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(yaw_difference(two[1], 0.2 + kPi), 0.0, 1e-12);
  const auto four = symmetry_hypotheses(0.2, {"C", {1, 1, 1}, 2});
  ASSERT_EQ(four.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(yaw_difference(four[k], 0.2 + k * kPi / 2), 0.0, 1e-12);
  EXPECT_THROW(symmetry_hypotheses(0.0, {"D", {1, 1, 1}, 3}), ConfigError);
}

TEST(CircularMean, HandlesWrapAround) {
  const std::vector<double> a{kPi - 0.1, -kPi + 0.1};
  EXPECT_NEAR(yaw_difference(circular_mean(a), kPi), 0.0, 1e-12);
  const std::vector<double> b{0.30, 0.30, 0.30, 0.30, 0.31};
  EXPECT_NEAR(circular_mean(b), 0.302, 1e-5);
}

TEST(CircularMean, RejectsDegenerateInput) {
  EXPECT_THROW(circular_mean(std::vector<double>{}), InvalidInput);
  EXPECT_THROW(circular_mean(std::vector<double>{0.0, kPi}), UndefinedMean);
  const std::vector<double> a{0.1, 0.2};
  const std::vector<double> w{1.0};
  EXPECT_THROW(circular_mean(a, w), InvalidInput);
}
