#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "elo/projection.hpp"
#include "elo/synth.hpp"
#include "fixtures.hpp"

using namespace elo;

TEST(CartesianToSpherical, AxisCases) {
  auto s = cartesian_to_spherical({1, 0, 0});
  EXPECT_DOUBLE_EQ(s.range, 1);
  EXPECT_DOUBLE_EQ(s.azimuth, 0);
  EXPECT_DOUBLE_EQ(s.elevation, 0);
  s = cartesian_to_spherical({0, 1, 0});
  EXPECT_DOUBLE_EQ(s.range, 1);
  EXPECT_DOUBLE_EQ(s.azimuth, std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(s.elevation, 0);
}

TEST(CartesianToSpherical, Diagonal) {
  const auto s = cartesian_to_spherical({1, 1, std::sqrt(2.0)});
  EXPECT_NEAR(s.range, 2, 1e-15);
  EXPECT_NEAR(s.azimuth, std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(s.elevation, std::numbers::pi / 4, 1e-15);
}

TEST(CartesianToSpherical, OriginRejected) {
  EXPECT_THROW(cartesian_to_spherical(Vec3::Zero()), std::domain_error);
  EXPECT_FALSE(project_spherical(Vec3::Zero(), {}).has_value());
}

TEST(CartesianToSpherical, AzimuthRange) {
  EXPECT_DOUBLE_EQ(cartesian_to_spherical({-1, 0, 0}).azimuth, std::numbers::pi);
  EXPECT_DOUBLE_EQ(cartesian_to_spherical({-1, -0.0, 0}).azimuth, std::numbers::pi);
}

TEST(CartesianToSpherical, AzimuthAntisymmetry) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(std::abs(d(rng)) + 1e-3, d(rng), d(rng));
    if (p.y() == 0) continue;
    EXPECT_EQ(cartesian_to_spherical({p.x(), -p.y(), p.z()}).azimuth,
              -cartesian_to_spherical(p).azimuth);
  }
}

TEST(ProjectSpherical, ForwardHorizon) {
  const SphericalConfig cfg;
  const auto px = project_spherical({10, 0, 0}, cfg);
  ASSERT_TRUE(px.has_value());
  EXPECT_EQ(px->u, 1024);
  EXPECT_EQ(px->v, static_cast<int>(std::floor((1 - 24.9 / 27.9) * 80)));
  EXPECT_EQ(px->v, 8);
}

TEST(ProjectSpherical, AzimuthNearPiIsFirstColumn) {
  const auto px = project_spherical({-10, 1e-9, 0}, {});
  ASSERT_TRUE(px.has_value());
  EXPECT_EQ(px->u, 0);
  // Just below -pi wraps to the last column.
  const auto other = project_spherical({-10, -1e-9, 0}, {});
  ASSERT_TRUE(other.has_value());
  EXPECT_EQ(other->u, 2047);
}

TEST(ProjectSpherical, UpperEdgeIsTopRow) {
  const SphericalConfig cfg;
  const double up = cfg.fov_up;
  const auto px = project_spherical({std::cos(up), 0, std::sin(up)}, cfg);
  ASSERT_TRUE(px.has_value());
  EXPECT_EQ(px->v, 0);
  EXPECT_FALSE(project_spherical({std::cos(up + 1e-6), 0, std::sin(up + 1e-6)}, cfg));
  const double down = -cfg.fov_down;
  const auto bottom = project_spherical({std::cos(down + 1e-9), 0, std::sin(down + 1e-9)}, cfg);
  ASSERT_TRUE(bottom.has_value());
  EXPECT_EQ(bottom->v, 79);
  EXPECT_FALSE(project_spherical({std::cos(down), 0, std::sin(down)}, cfg));
}

TEST(ProjectBev, Examples) {
  const BevConfig cfg;
  EXPECT_EQ(cfg.width(), 2400);
  EXPECT_EQ(cfg.height(), 1200);
  EXPECT_EQ(project_bev({0, 0, -1.7}, cfg), (Pixel{1200, 600}));
  EXPECT_EQ(project_bev({-120, -60, 0}, cfg), (Pixel{0, 0}));
  EXPECT_EQ(project_bev({119.95, 59.95, 3}, cfg), (Pixel{2399, 1199}));
}

TEST(ProjectBev, OutOfScope) {
  const BevConfig cfg;
  EXPECT_FALSE(project_bev({120, 0, 0}, cfg));
  EXPECT_FALSE(project_bev({0, 60, 0}, cfg));
  EXPECT_FALSE(project_bev({-120.01, 0, 0}, cfg));
  EXPECT_FALSE(project_bev({0, -60.01, 0}, cfg));
  EXPECT_FALSE(project_bev({std::nan(""), 0, 0}, cfg));
}

TEST(BuildRangeImage, EmptyScan) {
  const RangeImage img = build_range_image({}, {});
  EXPECT_EQ(img.valid_count(), 0u);
  EXPECT_EQ(img.width(), 2048);
  EXPECT_EQ(img.height(), 80);
}

TEST(BuildRangeImage, SinglePoint) {
  const std::vector<TimedPoint> scan = {{Vec3(8, -3, -1), 0.4}};
  const RangeImage img = build_range_image(scan, {});
  ASSERT_EQ(img.valid_count(), 1u);
  const auto px = project_spherical(scan[0].p, {});
  ASSERT_TRUE(px);
  EXPECT_EQ(img.at(px->u, px->v).vertex, scan[0].p);
  EXPECT_NEAR(img.at(px->u, px->v).range, scan[0].p.norm(), 1e-12);
  EXPECT_EQ(img.at(px->u, px->v).timestamp, 0.4);
}

TEST(BuildRangeImage, NearestPointWins) {
  const Vec3 dir = Vec3(1, 0.2, -0.1).normalized();
  for (bool swap : {false, true}) {
    std::vector<TimedPoint> scan = {{5 * dir, 0}, {7 * dir, 0}};
    if (swap) std::swap(scan[0], scan[1]);
    const RangeImage img = build_range_image(scan, {});
    ASSERT_EQ(img.valid_count(), 1u);
    const auto px = project_spherical(dir, {});
    EXPECT_NEAR(img.at(px->u, px->v).range, 5, 1e-12);
  }
}

TEST(BuildRangeImage, DropsEgoReturns) {
  const std::vector<TimedPoint> scan = {{Vec3(1.2, 0, 0), 0}, {Vec3(1.6, 0, -0.2), 0}};
  EXPECT_EQ(build_range_image(scan, {}).valid_count(), 1u);
}

TEST(BuildRangeImage, RangeMatchesVertexNorm) {
  const SimulatedScan sim = simulate_scan(street_scene(), Se3Pose::identity());
  const RangeImage img = build_range_image(test::timed_points(sim.scan), {});
  for (const RangePixel& px : img.grid().data()) {
    if (px.valid()) {
      EXPECT_GT(px.range, 0);
      EXPECT_NEAR(px.range, px.vertex.norm(), 1e-6);
    } else {
      EXPECT_LT(px.range, 0);
    }
  }
}

TEST(BuildRangeImage, PlaneScanRoundTrip) {
  const SimulatedScan sim = simulate_scan(ground_only_scene(), Se3Pose::identity());
  const RangeImage img = build_range_image(test::timed_points(sim.scan), {});
  ASSERT_GT(img.valid_count(), 1000u);
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.valid(u, v)) continue;
      EXPECT_EQ(project_spherical(img.at(u, v).vertex, img.config()), (Pixel{u, v}));
    }
  }
}

TEST(BuildRangeImage, ShuffleIsBitIdentical) {
  // Many collisions: a coarse image with duplicated points at equal range.
  SphericalConfig cfg;
  cfg.width = 256;
  cfg.height = 16;
  std::vector<TimedPoint> scan =
      test::timed_points(simulate_scan(street_scene(), Se3Pose::identity()).scan);
  const std::size_t n = scan.size();
  for (std::size_t i = 0; i < n; i += 3) {
    TimedPoint dup = scan[i];
    dup.t = 1.0;
    scan.push_back(dup);
  }
  const RangeImage ref = build_range_image(scan, cfg);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(scan.begin(), scan.end(), rng);
    EXPECT_TRUE(build_range_image(scan, cfg) == ref);
  }
}

TEST(BuildBevMap, Empty) {
  const BevMap map = build_bev_map({}, {});
  EXPECT_EQ(map.valid_count(), 0u);
  EXPECT_FALSE(map.valid(1200, 600));
}

TEST(BuildBevMap, SinglePoint) {
  const std::vector<TimedPoint> pts = {{Vec3(3.04, -1.01, -1.7), 0.2}};
  const BevMap map = build_bev_map(pts, {});
  ASSERT_EQ(map.valid_count(), 1u);
  const BevCell* c = map.find(1230, 589);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->vertex, pts[0].p);
  EXPECT_EQ(c->timestamp, 0.2);
}

TEST(BuildBevMap, FlatGroundRoundTripAndShuffle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> x(-40, 40);
  std::uniform_real_distribution<double> y(-20, 20);
  std::vector<TimedPoint> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back({Vec3(x(rng), y(rng), -1.73), 0.0});
  // Coarse duplicates force conflicts.
  for (int i = 0; i < 2000; ++i) pts.push_back({pts[i].p + Vec3(0.01, 0.01, 0), 0.0});

  const BevMap map = build_bev_map(pts, {});
  ASSERT_GT(map.valid_count(), 9000u);
  for (const BevCell& c : map.cells()) {
    const auto px = project_bev(c.vertex, map.config());
    ASSERT_TRUE(px);
    EXPECT_EQ(static_cast<int>(px->v * map.width() + px->u), c.cell);
    EXPECT_EQ(map.find(px->u, px->v), &c);
  }
  std::shuffle(pts.begin(), pts.end(), rng);
  EXPECT_TRUE(build_bev_map(pts, {}) == map);
}

TEST(BuildBevMap, SensorNearestWins) {
  const std::vector<TimedPoint> pts = {{Vec3(5.01, 0.01, -1.7), 0}, {Vec3(5.09, 0.09, -1.7), 0}};
  const BevMap a = build_bev_map(pts, {});
  ASSERT_EQ(a.valid_count(), 1u);
  EXPECT_EQ(a.cells()[0].vertex, pts[0].p);
}

TEST(Precedes, TotalOrder) {
  const Vec3 a(1, 2, 3);
  const Vec3 b(1, 2, 4);
  EXPECT_TRUE(precedes(1.0, b, 0, 2.0, a, 0));
  EXPECT_TRUE(precedes(1.0, a, 0, 1.0, b, 0));
  EXPECT_FALSE(precedes(1.0, b, 0, 1.0, a, 0));
  EXPECT_TRUE(precedes(1.0, a, 2, 1.0, a, 1));
  EXPECT_FALSE(precedes(1.0, a, 1, 1.0, a, 1));
}

TEST(SphericalConfig, Validation) {
  SphericalConfig cfg;
  cfg.width = 1;
  EXPECT_THROW(RangeImage{cfg}, std::invalid_argument);
  BevConfig bev;
  bev.res_x = 0;
  EXPECT_THROW(BevMap{bev}, std::invalid_argument);
}
