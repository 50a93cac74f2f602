#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "elo/ground_seg.hpp"
#include "elo/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace elo;

namespace {

RangeImage image_of(const SceneSpec& scene, const Se3Pose& pose = {}) {
  return build_range_image(test::timed_points(simulate_scan(scene, pose).scan), {});
}

SceneSpec single_plane(const Vec3& normal, double d) {
  SceneSpec s;
  s.planes.push_back({normal.normalized(), d / normal.norm(), true});
  return s;
}

// Ramp z = -h + tan(slope) * x, rising away from the sensor.
SceneSpec ramp(double slope_deg, double h = 1.73) {
  const double k = std::tan(deg2rad(slope_deg));
  return single_plane(Vec3(-k, 0, 1), -h);
}

struct Counts {
  int ground = 0;
  int candidates = 0;
};

// Pixels in the forward sector that lie inside the height band.
Counts forward_band(const RangeImage& img, const GroundMask& mask, const GroundSegConfig& cfg) {
  Counts c;
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.valid(u, v)) continue;
      const Vec3& p = img.at(u, v).vertex;
      if (std::abs(std::atan2(p.y(), p.x())) > deg2rad(30) || !in_ground_band(p.z(), cfg)) continue;
      ++c.candidates;
      if (mask.at(u, v) == GroundLabel::kGround) ++c.ground;
    }
  }
  return c;
}

}  // namespace

TEST(GroundBand, Edges) {
  const GroundSegConfig cfg;
  EXPECT_TRUE(in_ground_band(-1.73, cfg));
  EXPECT_TRUE(in_ground_band(-1.73 + 0.5, cfg));
  EXPECT_FALSE(in_ground_band(-1.73 + 0.5001, cfg));
  EXPECT_TRUE(in_ground_band(-1.73 - 1.0, cfg));
  EXPECT_FALSE(in_ground_band(-1.73 - 1.0001, cfg));
}

TEST(Inclination, Analytic) {
  EXPECT_NEAR(inclination({0, 0, 0}, {1, 0, 0}), 0, 1e-15);
  EXPECT_NEAR(inclination({0, 0, 0}, {0, 0, 2}), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(inclination({1, 1, 0}, {2, 2, -std::sqrt(2.0)}), std::numbers::pi / 4, 1e-15);
}

TEST(SegmentGround, FlatPlane) {
  const RangeImage img = image_of(ground_only_scene());
  const GroundMask mask = segment_ground(img, {});
  std::size_t ground = 0;
  for (GroundLabel l : mask.data()) ground += l == GroundLabel::kGround;
  EXPECT_GE(static_cast<double>(ground), 0.99 * img.valid_count());
}

TEST(SegmentGround, FacadeHasNoGround) {
  SceneSpec wall;
  wall.planes.push_back({Vec3(0, -1, 0), -10, false});
  const RangeImage img = image_of(wall);
  ASSERT_GT(img.valid_count(), 1000u);
  const GroundMask mask = segment_ground(img, {});
  for (GroundLabel l : mask.data()) EXPECT_NE(l, GroundLabel::kGround);
}

TEST(SegmentGround, GentleRampIsGround) {
  const GroundSegConfig cfg;
  const RangeImage img = image_of(ramp(3.0));
  const Counts c = forward_band(img, segment_ground(img, cfg), cfg);
  ASSERT_GT(c.candidates, 500);
  EXPECT_GE(c.ground, 0.99 * c.candidates);
}

TEST(SegmentGround, SteepEmbankmentIsNotGround) {
  const GroundSegConfig cfg;
  const RangeImage img = image_of(ramp(10.0));
  const Counts c = forward_band(img, segment_ground(img, cfg), cfg);
  ASSERT_GT(c.candidates, 100);
  EXPECT_EQ(c.ground, 0);
}

TEST(SegmentGround, InvalidExactlyWhereImageInvalid) {
  const RangeImage img = image_of(street_scene());
  const GroundMask mask = segment_ground(img, {});
  for (std::size_t i = 0; i < mask.size(); ++i) {
    EXPECT_EQ(mask[i] == GroundLabel::kInvalid, !img.grid()[i].valid());
  }
}

TEST(SegmentGround, HandBuiltColumnsMatchOracle) {
  SphericalConfig sph;
  sph.width = 2;
  sph.height = 5;
  const GroundSegConfig cfg;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> x(3, 30);
  std::uniform_real_distribution<double> dz(-1.2, 0.8);
  std::uniform_real_distribution<double> coin(0, 1);
  int ground_seen = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    RangeImage img(sph);
    std::vector<std::optional<Vec3>> column(5);
    double dist = x(rng);
    for (int v = 4; v >= 0; --v) {
      dist += std::uniform_real_distribution<double>(0.05, 3.0)(rng);
      if (coin(rng) < 0.25) continue;
      // Mostly near-flat neighbours with an occasional step.
      const double z = coin(rng) < 0.7 ? -1.73 + 0.05 * dz(rng) : -1.73 + dz(rng);
      const Vec3 p(dist, 0.1 * dz(rng), z);
      column[v] = p;
      img.set({0, v}, p, 0.0);
    }
    const GroundMask mask = segment_ground(img, cfg);
    const std::vector<int> expected = oracle::column_labels(
        column, cfg.sensor_height, cfg.delta_h1, cfg.delta_h2, cfg.delta_theta,
        cfg.neighbor_scan_limit);
    for (int v = 0; v < 5; ++v) {
      ASSERT_EQ(static_cast<int>(mask.at(0, v)), expected[v]) << "trial " << trial << " row " << v;
      ground_seen += expected[v] == 2;
      EXPECT_EQ(mask.at(1, v), GroundLabel::kInvalid);
    }
  }
  EXPECT_GT(ground_seen, 500);
}

TEST(SegmentGround, LoneCandidateIsNonGround) {
  SphericalConfig sph;
  sph.width = 2;
  sph.height = 5;
  RangeImage img(sph);
  img.set({0, 2}, Vec3(10, 0, -1.73), 0);
  EXPECT_EQ(segment_ground(img, {}).at(0, 2), GroundLabel::kNonGround);
}

TEST(SegmentGround, NeighbourSearchIsBounded) {
  SphericalConfig sph;
  sph.width = 2;
  sph.height = 8;
  RangeImage img(sph);
  img.set({0, 6}, Vec3(10, 0, -1.73), 0);
  img.set({0, 7}, Vec3(9, 0, -1.73), 0);
  // Six rows up: out of reach at the default limit, so the up direction is missing.
  img.set({0, 0}, Vec3(10.1, 0, 0.0), 0);
  GroundSegConfig cfg;
  EXPECT_EQ(segment_ground(img, cfg).at(0, 6), GroundLabel::kGround);
  cfg.neighbor_scan_limit = 6;
  EXPECT_EQ(segment_ground(img, cfg).at(0, 6), GroundLabel::kNonGround);
}

TEST(SegmentGround, MonotoneInAngleThreshold) {
  const RangeImage img = image_of(street_scene());
  GroundSegConfig cfg;
  GroundMask prev = segment_ground(img, cfg);
  for (double deg : {6.0, 8.0, 12.0, 20.0}) {
    cfg.delta_theta = deg2rad(deg);
    const GroundMask next = segment_ground(img, cfg);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (prev[i] == GroundLabel::kGround) EXPECT_EQ(next[i], GroundLabel::kGround);
    }
    prev = next;
  }
}

TEST(SegmentGround, YawInvariance) {
  const SimulatedScan sim = simulate_scan(street_scene(), Se3Pose::identity());
  auto count = [](const std::vector<TimedPoint>& pts) {
    const RangeImage img = build_range_image(pts, {});
    const GroundMask mask = segment_ground(img, {});
    std::size_t n = 0;
    for (GroundLabel l : mask.data()) n += l == GroundLabel::kGround;
    return static_cast<double>(n);
  };
  const std::vector<TimedPoint> pts = test::timed_points(sim.scan);
  const double base = count(pts);
  for (double yaw : {0.3, 1.7, -2.9}) {
    const Mat3 r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    std::vector<TimedPoint> rotated = pts;
    for (TimedPoint& p : rotated) p.p = r * p.p;
    EXPECT_NEAR(count(rotated), base, 0.01 * base) << "yaw " << yaw;
  }
}

TEST(SplitGround, PartitionsValidPixels) {
  const RangeImage img = image_of(street_scene());
  const GroundMask mask = segment_ground(img, {});
  const GroundSplit split = split_ground(img, mask);
  EXPECT_EQ(split.non_ground.valid_count() + split.ground.size(), img.valid_count());
  for (const TimedPoint& g : split.ground) {
    const auto px = project_spherical(g.p, img.config());
    ASSERT_TRUE(px);
    EXPECT_EQ(mask.at(px->u, px->v), GroundLabel::kGround);
    EXPECT_FALSE(split.non_ground.valid(px->u, px->v));
  }
}

TEST(WriteMaskPgm, Encoding) {
  GroundMask mask(3, 1, GroundLabel::kInvalid);
  mask.at(1, 0) = GroundLabel::kNonGround;
  mask.at(2, 0) = GroundLabel::kGround;
  std::ostringstream out;
  write_mask_pgm(mask, out);
  EXPECT_EQ(out.str(), std::string("P5\n3 1\n255\n") + '\0' + '\x80' + '\xff');
}
