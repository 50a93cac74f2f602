#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "elo/projection.hpp"

namespace elo {

struct GroundSegConfig {
  /// Height of the LiDAR centre above the road, from calibration.
  double sensor_height = 1.73;
  /// Band above the calibrated road height admitted as ground candidates.
  double delta_h1 = 0.5;
  /// Band below the calibrated road height admitted as ground candidates.
  double delta_h2 = 1.0;
  /// Maximum inclination between column neighbours.
  double delta_theta = deg2rad(5.0);
  /// How far up/down a column to look for the first valid neighbour.
  int neighbor_scan_limit = 5;

  void validate() const;
};

enum class GroundLabel : std::uint8_t { kInvalid = 0, kNonGround = 1, kGround = 2 };

using GroundMask = Grid<GroundLabel>;

bool in_ground_band(double z, const GroundSegConfig& cfg);

/// Inclination of the segment p -> q against the xy-plane, in [0, pi/2].
double inclination(const Vec3& p, const Vec3& q);

GroundMask segment_ground(const RangeImage& img, const GroundSegConfig& cfg);

/// Mask with every valid pixel labelled non-ground (used when ground is not split out).
GroundMask all_non_ground(const RangeImage& img);

struct GroundSplit {
  RangeImage non_ground;
  std::vector<TimedPoint> ground;
};

GroundSplit split_ground(const RangeImage& img, const GroundMask& mask);

/// Binary PGM: 0 invalid, 128 non-ground, 255 ground.
void write_mask_pgm(const GroundMask& mask, std::ostream& out);

}  // namespace elo
