#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elo/io_kitti.hpp"

namespace elo {

/// Infinite plane {x : n . x = d}.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;
  bool ground = false;
};

/// Axis-aligned box, world frame.
struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
};

/// Vertical open cylinder (no caps) around the axis through (cx, cy).
struct Cylinder {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.5;
  double z_min = -2.0;
  double z_max = 2.0;
};

struct SceneSpec {
  std::vector<Plane> planes;
  std::vector<Box> boxes;
  std::vector<Cylinder> cylinders;
  /// Standard deviation of the range noise, meters.
  double noise = 0.0;

  bool empty() const { return planes.empty() && boxes.empty() && cylinders.empty(); }
};

struct BeamPattern {
  int beams = 64;
  int azimuth_steps = 2048;
  double fov_up = deg2rad(3.0);
  double fov_down = deg2rad(24.9);
  double max_range = 120.0;

  /// Elevation of beam k, at the centre of its slice of the field of view.
  double elevation(int k) const;
  /// Azimuth of step j, at the centre of range-image column j.
  double azimuth(int j) const;
};

struct RayHit {
  double t = 0.0;
  Vec3 normal = Vec3::UnitZ();  // world frame, facing the ray origin
  bool ground = false;
};

/// Nearest intersection within (0, max_range], if any.
std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir,
                               double max_range);

struct SimulatedScan {
  RawScan scan;
  std::vector<Vec3> normals;  // sensor frame, facing the sensor
  std::vector<bool> ground;
  std::vector<int> beam;
  std::vector<int> column;
};

/// Ray-casts the scene from `sensor_to_world`; points come out beam-major in the
/// sensor frame. Noise (if any) is drawn from a generator seeded with `seed`.
SimulatedScan simulate_scan(const SceneSpec& scene, const Se3Pose& sensor_to_world,
                            const BeamPattern& pattern = {}, std::uint64_t seed = 0);

/// One scan per pose with timestamps index * 0.1 s; frame i uses seed + i.
std::vector<SimulatedScan> simulate_trajectory(const SceneSpec& scene,
                                               std::span<const Se3Pose> poses,
                                               const BeamPattern& pattern = {},
                                               std::uint64_t seed = 0);

/// Poses of a sensor repeating the body-frame increment `step`, starting at `start`.
std::vector<Se3Pose> constant_motion(const Se3Pose& start, const Se3Pose& step, int frames);

/// Rigid increment of `forward` meters along x followed by `yaw` radians about z.
Se3Pose planar_step(double forward, double yaw);

SceneSpec ground_only_scene(double sensor_height = 1.73);
/// Ground, two facades at y = +-10 and rows of pillars and boxes along them.
SceneSpec corridor_scene(double sensor_height = 1.73);
/// Ground plane, parked cars, poles and building fronts.
SceneSpec street_scene(double sensor_height = 1.73);

/// Scene from key=value lines:
///   plane = nx ny nz d [ground]
///   box = xmin ymin zmin xmax ymax zmax
///   cylinder = cx cy radius zmin zmax
///   noise = sigma
SceneSpec parse_scene(std::istream& in);
SceneSpec load_scene(const std::filesystem::path& path);
void write_scene(const SceneSpec& scene, std::ostream& out);

}  // namespace elo
