#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "elo/config.hpp"
#include "elo/pipeline.hpp"
#include "elo/synth.hpp"

namespace elo::test {

inline std::vector<TimedPoint> timed_points(const RawScan& scan) {
  std::vector<TimedPoint> out;
  out.reserve(scan.points.size());
  for (const LidarPoint& p : scan.points) out.push_back({p.p, scan.timestamp});
  return out;
}

/// Default pipeline config for synthetic input, which needs no beam correction.
inline OdometryConfig synthetic_config() {
  OdometryConfig cfg;
  cfg.calib_angle = 0.0;
  return cfg;
}

inline ScanFrame synthetic_frame(const SceneSpec& scene, const Se3Pose& pose,
                                 const OdometryConfig& cfg, double timestamp = 0.0,
                                 std::uint64_t seed = 0) {
  SimulatedScan sim = simulate_scan(scene, pose, {}, seed);
  sim.scan.timestamp = timestamp;
  return prepare_frame(sim.scan, cfg);
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("elo_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Translation and rotation (degrees) of inverse(truth) * estimate.
struct PoseError {
  double translation = 0.0;
  double rotation_deg = 0.0;
};

inline PoseError pose_error(const Se3Pose& truth, const Se3Pose& estimate) {
  const Se3Pose e = inverse(truth) * estimate;
  return {e.translation.norm(), rad2deg(rotation_angle(e.rotation))};
}

}  // namespace elo::test
