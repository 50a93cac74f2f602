#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "elo/geometry.hpp"

namespace elo {

/// Malformed input; `offset` is the byte offset (binary files) or 1-based line
/// number (text files) where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct LidarPoint {
  Vec3 p = Vec3::Zero();
  float reflectance = 0.0f;
};

struct RawScan {
  std::vector<LidarPoint> points;
  int index = 0;
  double timestamp = 0.0;
};

inline constexpr double kKittiFramePeriod = 0.1;
inline constexpr double kKittiCalibAngleDeg = 0.195;

/// Little-endian float32 quadruples (x, y, z, reflectance).
RawScan read_scan(const std::filesystem::path& path);
void write_scan(const RawScan& scan, const std::filesystem::path& path);

/// Shifts every point's elevation by `angle` radians, keeping range and azimuth.
RawScan apply_calib_correction(const RawScan& scan, double angle);

/// One line per pose: row-major upper 3x4 block of the frame-to-world matrix.
void write_poses(const std::vector<Se3Pose>& poses, const std::filesystem::path& path);
void write_poses(const std::vector<Se3Pose>& poses, std::ostream& out);
std::vector<Se3Pose> read_poses(const std::filesystem::path& path);
std::vector<Se3Pose> read_poses(std::istream& in);
std::string format_pose(const Se3Pose& pose);
/// Shortest decimal that parses back to `x`, at least 9 significant digits; 0 prints "0".
std::string format_number(double x);

/// Velodyne-to-camera extrinsic ("Tr:" line) of a KITTI calib.txt.
Se3Pose read_velo_to_cam(const std::filesystem::path& calib_path);

/// KITTI times.txt: one timestamp in seconds per line.
std::vector<double> read_times(const std::filesystem::path& path);

}  // namespace elo
