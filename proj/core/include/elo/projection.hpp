#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "elo/geometry.hpp"

namespace elo {

/// Spherical range image layout. Angles in radians.
struct SphericalConfig {
  int width = 2048;
  int height = 80;
  double fov_up = deg2rad(3.0);
  double fov_down = deg2rad(24.9);
  /// Returns closer than this are ego-vehicle hits and never enter an image.
  double min_range = 1.5;

  double fov() const { return fov_up + fov_down; }
  void validate() const;
};

/// Bird's-eye-view grid covering x in [-scope_x, scope_x), y in [-scope_y, scope_y).
struct BevConfig {
  double scope_x = 120.0;
  double scope_y = 60.0;
  double res_x = 0.1;
  double res_y = 0.1;

  int width() const;
  int height() const;
  void validate() const;
};

struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct TimedPoint {
  Vec3 p = Vec3::Zero();
  double t = 0.0;
};

struct SphericalCoords {
  double range = 0.0;
  double azimuth = 0.0;    // (-pi, pi]
  double elevation = 0.0;  // [-pi/2, pi/2]
};

/// Throws std::domain_error for the origin.
SphericalCoords cartesian_to_spherical(const Vec3& p);

/// Pixel of p in the range image, or nullopt when outside the vertical field of view
/// (or p is the origin).
std::optional<Pixel> project_spherical(const Vec3& p, const SphericalConfig& cfg);

/// Cell of p in the BEV grid, or nullopt when outside the scope.
std::optional<Pixel> project_bev(const Vec3& p, const BevConfig& cfg);

/// Row-major dense 2D storage shared by the per-pixel maps.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width_ + u; }
  bool contains(int u, int v) const { return u >= 0 && u < width_ && v >= 0 && v < height_; }

  T& at(int u, int v) { return data_[index(u, v)]; }
  const T& at(int u, int v) const { return data_[index(u, v)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

inline constexpr double kInvalidRange = -1.0;

struct RangePixel {
  Vec3 vertex = Vec3::Zero();
  double range = kInvalidRange;
  double timestamp = 0.0;

  bool valid() const { return range > 0.0; }
  friend bool operator==(const RangePixel& a, const RangePixel& b) {
    return a.vertex == b.vertex && a.range == b.range && a.timestamp == b.timestamp;
  }
};

/// Strict total order used to settle pixel conflicts: smaller range first, then
/// lexicographically smaller vertex, then newer timestamp.
bool precedes(double range_a, const Vec3& a, double t_a, double range_b, const Vec3& b, double t_b);

/// Organized vertex map (V_D / V_M). Invalid pixels carry a negative range.
class RangeImage {
 public:
  RangeImage() = default;
  explicit RangeImage(const SphericalConfig& cfg);

  const SphericalConfig& config() const { return cfg_; }
  int width() const { return pixels_.width(); }
  int height() const { return pixels_.height(); }

  const RangePixel& at(int u, int v) const { return pixels_.at(u, v); }
  RangePixel& at(int u, int v) { return pixels_.at(u, v); }
  bool valid(int u, int v) const { return pixels_.at(u, v).valid(); }
  const Grid<RangePixel>& grid() const { return pixels_; }

  /// Inserts under the minimum-range rule. Returns true if the pixel now holds p.
  bool offer(const Pixel& px, const Vec3& p, double timestamp);
  void set(const Pixel& px, const Vec3& p, double timestamp);
  void invalidate(int u, int v) { pixels_.at(u, v) = RangePixel{}; }
  void clear() { pixels_.fill(RangePixel{}); }

  std::size_t valid_count() const;

  friend bool operator==(const RangeImage& a, const RangeImage& b) { return a.pixels_ == b.pixels_; }

 private:
  SphericalConfig cfg_;
  Grid<RangePixel> pixels_;
};

struct BevCell {
  Vec3 vertex = Vec3::Zero();
  double timestamp = 0.0;
  std::int32_t cell = -1;  // linear cell index, row-major

  friend bool operator==(const BevCell& a, const BevCell& b) {
    return a.vertex == b.vertex && a.timestamp == b.timestamp && a.cell == b.cell;
  }
};

/// Ground vertex grid (B_G / B_M): a dense slot table over a compact list of occupied
/// cells, one vertex per cell.
class BevMap {
 public:
  BevMap() = default;
  explicit BevMap(const BevConfig& cfg);

  const BevConfig& config() const { return cfg_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t capacity() const { return slots_.size(); }

  bool valid(int u, int v) const { return find(u, v) != nullptr; }
  const BevCell* find(int u, int v) const;

  /// Inserts under the minimum-norm rule (sensor-nearest point wins).
  bool offer(const Pixel& px, const Vec3& p, double timestamp);
  void set(const Pixel& px, const Vec3& p, double timestamp);
  /// Slot of (u, v) in cells(), or -1.
  std::int32_t slot(int u, int v) const;
  /// Sorts occupied cells by index so that the cell list is order independent.
  void finalize();
  void clear();

  std::size_t valid_count() const { return cells_.size(); }
  std::span<const BevCell> cells() const { return cells_; }

  friend bool operator==(const BevMap& a, const BevMap& b) { return a.cells_ == b.cells_; }

 private:
  BevConfig cfg_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int32_t> slots_;
  std::vector<BevCell> cells_;
};

RangeImage build_range_image(std::span<const TimedPoint> scan, const SphericalConfig& cfg);
BevMap build_bev_map(std::span<const TimedPoint> ground_points, const BevConfig& cfg);

}  // namespace elo
