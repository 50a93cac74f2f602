#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "elo/ground_seg.hpp"
#include "elo/projection.hpp"

namespace elo {

enum class NormalMode {
  kRangeAdaptive,  // adaptive window + both outlier gates
  kFixedWindow,    // largest window, no outlier rejection
  kCrossProduct,   // cross product of image gradients, comparison baseline
};

/// Window limits (pixels, odd) and the outlier thresholds of the local plane fit.
struct WindowLimits {
  int lx_max = 13;
  int ly_max = 7;
  int lx_min = 5;
  int ly_min = 3;
  /// Metric footprint the adaptive window aims for.
  double delta = 0.3;
  /// Range-difference gate for neighbours.
  double sigma_r = 0.5;
  /// Point-to-plane gate shared with the registration.
  double sigma_z = 0.5;
  /// Pixels with a rougher local surface are not used as planar features.
  double max_curvature = 0.05;
  NormalMode mode = NormalMode::kRangeAdaptive;

  void validate() const;
};

struct WindowSize {
  int lx = 0;
  int ly = 0;
  friend bool operator==(const WindowSize&, const WindowSize&) = default;
};

WindowSize adaptive_window(double range, const WindowLimits& cfg, const SphericalConfig& sph);

struct PlaneFit {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;          // n . centroid
  double curvature = 0.0;  // lambda3 / (lambda1 + lambda2 + lambda3)
};

/// Least-squares plane through >= 3 points by eigen-decomposition of the centred
/// covariance. nullopt for coincident or collinear input. The returned normal has
/// its first non-zero component positive.
std::optional<PlaneFit> plane_fit(std::span<const Vec3> points);

/// Plane from a centred covariance matrix and the centroid it was taken about.
std::optional<PlaneFit> fit_covariance(const Mat3& cov, const Vec3& centroid);

struct SurfaceNormal {
  Vec3 normal = Vec3::Zero();
  double curvature = 0.0;
  bool valid = false;

  friend bool operator==(const SurfaceNormal& a, const SurfaceNormal& b) {
    return a.valid == b.valid && a.curvature == b.curvature && a.normal == b.normal;
  }
};

using NormalMap = Grid<SurfaceNormal>;

/// Valid pixels of the (lx, ly) window centred on (u, v), centre included. Columns wrap
/// around the azimuth seam; rows are clipped.
std::vector<Pixel> window_pixels(const RangeImage& img, int u, int v, WindowSize window);

/// Surface normal at a valid pixel, oriented towards the sensor.
SurfaceNormal estimate_normal(const RangeImage& img, int u, int v, const WindowLimits& cfg);

/// Normals for every valid non-ground pixel; ground pixels are neither estimated nor
/// used as neighbours.
NormalMap compute_normal_map(const RangeImage& img, const GroundMask& mask,
                             const WindowLimits& cfg);
NormalMap compute_normal_map(const RangeImage& img, const WindowLimits& cfg);

/// Point-to-plane outlier test d_p2p > sigma_z.
inline bool is_plane_outlier(double point_to_plane, double sigma_z) {
  return std::abs(point_to_plane) > sigma_z;
}

}  // namespace elo
