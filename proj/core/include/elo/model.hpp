#pragma once

#include <cstddef>
#include <iosfwd>

#include "elo/normals.hpp"
#include "elo/projection.hpp"

namespace elo {

/// Feature maps extracted from one scan, in its own sensor frame.
struct ScanFrame {
  RangeImage vertices;  // V_D (non-ground, or all points in spherical-only mode)
  NormalMap normals;    // N_D
  BevMap ground;        // B_G (empty when ground is not split out)
  double timestamp = 0.0;
};

struct ModelConfig {
  /// Entries observed longer ago than this are dropped.
  double time_window = 10.0;
};

/// Frame-to-model map: exactly three 2D maps, all expressed in the most recent sensor
/// frame. Each entry keeps the timestamp of the scan that observed it.
class ModelState {
 public:
  ModelState() = default;
  ModelState(const SphericalConfig& sph, const BevConfig& bev);

  static ModelState from_scan(const ScanFrame& scan);

  const RangeImage& vertices() const { return vertices_; }
  const NormalMap& normals() const { return normals_; }
  const BevMap& ground() const { return ground_; }
  bool empty() const;

  /// Re-expresses the model in the frame of `scan` using `scan_to_model` (T^{t-1}_t),
  /// drops entries older than the time window, then fuses the scan: per pixel the
  /// point closer to the sensor wins, the scan on ties.
  void update(const ScanFrame& scan, const Se3Pose& scan_to_model, double current_time,
              const ModelConfig& cfg);

 private:
  RangeImage vertices_;
  NormalMap normals_;
  BevMap ground_;

  // Double buffers for the scatter step.
  RangeImage next_vertices_;
  NormalMap next_normals_;
  BevMap next_ground_;
};

ModelState update_model(const ModelState& state, const ScanFrame& scan,
                        const Se3Pose& scan_to_model, double current_time, const ModelConfig& cfg);

struct ModelSize {
  std::size_t vertices = 0;
  std::size_t normals = 0;
  std::size_t ground = 0;
  friend bool operator==(const ModelSize&, const ModelSize&) = default;
};

ModelSize model_size(const ModelState& state);

/// Upper bound on valid entries: every range-image pixel plus every BEV cell.
std::size_t model_capacity(const SphericalConfig& sph, const BevConfig& bev);

/// ASCII dump, one "x y z" row per model vertex (range image first, then ground).
void write_model_xyz(const ModelState& state, std::ostream& out);

}  // namespace elo
