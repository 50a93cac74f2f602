#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "elo/ground_seg.hpp"
#include "elo/model.hpp"
#include "elo/normals.hpp"
#include "elo/projection.hpp"
#include "elo/registration.hpp"

namespace elo {

enum class OdometryMode { kFrameToModel, kFrameToFrame };

/// Every tunable of the pipeline. Angles are stored in radians; the text format uses
/// degrees for keys ending in _deg.
struct OdometryConfig {
  OdometryMode mode = OdometryMode::kFrameToModel;
  SphericalConfig spherical;
  BevConfig bev;
  GroundSegConfig ground;
  WindowLimits normals;
  RegistrationConfig registration;
  ModelConfig model;
  /// Elevation offset applied to every raw point before projection.
  double calib_angle = deg2rad(0.195);

  void validate() const;
};

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Plain "key = value" lines; '#' starts a comment, blank lines are skipped. Keys may
/// repeat. Throws ParseError on lines without '='.
std::vector<KeyValue> parse_key_values(std::istream& in);
std::vector<KeyValue> read_key_values(const std::filesystem::path& path);

/// Applies entries on top of `cfg`. Unknown keys and unparsable values throw ParseError.
void apply_key_values(const std::vector<KeyValue>& entries, OdometryConfig& cfg);

OdometryConfig load_config(const std::filesystem::path& path);

/// Writes every key with its current value; the output parses back to the same config.
void write_config(const OdometryConfig& cfg, std::ostream& out);

std::string to_string(OdometryMode mode);
OdometryMode parse_mode(const std::string& text);
std::string to_string(NormalMode mode);
std::string to_string(CostMode mode);

}  // namespace elo
