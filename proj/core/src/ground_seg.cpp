#include "elo/ground_seg.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace elo {

void GroundSegConfig::validate() const {
  if (!(sensor_height > 0.0 && delta_h1 > 0.0 && delta_h2 > 0.0 && delta_theta > 0.0)) {
    throw std::invalid_argument("ground segmentation thresholds must be positive");
  }
  if (neighbor_scan_limit < 1) {
    throw std::invalid_argument("neighbor_scan_limit must be >= 1");
  }
}

bool in_ground_band(double z, const GroundSegConfig& cfg) {
  const double rel = z + cfg.sensor_height;
  return rel >= -cfg.delta_h2 && rel <= cfg.delta_h1;
}

double inclination(const Vec3& p, const Vec3& q) {
  const Vec3 d = q - p;
  return std::atan2(std::abs(d.z()), d.head<2>().norm());
}

namespace {

std::optional<Vec3> first_valid(const RangeImage& img, int u, int v, int step, int limit) {
  for (int i = 1; i <= limit; ++i) {
    const int row = v + step * i;
    if (row < 0 || row >= img.height()) break;
    if (img.valid(u, row)) return img.at(u, row).vertex;
  }
  return std::nullopt;
}

}  // namespace

GroundMask segment_ground(const RangeImage& img, const GroundSegConfig& cfg) {
  cfg.validate();
  GroundMask mask(img.width(), img.height(), GroundLabel::kInvalid);
  for (int u = 0; u < img.width(); ++u) {
    for (int v = 0; v < img.height(); ++v) {
      const RangePixel& px = img.at(u, v);
      if (!px.valid()) continue;
      mask.at(u, v) = GroundLabel::kNonGround;
      if (!in_ground_band(px.vertex.z(), cfg)) continue;

      const auto up = first_valid(img, u, v, -1, cfg.neighbor_scan_limit);
      const auto down = first_valid(img, u, v, +1, cfg.neighbor_scan_limit);
      if (!up && !down) continue;
      // A missing neighbour does not veto the pixel.
      const bool up_ok = !up || inclination(px.vertex, *up) < cfg.delta_theta;
      const bool down_ok = !down || inclination(px.vertex, *down) < cfg.delta_theta;
      if (up_ok && down_ok) mask.at(u, v) = GroundLabel::kGround;
    }
  }
  return mask;
}

GroundMask all_non_ground(const RangeImage& img) {
  GroundMask mask(img.width(), img.height(), GroundLabel::kInvalid);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (img.grid()[i].valid()) mask[i] = GroundLabel::kNonGround;
  }
  return mask;
}

GroundSplit split_ground(const RangeImage& img, const GroundMask& mask) {
  GroundSplit out{img, {}};
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (mask.at(u, v) != GroundLabel::kGround) continue;
      const RangePixel& px = img.at(u, v);
      out.ground.push_back({px.vertex, px.timestamp});
      out.non_ground.invalidate(u, v);
    }
  }
  return out;
}

void write_mask_pgm(const GroundMask& mask, std::ostream& out) {
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  for (const GroundLabel label : mask.data()) {
    unsigned char value = 0;
    if (label == GroundLabel::kNonGround) value = 128;
    if (label == GroundLabel::kGround) value = 255;
    out.put(static_cast<char>(value));
  }
}

}  // namespace elo
