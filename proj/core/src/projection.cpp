#include "elo/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace elo {

void SphericalConfig::validate() const {
  if (width < 2 || height < 2) {
    throw std::invalid_argument("spherical image must be at least 2x2");
  }
  if (!(fov() > 0.0)) {
    throw std::invalid_argument("vertical field of view must be positive");
  }
  if (min_range < 0.0) {
    throw std::invalid_argument("min_range must be non-negative");
  }
}

int BevConfig::width() const { return static_cast<int>(std::ceil(2.0 * scope_x / res_x - 1e-9)); }
int BevConfig::height() const { return static_cast<int>(std::ceil(2.0 * scope_y / res_y - 1e-9)); }

void BevConfig::validate() const {
  if (!(scope_x > 0.0 && scope_y > 0.0 && res_x > 0.0 && res_y > 0.0)) {
    throw std::invalid_argument("BEV scopes and resolutions must be positive");
  }
}

SphericalCoords cartesian_to_spherical(const Vec3& p) {
  const double r = p.norm();
  if (r == 0.0) {
    throw std::domain_error("cannot take spherical coordinates of the origin");
  }
  double azimuth = std::atan2(p.y(), p.x());
  if (azimuth <= -std::numbers::pi) {
    azimuth = std::numbers::pi;
  }
  const double elevation = std::asin(std::clamp(p.z() / r, -1.0, 1.0));
  return {r, azimuth, elevation};
}

std::optional<Pixel> project_spherical(const Vec3& p, const SphericalConfig& cfg) {
  if (p.x() == 0.0 && p.y() == 0.0 && p.z() == 0.0) {
    return std::nullopt;
  }
  const SphericalCoords s = cartesian_to_spherical(p);
  const double uf = 0.5 * (1.0 - s.azimuth / std::numbers::pi) * cfg.width;
  double vf = (1.0 - (s.elevation + cfg.fov_down) / cfg.fov()) * cfg.height;
  // Points exactly on the upper field-of-view edge belong to row 0.
  if (vf < 0.0 && vf > -1e-9) vf = 0.0;
  if (!(vf >= 0.0 && vf < cfg.height)) {
    return std::nullopt;
  }
  int u = static_cast<int>(std::floor(uf));
  // Azimuth is periodic; rounding right at -pi can land one past the last column.
  if (u >= cfg.width) u -= cfg.width;
  if (u < 0) u += cfg.width;
  const int v = std::min(static_cast<int>(std::floor(vf)), cfg.height - 1);
  return Pixel{u, v};
}

std::optional<Pixel> project_bev(const Vec3& p, const BevConfig& cfg) {
  if (!(p.x() >= -cfg.scope_x && p.x() < cfg.scope_x && p.y() >= -cfg.scope_y &&
        p.y() < cfg.scope_y)) {
    return std::nullopt;
  }
  const int u = static_cast<int>(std::floor((p.x() + cfg.scope_x) / cfg.res_x));
  const int v = static_cast<int>(std::floor((p.y() + cfg.scope_y) / cfg.res_y));
  if (u < 0 || v < 0 || u >= cfg.width() || v >= cfg.height()) {
    return std::nullopt;
  }
  return Pixel{u, v};
}

bool precedes(double range_a, const Vec3& a, double t_a, double range_b, const Vec3& b,
              double t_b) {
  if (range_a != range_b) return range_a < range_b;
  for (int i = 0; i < 3; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return t_a > t_b;
}

namespace {

// Validates before any member sized from the config is allocated.
template <typename Config>
const Config& validated(const Config& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

RangeImage::RangeImage(const SphericalConfig& cfg)
    : cfg_(validated(cfg)), pixels_(cfg.width, cfg.height) {}

bool RangeImage::offer(const Pixel& px, const Vec3& p, double timestamp) {
  RangePixel& cur = pixels_.at(px.u, px.v);
  const double r = p.norm();
  if (cur.valid() && !precedes(r, p, timestamp, cur.range, cur.vertex, cur.timestamp)) {
    return false;
  }
  cur.vertex = p;
  cur.range = r;
  cur.timestamp = timestamp;
  return true;
}

void RangeImage::set(const Pixel& px, const Vec3& p, double timestamp) {
  RangePixel& cur = pixels_.at(px.u, px.v);
  cur.vertex = p;
  cur.range = p.norm();
  cur.timestamp = timestamp;
}

std::size_t RangeImage::valid_count() const {
  const auto data = pixels_.data();
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](const RangePixel& px) { return px.valid(); }));
}

BevMap::BevMap(const BevConfig& cfg)
    : cfg_(validated(cfg)),
      width_(cfg.width()),
      height_(cfg.height()),
      slots_(static_cast<std::size_t>(width_) * height_, -1) {}

const BevCell* BevMap::find(int u, int v) const {
  const std::int32_t s = slot(u, v);
  return s < 0 ? nullptr : &cells_[static_cast<std::size_t>(s)];
}

bool BevMap::offer(const Pixel& px, const Vec3& p, double timestamp) {
  const auto cell = static_cast<std::int32_t>(static_cast<std::size_t>(px.v) * width_ + px.u);
  std::int32_t& slot = slots_[static_cast<std::size_t>(cell)];
  if (slot < 0) {
    slot = static_cast<std::int32_t>(cells_.size());
    cells_.push_back({p, timestamp, cell});
    return true;
  }
  BevCell& cur = cells_[static_cast<std::size_t>(slot)];
  if (!precedes(p.norm(), p, timestamp, cur.vertex.norm(), cur.vertex, cur.timestamp)) {
    return false;
  }
  cur.vertex = p;
  cur.timestamp = timestamp;
  return true;
}

void BevMap::set(const Pixel& px, const Vec3& p, double timestamp) {
  const auto cell = static_cast<std::int32_t>(static_cast<std::size_t>(px.v) * width_ + px.u);
  std::int32_t& slot = slots_[static_cast<std::size_t>(cell)];
  if (slot < 0) {
    slot = static_cast<std::int32_t>(cells_.size());
    cells_.push_back({p, timestamp, cell});
    return;
  }
  cells_[static_cast<std::size_t>(slot)].vertex = p;
  cells_[static_cast<std::size_t>(slot)].timestamp = timestamp;
}

std::int32_t BevMap::slot(int u, int v) const {
  if (u < 0 || v < 0 || u >= width_ || v >= height_) return -1;
  return slots_[static_cast<std::size_t>(v) * width_ + u];
}

void BevMap::finalize() {
  std::sort(cells_.begin(), cells_.end(),
            [](const BevCell& a, const BevCell& b) { return a.cell < b.cell; });
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    slots_[static_cast<std::size_t>(cells_[i].cell)] = static_cast<std::int32_t>(i);
  }
}

void BevMap::clear() {
  for (const BevCell& c : cells_) {
    slots_[static_cast<std::size_t>(c.cell)] = -1;
  }
  cells_.clear();
}

RangeImage build_range_image(std::span<const TimedPoint> scan, const SphericalConfig& cfg) {
  RangeImage img(cfg);
  for (const TimedPoint& tp : scan) {
    if (!(tp.p.norm() >= cfg.min_range)) continue;
    if (const auto px = project_spherical(tp.p, cfg)) {
      img.offer(*px, tp.p, tp.t);
    }
  }
  return img;
}

BevMap build_bev_map(std::span<const TimedPoint> ground_points, const BevConfig& cfg) {
  BevMap map(cfg);
  for (const TimedPoint& tp : ground_points) {
    if (const auto px = project_bev(tp.p, cfg)) {
      map.offer(*px, tp.p, tp.t);
    }
  }
  map.finalize();
  return map;
}

}  // namespace elo
