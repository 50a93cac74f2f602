#include "elo/model.hpp"

#include <iomanip>
#include <ostream>

namespace elo {

namespace {

bool expired(double observed, double now, double window) { return now - observed > window; }

}  // namespace

ModelState::ModelState(const SphericalConfig& sph, const BevConfig& bev)
    : vertices_(sph), normals_(sph.width, sph.height), ground_(bev) {}

ModelState ModelState::from_scan(const ScanFrame& scan) {
  ModelState state;
  state.vertices_ = scan.vertices;
  state.normals_ = scan.normals;
  state.ground_ = scan.ground;
  return state;
}

bool ModelState::empty() const {
  return vertices_.valid_count() == 0 && ground_.valid_count() == 0;
}

void ModelState::update(const ScanFrame& scan, const Se3Pose& scan_to_model, double current_time,
                        const ModelConfig& cfg) {
  const SphericalConfig& sph = scan.vertices.config();
  const Se3Pose model_to_scan = inverse(scan_to_model);
  const Mat3& rot = model_to_scan.rotation;

  if (next_vertices_.width() != scan.vertices.width() ||
      next_vertices_.height() != scan.vertices.height()) {
    next_vertices_ = RangeImage(sph);
    next_normals_ = NormalMap(sph.width, sph.height);
  } else {
    next_vertices_.clear();
    next_normals_.fill(SurfaceNormal{});
  }

  // Scatter the surviving model into the current frame; colliding model points keep
  // the one nearest the sensor.
  if (vertices_.width() > 0) {
    for (int v = 0; v < vertices_.height(); ++v) {
      for (int u = 0; u < vertices_.width(); ++u) {
        const RangePixel& px = vertices_.at(u, v);
        if (!px.valid() || expired(px.timestamp, current_time, cfg.time_window)) continue;
        const Vec3 p = model_to_scan * px.vertex;
        if (!(p.norm() >= sph.min_range)) continue;
        const auto target = project_spherical(p, sph);
        if (!target) continue;
        if (next_vertices_.offer(*target, p, px.timestamp)) {
          SurfaceNormal n = normals_.at(u, v);
          if (n.valid) n.normal = rot * n.normal;
          next_normals_.at(target->u, target->v) = n;
        }
      }
    }
  }

  for (int v = 0; v < scan.vertices.height(); ++v) {
    for (int u = 0; u < scan.vertices.width(); ++u) {
      const RangePixel& s = scan.vertices.at(u, v);
      if (!s.valid()) continue;
      RangePixel& m = next_vertices_.at(u, v);
      if (m.valid() && m.range < s.range) continue;
      m = s;
      next_normals_.at(u, v) = scan.normals.at(u, v);
    }
  }

  std::swap(vertices_, next_vertices_);
  std::swap(normals_, next_normals_);

  const BevConfig& bev = scan.ground.width() > 0 ? scan.ground.config() : ground_.config();
  if (next_ground_.width() != scan.ground.width() || next_ground_.height() != scan.ground.height()) {
    next_ground_ = scan.ground.width() > 0 ? BevMap(bev) : BevMap();
  } else {
    next_ground_.clear();
  }
  if (next_ground_.width() == 0) {
    ground_ = BevMap();
    return;
  }

  for (const BevCell& c : ground_.cells()) {
    if (expired(c.timestamp, current_time, cfg.time_window)) continue;
    const Vec3 p = model_to_scan * c.vertex;
    if (const auto target = project_bev(p, bev)) {
      next_ground_.offer(*target, p, c.timestamp);
    }
  }
  for (const BevCell& s : scan.ground.cells()) {
    const int u = s.cell % scan.ground.width();
    const int v = s.cell / scan.ground.width();
    const BevCell* m = next_ground_.find(u, v);
    if (m != nullptr && m->vertex.norm() < s.vertex.norm()) continue;
    next_ground_.set({u, v}, s.vertex, s.timestamp);
  }
  next_ground_.finalize();
  std::swap(ground_, next_ground_);
}

ModelState update_model(const ModelState& state, const ScanFrame& scan,
                        const Se3Pose& scan_to_model, double current_time, const ModelConfig& cfg) {
  ModelState next = state;
  next.update(scan, scan_to_model, current_time, cfg);
  return next;
}

ModelSize model_size(const ModelState& state) {
  ModelSize size;
  size.vertices = state.vertices().valid_count();
  for (const SurfaceNormal& n : state.normals().data()) {
    if (n.valid) ++size.normals;
  }
  size.ground = state.ground().valid_count();
  return size;
}

std::size_t model_capacity(const SphericalConfig& sph, const BevConfig& bev) {
  return static_cast<std::size_t>(sph.width) * sph.height +
         static_cast<std::size_t>(bev.width()) * bev.height();
}

void write_model_xyz(const ModelState& state, std::ostream& out) {
  out << std::setprecision(9);
  for (const RangePixel& px : state.vertices().grid().data()) {
    if (px.valid()) out << px.vertex.x() << ' ' << px.vertex.y() << ' ' << px.vertex.z() << '\n';
  }
  for (const BevCell& c : state.ground().cells()) {
    out << c.vertex.x() << ' ' << c.vertex.y() << ' ' << c.vertex.z() << '\n';
  }
}

}  // namespace elo
