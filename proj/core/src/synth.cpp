#include "elo/synth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <numbers>
#include <random>
#include <sstream>

#include "elo/config.hpp"

namespace elo {

namespace {

constexpr double kMinHit = 1e-9;

void consider(std::optional<RayHit>& best, double t, const Vec3& normal, bool ground,
              const Vec3& dir, double max_range) {
  if (!(t > kMinHit) || t > max_range) return;
  if (best && best->t <= t) return;
  RayHit hit{t, normal, ground};
  if (hit.normal.dot(dir) > 0.0) hit.normal = -hit.normal;
  best = hit;
}

void intersect(const Plane& plane, const Vec3& o, const Vec3& dir, double max_range,
               std::optional<RayHit>& best) {
  const double denom = plane.normal.dot(dir);
  if (std::abs(denom) < 1e-12) return;
  consider(best, (plane.d - plane.normal.dot(o)) / denom, plane.normal, plane.ground, dir,
           max_range);
}

void intersect(const Box& box, const Vec3& o, const Vec3& dir, double max_range,
               std::optional<RayHit>& best) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  int far_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return;
      continue;
    }
    double t0 = (box.min[a] - o[a]) / dir[a];
    double t1 = (box.max[a] - o[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
    }
    if (t1 < t_far) {
      t_far = t1;
      far_axis = a;
    }
  }
  if (t_near > t_far) return;
  if (t_near > kMinHit && near_axis >= 0) {
    consider(best, t_near, Vec3::Unit(near_axis), false, dir, max_range);
  } else if (far_axis >= 0) {
    consider(best, t_far, Vec3::Unit(far_axis), false, dir, max_range);
  }
}

void intersect(const Cylinder& cyl, const Vec3& o, const Vec3& dir, double max_range,
               std::optional<RayHit>& best) {
  const double ox = o.x() - cyl.cx;
  const double oy = o.y() - cyl.cy;
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a < 1e-15) return;
  const double b = 2.0 * (ox * dir.x() + oy * dir.y());
  const double c = ox * ox + oy * oy - cyl.radius * cyl.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  // Numerically stable roots.
  const double q = -0.5 * (b + std::copysign(sq, b));
  double r0 = q / a;
  double r1 = q != 0.0 ? c / q : r0;
  if (r0 > r1) std::swap(r0, r1);
  for (double t : {r0, r1}) {
    if (!(t > kMinHit)) continue;
    const Vec3 p = o + t * dir;
    if (p.z() < cyl.z_min || p.z() > cyl.z_max) continue;
    const Vec3 n = Vec3(p.x() - cyl.cx, p.y() - cyl.cy, 0.0).normalized();
    consider(best, t, n, false, dir, max_range);
    return;
  }
}

std::vector<double> parse_numbers(const std::string& text, std::string* tail) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::istringstream num(token);
    num.imbue(std::locale::classic());
    double x = 0.0;
    std::string rest;
    if (num >> x && !(num >> rest)) {
      out.push_back(x);
    } else if (tail != nullptr && tail->empty()) {
      *tail = token;
    } else {
      throw std::invalid_argument("unexpected token '" + token + "'");
    }
  }
  return out;
}

}  // namespace

double BeamPattern::elevation(int k) const {
  const double fov = fov_up + fov_down;
  return fov_up - (k + 0.5) * fov / beams;
}

double BeamPattern::azimuth(int j) const {
  return std::numbers::pi * (1.0 - 2.0 * (j + 0.5) / azimuth_steps);
}

std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir,
                               double max_range) {
  std::optional<RayHit> best;
  for (const Plane& p : scene.planes) intersect(p, origin, dir, max_range, best);
  for (const Box& b : scene.boxes) intersect(b, origin, dir, max_range, best);
  for (const Cylinder& c : scene.cylinders) intersect(c, origin, dir, max_range, best);
  return best;
}

SimulatedScan simulate_scan(const SceneSpec& scene, const Se3Pose& sensor_to_world,
                            const BeamPattern& pattern, std::uint64_t seed) {
  if (scene.empty()) throw std::invalid_argument("scene has no primitives");
  if (pattern.beams < 1 || pattern.azimuth_steps < 1) {
    throw std::invalid_argument("beam pattern needs at least one beam and one step");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<double> cos_az(static_cast<std::size_t>(pattern.azimuth_steps));
  std::vector<double> sin_az(cos_az.size());
  for (int j = 0; j < pattern.azimuth_steps; ++j) {
    cos_az[static_cast<std::size_t>(j)] = std::cos(pattern.azimuth(j));
    sin_az[static_cast<std::size_t>(j)] = std::sin(pattern.azimuth(j));
  }

  SimulatedScan out;
  const Mat3& R = sensor_to_world.rotation;
  const Vec3& origin = sensor_to_world.translation;
  for (int k = 0; k < pattern.beams; ++k) {
    const double el = pattern.elevation(k);
    const double ce = std::cos(el);
    const double se = std::sin(el);
    for (int j = 0; j < pattern.azimuth_steps; ++j) {
      const auto js = static_cast<std::size_t>(j);
      const Vec3 dir(ce * cos_az[js], ce * sin_az[js], se);
      const auto hit = cast_ray(scene, origin, R * dir, pattern.max_range);
      if (!hit) continue;
      double range = hit->t;
      if (scene.noise > 0.0) range += scene.noise * noise(rng);
      LidarPoint pt;
      pt.p = range * dir;
      out.scan.points.push_back(pt);
      out.normals.push_back(R.transpose() * hit->normal);
      out.ground.push_back(hit->ground);
      out.beam.push_back(k);
      out.column.push_back(j);
    }
  }
  return out;
}

std::vector<SimulatedScan> simulate_trajectory(const SceneSpec& scene,
                                               std::span<const Se3Pose> poses,
                                               const BeamPattern& pattern, std::uint64_t seed) {
  if (poses.empty()) throw std::invalid_argument("trajectory needs at least one pose");
  std::vector<SimulatedScan> scans;
  scans.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    SimulatedScan s = simulate_scan(scene, poses[i], pattern, seed + i);
    s.scan.index = static_cast<int>(i);
    s.scan.timestamp = static_cast<double>(i) * kKittiFramePeriod;
    scans.push_back(std::move(s));
  }
  return scans;
}

std::vector<Se3Pose> constant_motion(const Se3Pose& start, const Se3Pose& step, int frames) {
  std::vector<Se3Pose> poses;
  if (frames <= 0) return poses;
  poses.reserve(static_cast<std::size_t>(frames));
  poses.push_back(start);
  for (int i = 1; i < frames; ++i) poses.push_back(poses.back() * step);
  return poses;
}

Se3Pose planar_step(double forward, double yaw) {
  Se3Pose step;
  step.rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  step.translation = Vec3(forward, 0.0, 0.0);
  return step;
}

SceneSpec ground_only_scene(double sensor_height) {
  SceneSpec scene;
  scene.planes.push_back({Vec3::UnitZ(), -sensor_height, true});
  return scene;
}

SceneSpec corridor_scene(double sensor_height) {
  SceneSpec scene = ground_only_scene(sensor_height);
  scene.planes.push_back({Vec3::UnitY(), 10.0, false});
  scene.planes.push_back({Vec3::UnitY(), -10.0, false});
  const double floor = -sensor_height;
  for (int i = 0; i < 14; ++i) {
    const double x = -20.0 + 9.0 * i;
    scene.cylinders.push_back({x, 8.5, 0.35, floor, floor + 6.0});
    scene.cylinders.push_back({x + 4.5, -8.5, 0.35, floor, floor + 6.0});
  }
  for (int i = 0; i < 7; ++i) {
    const double x = -14.0 + 17.0 * i;
    scene.boxes.push_back({Vec3(x, 6.0, floor), Vec3(x + 4.2, 7.8, floor + 1.5)});
    scene.boxes.push_back({Vec3(x + 8.0, -7.8, floor), Vec3(x + 12.5, -6.0, floor + 1.6)});
  }
  return scene;
}

SceneSpec street_scene(double sensor_height) {
  SceneSpec scene = ground_only_scene(sensor_height);
  const double floor = -sensor_height;
  scene.planes.push_back({Vec3::UnitY(), 18.0, false});
  scene.planes.push_back({Vec3::UnitY(), -18.0, false});
  for (int i = 0; i < 6; ++i) {
    const double x = -30.0 + 12.0 * i;
    scene.boxes.push_back({Vec3(x, 4.0, floor), Vec3(x + 4.5, 5.9, floor + 1.5)});
    scene.boxes.push_back({Vec3(x + 5.0, -6.1, floor), Vec3(x + 9.3, -4.3, floor + 1.7)});
    scene.cylinders.push_back({x + 2.0, 8.0, 0.15, floor, floor + 5.0});
    scene.cylinders.push_back({x + 8.0, -8.5, 0.2, floor, floor + 4.0});
  }
  return scene;
}

SceneSpec parse_scene(std::istream& in) {
  SceneSpec scene;
  for (const KeyValue& kv : parse_key_values(in)) {
    const std::string where = "scene line " + std::to_string(kv.line) + ": ";
    try {
      std::string tail;
      const std::vector<double> v = parse_numbers(kv.value, kv.key == "plane" ? &tail : nullptr);
      auto expect = [&](std::size_t n) {
        if (v.size() != n) {
          throw std::invalid_argument("expected " + std::to_string(n) + " numbers");
        }
      };
      if (kv.key == "plane") {
        expect(4);
        if (!tail.empty() && tail != "ground") {
          throw std::invalid_argument("unexpected token '" + tail + "'");
        }
        const Vec3 n(v[0], v[1], v[2]);
        if (n.norm() == 0.0) throw std::invalid_argument("plane normal is zero");
        scene.planes.push_back({n.normalized(), v[3] / n.norm(), tail == "ground"});
      } else if (kv.key == "box") {
        expect(6);
        Box b{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
        if ((b.max - b.min).minCoeff() <= 0.0) throw std::invalid_argument("empty box");
        scene.boxes.push_back(b);
      } else if (kv.key == "cylinder") {
        expect(5);
        if (v[2] <= 0.0 || v[4] <= v[3]) throw std::invalid_argument("degenerate cylinder");
        scene.cylinders.push_back({v[0], v[1], v[2], v[3], v[4]});
      } else if (kv.key == "noise") {
        expect(1);
        if (v[0] < 0.0) throw std::invalid_argument("noise must be non-negative");
        scene.noise = v[0];
      } else {
        throw std::invalid_argument("unknown key '" + kv.key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + e.what(), kv.line);
    }
  }
  return scene;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file " + path.string(), 0);
  return parse_scene(in);
}

void write_scene(const SceneSpec& scene, std::ostream& out) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  for (const Plane& p : scene.planes) {
    os << "plane = " << p.normal.x() << ' ' << p.normal.y() << ' ' << p.normal.z() << ' ' << p.d
       << (p.ground ? " ground" : "") << '\n';
  }
  for (const Box& b : scene.boxes) {
    os << "box = " << b.min.x() << ' ' << b.min.y() << ' ' << b.min.z() << ' ' << b.max.x() << ' '
       << b.max.y() << ' ' << b.max.z() << '\n';
  }
  for (const Cylinder& c : scene.cylinders) {
    os << "cylinder = " << c.cx << ' ' << c.cy << ' ' << c.radius << ' ' << c.z_min << ' '
       << c.z_max << '\n';
  }
  os << "noise = " << scene.noise << '\n';
  out << os.str();
}

}  // namespace elo
