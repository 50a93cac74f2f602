#include "elo/config.hpp"

#include <fstream>
#include <functional>
#include <charconv>
#include <locale>
#include <sstream>

#include "elo/io_kitti.hpp"

namespace elo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double x = 0.0;
  std::string rest;
  if (!(in >> x) || (in >> rest)) throw std::invalid_argument("not a number: '" + text + "'");
  return x;
}

int parse_int(const std::string& text) {
  std::istringstream in(text);
  int x = 0;
  std::string rest;
  if (!(in >> x) || (in >> rest)) throw std::invalid_argument("not an integer: '" + text + "'");
  return x;
}

// Shortest text that parses back to the same double.
std::string print_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

NormalMode parse_normal_mode(const std::string& text) {
  if (text == "range-adaptive") return NormalMode::kRangeAdaptive;
  if (text == "fixed-window") return NormalMode::kFixedWindow;
  if (text == "cross-product") return NormalMode::kCrossProduct;
  throw std::invalid_argument("unknown normal mode '" + text + "'");
}

CostMode parse_cost_mode(const std::string& text) {
  if (text == "fusion") return CostMode::kFusion;
  if (text == "spherical") return CostMode::kSphericalOnly;
  if (text == "bev") return CostMode::kBevOnly;
  throw std::invalid_argument("unknown cost mode '" + text + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const OdometryConfig&)> get;
  std::function<void(OdometryConfig&, const std::string&)> set;
};

template <typename Member>
Field real(std::string key, Member member, bool degrees = false) {
  return {std::move(key),
          [=](const OdometryConfig& c) {
            const double x = member(const_cast<OdometryConfig&>(c));
            return print_double(degrees ? rad2deg(x) : x);
          },
          [=](OdometryConfig& c, const std::string& v) {
            const double x = parse_double(v);
            member(c) = degrees ? deg2rad(x) : x;
          }};
}

template <typename Member>
Field integer(std::string key, Member member) {
  return {std::move(key),
          [=](const OdometryConfig& c) {
            return std::to_string(member(const_cast<OdometryConfig&>(c)));
          },
          [=](OdometryConfig& c, const std::string& v) { member(c) = parse_int(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"mode", [](const OdometryConfig& c) { return to_string(c.mode); },
       [](OdometryConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
      real("calib_angle_deg", [](OdometryConfig& c) -> double& { return c.calib_angle; }, true),
      integer("sri_width", [](OdometryConfig& c) -> int& { return c.spherical.width; }),
      integer("sri_height", [](OdometryConfig& c) -> int& { return c.spherical.height; }),
      real("fov_up_deg", [](OdometryConfig& c) -> double& { return c.spherical.fov_up; }, true),
      real("fov_down_deg", [](OdometryConfig& c) -> double& { return c.spherical.fov_down; }, true),
      real("min_range", [](OdometryConfig& c) -> double& { return c.spherical.min_range; }),
      real("bev_scope_x", [](OdometryConfig& c) -> double& { return c.bev.scope_x; }),
      real("bev_scope_y", [](OdometryConfig& c) -> double& { return c.bev.scope_y; }),
      real("bev_res_x", [](OdometryConfig& c) -> double& { return c.bev.res_x; }),
      real("bev_res_y", [](OdometryConfig& c) -> double& { return c.bev.res_y; }),
      real("sensor_height", [](OdometryConfig& c) -> double& { return c.ground.sensor_height; }),
      real("delta_h1", [](OdometryConfig& c) -> double& { return c.ground.delta_h1; }),
      real("delta_h2", [](OdometryConfig& c) -> double& { return c.ground.delta_h2; }),
      real("delta_theta_deg", [](OdometryConfig& c) -> double& { return c.ground.delta_theta; },
           true),
      integer("ground_neighbor_scan",
              [](OdometryConfig& c) -> int& { return c.ground.neighbor_scan_limit; }),
      integer("lx_max", [](OdometryConfig& c) -> int& { return c.normals.lx_max; }),
      integer("ly_max", [](OdometryConfig& c) -> int& { return c.normals.ly_max; }),
      integer("lx_min", [](OdometryConfig& c) -> int& { return c.normals.lx_min; }),
      integer("ly_min", [](OdometryConfig& c) -> int& { return c.normals.ly_min; }),
      real("delta", [](OdometryConfig& c) -> double& { return c.normals.delta; }),
      real("sigma_r", [](OdometryConfig& c) -> double& { return c.normals.sigma_r; }),
      {"sigma_z", [](const OdometryConfig& c) { return print_double(c.registration.sigma_z); },
       [](OdometryConfig& c, const std::string& v) {
         c.registration.sigma_z = parse_double(v);
         c.normals.sigma_z = c.registration.sigma_z;
       }},
      real("max_curvature", [](OdometryConfig& c) -> double& { return c.normals.max_curvature; }),
      {"normal_mode", [](const OdometryConfig& c) { return to_string(c.normals.mode); },
       [](OdometryConfig& c, const std::string& v) { c.normals.mode = parse_normal_mode(v); }},
      {"cost_mode", [](const OdometryConfig& c) { return to_string(c.registration.cost_mode); },
       [](OdometryConfig& c, const std::string& v) {
         c.registration.cost_mode = parse_cost_mode(v);
       }},
      real("w1", [](OdometryConfig& c) -> double& { return c.registration.w1; }),
      integer("max_iterations",
              [](OdometryConfig& c) -> int& { return c.registration.max_iterations; }),
      real("convergence_eps",
           [](OdometryConfig& c) -> double& { return c.registration.convergence_eps; }),
      real("condition_threshold",
           [](OdometryConfig& c) -> double& { return c.registration.condition_threshold; }),
      real("damping_floor",
           [](OdometryConfig& c) -> double& { return c.registration.damping_floor; }),
      integer("ground_patch_half_width",
              [](OdometryConfig& c) -> int& { return c.registration.ground_patch_half_width; }),
      integer("ground_neighbors",
              [](OdometryConfig& c) -> int& { return c.registration.ground_neighbors; }),
      real("tau_w", [](OdometryConfig& c) -> double& { return c.model.time_window; }),
  };
  return table;
}

}  // namespace

void OdometryConfig::validate() const {
  spherical.validate();
  bev.validate();
  ground.validate();
  normals.validate();
  registration.validate();
  if (!(model.time_window >= 0.0)) throw std::invalid_argument("tau_w must be non-negative");
}

std::vector<KeyValue> parse_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key=value", line_no);
    }
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": empty key", line_no);
    }
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<KeyValue> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string(), 0);
  return parse_key_values(in);
}

void apply_key_values(const std::vector<KeyValue>& entries, OdometryConfig& cfg) {
  for (const KeyValue& kv : entries) {
    const Field* field = nullptr;
    for (const Field& f : fields()) {
      if (f.key == kv.key) field = &f;
    }
    if (field == nullptr) {
      throw ParseError("config line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'",
                       kv.line);
    }
    try {
      field->set(cfg, kv.value);
    } catch (const std::invalid_argument& e) {
      throw ParseError("config line " + std::to_string(kv.line) + ": " + e.what(), kv.line);
    }
  }
}

OdometryConfig load_config(const std::filesystem::path& path) {
  OdometryConfig cfg;
  apply_key_values(read_key_values(path), cfg);
  cfg.validate();
  return cfg;
}

void write_config(const OdometryConfig& cfg, std::ostream& out) {
  for (const Field& f : fields()) out << f.key << " = " << f.get(cfg) << '\n';
}

std::string to_string(OdometryMode mode) {
  return mode == OdometryMode::kFrameToModel ? "frame-to-model" : "frame-to-frame";
}

OdometryMode parse_mode(const std::string& text) {
  if (text == "frame-to-model") return OdometryMode::kFrameToModel;
  if (text == "frame-to-frame") return OdometryMode::kFrameToFrame;
  throw std::invalid_argument("unknown mode '" + text + "' (frame-to-model|frame-to-frame)");
}

std::string to_string(NormalMode mode) {
  switch (mode) {
    case NormalMode::kRangeAdaptive: return "range-adaptive";
    case NormalMode::kFixedWindow: return "fixed-window";
    case NormalMode::kCrossProduct: return "cross-product";
  }
  return "range-adaptive";
}

std::string to_string(CostMode mode) {
  switch (mode) {
    case CostMode::kFusion: return "fusion";
    case CostMode::kSphericalOnly: return "spherical";
    case CostMode::kBevOnly: return "bev";
  }
  return "fusion";
}

}  // namespace elo
