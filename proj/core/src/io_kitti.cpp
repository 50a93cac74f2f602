#include "elo/io_kitti.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

namespace elo {

namespace {

static_assert(sizeof(float) == 4, "KITTI scans store IEEE float32");

float decode_le(const unsigned char* bytes) {
  std::uint32_t raw = static_cast<std::uint32_t>(bytes[0]) |
                      (static_cast<std::uint32_t>(bytes[1]) << 8) |
                      (static_cast<std::uint32_t>(bytes[2]) << 16) |
                      (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<float>(raw);
}

void encode_le(float value, unsigned char* bytes) {
  const auto raw = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((raw >> (8 * i)) & 0xFFu);
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  const std::string full = os.str();
  for (int precision = 9; precision < 17; ++precision) {
    std::ostringstream trial;
    trial.imbue(std::locale::classic());
    trial << std::setprecision(precision) << x;
    if (std::stod(trial.str()) == x) return trial.str();
  }
  return full;
}

RawScan read_scan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scan file " + path.string(), 0);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % kRecord;
    throw ParseError(path.string() + ": truncated point record at byte offset " +
                         std::to_string(offset),
                     offset);
  }
  RawScan scan;
  scan.points.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    const unsigned char* rec = bytes.data() + off;
    LidarPoint pt;
    pt.p = Vec3(decode_le(rec), decode_le(rec + 4), decode_le(rec + 8));
    pt.reflectance = decode_le(rec + 12);
    if (!pt.p.allFinite()) {
      throw ParseError(path.string() + ": non-finite coordinate at byte offset " +
                           std::to_string(off),
                       off);
    }
    scan.points.push_back(pt);
  }
  return scan;
}

void write_scan(const RawScan& scan, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(scan.points.size() * 16);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const LidarPoint& pt = scan.points[i];
    unsigned char* rec = bytes.data() + 16 * i;
    encode_le(static_cast<float>(pt.p.x()), rec);
    encode_le(static_cast<float>(pt.p.y()), rec + 4);
    encode_le(static_cast<float>(pt.p.z()), rec + 8);
    encode_le(pt.reflectance, rec + 12);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scan file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

RawScan apply_calib_correction(const RawScan& scan, double angle) {
  RawScan out = scan;
  if (angle == 0.0) return out;
  for (LidarPoint& pt : out.points) {
    const double r = pt.p.norm();
    if (r == 0.0) continue;
    const double azimuth = std::atan2(pt.p.y(), pt.p.x());
    const double elevation = std::asin(std::clamp(pt.p.z() / r, -1.0, 1.0)) + angle;
    const double horizontal = r * std::cos(elevation);
    pt.p = Vec3(horizontal * std::cos(azimuth), horizontal * std::sin(azimuth),
                r * std::sin(elevation));
  }
  return out;
}

std::string format_pose(const Se3Pose& pose) {
  std::string line;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double x = c < 3 ? pose.rotation(r, c) : pose.translation(r);
      if (!std::isfinite(x)) throw std::invalid_argument("pose has non-finite entries");
      if (!line.empty()) line += ' ';
      line += format_number(x);
    }
  }
  return line;
}

void write_poses(const std::vector<Se3Pose>& poses, std::ostream& out) {
  for (const Se3Pose& pose : poses) out << format_pose(pose) << '\n';
}

void write_poses(const std::vector<Se3Pose>& poses, const std::filesystem::path& path) {
  std::ostringstream buffer;
  write_poses(poses, buffer);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pose file " + path.string());
  out << buffer.str();
}

std::vector<Se3Pose> read_poses(std::istream& in) {
  std::vector<Se3Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    std::array<double, 12> v{};
    for (double& x : v) {
      if (!(fields >> x) || !std::isfinite(x)) {
        throw ParseError("pose line " + std::to_string(line_no) + ": expected 12 finite numbers",
                         line_no);
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw ParseError("pose line " + std::to_string(line_no) + ": trailing data", line_no);
    }
    Se3Pose pose;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose.rotation(r, c) = v[static_cast<std::size_t>(4 * r + c)];
      pose.translation(r) = v[static_cast<std::size_t>(4 * r + 3)];
    }
    poses.push_back(pose);
  }
  return poses;
}

std::vector<Se3Pose> read_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pose file " + path.string(), 0);
  return read_poses(in);
}

std::vector<double> read_times(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open times file " + path.string(), 0);
  std::vector<double> times;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    double t = 0.0;
    if (!(fields >> t) || !std::isfinite(t)) {
      throw ParseError("times line " + std::to_string(line_no) + ": expected a number", line_no);
    }
    times.push_back(t);
  }
  return times;
}

Se3Pose read_velo_to_cam(const std::filesystem::path& calib_path) {
  std::ifstream in(calib_path);
  if (!in) throw ParseError("cannot open calibration file " + calib_path.string(), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("Tr:", 0) != 0) continue;
    std::istringstream rest(line.substr(3));
    const std::vector<Se3Pose> pose = read_poses(rest);
    if (pose.size() != 1) throw ParseError("calibration line " + std::to_string(line_no) +
                                               ": malformed Tr entry", line_no);
    Se3Pose tr = pose.front();
    tr.rotation = orthonormalize(tr.rotation);
    return tr;
  }
  throw ParseError(calib_path.string() + ": no Tr entry", line_no);
}

}  // namespace elo
