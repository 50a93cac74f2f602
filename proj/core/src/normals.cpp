#include "elo/normals.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace elo {

namespace {

bool odd_at_least_three(int x) { return x >= 3 && x % 2 == 1; }

int odd_floor_clamped(double raw, int lo, int hi) {
  const double clamped = std::clamp(raw, static_cast<double>(lo), static_cast<double>(hi));
  int n = static_cast<int>(std::floor(clamped));
  if (n % 2 == 0) --n;
  return std::max(n, lo);
}

void orient_towards_sensor(Vec3& n, const Vec3& vertex) {
  if (n.dot(vertex) > 0.0) n = -n;
}

// Scatter of the window points about the centre vertex, built without storing them.
struct Moments {
  int count = 0;
  Vec3 sum = Vec3::Zero();
  Mat3 outer = Mat3::Zero();
};

// Accumulates the window of (u, v), applying the range gate when requested. Returns
// false when the range-difference criterion rejects the centre pixel.
bool gather(const RangeImage& img, int u, int v, WindowSize window, bool range_gate,
            double sigma_r, Moments& m) {
  m = Moments{};
  const RangePixel& c = img.at(u, v);
  const double rc = c.range;
  const int hx = window.lx / 2;
  const int hy = window.ly / 2;
  const int w = img.width();
  int gathered = 0;
  int far = 0;
  double sxx = 0, sxy = 0, sxz = 0, syy = 0, syz = 0, szz = 0;
  for (int dv = -hy; dv <= hy; ++dv) {
    const int row = v + dv;
    if (row < 0 || row >= img.height()) continue;
    for (int du = -hx; du <= hx; ++du) {
      int col = u + du;
      if (col < 0) col += w;
      if (col >= w) col -= w;
      const RangePixel& px = img.at(col, row);
      if (!px.valid()) continue;
      ++gathered;
      if (range_gate && std::abs(px.range - rc) > sigma_r) {
        ++far;
        continue;
      }
      const Vec3 d = px.vertex - c.vertex;
      m.sum += d;
      sxx += d.x() * d.x();
      sxy += d.x() * d.y();
      sxz += d.x() * d.z();
      syy += d.y() * d.y();
      syz += d.y() * d.z();
      szz += d.z() * d.z();
      ++m.count;
    }
  }
  m.outer << sxx, sxy, sxz, sxy, syy, syz, sxz, syz, szz;
  return !(range_gate && 2 * far > gathered);
}

SurfaceNormal eigen_normal(const RangeImage& img, int u, int v, const WindowLimits& cfg) {
  const RangePixel& center = img.at(u, v);
  const bool adaptive = cfg.mode == NormalMode::kRangeAdaptive;
  const WindowSize window = adaptive ? adaptive_window(center.range, cfg, img.config())
                                     : WindowSize{cfg.lx_max, cfg.ly_max};
  Moments m;
  if (!gather(img, u, v, window, adaptive, cfg.sigma_r, m)) return {};
  if (m.count < 3) return {};
  const double k = m.count;
  const Vec3 mean = m.sum / k;
  const Mat3 cov = m.outer / k - mean * mean.transpose();
  const auto fit = fit_covariance(cov, center.vertex + mean);
  if (!fit || fit->curvature > cfg.max_curvature) return {};
  SurfaceNormal out{fit->normal, fit->curvature, true};
  orient_towards_sensor(out.normal, center.vertex);
  return out;
}

SurfaceNormal cross_product_normal(const RangeImage& img, int u, int v) {
  const int w = img.width();
  const int right = (u + 1) % w;
  if (v + 1 >= img.height() || !img.valid(right, v) || !img.valid(u, v + 1)) return {};
  const Vec3& p = img.at(u, v).vertex;
  Vec3 n = (img.at(right, v).vertex - p).cross(img.at(u, v + 1).vertex - p);
  const double len = n.norm();
  if (!(len > 0.0)) return {};
  n /= len;
  orient_towards_sensor(n, p);
  return {n, 0.0, true};
}

}  // namespace

std::optional<PlaneFit> fit_covariance(const Mat3& cov, const Vec3& centroid) {
  // Jacobi SVD of the PSD covariance: singular values are the eigenvalues, descending.
  // The closed-form solver loses about 1e-5 rad on the normal of a nearly flat window.
  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  const double l1 = sv(0);
  const double l2 = sv(1);
  const double l3 = sv(2);
  if (!(l1 > 0.0) || l2 <= 1e-9 * l1) return std::nullopt;

  Vec3 n = svd.matrixV().col(2).normalized();
  for (int i = 0; i < 3; ++i) {
    if (n[i] != 0.0) {
      if (n[i] < 0.0) n = -n;
      break;
    }
  }
  return PlaneFit{n, n.dot(centroid), l3 / (l1 + l2 + l3)};
}

void WindowLimits::validate() const {
  if (!(odd_at_least_three(lx_min) && odd_at_least_three(ly_min) && odd_at_least_three(lx_max) &&
        odd_at_least_three(ly_max))) {
    throw std::invalid_argument("window limits must be odd and >= 3");
  }
  if (lx_max < lx_min || ly_max < ly_min) {
    throw std::invalid_argument("window maximum below minimum");
  }
  if (!(delta > 0.0 && sigma_r > 0.0 && sigma_z > 0.0 && max_curvature >= 0.0)) {
    throw std::invalid_argument("normal estimation thresholds must be positive");
  }
}

WindowSize adaptive_window(double range, const WindowLimits& cfg, const SphericalConfig& sph) {
  const double lx = cfg.delta / (range * std::numbers::pi) * sph.width;
  const double ly = cfg.delta / (range * sph.fov()) * sph.height;
  return {odd_floor_clamped(lx, cfg.lx_min, cfg.lx_max),
          odd_floor_clamped(ly, cfg.ly_min, cfg.ly_max)};
}

std::optional<PlaneFit> plane_fit(std::span<const Vec3> points) {
  if (points.size() < 3) return std::nullopt;
  const double k = static_cast<double>(points.size());
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= k;
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cov.noalias() += d * d.transpose();
  }
  cov /= k;

  return fit_covariance(cov, centroid);
}

std::vector<Pixel> window_pixels(const RangeImage& img, int u, int v, WindowSize window) {
  std::vector<Pixel> out;
  const int hx = window.lx / 2;
  const int hy = window.ly / 2;
  for (int dv = -hy; dv <= hy; ++dv) {
    const int row = v + dv;
    if (row < 0 || row >= img.height()) continue;
    for (int du = -hx; du <= hx; ++du) {
      const int col = ((u + du) % img.width() + img.width()) % img.width();
      if (img.valid(col, row)) out.push_back({col, row});
    }
  }
  return out;
}

SurfaceNormal estimate_normal(const RangeImage& img, int u, int v, const WindowLimits& cfg) {
  if (!img.valid(u, v)) return {};
  if (cfg.mode == NormalMode::kCrossProduct) return cross_product_normal(img, u, v);
  return eigen_normal(img, u, v, cfg);
}

NormalMap compute_normal_map(const RangeImage& img, const GroundMask& mask,
                             const WindowLimits& cfg) {
  cfg.validate();
  RangeImage non_ground = img;
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (mask.at(u, v) == GroundLabel::kGround) non_ground.invalidate(u, v);
    }
  }
  return compute_normal_map(non_ground, cfg);
}

NormalMap compute_normal_map(const RangeImage& img, const WindowLimits& cfg) {
  cfg.validate();
  NormalMap out(img.width(), img.height());
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.valid(u, v)) continue;
      out.at(u, v) = cfg.mode == NormalMode::kCrossProduct ? cross_product_normal(img, u, v)
                                                           : eigen_normal(img, u, v, cfg);
    }
  }
  return out;
}

}  // namespace elo
