#include "elo/registration.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace elo {

namespace {

double pose_distance(const Se3Pose& a, const Se3Pose& b) {
  const Se3Pose d = inverse(a) * b;
  return std::hypot(d.translation.norm(), rotation_angle(d.rotation));
}

}  // namespace

void RegistrationConfig::validate() const {
  if (!(w1 >= 0.0 && w1 <= 1.0)) throw std::invalid_argument("w1 must lie in [0, 1]");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(convergence_eps > 0.0 && sigma_z > 0.0 && damping_floor > 0.0)) {
    throw std::invalid_argument("registration thresholds must be positive");
  }
  if (ground_patch_half_width < 1 || ground_neighbors < 3) {
    throw std::invalid_argument("ground normal patch too small");
  }
}

Se3Pose predict_initial(std::span<const Se3Pose> history) {
  const std::size_t n = history.size();
  if (n < 2) return Se3Pose::identity();
  const Se3Pose last = inverse(history[n - 2]) * history[n - 1];
  if (n < 3) return last;
  const Se3Pose before = inverse(history[n - 3]) * history[n - 2];
  Se3Pose predicted = last * (inverse(before) * last);
  predicted.rotation = orthonormalize(predicted.rotation);
  return predicted;
}

Association associate_nonground(const RangeImage& scan, const RangeImage& model_vertices,
                                const NormalMap& model_normals, const Se3Pose& scan_to_model,
                                double sigma_z) {
  Association out;
  if (model_vertices.width() == 0) return out;
  const SphericalConfig& sph = model_vertices.config();
  for (const RangePixel& px : scan.grid().data()) {
    if (!px.valid()) continue;
    ++out.attempted;
    const Vec3 warped = scan_to_model * px.vertex;
    const auto target = project_spherical(warped, sph);
    if (!target) continue;
    const RangePixel& m = model_vertices.at(target->u, target->v);
    const SurfaceNormal& n = model_normals.at(target->u, target->v);
    if (!m.valid() || !n.valid) continue;
    const double r = n.normal.dot(warped - m.vertex);
    if (is_plane_outlier(r, sigma_z)) continue;
    out.correspondences.push_back({px.vertex, warped, m.vertex, n.normal, r, Domain::kNonGround});
  }
  return out;
}

std::optional<PlaneFit> ground_normal(const BevMap& model, int u, int v, int half_width, int k) {
  const BevCell* hit = model.find(u, v);
  if (hit == nullptr) return std::nullopt;
  const Vec3& center = hit->vertex;
  const double ring_step = std::min(model.config().res_x, model.config().res_y);

  // (distance, cell) keeps the selection deterministic under distance ties.
  std::vector<std::pair<double, std::int32_t>> candidates;
  for (int ring = 0; ring <= half_width; ++ring) {
    for (int dv = -ring; dv <= ring; ++dv) {
      for (int du = -ring; du <= ring; ++du) {
        if (std::max(std::abs(du), std::abs(dv)) != ring) continue;
        if (const BevCell* c = model.find(u + du, v + dv)) {
          candidates.emplace_back((c->vertex - center).norm(), c->cell);
        }
      }
    }
    if (static_cast<int>(candidates.size()) >= k) {
      std::nth_element(candidates.begin(), candidates.begin() + (k - 1), candidates.end());
      // Anything beyond the next ring is at least ring * step away horizontally.
      if (candidates[static_cast<std::size_t>(k - 1)].first <= ring * ring_step) break;
    }
  }
  if (static_cast<int>(candidates.size()) < k) return std::nullopt;
  std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());

  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(k));
  const int width = model.width();
  for (int i = 0; i < k; ++i) {
    const std::int32_t cell = candidates[static_cast<std::size_t>(i)].second;
    points.push_back(model.find(cell % width, cell / width)->vertex);
  }
  auto fit = plane_fit(points);
  if (fit && fit->normal.z() < 0.0) {
    fit->normal = -fit->normal;
    fit->d = -fit->d;
  }
  return fit;
}

GroundNormalCache::GroundNormalCache(const BevMap& model, int half_width, int k)
    : model_(model),
      half_width_(half_width),
      k_(k),
      state_(model.valid_count(), 0),
      fits_(model.valid_count()) {}

const std::optional<PlaneFit>& GroundNormalCache::at(int u, int v) {
  static const std::optional<PlaneFit> kNone;
  const std::int32_t slot = model_.slot(u, v);
  if (slot < 0) return kNone;
  const auto i = static_cast<std::size_t>(slot);
  if (state_[i] == 0) {
    fits_[i] = ground_normal(model_, u, v, half_width_, k_);
    state_[i] = 1;
  }
  return fits_[i];
}

Association associate_ground(const BevMap& scan, GroundNormalCache& normals, const BevMap& model,
                             const Se3Pose& scan_to_model, double sigma_z) {
  Association out;
  if (model.width() == 0) return out;
  for (const BevCell& g : scan.cells()) {
    ++out.attempted;
    const Vec3 warped = scan_to_model * g.vertex;
    const auto target = project_bev(warped, model.config());
    if (!target) continue;
    const BevCell* hit = model.find(target->u, target->v);
    if (hit == nullptr) continue;
    const auto& fit = normals.at(target->u, target->v);
    if (!fit) continue;
    const double r = fit->normal.dot(warped - hit->vertex);
    if (is_plane_outlier(r, sigma_z)) continue;
    out.correspondences.push_back({g.vertex, warped, hit->vertex, fit->normal, r, Domain::kGround});
  }
  return out;
}

Association associate_ground(const BevMap& scan, const BevMap& model, const Se3Pose& scan_to_model,
                             double sigma_z, int half_width, int k) {
  GroundNormalCache cache(model, half_width, k);
  return associate_ground(scan, cache, model, scan_to_model, sigma_z);
}

double adaptive_weight(std::size_t nonground_inliers, std::size_t nonground_total,
                       std::size_t ground_inliers, std::size_t ground_total, double w1) {
  const double rho_s =
      nonground_total == 0 ? 0.0 : static_cast<double>(nonground_inliers) / nonground_total;
  const double rho_g = ground_total == 0 ? 0.0 : static_cast<double>(ground_inliers) / ground_total;
  const double w2 = (rho_s + rho_g) > 0.0 ? rho_s / (rho_s + rho_g) : 0.5;
  return std::clamp(w1 * w2, 0.0, 1.0);
}

Eigen::Matrix<double, 1, 6> jacobian_row(const Vec3& normal, const Vec3& warped) {
  Eigen::Matrix<double, 1, 6> row;
  row.head<3>() = normal.transpose();
  // d/d(omega) of n . (omega x p) = (p x n)^T, i.e. n^T [p]_x^T.
  row.tail<3>() = warped.cross(normal).transpose();
  return row;
}

NormalEquations accumulate(std::span<const Correspondence> corrs, double w) {
  NormalEquations eq;
  for (const Correspondence& c : corrs) {
    const double weight = c.domain == Domain::kNonGround ? w : 1.0 - w;
    if (weight == 0.0) continue;
    const Eigen::Matrix<double, 1, 6> j = jacobian_row(c.normal, c.warped);
    eq.hessian.noalias() += weight * j.transpose() * j;
    eq.gradient.noalias() += weight * c.residual * j.transpose();
  }
  return eq;
}

StepResult solve_step(const NormalEquations& eq, const RegistrationConfig& cfg,
                      double min_damping) {
  StepResult out;
  const Eigen::SelfAdjointEigenSolver<Mat6> es(eq.hessian);
  const Vec6& mu = es.eigenvalues();
  const double max_eig = mu(5);
  if (es.info() != Eigen::Success || !(max_eig > 0.0) || !std::isfinite(max_eig)) {
    out.singular = true;
    return out;
  }
  // Damping acts on the ill-conditioned eigen-directions only, so the well-determined
  // part of the step is the exact Gauss-Newton solution.
  const double floor = cfg.damping_floor * max_eig;
  const Vec6 projected = es.eigenvectors().transpose() * eq.gradient;
  Vec6 x_eig;
  for (int i = 0; i < 6; ++i) {
    double lambda = mu(i) < cfg.condition_threshold * max_eig ? floor : 0.0;
    lambda = std::max(lambda, min_damping);
    out.damping = std::max(out.damping, lambda);
    const double denom = mu(i) + lambda;
    if (!(denom > 0.0)) {
      out.singular = true;
      return out;
    }
    x_eig(i) = -projected(i) / denom;
  }
  const Vec6 x = es.eigenvectors() * x_eig;
  if (!x.allFinite()) {
    out.singular = true;
    return out;
  }
  out.delta = Twist::from_vector(x);
  return out;
}

StepResult gauss_newton_step(std::span<const Correspondence> corrs, double w,
                             const RegistrationConfig& cfg) {
  return solve_step(accumulate(corrs, w), cfg);
}

double weighted_cost(std::span<const Correspondence> corrs, double w, const Se3Pose& scan_to_model) {
  double cost = 0.0;
  for (const Correspondence& c : corrs) {
    const double weight = c.domain == Domain::kNonGround ? w : 1.0 - w;
    const double r = c.normal.dot(scan_to_model * c.source - c.model_vertex);
    cost += weight * r * r;
  }
  return cost;
}

RegistrationResult register_scan(const ScanFrame& scan, const ModelState& model,
                                 const Se3Pose& initial, const RegistrationConfig& cfg) {
  cfg.validate();
  RegistrationResult result;
  result.pose = initial;

  const bool use_spherical = cfg.cost_mode != CostMode::kBevOnly &&
                             scan.vertices.width() > 0 && model.vertices().width() > 0;
  const bool use_ground = cfg.cost_mode != CostMode::kSphericalOnly &&
                          scan.ground.width() > 0 && model.ground().width() > 0;
  GroundNormalCache ground_normals(model.ground(), cfg.ground_patch_half_width,
                                   cfg.ground_neighbors);

  Se3Pose pose = initial;
  std::vector<Correspondence> corrs;
  constexpr int kMaxEscalations = 8;
  // Every iterate with its cost under its own association, for detecting limit cycles.
  std::vector<std::pair<Se3Pose, double>> visited;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    Association nonground;
    Association ground;
    if (use_spherical) {
      nonground = associate_nonground(scan.vertices, model.vertices(), model.normals(), pose,
                                      cfg.sigma_z);
    }
    if (use_ground) {
      ground = associate_ground(scan.ground, ground_normals, model.ground(), pose, cfg.sigma_z);
    }
    result.nonground_inliers = nonground.correspondences.size();
    result.ground_inliers = ground.correspondences.size();
    if (nonground.correspondences.empty() && ground.correspondences.empty()) break;

    double w = 1.0;
    if (cfg.cost_mode == CostMode::kBevOnly) {
      w = 0.0;
    } else if (cfg.cost_mode == CostMode::kFusion && use_ground) {
      w = adaptive_weight(nonground.correspondences.size(), nonground.attempted,
                          ground.correspondences.size(), ground.attempted, cfg.w1);
    }

    corrs = std::move(nonground.correspondences);
    corrs.insert(corrs.end(), ground.correspondences.begin(), ground.correspondences.end());

    const NormalEquations eq = accumulate(corrs, w);
    const double cost_before = weighted_cost(corrs, w, pose);

    // Re-association can flip between a few correspondence sets, returning the iterate
    // to an earlier pose. Keep the cheapest pose of the cycle and stop.
    const auto revisit = std::find_if(visited.begin(), visited.end(), [&](const auto& entry) {
      return pose_distance(entry.first, pose) < cfg.convergence_eps;
    });
    if (revisit != visited.end()) {
      const auto best = std::min_element(
          revisit, visited.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
      if (best->second < cost_before) {
        result.pose = best->first;
        result.final_cost = best->second;
      } else {
        result.final_cost = cost_before;
      }
      result.converged = true;
      break;
    }
    visited.emplace_back(pose, cost_before);
    StepResult step = solve_step(eq, cfg);
    if (step.singular) break;

    Se3Pose trial = left_update(step.delta, pose);
    double cost_after = weighted_cost(corrs, w, trial);
    const double tolerance = 1e-12 * cost_before + 1e-30;
    double escalated = cfg.damping_floor * std::max(eq.hessian.trace(), 1e-30);
    int escalations = 0;
    while (cost_after > cost_before + tolerance && escalations < kMaxEscalations) {
      step = solve_step(eq, cfg, escalated);
      trial = left_update(step.delta, pose);
      cost_after = weighted_cost(corrs, w, trial);
      escalated *= 10.0;
      ++escalations;
    }

    result.iterations = it + 1;
    if (cost_after > cost_before + tolerance) {
      // No descent direction left for these correspondences.
      result.final_cost = cost_before;
      result.converged = true;
      break;
    }

    pose = trial;
    result.pose = pose;
    result.final_cost = cost_after;
    result.trace.push_back({cost_before, cost_after, step.delta.norm(), w, step.damping});
    if (step.delta.norm() < cfg.convergence_eps) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace elo
