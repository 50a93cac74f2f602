#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "elo/model.hpp"

namespace elo {

enum class CostMode {
  kFusion,         // non-ground range image + ground BEV
  kSphericalOnly,  // all points in the range image, no BEV term
  kBevOnly,        // ground BEV term alone
};

struct RegistrationConfig {
  /// User weight balancing the non-ground and ground terms.
  double w1 = 0.7;
  int max_iterations = 30;
  /// Stop once the norm of the twist update falls below this.
  double convergence_eps = 1e-5;
  /// Eigen-directions of the normal equations whose eigenvalue, relative to the largest,
  /// is below this are damped.
  double condition_threshold = 1e-9;
  /// Damping added along those directions, relative to the largest eigenvalue.
  double damping_floor = 1e-6;
  /// Point-to-plane gate for accepted correspondences.
  double sigma_z = 0.5;
  int ground_patch_half_width = 5;
  int ground_neighbors = 5;
  CostMode cost_mode = CostMode::kFusion;

  void validate() const;
};

enum class Domain { kNonGround, kGround };

struct Correspondence {
  Vec3 source = Vec3::Zero();        // scan vertex, scan frame
  Vec3 warped = Vec3::Zero();        // T * source, model frame
  Vec3 model_vertex = Vec3::Zero();  // v_u or v_g
  Vec3 normal = Vec3::UnitZ();       // model normal n_u or online ground normal n_g
  double residual = 0.0;             // n . (T * source - model_vertex)
  Domain domain = Domain::kNonGround;
};

struct Association {
  std::vector<Correspondence> correspondences;
  std::size_t attempted = 0;
  double inlier_ratio() const {
    return attempted == 0 ? 0.0 : static_cast<double>(correspondences.size()) / attempted;
  }
};

/// Pose increment under the constant-acceleration model, from the most recent poses
/// (oldest first). Fewer than three poses fall back to constant velocity, fewer than
/// two to identity.
Se3Pose predict_initial(std::span<const Se3Pose> history);

Association associate_nonground(const RangeImage& scan, const RangeImage& model_vertices,
                                const NormalMap& model_normals, const Se3Pose& scan_to_model,
                                double sigma_z);

/// Plane through the k model vertices nearest to the vertex in cell (u, v), searched
/// within a square patch of the given half width. nullopt when the cell is empty, fewer
/// than k vertices are found, or the fit is degenerate. The normal points up (+z).
std::optional<PlaneFit> ground_normal(const BevMap& model, int u, int v, int half_width, int k);

/// Lazily evaluated ground normals of one model, shared by all iterations.
class GroundNormalCache {
 public:
  GroundNormalCache(const BevMap& model, int half_width, int k);
  const std::optional<PlaneFit>& at(int u, int v);

 private:
  const BevMap& model_;
  int half_width_;
  int k_;
  std::vector<std::uint8_t> state_;
  std::vector<std::optional<PlaneFit>> fits_;
};

Association associate_ground(const BevMap& scan, const BevMap& model, const Se3Pose& scan_to_model,
                             double sigma_z, int half_width = 5, int k = 5);
Association associate_ground(const BevMap& scan, GroundNormalCache& normals, const BevMap& model,
                             const Se3Pose& scan_to_model, double sigma_z);

/// Fusion weight w = clamp(w1 * w2, 0, 1) with w2 = rho_s / (rho_s + rho_g).
double adaptive_weight(std::size_t nonground_inliers, std::size_t nonground_total,
                       std::size_t ground_inliers, std::size_t ground_total, double w1);

/// 1x6 Jacobian row of the point-to-plane residual under a left perturbation
/// exp(xi) * T, with xi = (v, omega).
Eigen::Matrix<double, 1, 6> jacobian_row(const Vec3& normal, const Vec3& warped);

struct NormalEquations {
  Mat6 hessian = Mat6::Zero();
  Vec6 gradient = Vec6::Zero();
};

/// H = sum c J^T J, b = sum c J^T r, with c = w for non-ground and 1 - w for ground rows.
NormalEquations accumulate(std::span<const Correspondence> corrs, double w);

struct StepResult {
  Twist delta;
  double damping = 0.0;
  bool singular = false;
};

StepResult solve_step(const NormalEquations& eq, const RegistrationConfig& cfg,
                      double min_damping = 0.0);
StepResult gauss_newton_step(std::span<const Correspondence> corrs, double w,
                             const RegistrationConfig& cfg);

/// Weighted cost w * E_S + (1 - w) * E_G of fixed correspondences at `scan_to_model`.
double weighted_cost(std::span<const Correspondence> corrs, double w, const Se3Pose& scan_to_model);

struct IterationTrace {
  double cost_before = 0.0;
  double cost_after = 0.0;
  double step_norm = 0.0;
  double weight = 0.0;
  double damping = 0.0;
};

struct RegistrationResult {
  Se3Pose pose;  // T^{t-1}_t
  int iterations = 0;
  double final_cost = 0.0;
  std::size_t nonground_inliers = 0;
  std::size_t ground_inliers = 0;
  bool converged = false;
  std::vector<IterationTrace> trace;
};

/// Gauss-Newton over re-associated correspondences, T <- exp(dT) * T.
RegistrationResult register_scan(const ScanFrame& scan, const ModelState& model,
                                 const Se3Pose& initial, const RegistrationConfig& cfg);

}  // namespace elo
