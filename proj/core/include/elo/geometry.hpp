#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace elo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// se(3) element ordered (v, omega): translational part first, then rotational.
struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& v_in, const Vec3& omega_in) : v(v_in), omega(omega_in) {}
  static Twist from_vector(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }

  Vec6 vector() const {
    Vec6 x;
    x << v, omega;
    return x;
  }
  double norm() const { return vector().norm(); }
  Twist operator-() const { return {-v, -omega}; }
};

/// Rigid transform p -> R p + t.
struct Se3Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Se3Pose() = default;
  Se3Pose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}

  static Se3Pose identity() { return {}; }

  Eigen::Matrix4d matrix() const;
  static Se3Pose from_matrix(const Eigen::Matrix4d& m);
};

Mat3 skew(const Vec3& v);

Se3Pose exp_map(const Twist& xi);

Se3Pose compose(const Se3Pose& a, const Se3Pose& b);
Se3Pose inverse(const Se3Pose& a);
Vec3 transform_point(const Se3Pose& pose, const Vec3& p);

inline Se3Pose operator*(const Se3Pose& a, const Se3Pose& b) { return compose(a, b); }
inline Vec3 operator*(const Se3Pose& a, const Vec3& p) { return transform_point(a, p); }

/// Nearest rotation matrix in the Frobenius sense (polar decomposition via SVD).
Mat3 orthonormalize(const Mat3& r);

/// T <- exp(delta) * T, followed by re-orthonormalization of the rotation.
Se3Pose left_update(const Twist& delta, const Se3Pose& pose);

/// Geodesic rotation angle in radians, in [0, pi].
double rotation_angle(const Mat3& r);

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace elo
