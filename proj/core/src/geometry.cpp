#include "elo/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elo {

namespace {
constexpr double kSmallAngle = 1e-8;
}  // namespace

Eigen::Matrix4d Se3Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Se3Pose Se3Pose::from_matrix(const Eigen::Matrix4d& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Se3Pose exp_map(const Twist& xi) {
  const double theta = xi.omega.norm();
  const Mat3 w = skew(xi.omega);
  if (theta < kSmallAngle) {
    return {Mat3::Identity() + w, xi.v};
  }
  const double theta2 = theta * theta;
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / theta2;
  const double c = (theta - std::sin(theta)) / (theta2 * theta);
  const Mat3 w2 = w * w;
  const Mat3 r = Mat3::Identity() + a * w + b * w2;
  const Mat3 left_jacobian = Mat3::Identity() + b * w + c * w2;
  return {r, left_jacobian * xi.v};
}

Se3Pose compose(const Se3Pose& a, const Se3Pose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Se3Pose inverse(const Se3Pose& a) {
  const Mat3 rt = a.rotation.transpose();
  return {rt, -rt * a.translation};
}

Vec3 transform_point(const Se3Pose& pose, const Vec3& p) {
  return pose.rotation * p + pose.translation;
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) = -u.col(2);
  }
  return u * v.transpose();
}

Se3Pose left_update(const Twist& delta, const Se3Pose& pose) {
  Se3Pose out = compose(exp_map(delta), pose);
  out.rotation = orthonormalize(out.rotation);
  return out;
}

double rotation_angle(const Mat3& r) {
  // atan2 of sine and cosine stays accurate near zero, where acos of the trace does not.
  const Vec3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * s.norm(), 0.5 * (r.trace() - 1.0));
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace elo
