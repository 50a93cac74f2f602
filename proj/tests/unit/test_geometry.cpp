#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "elo/geometry.hpp"
#include "oracles.hpp"

using namespace elo;

namespace {

void expect_near(const Mat3& a, const Mat3& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "\n" << a << "\nvs\n" << b;
}

void expect_identity(const Se3Pose& p, double tol) {
  expect_near(p.rotation, Mat3::Identity(), tol);
  EXPECT_LE(p.translation.cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(Skew, ZeroVector) { EXPECT_EQ(skew(Vec3::Zero()), Mat3::Zero()); }

TEST(Skew, UnitZ) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(skew(Vec3::UnitZ()), expected);
}

TEST(Skew, MatchesCrossProduct) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-10, 10);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v(d(rng), d(rng), d(rng));
    const Vec3 w(d(rng), d(rng), d(rng));
    const Vec3 cross(v.y() * w.z() - v.z() * w.y(), v.z() * w.x() - v.x() * w.z(),
                     v.x() * w.y() - v.y() * w.x());
    const Mat3 s = skew(v);
    EXPECT_LE((s * w - cross).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(s, -s.transpose());
  }
}

TEST(ExpMap, ZeroTwistIsIdentity) { expect_identity(exp_map(Twist()), 0.0); }

TEST(ExpMap, QuarterTurnAboutZ) {
  const Se3Pose p = exp_map({Vec3::Zero(), Vec3(0, 0, std::numbers::pi / 2)});
  // Rodrigues with unit axis k: I + sin(a) K + (1 - cos(a)) K^2.
  const Mat3 k = (Mat3() << 0, -1, 0, 1, 0, 0, 0, 0, 0).finished();
  const Mat3 expected = Mat3::Identity() + std::sin(std::numbers::pi / 2) * k +
                        (1 - std::cos(std::numbers::pi / 2)) * k * k;
  expect_near(p.rotation, expected, 1e-12);
  EXPECT_LE(p.translation.norm(), 1e-15);
}

TEST(ExpMap, PureTranslation) {
  const Se3Pose p = exp_map({Vec3(1, 2, 3), Vec3::Zero()});
  EXPECT_EQ(p.rotation, Mat3::Identity());
  EXPECT_EQ(p.translation, Vec3(1, 2, 3));
}

TEST(ExpMap, SmallAngleUsesSeriesLimit) {
  const Vec3 w(3e-9, -2e-9, 1e-9);
  const Se3Pose p = exp_map({Vec3(0.5, 0, 0), w});
  expect_near(p.rotation, Mat3::Identity() + skew(w), 1e-18);
  EXPECT_EQ(p.translation, Vec3(0.5, 0, 0));
}

TEST(ExpMap, AgreesWithSeriesExponential) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const Twist xi(Vec3(d(rng), d(rng), d(rng)), Vec3(d(rng), d(rng), d(rng)));
    const Eigen::Matrix4d ref = oracle::expm_series(xi);
    EXPECT_LE((exp_map(xi).matrix() - ref).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ExpMap, LogOracleRecoversTwist) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis = oracle::random_unit(rng);
    const double angle = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    const Twist xi(Vec3(d(rng), d(rng), d(rng)), angle * axis);
    const Twist back = oracle::log_oracle(exp_map(xi));
    EXPECT_LE((back.vector() - xi.vector()).cwiseAbs().maxCoeff(), 1e-6) << "angle " << angle;
  }
}

TEST(Compose, InverseGivesIdentity) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Se3Pose t = oracle::random_pose(rng, std::numbers::pi, 50);
    expect_identity(compose(t, inverse(t)), 1e-9);
    expect_identity(compose(inverse(t), t), 1e-9);
  }
}

TEST(Compose, ExpOfNegatedTwistIsInverse) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int i = 0; i < 100; ++i) {
    const Twist xi(Vec3(d(rng), d(rng), d(rng)), Vec3(d(rng), d(rng), d(rng)));
    expect_identity(compose(exp_map(xi), exp_map(-xi)), 1e-9);
  }
}

TEST(Compose, Associative) {
  std::mt19937_64 rng(13);
  const Se3Pose a = oracle::random_pose(rng, 2, 10);
  const Se3Pose b = oracle::random_pose(rng, 2, 10);
  const Se3Pose c = oracle::random_pose(rng, 2, 10);
  const Eigen::Matrix4d lhs = ((a * b) * c).matrix();
  const Eigen::Matrix4d rhs = (a * (b * c)).matrix();
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(((a * b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TransformPoint, IdentityAndAffine) {
  const Vec3 p(1.5, -2, 7);
  EXPECT_EQ(transform_point(Se3Pose::identity(), p), p);
  std::mt19937_64 rng(17);
  const Se3Pose t = oracle::random_pose(rng, 2, 10);
  EXPECT_LE((transform_point(t, p) - (t.rotation * p + t.translation)).norm(), 1e-15);
}

TEST(LeftUpdate, InvariantsSurviveManyCompositions) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  Se3Pose pose;
  for (int i = 0; i < 10000; ++i) {
    pose = left_update({Vec3(d(rng), d(rng), d(rng)), Vec3(d(rng), d(rng), d(rng))}, pose);
  }
  const Mat3& r = pose.rotation;
  expect_near(r.transpose() * r, Mat3::Identity(), 1e-9);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
}

TEST(Orthonormalize, ProjectsPerturbedRotation) {
  std::mt19937_64 rng(23);
  const Se3Pose t = oracle::random_pose(rng, 2, 1);
  Mat3 noisy = t.rotation;
  noisy(0, 1) += 1e-4;
  noisy(2, 2) -= 2e-4;
  const Mat3 r = orthonormalize(noisy);
  expect_near(r.transpose() * r, Mat3::Identity(), 1e-12);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  EXPECT_LE((r - t.rotation).norm(), 3e-4);
}

TEST(RotationAngle, MatchesAxisAngle) {
  EXPECT_DOUBLE_EQ(rotation_angle(Mat3::Identity()), 0.0);
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  EXPECT_NEAR(rotation_angle(r), 0.7, 1e-12);
  const Mat3 half = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY()).toRotationMatrix();
  EXPECT_NEAR(rotation_angle(half), std::numbers::pi, 1e-7);
}
