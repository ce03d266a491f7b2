#include "dynslam/geometry/lie.hpp"

#include <algorithm>
#include <cmath>

namespace dynslam {

namespace {

constexpr double kSmallAngle = 1e-4;

Eigen::Quaterniond normalizedIfNeeded(const Eigen::Quaterniond& q) {
  const double n2 = q.squaredNorm();
  if (std::abs(n2 - 1.0) <= 1e-12) return q;
  return q.normalized();
}

// Barfoot's Q block coupling rotation and translation in the SE(3) left Jacobian.
Mat3 couplingBlock(const Vec3& rho, const Vec3& phi) {
  const Mat3 P = skew(phi);
  const Mat3 Rh = skew(rho);
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);

  double c1, c2, c3;
  if (theta < 1e-2) {
    c1 = 1.0 / 6.0 - theta2 / 120.0;
    c2 = 1.0 / 24.0 - theta2 / 720.0;
    c3 = 1.0 / 120.0 - theta2 / 2520.0;
  } else {
    const double s = std::sin(theta), c = std::cos(theta);
    const double theta4 = theta2 * theta2;
    c1 = (theta - s) / (theta2 * theta);
    c2 = (theta2 + 2.0 * c - 2.0) / (2.0 * theta4);
    c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * theta4 * theta);
  }
  const Mat3 PR = P * Rh;
  const Mat3 RP = Rh * P;
  const Mat3 PRP = PR * P;
  const Mat3 PPR = P * PR;
  const Mat3 RPP = RP * P;
  return 0.5 * Rh + c1 * (PR + RP + PRP) + c2 * (PPR + RPP - 3.0 * PRP) +
         c3 * (PRP * P + P * PRP);
}

Mat6 leftJacobianSE3(const Vec6& xi) {
  const Vec3 phi = xi.head<3>();
  const Vec3 rho = xi.tail<3>();
  const Mat3 J = so3::leftJacobian(phi);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = J;
  out.bottomRightCorner<3, 3>() = J;
  out.bottomLeftCorner<3, 3>() = couplingBlock(rho, phi);
  return out;
}

Mat6 leftJacobianInverseSE3(const Vec6& xi) {
  const Vec3 phi = xi.head<3>();
  const Vec3 rho = xi.tail<3>();
  const Mat3 Ji = so3::leftJacobianInverse(phi);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = Ji;
  out.bottomRightCorner<3, 3>() = Ji;
  out.bottomLeftCorner<3, 3>() = -Ji * couplingBlock(rho, phi) * Ji;
  return out;
}

}  // namespace

Pose::Pose(const Eigen::Quaterniond& q, const Vec3& t)
    : rotation_(normalizedIfNeeded(q)), translation_(t) {}

Pose::Pose(const Mat3& R, const Vec3& t) : rotation_(Eigen::Quaterniond(R).normalized()), translation_(t) {}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::operator*(const Pose& other) const {
  return {(rotation_ * other.rotation_).normalized(), rotation_ * other.translation_ + translation_};
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond qi = rotation_.conjugate();
  return {qi, -(qi * translation_)};
}

Pose Pose::retract(const Vec6& delta) const { return *this * dynslam::exp(Twist(delta)); }

bool Pose::isApprox(const Pose& other, double tol) const {
  return (rotation() - other.rotation()).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

namespace so3 {

Eigen::Quaterniond exp(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double w, k;
  if (theta < kSmallAngle) {
    w = 1.0 - theta2 / 8.0;
    k = 0.5 - theta2 / 48.0;
  } else {
    w = std::cos(0.5 * theta);
    k = std::sin(0.5 * theta) / theta;
  }
  return Eigen::Quaterniond(w, k * phi.x(), k * phi.y(), k * phi.z()).normalized();
}

Vec3 log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double vn = v.norm();
  const double w = q.w();
  if (vn < kSmallAngle) {
    // atan(vn/w)*2/vn series around 0
    const double r2 = (vn * vn) / (w * w);
    return (2.0 / w) * (1.0 - r2 / 3.0) * v;
  }
  const double theta = 2.0 * std::atan2(vn, w);
  if (w < 1e-12) {
    // angle within roundoff of pi: the axis sign is ambiguous, fix it by the dominant component
    Vec3 axis = v / vn;
    Eigen::Index idx;
    axis.cwiseAbs().maxCoeff(&idx);
    if (axis[idx] < 0.0) axis = -axis;
    return theta * axis;
  }
  return (theta / vn) * v;
}

Mat3 leftJacobian(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 P = skew(phi);
  double a, b;
  if (theta2 < 1e-8) {
    a = 0.5 - theta2 / 24.0;
    b = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = (1.0 - std::cos(theta)) / theta2;
    b = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + a * P + b * P * P;
}

Mat3 leftJacobianInverse(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 P = skew(phi);
  double b;
  if (theta2 < 1e-8) {
    b = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    b = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * P + b * P * P;
}

Mat3 rightJacobian(const Vec3& phi) { return leftJacobian(-phi); }
Mat3 rightJacobianInverse(const Vec3& phi) { return leftJacobianInverse(-phi); }

double angle(const Mat3& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  // acos loses precision near 0; use the skew part there.
  const double s = 0.5 * Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)).norm();
  return std::atan2(s, c);
}

}  // namespace so3

Pose exp(const Twist& xi) {
  const Eigen::Quaterniond q = so3::exp(xi.rotational);
  return {q, so3::leftJacobian(xi.rotational) * xi.translational};
}

Twist log(const Pose& p) {
  const Vec3 phi = so3::log(p.quaternion());
  return {phi, so3::leftJacobianInverse(phi) * p.translation()};
}

Mat6 adjoint(const Pose& T) {
  const Mat3 R = T.rotation();
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = R;
  ad.bottomRightCorner<3, 3>() = R;
  ad.bottomLeftCorner<3, 3>() = skew(T.translation()) * R;
  return ad;
}

Mat6 rightJacobian(const Vec6& xi) { return leftJacobianSE3(-xi); }
Mat6 rightJacobianInverse(const Vec6& xi) { return leftJacobianInverseSE3(-xi); }

}  // namespace dynslam
