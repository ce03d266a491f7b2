#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace dynslam {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Tangent-space coordinates of SE(3). Stacked as [rotational; translational]
/// wherever a 6-vector is used (residuals, Jacobian columns, solver steps).
struct Twist {
  Vec3 rotational = Vec3::Zero();
  Vec3 translational = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& rot, const Vec3& trans) : rotational(rot), translational(trans) {}
  explicit Twist(const Vec6& v) : rotational(v.head<3>()), translational(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << rotational, translational;
    return v;
  }
};

/// Rigid transform. Rotation is held as a unit quaternion.
class Pose {
 public:
  Pose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Vec3::Zero()) {}

  /// Normalizes q unless it is already unit length to within 1e-12, so that
  /// poses read back from text keep their exact quaternion bits.
  Pose(const Eigen::Quaterniond& q, const Vec3& t);
  Pose(const Mat3& R, const Vec3& t);

  static Pose identity() { return {}; }
  static Pose fromTranslation(const Vec3& t) { return {Eigen::Quaterniond::Identity(), t}; }
  static Pose fromRotation(const Eigen::Quaterniond& q) { return {q, Vec3::Zero()}; }
  static Pose fromMatrix(const Mat4& m) {
    return {Mat3(m.topLeftCorner<3, 3>()), Vec3(m.topRightCorner<3, 1>())};
  }

  const Eigen::Quaterniond& quaternion() const { return rotation_; }
  Mat3 rotation() const { return rotation_.toRotationMatrix(); }
  const Vec3& translation() const { return translation_; }
  Mat4 matrix() const;

  Pose operator*(const Pose& other) const;
  Pose inverse() const;
  Vec3 transformPoint(const Vec3& p) const { return rotation_ * p + translation_; }

  /// x * exp(delta)
  Pose retract(const Vec6& delta) const;

  bool isApprox(const Pose& other, double tol) const;

 private:
  Eigen::Quaterniond rotation_;
  Vec3 translation_;
};

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose inverse(const Pose& a) { return a.inverse(); }
inline Vec3 transformPoint(const Pose& a, const Vec3& p) { return a.transformPoint(p); }

Mat3 skew(const Vec3& v);

namespace so3 {
Eigen::Quaterniond exp(const Vec3& phi);
/// Principal-branch rotation vector, angle in [0, pi]. At pi (to roundoff) the
/// sign is chosen so the largest-magnitude axis component is positive.
Vec3 log(const Eigen::Quaterniond& q);
Mat3 rightJacobian(const Vec3& phi);
Mat3 rightJacobianInverse(const Vec3& phi);
Mat3 leftJacobian(const Vec3& phi);
Mat3 leftJacobianInverse(const Vec3& phi);
double angle(const Mat3& R);
}  // namespace so3

Pose exp(const Twist& xi);
Twist log(const Pose& p);

inline Pose exp(const Vec6& xi) { return exp(Twist(xi)); }

/// Adjoint of T in [rot; trans] ordering: exp(Ad_T xi) = T exp(xi) T^-1.
Mat6 adjoint(const Pose& T);

/// Right Jacobian of SE(3) and its inverse, [rot; trans] ordering.
Mat6 rightJacobian(const Vec6& xi);
Mat6 rightJacobianInverse(const Vec6& xi);

}  // namespace dynslam
