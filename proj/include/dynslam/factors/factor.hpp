#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dynslam/geometry/lie.hpp"

namespace dynslam {

enum class VariableKind : std::uint8_t { RobotPose, Landmark, Motion };

/// Identifies a variable. Static landmarks use the frame of their first
/// observation; dynamic landmarks get one key per observed frame; per-step
/// motions use the target frame k of the k-1 -> k transition and constant
/// motions use frame 0.
struct VariableKey {
  VariableKind kind = VariableKind::RobotPose;
  int frame = 0;
  int id = 0;

  static VariableKey pose(int k) { return {VariableKind::RobotPose, k, 0}; }
  static VariableKey landmark(int k, int point_id) { return {VariableKind::Landmark, k, point_id}; }
  static VariableKey motion(int k, int object_id) { return {VariableKind::Motion, k, object_id}; }

  auto operator<=>(const VariableKey&) const = default;
  std::string str() const;
};

using VariableValue = std::variant<Pose, Vec3>;

inline int tangentDim(const VariableValue& v) { return std::holds_alternative<Pose>(v) ? 6 : 3; }

/// Gaussian noise with an optional Huber knee on the whitened residual norm.
class NoiseModel {
 public:
  /// Throws std::invalid_argument unless covariance is symmetric positive definite.
  explicit NoiseModel(const Eigen::MatrixXd& covariance, std::optional<double> robust_delta = std::nullopt);

  static NoiseModel isotropic(int dim, double sigma, std::optional<double> robust_delta = std::nullopt);
  static NoiseModel diagonal(const Eigen::VectorXd& sigmas, std::optional<double> robust_delta = std::nullopt);

  int dim() const { return static_cast<int>(covariance_.rows()); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// W with W^T W = covariance^-1
  const Eigen::MatrixXd& whitener() const { return whitener_; }
  const std::optional<double>& robustDelta() const { return robust_delta_; }

  Eigen::VectorXd whiten(const Eigen::VectorXd& r) const { return whitener_ * r; }

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd whitener_;
  std::optional<double> robust_delta_;
};

enum class FactorKind : std::uint8_t { PriorPose, Odometry, PointMeasurement, Motion, MotionSmoothness };

inline constexpr int kNumFactorKinds = 5;
const char* toString(FactorKind kind);
int expectedArity(FactorKind kind);
int residualDim(FactorKind kind);

using Measurement = std::variant<std::monostate, Pose, Vec3>;

/// Key order per kind:
///   PriorPose        {x}
///   Odometry         {x_{k-1}, x_k}
///   PointMeasurement {x_k, l}
///   Motion           {l_{k-1}, l_k, H}
///   MotionSmoothness {H_a, H_b}
struct Factor {
  FactorKind kind;
  std::vector<VariableKey> keys;
  Measurement measurement;
  NoiseModel noise;
};

// Residuals. Pose residuals are in [rot; trans] tangent coordinates.

/// log(prior^-1 x)
Vec6 residualPrior(const Pose& x, const Pose& prior);
/// log(o^-1 (x_prev^-1 x_curr))
Vec6 residualOdometry(const Pose& x_prev, const Pose& x_curr, const Pose& measured);
/// x^-1 l - z
Vec3 residualPoint(const Pose& x, const Vec3& landmark, const Vec3& measured);
/// l_curr - (R l_prev + t)
Vec3 residualMotion(const Vec3& landmark_prev, const Vec3& landmark_curr, const Pose& motion);
/// log(H_a^-1 H_b)
Vec6 residualSmoothness(const Pose& motion_a, const Pose& motion_b);

struct FactorLinearization {
  Eigen::VectorXd residual;
  std::vector<Eigen::MatrixXd> jacobians;  // one per key, unwhitened
};

/// Residual of `factor` at the given values (one per key, in key order).
Eigen::VectorXd evaluateResidual(const Factor& factor, const std::vector<const VariableValue*>& values);

/// Residual plus analytic Jacobians. Pose variables are differentiated with
/// respect to a right perturbation x <- x * exp(delta).
FactorLinearization linearizeFactor(const Factor& factor, const std::vector<const VariableValue*>& values);

}  // namespace dynslam
