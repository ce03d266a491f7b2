#pragma once

#include <cstdint>
#include <vector>

#include "dynslam/data/dataset.hpp"
#include "dynslam/geometry/lie.hpp"

namespace dynslam {

struct ObjectConfig {
  Pose initial_pose;
  Pose body_motion;  // constant body-fixed pose change per step
  int n_points = 30;
  Vec3 extent{2.0, 1.0, 0.8};  // ellipsoid semi-axes, m
};

struct SceneConfig {
  int n_steps = 60;
  double robot_circle_radius = 10.0;
  double frame_interval = 0.1;
  std::vector<ObjectConfig> objects;
  int n_static_points = 0;
  double sensing_range = 30.0;
  std::uint64_t rng_seed = 1;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// An object driving alongside the robot: tangent heading on a circle of
/// radius `radius` about `center`, advancing the robot's angle per step.
/// A center away from the origin gives the reference-frame motion a nonzero
/// translation; about the origin it is a pure rotation.
ObjectConfig alongsideObject(const SceneConfig& scene, double radius, double start_angle = 0.0,
                             const Vec3& center = Vec3::Zero());

/// Alongside object covering 1 m per step on a circle centered at (10, 0, 0).
ObjectConfig defaultObject(const SceneConfig& scene);

/// Single-ellipsoid circular scene with no static structure.
SceneConfig defaultScene();

struct NoiseConfig {
  double point_sigma = 0.02;
  double odom_trans_frac = 0.05;
  double odom_rot_frac = 0.10;
  std::uint64_t rng_seed = 7;

  void validate() const;
};

inline constexpr double kOdometryMagnitudeFloor = 1e-4;

struct SceneObject {
  int object_id = 1;
  std::vector<Pose> poses;       // L_k per frame
  std::vector<int> point_ids;
  std::vector<Vec3> body_points;  // fixed coordinates in the object frame
};

struct SceneGroundTruth {
  double frame_interval = 0.1;
  double sensing_range = 30.0;
  std::vector<Pose> robot_poses;  // x_0 .. x_{n_steps}
  std::vector<int> static_ids;
  std::vector<Vec3> static_points;
  std::vector<SceneObject> objects;

  int numFrames() const { return static_cast<int>(robot_poses.size()); }
  /// Reference-frame GT position of every point at frame k, ordered by point id.
  std::vector<std::pair<int, Vec3>> pointsAt(int k) const;
  int objectOf(int point_id) const;
};

/// Deterministic Fibonacci-sphere samples scaled by the semi-axes, in antipodal
/// pairs (an even count has its centroid exactly at the origin).
std::vector<Vec3> ellipsoidSurfacePoints(int n, const Vec3& semi_axes);

SceneGroundTruth generateScene(const SceneConfig& cfg);

/// Synthesizes noisy odometry and point observations. Point ids: static
/// points first, then each object's points in order.
Dataset observe(const SceneGroundTruth& gt, const NoiseConfig& noise);

}  // namespace dynslam
