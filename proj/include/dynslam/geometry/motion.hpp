#pragma once

#include <span>
#include <stdexcept>

#include "dynslam/geometry/lie.hpp"

namespace dynslam {

/// Linear velocity of a rigid body recovered from its reference-frame pose
/// change. `linear_velocity` is in meters per frame.
struct VelocityEstimate {
  Vec3 linear_velocity = Vec3::Zero();
  double speed = 0.0;  // m/s
  Vec3 centroid_used = Vec3::Zero();
};

class EmptyPointSetError : public std::invalid_argument {
 public:
  EmptyPointSetError() : std::invalid_argument("centroid of an empty point set (no features on object)") {}
};

/// Conjugates a body-fixed pose change into the reference frame:
/// L_prev * H_body * L_prev^-1.
Pose refFrameMotion(const Pose& object_pose_prev, const Pose& body_motion);

/// Inverse of refFrameMotion: L_prev^-1 * H_ref * L_prev.
Pose bodyFrameMotion(const Pose& object_pose_prev, const Pose& ref_motion);

/// Moves a reference-frame point on a rigid body from k-1 to k.
inline Vec3 applyMotion(const Pose& ref_motion, const Vec3& point_prev) {
  return ref_motion.transformPoint(point_prev);
}

/// v = t - (I - R) c, where c approximates the object origin at k-1.
VelocityEstimate linearVelocity(const Pose& ref_motion, const Vec3& centroid_prev,
                                double frame_interval_s = 0.1);

/// Arithmetic mean. Throws EmptyPointSetError on an empty span.
Vec3 centroid(std::span<const Vec3> points);

}  // namespace dynslam
