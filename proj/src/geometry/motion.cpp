#include "dynslam/geometry/motion.hpp"

namespace dynslam {

Pose refFrameMotion(const Pose& object_pose_prev, const Pose& body_motion) {
  return object_pose_prev * body_motion * object_pose_prev.inverse();
}

Pose bodyFrameMotion(const Pose& object_pose_prev, const Pose& ref_motion) {
  return object_pose_prev.inverse() * ref_motion * object_pose_prev;
}

VelocityEstimate linearVelocity(const Pose& ref_motion, const Vec3& centroid_prev,
                                double frame_interval_s) {
  VelocityEstimate out;
  out.centroid_used = centroid_prev;
  out.linear_velocity =
      ref_motion.translation() - (Mat3::Identity() - ref_motion.rotation()) * centroid_prev;
  out.speed = out.linear_velocity.norm() / frame_interval_s;
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  if (points.empty()) throw EmptyPointSetError();
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

}  // namespace dynslam
