#pragma once

#include <map>
#include <utility>

#include "dynslam/factors/graph.hpp"

namespace dynslam {

struct DynamicPointEstimate {
  int object_id = 1;
  Vec3 position = Vec3::Zero();
  bool inlier = true;  // point and motion residuals within the Huber knee
};

/// Solution of one estimation run, keyed by dataset ids.
struct Estimate {
  EstimationMode mode = EstimationMode::Dynamic;
  MotionMode motion_mode = MotionMode::Constant;
  std::map<int, Pose> robot_poses;                                  // frame -> x_k
  std::map<int, Vec3> static_points;                                // point id -> position
  std::map<std::pair<int, int>, DynamicPointEstimate> dynamic_points;  // (frame, point id)
  /// object id -> k -> reference-frame pose change from k-1 to k. A constant
  /// motion estimate is broadcast over every step it constrains.
  std::map<int, std::map<int, Pose>> motions;
};

}  // namespace dynslam
