#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "dynslam/geometry/lie.hpp"

namespace dynslam {

inline constexpr int kStaticObjectId = 0;

/// One observation of a physical 3D point in the observing camera frame.
struct TrackedPoint {
  int frame = 0;
  int point_id = 0;
  int object_id = kStaticObjectId;  // 0 = static, > 0 = object index
  Vec3 position = Vec3::Zero();

  bool isStatic() const { return object_id == kStaticObjectId; }
};

struct Frame {
  int index = 0;
  std::optional<Pose> odometry;  // measured relative pose index-1 -> index
  std::vector<TrackedPoint> observations;
};

struct GroundTruth {
  std::map<int, Pose> robot_poses;                   // frame -> x_k
  std::map<int, std::map<int, Pose>> object_poses;   // frame -> object id -> L_k
  std::map<std::pair<int, int>, Vec3> points;        // (frame, point id) -> reference-frame position

  bool empty() const { return robot_poses.empty() && object_poses.empty() && points.empty(); }
};

struct Dataset {
  double frame_interval = 0.1;
  std::vector<Frame> frames;
  GroundTruth ground_truth;

  /// object id per point id, over all observations
  std::map<int, int> pointObjects() const;
};

}  // namespace dynslam
