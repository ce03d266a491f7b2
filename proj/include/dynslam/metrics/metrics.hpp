#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynslam/data/dataset.hpp"
#include "dynslam/data/estimate.hpp"

namespace dynslam {

/// GT steps (or structure ranges) shorter than this are excluded from the
/// percentage and per-meter metrics.
inline constexpr double kMinGtMotion = 1e-6;

struct RelativePoseErrors {
  double rte_percent = 0.0;
  double rre_deg_per_m = 0.0;
  /// Set when every GT step is stationary: rte_percent then holds mean
  /// translational error in meters and rre_deg_per_m mean rotation error in degrees.
  bool absolute_fallback = false;
  int steps_used = 0;
};

/// Per step E = (gt_{k-1}^-1 gt_k)^-1 (est_{k-1}^-1 est_k);
/// RTE = mean ||t_E|| / ||t_gt,rel|| * 100, RRE = mean angle(R_E) [deg] / ||t_gt,rel|| [m].
RelativePoseErrors relativePoseErrors(std::span<const Pose> est, std::span<const Pose> gt);

/// A landmark observed at `frame`, in reference-frame coordinates.
struct StructurePair {
  int frame = 0;
  Vec3 estimated = Vec3::Zero();
  Vec3 ground_truth = Vec3::Zero();
};

/// Mean of ||est_x^-1 p_est - gt_x^-1 p_gt|| / ||gt_x^-1 p_gt|| * 100 over pairs.
/// Throws std::invalid_argument for an empty pair set.
double structureError(std::span<const StructurePair> pairs, const std::map<int, Pose>& est_poses,
                      const std::map<int, Pose>& gt_poses);

struct MotionPair {
  int frame = 0;  // target frame k of the k-1 -> k change
  Pose estimated;
  Pose ground_truth;
};

struct ObjectMotionErrors {
  double omte_percent = 0.0;
  double omre_deg_per_m = 0.0;
  int steps_used = 0;
  int skipped_steps = 0;  // zero GT motion
};

/// Per step E = gt_H^-1 est_H; OMTE = mean ||t_E|| / ||t_gt_H|| * 100,
/// OMRE = mean angle(R_E) [deg] / ||t_gt_H|| [m].
ObjectMotionErrors objectMotionErrors(std::span<const MotionPair> pairs);

struct SpeedSample {
  int frame = 0;
  double estimated_mps = 0.0;
  double ground_truth_mps = 0.0;
};

struct SpeedInput {
  int frame = 0;          // k
  Pose estimated_motion;  // H_ref k-1 -> k
  Vec3 centroid_prev;     // estimated structure centroid at k-1
  Pose gt_object_prev;    // L_{k-1}
  Pose gt_object_curr;    // L_k
};

struct SpeedErrors {
  double omse_percent = 0.0;
  int steps_used = 0;
  int skipped_steps = 0;
  std::vector<SpeedSample> trace;
};

/// Estimated speed from the linear velocity of H at the centroid; GT speed from
/// the object-origin displacement. OMSE = mean |est - gt| / gt * 100.
SpeedErrors speedError(std::span<const SpeedInput> steps, double frame_interval);

struct ObjectMetrics {
  int object_id = 0;
  double omte_percent = 0.0;
  double omre_deg_per_m = 0.0;
  double omse_percent = 0.0;
  int skipped_steps = 0;
  std::vector<SpeedSample> speed_trace;
};

struct MetricsReport {
  double rte_percent = 0.0;
  double rre_deg_per_m = 0.0;
  double rse_percent = 0.0;  // NaN when the estimate has no landmarks
  bool absolute_pose_errors = false;
  std::vector<ObjectMetrics> objects;  // empty when no motion is estimated
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compares an estimate to the dataset's ground truth. Throws MetricsError
/// when the dataset lacks the ground truth a metric needs.
MetricsReport evaluate(const Estimate& estimate, const Dataset& dataset);

}  // namespace dynslam
