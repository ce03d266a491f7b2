#include "dynslam/metrics/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dynslam/geometry/motion.hpp"

namespace dynslam {

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}

RelativePoseErrors relativePoseErrors(std::span<const Pose> est, std::span<const Pose> gt) {
  if (est.size() != gt.size()) throw std::invalid_argument("pose sequences differ in length");
  if (est.size() < 2) throw std::invalid_argument("need at least two poses for relative errors");

  RelativePoseErrors out;
  double trans_sum = 0.0, rot_sum = 0.0;
  double abs_trans = 0.0, abs_rot = 0.0;
  for (std::size_t k = 1; k < est.size(); ++k) {
    const Pose gt_rel = gt[k - 1].inverse() * gt[k];
    const Pose est_rel = est[k - 1].inverse() * est[k];
    const Pose E = gt_rel.inverse() * est_rel;
    const double te = E.translation().norm();
    const double re = so3::angle(E.rotation()) * kRadToDeg;
    abs_trans += te;
    abs_rot += re;
    const double d = gt_rel.translation().norm();
    if (d <= kMinGtMotion) continue;
    trans_sum += te / d;
    rot_sum += re / d;
    ++out.steps_used;
  }
  if (out.steps_used == 0) {
    const double n = static_cast<double>(est.size() - 1);
    out.absolute_fallback = true;
    out.rte_percent = abs_trans / n;
    out.rre_deg_per_m = abs_rot / n;
    return out;
  }
  out.rte_percent = 100.0 * trans_sum / out.steps_used;
  out.rre_deg_per_m = rot_sum / out.steps_used;
  return out;
}

double structureError(std::span<const StructurePair> pairs, const std::map<int, Pose>& est_poses,
                      const std::map<int, Pose>& gt_poses) {
  if (pairs.empty()) throw std::invalid_argument("structure error of an empty landmark set");
  double sum = 0.0;
  int n = 0;
  for (const auto& p : pairs) {
    const Vec3 rel_est = est_poses.at(p.frame).inverse().transformPoint(p.estimated);
    const Vec3 rel_gt = gt_poses.at(p.frame).inverse().transformPoint(p.ground_truth);
    const double range = rel_gt.norm();
    if (range <= kMinGtMotion) continue;
    sum += (rel_est - rel_gt).norm() / range;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("structure error: every landmark coincides with its camera");
  return 100.0 * sum / n;
}

ObjectMotionErrors objectMotionErrors(std::span<const MotionPair> pairs) {
  ObjectMotionErrors out;
  double trans_sum = 0.0, rot_sum = 0.0;
  for (const auto& p : pairs) {
    const double d = p.ground_truth.translation().norm();
    if (d <= kMinGtMotion) {
      ++out.skipped_steps;
      continue;
    }
    const Pose E = p.ground_truth.inverse() * p.estimated;
    trans_sum += E.translation().norm() / d;
    rot_sum += so3::angle(E.rotation()) * kRadToDeg / d;
    ++out.steps_used;
  }
  if (out.steps_used > 0) {
    out.omte_percent = 100.0 * trans_sum / out.steps_used;
    out.omre_deg_per_m = rot_sum / out.steps_used;
  }
  return out;
}

SpeedErrors speedError(std::span<const SpeedInput> steps, double frame_interval) {
  SpeedErrors out;
  double sum = 0.0;
  for (const auto& s : steps) {
    const double est = linearVelocity(s.estimated_motion, s.centroid_prev, frame_interval).speed;
    const double gt = (s.gt_object_curr.translation() - s.gt_object_prev.translation()).norm() / frame_interval;
    out.trace.push_back({s.frame, est, gt});
    if (gt <= kMinGtMotion) {
      ++out.skipped_steps;
      continue;
    }
    sum += std::abs(est - gt) / gt;
    ++out.steps_used;
  }
  if (out.steps_used > 0) out.omse_percent = 100.0 * sum / out.steps_used;
  return out;
}

MetricsReport evaluate(const Estimate& estimate, const Dataset& dataset) {
  const GroundTruth& gt = dataset.ground_truth;
  MetricsReport report;

  std::vector<Pose> est_poses, gt_poses;
  for (const auto& [k, x] : estimate.robot_poses) {
    const auto it = gt.robot_poses.find(k);
    if (it == gt.robot_poses.end()) throw MetricsError("no ground-truth pose for frame " + std::to_string(k));
    est_poses.push_back(x);
    gt_poses.push_back(it->second);
  }
  const RelativePoseErrors rpe = relativePoseErrors(est_poses, gt_poses);
  report.rte_percent = rpe.rte_percent;
  report.rre_deg_per_m = rpe.rre_deg_per_m;
  report.absolute_pose_errors = rpe.absolute_fallback;

  std::vector<StructurePair> pairs;
  for (const auto& frame : dataset.frames) {
    for (const auto& obs : frame.observations) {
      const auto g = gt.points.find({frame.index, obs.point_id});
      if (g == gt.points.end()) continue;
      if (obs.isStatic()) {
        const auto e = estimate.static_points.find(obs.point_id);
        if (e != estimate.static_points.end()) pairs.push_back({frame.index, e->second, g->second});
      } else {
        const auto e = estimate.dynamic_points.find({frame.index, obs.point_id});
        if (e != estimate.dynamic_points.end()) pairs.push_back({frame.index, e->second.position, g->second});
      }
    }
  }
  // a static-only estimate of a scene without static structure has no landmarks
  report.rse_percent =
      pairs.empty() ? std::numeric_limits<double>::quiet_NaN() : structureError(pairs, estimate.robot_poses, gt.robot_poses);

  // centroids of estimated dynamic structure per (object, frame): inliers, else all
  std::map<std::pair<int, int>, std::vector<Vec3>> inliers, all;
  for (const auto& [key, p] : estimate.dynamic_points) {
    all[{p.object_id, key.first}].push_back(p.position);
    if (p.inlier) inliers[{p.object_id, key.first}].push_back(p.position);
  }

  for (const auto& [object_id, motions] : estimate.motions) {
    std::vector<MotionPair> motion_pairs;
    std::vector<SpeedInput> speed_inputs;
    for (const auto& [k, H] : motions) {
      const auto prev = gt.object_poses.find(k - 1);
      const auto curr = gt.object_poses.find(k);
      if (prev == gt.object_poses.end() || curr == gt.object_poses.end() || !prev->second.count(object_id) ||
          !curr->second.count(object_id))
        throw MetricsError("no ground-truth pose for object " + std::to_string(object_id) + " around frame " +
                           std::to_string(k));
      const Pose& L_prev = prev->second.at(object_id);
      const Pose& L_curr = curr->second.at(object_id);
      motion_pairs.push_back({k, H, L_curr * L_prev.inverse()});

      const auto in = inliers.find({object_id, k - 1});
      const auto* pts = in != inliers.end() ? &in->second : nullptr;
      if (!pts) {
        const auto a = all.find({object_id, k - 1});
        if (a != all.end()) pts = &a->second;
      }
      if (pts) speed_inputs.push_back({k, H, centroid(*pts), L_prev, L_curr});
    }
    const ObjectMotionErrors ome = objectMotionErrors(motion_pairs);
    const SpeedErrors se = speedError(speed_inputs, dataset.frame_interval);
    report.objects.push_back(
        {object_id, ome.omte_percent, ome.omre_deg_per_m, se.omse_percent, ome.skipped_steps, se.trace});
  }
  return report;
}

}  // namespace dynslam
