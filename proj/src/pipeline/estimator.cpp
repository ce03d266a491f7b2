#include "dynslam/pipeline/estimator.hpp"

#include <cmath>

namespace dynslam {

bool EstimationResult::failed() const {
  for (const auto& s : stages)
    if (s.linear_solve_failed || !std::isfinite(s.final_cost)) return true;
  return false;
}

Estimate extractEstimate(const FactorGraph& graph, const Dataset& dataset, EstimationMode mode,
                         MotionMode motion_mode, const SolverConfig& solver) {
  Estimate est;
  est.mode = mode;
  est.motion_mode = motion_mode;
  const auto objects = dataset.pointObjects();

  for (const auto& v : graph.variables()) {
    switch (v.key.kind) {
      case VariableKind::RobotPose:
        est.robot_poses[v.key.frame] = std::get<Pose>(v.value);
        break;
      case VariableKind::Landmark: {
        const int object_id = objects.at(v.key.id);
        if (object_id == kStaticObjectId)
          est.static_points[v.key.id] = std::get<Vec3>(v.value);
        else
          est.dynamic_points[{v.key.frame, v.key.id}] = {object_id, std::get<Vec3>(v.value), true};
        break;
      }
      case VariableKind::Motion: break;
    }
  }

  for (std::size_t i = 0; i < graph.factors().size(); ++i) {
    const Factor& f = graph.factors()[i];
    if (f.kind != FactorKind::Motion && f.kind != FactorKind::PointMeasurement) continue;
    if (f.kind == FactorKind::Motion) est.motions[f.keys[2].id][f.keys[1].frame] = graph.pose(f.keys[2]);

    // a dynamic landmark is an outlier if its measurement or either motion link is
    const double r = f.noise.whiten(evaluateResidual(f, graph.factorValues(i))).norm();
    if (r <= effectiveHuberDelta(f, solver)) continue;
    for (const VariableKey& key : f.keys) {
      if (key.kind != VariableKind::Landmark) continue;
      const auto it = est.dynamic_points.find({key.frame, key.id});
      if (it != est.dynamic_points.end()) it->second.inlier = false;
    }
  }
  return est;
}

EstimationResult runEstimator(const Dataset& dataset, const EstimatorConfig& config) {
  EstimationResult result;
  if (config.mode != EstimationMode::SlamMot) {
    FactorGraph graph = buildGraph(dataset, config.mode, config.motion_mode, config.noise);
    result.stages.push_back(optimize(graph, config.solver));
    result.estimate = extractEstimate(graph, dataset, config.mode, config.motion_mode, config.solver);
    return result;
  }

  FactorGraph slam = buildGraph(dataset, EstimationMode::SlamMot, config.motion_mode, config.noise);
  result.stages.push_back(optimize(slam, config.solver));
  Estimate est = extractEstimate(slam, dataset, EstimationMode::SlamMot, config.motion_mode, config.solver);

  FactorGraph tracking = buildMotionOnlyGraph(dataset, est.robot_poses, config.motion_mode, config.noise);
  result.stages.push_back(optimize(tracking, config.solver));
  const Estimate motions =
      extractEstimate(tracking, dataset, EstimationMode::SlamMot, config.motion_mode, config.solver);
  est.dynamic_points = motions.dynamic_points;
  est.motions = motions.motions;
  result.estimate = std::move(est);
  return result;
}

}  // namespace dynslam
