#pragma once

#include <vector>

#include "dynslam/data/estimate.hpp"
#include "dynslam/factors/graph.hpp"
#include "dynslam/solver/solver.hpp"

namespace dynslam {

struct EstimatorConfig {
  EstimationMode mode = EstimationMode::Dynamic;
  MotionMode motion_mode = MotionMode::Constant;
  GraphNoiseConfig noise;
  SolverConfig solver;
};

struct EstimationResult {
  Estimate estimate;
  std::vector<SolveReport> stages;  // one per solve; the decoupled baseline has two

  /// A stage hit a singular system or a non-finite cost.
  bool failed() const;
};

/// Reads an Estimate off a solved graph. A dynamic point is flagged inlier
/// when its point-measurement and motion residuals all lie within the Huber knee.
Estimate extractEstimate(const FactorGraph& graph, const Dataset& dataset, EstimationMode mode,
                         MotionMode motion_mode, const SolverConfig& solver);

/// Builds and solves the graph(s) for one mode.
///  - Dynamic / StaticOnly: a single joint solve.
///  - SlamMot: static SLAM over odometry and static points, then per-object
///    motions fitted to dynamic points back-projected through the frozen poses.
EstimationResult runEstimator(const Dataset& dataset, const EstimatorConfig& config);

}  // namespace dynslam
