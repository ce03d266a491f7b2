#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynslam/factors/graph.hpp"
#include "dynslam/simulator/simulator.hpp"
#include "dynslam/solver/solver.hpp"

namespace dynslam {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  SceneConfig scene = defaultScene();
  NoiseConfig noise;
  std::vector<EstimationMode> modes{EstimationMode::Dynamic, EstimationMode::SlamMot};
  MotionMode motion_mode = MotionMode::Constant;
  SolverConfig solver;
  /// Factor covariances. Point and odometry terms follow `noise` (see
  /// graphNoise); the motion and smoothness terms are set here.
  GraphNoiseConfig graph;
  int monte_carlo_runs = 20;
  std::filesystem::path output_dir = "bench_out";

  void validate() const;

  /// Graph noise matching the simulated noise, floored so that a noise-free
  /// simulation still yields positive-definite covariances.
  GraphNoiseConfig graphNoise() const;
};

/// Key-value text, one `key = value` per line, `#` starts a comment.
///
///   scene.n_steps, scene.robot_circle_radius, scene.frame_interval,
///   scene.n_static_points, scene.sensing_range, scene.rng_seed
///   scene.object.<j>.initial_pose = tx ty tz qx qy qz qw
///   scene.object.<j>.body_motion  = tx ty tz qx qy qz qw
///   scene.object.<j>.alongside_radius = r    (sets both poses, see alongsideObject)
///   scene.object.<j>.alongside_angle = a, scene.object.<j>.alongside_center = x y z
///   scene.object.<j>.n_points, scene.object.<j>.extent = a b c
///   noise.point_sigma, noise.odom_trans_frac, noise.odom_rot_frac, noise.rng_seed
///   modes = dynamic slam-mot static ; motion_mode = per-step|smoothed|constant
///   solver.max_iterations, solver.relative_decrease_tol, solver.absolute_cost_tol, solver.gradient_norm_tol,
///   solver.initial_lambda, solver.huber_delta (all classes) or
///   solver.huber_delta.<prior|odometry|point|motion|smoothness>
///   graph.motion_sigma, graph.smooth_rot_sigma, graph.smooth_trans_sigma, graph.prior_sigma
///   monte_carlo_runs, output_dir
///
/// Any scene.object.* key replaces the default object list. Unknown keys are errors.
ExperimentConfig parseExperimentConfig(std::istream& is);
ExperimentConfig loadExperimentConfig(const std::filesystem::path& path);

}  // namespace dynslam
