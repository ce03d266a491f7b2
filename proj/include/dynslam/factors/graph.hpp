#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dynslam/data/dataset.hpp"
#include "dynslam/factors/factor.hpp"

namespace dynslam {

enum class EstimationMode { Dynamic, StaticOnly, SlamMot };
enum class MotionMode { PerStep, PerStepSmoothed, Constant };

const char* toString(EstimationMode mode);
const char* toString(MotionMode mode);
std::optional<EstimationMode> parseEstimationMode(std::string_view s);
std::optional<MotionMode> parseMotionMode(std::string_view s);

struct Variable {
  VariableKey key;
  VariableValue value;
  bool fixed = false;
};

/// Variables plus factors. Factors hold keys; `factorIndices` caches the
/// resolved variable slots for the solver.
class FactorGraph {
 public:
  /// Throws std::invalid_argument on a duplicate key.
  std::size_t addVariable(const VariableKey& key, VariableValue value, bool fixed = false);
  /// Throws std::invalid_argument if a key is unknown or the arity is wrong.
  void addFactor(Factor factor);

  bool contains(const VariableKey& key) const { return index_.count(key) != 0; }
  std::size_t indexOf(const VariableKey& key) const;

  const std::vector<Variable>& variables() const { return variables_; }
  std::vector<Variable>& variables() { return variables_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<std::vector<std::size_t>>& factorIndices() const { return factor_indices_; }

  const VariableValue& value(const VariableKey& key) const { return variables_[indexOf(key)].value; }
  const Pose& pose(const VariableKey& key) const;
  const Vec3& point(const VariableKey& key) const;
  void setFixed(const VariableKey& key, bool fixed) { variables_[indexOf(key)].fixed = fixed; }

  std::vector<const VariableValue*> factorValues(std::size_t factor_index) const;

  std::size_t countVariables(VariableKind kind) const;
  std::size_t countFactors(FactorKind kind) const;

  std::map<int, MotionMode> motion_mode;  // per object id

 private:
  std::vector<Variable> variables_;
  std::map<VariableKey, std::size_t> index_;
  std::vector<Factor> factors_;
  std::vector<std::vector<std::size_t>> factor_indices_;
};

/// Noise settings used to build factor covariances.
struct GraphNoiseConfig {
  double point_sigma = 0.02;           // m per axis
  double odom_trans_frac = 0.05;       // std as a fraction of measured per-axis magnitude
  double odom_rot_frac = 0.10;
  double odom_floor = 1e-4;            // magnitude floor for zero-motion axes
  double motion_sigma = 0.1;           // sqrt of the isotropic 0.01 m^2 motion covariance
  double smooth_rot_sigma = 0.05;      // rad per step
  double smooth_trans_sigma = 0.1;     // m per step
  double prior_sigma = 1e-6;
};

/// Diagonal odometry covariance: per-axis std frac * max(|component|, floor),
/// components being the rotation vector and translation of `measured`.
NoiseModel odometryNoise(const Pose& measured, const GraphNoiseConfig& cfg);

class GraphBuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the factor graph for a dataset.
///  - Dynamic: poses, static landmarks, per-frame dynamic landmarks, motion
///    variables per motion_mode, ternary motion factors between consecutive
///    observations of a dynamic point.
///  - StaticOnly: dynamic observations are discarded.
///  - SlamMot: the first-stage graph, identical to StaticOnly. See
///    buildMotionOnlyGraph for the second stage.
/// x_0 is anchored by a tight prior at the first ground-truth pose (identity
/// when absent). A dynamic point re-observed after a gap gets no motion
/// factor across the gap.
FactorGraph buildGraph(const Dataset& dataset, EstimationMode mode, MotionMode motion_mode,
                       const GraphNoiseConfig& noise = {});

/// Second stage of the decoupled baseline: dynamic landmarks are fixed at the
/// back-projection of each observation through `poses`, and only the motion
/// variables are free.
FactorGraph buildMotionOnlyGraph(const Dataset& dataset, const std::map<int, Pose>& poses,
                                 MotionMode motion_mode, const GraphNoiseConfig& noise = {});

/// Anchor used for x_0.
Pose anchorPose(const Dataset& dataset);

/// Dead-reckoned poses from the anchor and the odometry chain.
std::map<int, Pose> integrateOdometry(const Dataset& dataset);

}  // namespace dynslam
