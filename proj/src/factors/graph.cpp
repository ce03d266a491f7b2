#include "dynslam/factors/graph.hpp"

#include <cmath>
#include <set>
#include <string>

namespace dynslam {

const char* toString(EstimationMode mode) {
  switch (mode) {
    case EstimationMode::Dynamic: return "dynamic";
    case EstimationMode::StaticOnly: return "static";
    case EstimationMode::SlamMot: return "slam-mot";
  }
  return "?";
}

const char* toString(MotionMode mode) {
  switch (mode) {
    case MotionMode::PerStep: return "per-step";
    case MotionMode::PerStepSmoothed: return "smoothed";
    case MotionMode::Constant: return "constant";
  }
  return "?";
}

std::optional<EstimationMode> parseEstimationMode(std::string_view s) {
  if (s == "dynamic") return EstimationMode::Dynamic;
  if (s == "static") return EstimationMode::StaticOnly;
  if (s == "slam-mot") return EstimationMode::SlamMot;
  return std::nullopt;
}

std::optional<MotionMode> parseMotionMode(std::string_view s) {
  if (s == "per-step") return MotionMode::PerStep;
  if (s == "smoothed") return MotionMode::PerStepSmoothed;
  if (s == "constant") return MotionMode::Constant;
  return std::nullopt;
}

std::size_t FactorGraph::addVariable(const VariableKey& key, VariableValue value, bool fixed) {
  if (contains(key)) throw std::invalid_argument("duplicate variable " + key.str());
  const std::size_t idx = variables_.size();
  variables_.push_back({key, std::move(value), fixed});
  index_.emplace(key, idx);
  return idx;
}

void FactorGraph::addFactor(Factor factor) {
  if (static_cast<int>(factor.keys.size()) != expectedArity(factor.kind))
    throw std::invalid_argument(std::string("arity mismatch for ") + toString(factor.kind) + " factor");
  if (factor.noise.dim() != residualDim(factor.kind))
    throw std::invalid_argument(std::string("noise dimension mismatch for ") + toString(factor.kind) + " factor");
  std::vector<std::size_t> slots;
  slots.reserve(factor.keys.size());
  for (const auto& k : factor.keys) slots.push_back(indexOf(k));
  factors_.push_back(std::move(factor));
  factor_indices_.push_back(std::move(slots));
}

std::size_t FactorGraph::indexOf(const VariableKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw std::invalid_argument("unknown variable " + key.str());
  return it->second;
}

const Pose& FactorGraph::pose(const VariableKey& key) const {
  const auto* p = std::get_if<Pose>(&value(key));
  if (!p) throw std::invalid_argument(key.str() + " is not a pose");
  return *p;
}

const Vec3& FactorGraph::point(const VariableKey& key) const {
  const auto* p = std::get_if<Vec3>(&value(key));
  if (!p) throw std::invalid_argument(key.str() + " is not a point");
  return *p;
}

std::vector<const VariableValue*> FactorGraph::factorValues(std::size_t factor_index) const {
  std::vector<const VariableValue*> out;
  const auto& slots = factor_indices_[factor_index];
  out.reserve(slots.size());
  for (auto s : slots) out.push_back(&variables_[s].value);
  return out;
}

std::size_t FactorGraph::countVariables(VariableKind kind) const {
  std::size_t n = 0;
  for (const auto& v : variables_) n += v.key.kind == kind;
  return n;
}

std::size_t FactorGraph::countFactors(FactorKind kind) const {
  std::size_t n = 0;
  for (const auto& f : factors_) n += f.kind == kind;
  return n;
}

NoiseModel odometryNoise(const Pose& measured, const GraphNoiseConfig& cfg) {
  const Vec3 rot = so3::log(measured.quaternion());
  const Vec3& trans = measured.translation();
  Eigen::VectorXd sigmas(6);
  for (int i = 0; i < 3; ++i) {
    sigmas[i] = cfg.odom_rot_frac * std::max(std::abs(rot[i]), cfg.odom_floor);
    sigmas[3 + i] = cfg.odom_trans_frac * std::max(std::abs(trans[i]), cfg.odom_floor);
  }
  return NoiseModel::diagonal(sigmas);
}

Pose anchorPose(const Dataset& dataset) {
  const auto& gt = dataset.ground_truth.robot_poses;
  if (const auto it = gt.find(0); it != gt.end()) return it->second;
  return Pose::identity();
}

namespace {

void validate(const Dataset& dataset) {
  if (dataset.frames.empty()) throw GraphBuildError("dataset has no frames");
  std::map<int, int> object_of;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    const Frame& f = dataset.frames[i];
    if (f.index != static_cast<int>(i))
      throw GraphBuildError("frames must be contiguous from 0; found frame " + std::to_string(f.index) +
                            " at position " + std::to_string(i));
    if (i > 0 && !f.odometry) throw GraphBuildError("frame " + std::to_string(i) + " has no odometry");
    std::set<int> seen;
    for (const auto& obs : f.observations) {
      if (obs.frame != f.index)
        throw GraphBuildError("observation of point " + std::to_string(obs.point_id) + " filed under frame " +
                              std::to_string(f.index) + " but tagged frame " + std::to_string(obs.frame));
      if (obs.object_id < 0) throw GraphBuildError("negative object id for point " + std::to_string(obs.point_id));
      if (!seen.insert(obs.point_id).second)
        throw GraphBuildError("point " + std::to_string(obs.point_id) + " observed twice in frame " +
                              std::to_string(f.index));
      const auto [it, inserted] = object_of.emplace(obs.point_id, obs.object_id);
      if (!inserted && it->second != obs.object_id)
        throw GraphBuildError("point " + std::to_string(obs.point_id) + " changes object id from " +
                              std::to_string(it->second) + " to " + std::to_string(obs.object_id));
    }
  }
}

VariableKey motionKey(MotionMode mode, int frame, int object_id) {
  return mode == MotionMode::Constant ? VariableKey::motion(0, object_id) : VariableKey::motion(frame, object_id);
}

// Adds motion factors (and motion variables on first use) for every dynamic
// point observed at consecutive frames. Landmark variables must already exist.
void addMotionStructure(const Dataset& dataset, MotionMode motion_mode, const GraphNoiseConfig& noise,
                        FactorGraph& graph) {
  const NoiseModel motion_noise = NoiseModel::isotropic(3, noise.motion_sigma);
  std::map<int, std::set<int>> motion_frames;  // object -> frames with a motion variable

  for (std::size_t i = 1; i < dataset.frames.size(); ++i) {
    const Frame& prev = dataset.frames[i - 1];
    const Frame& curr = dataset.frames[i];
    std::set<int> prev_ids;
    for (const auto& o : prev.observations)
      if (!o.isStatic()) prev_ids.insert(o.point_id);
    for (const auto& o : curr.observations) {
      if (o.isStatic() || !prev_ids.count(o.point_id)) continue;
      const VariableKey hk = motionKey(motion_mode, curr.index, o.object_id);
      if (!graph.contains(hk)) {
        graph.addVariable(hk, Pose::identity());
        motion_frames[o.object_id].insert(curr.index);
        graph.motion_mode[o.object_id] = motion_mode;
      }
      graph.addFactor({FactorKind::Motion,
                       {VariableKey::landmark(prev.index, o.point_id), VariableKey::landmark(curr.index, o.point_id), hk},
                       std::monostate{},
                       motion_noise});
    }
  }

  if (motion_mode != MotionMode::PerStepSmoothed) return;
  Eigen::VectorXd sigmas(6);
  sigmas << Vec3::Constant(noise.smooth_rot_sigma), Vec3::Constant(noise.smooth_trans_sigma);
  const NoiseModel smooth_noise = NoiseModel::diagonal(sigmas);
  for (const auto& [object_id, frames] : motion_frames) {
    for (int k : frames) {
      if (!frames.count(k - 1)) continue;
      graph.addFactor({FactorKind::MotionSmoothness,
                       {VariableKey::motion(k - 1, object_id), VariableKey::motion(k, object_id)},
                       std::monostate{},
                       smooth_noise});
    }
  }
}

}  // namespace

std::map<int, Pose> integrateOdometry(const Dataset& dataset) {
  std::map<int, Pose> poses;
  if (dataset.frames.empty()) return poses;
  Pose x = anchorPose(dataset);
  poses[dataset.frames.front().index] = x;
  for (std::size_t i = 1; i < dataset.frames.size(); ++i) {
    const Frame& f = dataset.frames[i];
    if (!f.odometry) throw GraphBuildError("frame " + std::to_string(f.index) + " has no odometry");
    x = x * *f.odometry;
    poses[f.index] = x;
  }
  return poses;
}

FactorGraph buildGraph(const Dataset& dataset, EstimationMode mode, MotionMode motion_mode,
                       const GraphNoiseConfig& noise) {
  validate(dataset);
  FactorGraph graph;
  const auto init = integrateOdometry(dataset);

  for (const auto& [k, x] : init) graph.addVariable(VariableKey::pose(k), x);

  graph.addFactor({FactorKind::PriorPose, {VariableKey::pose(0)}, anchorPose(dataset),
                   NoiseModel::isotropic(6, noise.prior_sigma)});
  for (std::size_t i = 1; i < dataset.frames.size(); ++i) {
    const Frame& f = dataset.frames[i];
    graph.addFactor({FactorKind::Odometry,
                     {VariableKey::pose(f.index - 1), VariableKey::pose(f.index)},
                     *f.odometry,
                     odometryNoise(*f.odometry, noise)});
  }

  const bool with_dynamic = mode == EstimationMode::Dynamic;
  const NoiseModel point_noise = NoiseModel::isotropic(3, noise.point_sigma);
  std::map<int, VariableKey> static_keys;
  for (const Frame& f : dataset.frames) {
    const Pose& x = init.at(f.index);
    for (const auto& o : f.observations) {
      VariableKey lk;
      if (o.isStatic()) {
        auto it = static_keys.find(o.point_id);
        if (it == static_keys.end()) {
          lk = VariableKey::landmark(f.index, o.point_id);
          graph.addVariable(lk, x.transformPoint(o.position));
          static_keys.emplace(o.point_id, lk);
        } else {
          lk = it->second;
        }
      } else {
        if (!with_dynamic) continue;
        lk = VariableKey::landmark(f.index, o.point_id);
        graph.addVariable(lk, x.transformPoint(o.position));
      }
      graph.addFactor({FactorKind::PointMeasurement, {VariableKey::pose(f.index), lk}, o.position, point_noise});
    }
  }

  if (with_dynamic) addMotionStructure(dataset, motion_mode, noise, graph);
  return graph;
}

FactorGraph buildMotionOnlyGraph(const Dataset& dataset, const std::map<int, Pose>& poses, MotionMode motion_mode,
                                 const GraphNoiseConfig& noise) {
  validate(dataset);
  FactorGraph graph;
  for (const Frame& f : dataset.frames) {
    const auto it = poses.find(f.index);
    if (it == poses.end()) throw GraphBuildError("no pose for frame " + std::to_string(f.index));
    for (const auto& o : f.observations) {
      if (o.isStatic()) continue;
      graph.addVariable(VariableKey::landmark(f.index, o.point_id), it->second.transformPoint(o.position), true);
    }
  }
  addMotionStructure(dataset, motion_mode, noise, graph);
  return graph;
}

std::map<int, int> Dataset::pointObjects() const {
  std::map<int, int> out;
  for (const auto& f : frames)
    for (const auto& o : f.observations) out.emplace(o.point_id, o.object_id);
  return out;
}

}  // namespace dynslam
