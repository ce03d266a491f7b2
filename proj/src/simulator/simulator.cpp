#include "dynslam/simulator/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dynslam/simulator/rng.hpp"

namespace dynslam {

namespace {

Pose yawPose(double yaw, const Vec3& t) {
  return {Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ())), t};
}

double stepAngle(const SceneConfig& scene) { return 2.0 * std::numbers::pi / scene.n_steps; }

}  // namespace

void SceneConfig::validate() const {
  if (n_steps < 2) throw std::invalid_argument("scene.n_steps must be >= 2");
  if (!(robot_circle_radius > 0.0)) throw std::invalid_argument("scene.robot_circle_radius must be > 0");
  if (!(frame_interval > 0.0)) throw std::invalid_argument("scene.frame_interval must be > 0");
  if (!(sensing_range > 0.0)) throw std::invalid_argument("scene.sensing_range must be > 0");
  if (n_static_points < 0) throw std::invalid_argument("scene.n_static_points must be >= 0");
  for (const auto& o : objects) {
    if (o.n_points < 1) throw std::invalid_argument("object n_points must be >= 1");
    if ((o.extent.array() <= 0.0).any()) throw std::invalid_argument("object extent semi-axes must be > 0");
  }
}

void NoiseConfig::validate() const {
  if (point_sigma < 0.0 || odom_trans_frac < 0.0 || odom_rot_frac < 0.0)
    throw std::invalid_argument("noise parameters must be >= 0");
}

ObjectConfig alongsideObject(const SceneConfig& scene, double radius, double start_angle, const Vec3& center) {
  const double a = stepAngle(scene);
  ObjectConfig obj;
  obj.initial_pose =
      yawPose(start_angle + std::numbers::pi / 2,
              center + Vec3(radius * std::cos(start_angle), radius * std::sin(start_angle), 0.0));
  obj.body_motion = yawPose(a, Vec3(radius * std::sin(a), radius * (1.0 - std::cos(a)), 0.0));
  return obj;
}

ObjectConfig defaultObject(const SceneConfig& scene) {
  // radius at which the object covers 1 m per step at the robot's angular rate
  const double radius = 1.0 / (2.0 * std::sin(0.5 * stepAngle(scene)));
  return alongsideObject(scene, radius, 0.0, Vec3(10.0, 0.0, 0.0));
}

SceneConfig defaultScene() {
  SceneConfig scene;
  scene.objects.push_back(defaultObject(scene));
  return scene;
}

std::vector<Vec3> ellipsoidSurfacePoints(int n, const Vec3& semi_axes) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    // the lower half mirrors the upper through the centre, so an even count has its centroid at the origin
    if (i >= n - n / 2) {
      out.push_back(-out[static_cast<std::size_t>(n - 1 - i)]);
      continue;
    }
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(semi_axes.x() * r * std::cos(phi), semi_axes.y() * r * std::sin(phi), semi_axes.z() * z);
  }
  return out;
}

std::vector<std::pair<int, Vec3>> SceneGroundTruth::pointsAt(int k) const {
  std::vector<std::pair<int, Vec3>> out;
  for (std::size_t i = 0; i < static_ids.size(); ++i) out.emplace_back(static_ids[i], static_points[i]);
  for (const auto& obj : objects) {
    const Pose& L = obj.poses.at(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < obj.point_ids.size(); ++i)
      out.emplace_back(obj.point_ids[i], L.transformPoint(obj.body_points[i]));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

int SceneGroundTruth::objectOf(int point_id) const {
  for (const auto& obj : objects)
    if (std::find(obj.point_ids.begin(), obj.point_ids.end(), point_id) != obj.point_ids.end()) return obj.object_id;
  return kStaticObjectId;
}

SceneGroundTruth generateScene(const SceneConfig& cfg) {
  cfg.validate();
  SceneGroundTruth gt;
  gt.frame_interval = cfg.frame_interval;
  gt.sensing_range = cfg.sensing_range;

  const double R = cfg.robot_circle_radius;
  for (int k = 0; k <= cfg.n_steps; ++k) {
    const double theta = stepAngle(cfg) * k;
    gt.robot_poses.push_back(yawPose(theta + std::numbers::pi / 2, Vec3(R * std::cos(theta), R * std::sin(theta), 0.0)));
  }

  Rng rng(cfg.rng_seed);
  int next_id = 1;
  for (int i = 0; i < cfg.n_static_points; ++i) {
    // area-uniform in the annulus [R + 3, R + 15], height in [-1, 3]
    const double r_in = R + 3.0, r_out = R + 15.0;
    const double r = std::sqrt(rng.uniform(r_in * r_in, r_out * r_out));
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double z = rng.uniform(-1.0, 3.0);
    gt.static_ids.push_back(next_id++);
    gt.static_points.emplace_back(r * std::cos(a), r * std::sin(a), z);
  }

  int object_id = 1;
  for (const auto& oc : cfg.objects) {
    SceneObject obj;
    obj.object_id = object_id++;
    obj.poses.push_back(oc.initial_pose);
    for (int k = 1; k <= cfg.n_steps; ++k) obj.poses.push_back(obj.poses.back() * oc.body_motion);
    obj.body_points = ellipsoidSurfacePoints(oc.n_points, oc.extent);
    for (int i = 0; i < oc.n_points; ++i) obj.point_ids.push_back(next_id++);
    gt.objects.push_back(std::move(obj));
  }
  return gt;
}

Dataset observe(const SceneGroundTruth& gt, const NoiseConfig& noise) {
  noise.validate();
  Rng rng(noise.rng_seed);
  Dataset ds;
  ds.frame_interval = gt.frame_interval;

  const bool odom_noise = noise.odom_rot_frac > 0.0 || noise.odom_trans_frac > 0.0;
  for (int k = 0; k < gt.numFrames(); ++k) {
    Frame frame;
    frame.index = k;
    const Pose& x = gt.robot_poses[static_cast<std::size_t>(k)];
    if (k > 0) {
      const Pose rel = gt.robot_poses[static_cast<std::size_t>(k - 1)].inverse() * x;
      if (odom_noise) {
        const Vec3 rot = so3::log(rel.quaternion());
        const Vec3& trans = rel.translation();
        Vec6 n;
        for (int i = 0; i < 3; ++i)
          n[i] = rng.gaussian(noise.odom_rot_frac * std::max(std::abs(rot[i]), kOdometryMagnitudeFloor));
        for (int i = 0; i < 3; ++i)
          n[3 + i] = rng.gaussian(noise.odom_trans_frac * std::max(std::abs(trans[i]), kOdometryMagnitudeFloor));
        frame.odometry = rel * exp(n);
      } else {
        frame.odometry = rel;
      }
    }

    ds.ground_truth.robot_poses[k] = x;
    for (const auto& obj : gt.objects) ds.ground_truth.object_poses[k][obj.object_id] = obj.poses[static_cast<std::size_t>(k)];

    const Pose x_inv = x.inverse();
    std::map<int, int> object_of;
    for (const auto& obj : gt.objects)
      for (int id : obj.point_ids) object_of[id] = obj.object_id;

    for (const auto& [id, p] : gt.pointsAt(k)) {
      ds.ground_truth.points[{k, id}] = p;
      const Vec3 local = x_inv.transformPoint(p);
      if (local.norm() > gt.sensing_range) continue;
      TrackedPoint obs;
      obs.frame = k;
      obs.point_id = id;
      const auto it = object_of.find(id);
      obs.object_id = it == object_of.end() ? kStaticObjectId : it->second;
      obs.position = local;
      if (noise.point_sigma > 0.0)
        for (int i = 0; i < 3; ++i) obs.position[i] += rng.gaussian(noise.point_sigma);
      frame.observations.push_back(obs);
    }
    ds.frames.push_back(std::move(frame));
  }
  return ds;
}

}  // namespace dynslam
