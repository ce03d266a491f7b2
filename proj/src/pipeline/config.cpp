#include "dynslam/pipeline/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace dynslam {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

template <typename T>
T parseNumber(const std::string& key, const std::string& value) {
  T v{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  return v;
}

std::vector<double> parseNumbers(const std::string& key, const std::string& value, std::size_t n) {
  const auto ws = words(value);
  if (ws.size() != n) throw ConfigError(key + " expects " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& w : ws) out.push_back(parseNumber<double>(key, w));
  return out;
}

Pose parsePose(const std::string& key, const std::string& value) {
  const auto v = parseNumbers(key, value, 7);
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  if (!(q.norm() > 1e-9)) throw ConfigError(key + ": degenerate quaternion");
  return {q, Vec3(v[0], v[1], v[2])};
}

struct PartialObject {
  std::optional<Pose> initial_pose, body_motion;
  std::optional<double> alongside_radius;
  double alongside_angle = 0.0;
  Vec3 alongside_center = Vec3::Zero();
  int n_points = 30;
  Vec3 extent{2.0, 1.0, 0.8};
};

std::optional<FactorKind> factorKindByName(const std::string& s) {
  for (int i = 0; i < kNumFactorKinds; ++i)
    if (s == toString(static_cast<FactorKind>(i))) return static_cast<FactorKind>(i);
  return std::nullopt;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    scene.validate();
    noise.validate();
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (monte_carlo_runs < 1) throw ConfigError("monte_carlo_runs must be >= 1");
  if (modes.empty()) throw ConfigError("at least one mode is required");
  if (!(graph.motion_sigma > 0.0) || !(graph.smooth_rot_sigma > 0.0) || !(graph.smooth_trans_sigma > 0.0) ||
      !(graph.prior_sigma > 0.0))
    throw ConfigError("graph sigmas must be > 0");
}

GraphNoiseConfig ExperimentConfig::graphNoise() const {
  GraphNoiseConfig g = graph;
  g.point_sigma = std::max(noise.point_sigma, 1e-3);
  g.odom_trans_frac = std::max(noise.odom_trans_frac, 1e-3);
  g.odom_rot_frac = std::max(noise.odom_rot_frac, 1e-3);
  return g;
}

ExperimentConfig parseExperimentConfig(std::istream& is) {
  ExperimentConfig cfg;
  std::map<int, PartialObject> objects;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    auto num = [&](auto& field) { field = parseNumber<std::decay_t<decltype(field)>>(key, value); };

    if (key == "scene.n_steps") num(cfg.scene.n_steps);
    else if (key == "scene.robot_circle_radius") num(cfg.scene.robot_circle_radius);
    else if (key == "scene.frame_interval") num(cfg.scene.frame_interval);
    else if (key == "scene.n_static_points") num(cfg.scene.n_static_points);
    else if (key == "scene.sensing_range") num(cfg.scene.sensing_range);
    else if (key == "scene.rng_seed") num(cfg.scene.rng_seed);
    else if (key.rfind("scene.object.", 0) == 0) {
      const std::string rest = key.substr(13);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": bad object key " + key);
      const int j = parseNumber<int>(key, rest.substr(0, dot));
      const std::string field = rest.substr(dot + 1);
      PartialObject& o = objects[j];
      if (field == "initial_pose") o.initial_pose = parsePose(key, value);
      else if (field == "body_motion") o.body_motion = parsePose(key, value);
      else if (field == "alongside_radius") o.alongside_radius = parseNumber<double>(key, value);
      else if (field == "alongside_angle") o.alongside_angle = parseNumber<double>(key, value);
      else if (field == "alongside_center") {
        const auto v = parseNumbers(key, value, 3);
        o.alongside_center = Vec3(v[0], v[1], v[2]);
      }
      else if (field == "n_points") o.n_points = parseNumber<int>(key, value);
      else if (field == "extent") {
        const auto v = parseNumbers(key, value, 3);
        o.extent = Vec3(v[0], v[1], v[2]);
      } else {
        throw ConfigError("line " + std::to_string(n) + ": unknown key " + key);
      }
    }
    else if (key == "noise.point_sigma") num(cfg.noise.point_sigma);
    else if (key == "noise.odom_trans_frac") num(cfg.noise.odom_trans_frac);
    else if (key == "noise.odom_rot_frac") num(cfg.noise.odom_rot_frac);
    else if (key == "noise.rng_seed") num(cfg.noise.rng_seed);
    else if (key == "modes") {
      cfg.modes.clear();
      for (const auto& w : words(value)) {
        const auto m = parseEstimationMode(w);
        if (!m) throw ConfigError("unknown mode '" + w + "'");
        cfg.modes.push_back(*m);
      }
    } else if (key == "motion_mode") {
      const auto m = parseMotionMode(value);
      if (!m) throw ConfigError("unknown motion_mode '" + value + "'");
      cfg.motion_mode = *m;
    }
    else if (key == "solver.max_iterations") num(cfg.solver.max_iterations);
    else if (key == "solver.relative_decrease_tol") num(cfg.solver.relative_decrease_tol);
    else if (key == "solver.absolute_cost_tol") num(cfg.solver.absolute_cost_tol);
    else if (key == "solver.gradient_norm_tol") num(cfg.solver.gradient_norm_tol);
    else if (key == "solver.initial_lambda") num(cfg.solver.initial_lambda);
    else if (key == "solver.huber_delta") {
      const double d = value == "inf" ? std::numeric_limits<double>::infinity() : parseNumber<double>(key, value);
      cfg.solver.setAllHuberDeltas(d);
    } else if (key.rfind("solver.huber_delta.", 0) == 0) {
      const auto kind = factorKindByName(key.substr(19));
      if (!kind) throw ConfigError("line " + std::to_string(n) + ": unknown key " + key);
      cfg.solver.huber_delta[static_cast<std::size_t>(*kind)] =
          value == "inf" ? std::numeric_limits<double>::infinity() : parseNumber<double>(key, value);
    }
    else if (key == "graph.motion_sigma") num(cfg.graph.motion_sigma);
    else if (key == "graph.smooth_rot_sigma") num(cfg.graph.smooth_rot_sigma);
    else if (key == "graph.smooth_trans_sigma") num(cfg.graph.smooth_trans_sigma);
    else if (key == "graph.prior_sigma") num(cfg.graph.prior_sigma);
    else if (key == "monte_carlo_runs") num(cfg.monte_carlo_runs);
    else if (key == "output_dir") cfg.output_dir = value;
    else throw ConfigError("line " + std::to_string(n) + ": unknown key " + key);
  }

  if (!objects.empty()) {
    cfg.scene.objects.clear();
    for (const auto& [j, o] : objects) {
      ObjectConfig oc;
      if (o.alongside_radius) {
        oc = alongsideObject(cfg.scene, *o.alongside_radius, o.alongside_angle, o.alongside_center);
      } else {
        if (!o.initial_pose || !o.body_motion)
          throw ConfigError("object " + std::to_string(j) + " needs initial_pose and body_motion, or alongside_radius");
        oc.initial_pose = *o.initial_pose;
        oc.body_motion = *o.body_motion;
      }
      oc.n_points = o.n_points;
      oc.extent = o.extent;
      cfg.scene.objects.push_back(oc);
    }
  } else {
    cfg.scene.objects = {defaultObject(cfg.scene)};
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig loadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  return parseExperimentConfig(is);
}

}  // namespace dynslam
