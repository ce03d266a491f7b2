#include "dynslam/pipeline/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "dynslam/geometry/motion.hpp"
#include "dynslam/io/text_io.hpp"

namespace dynslam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kCameraMetrics[] = {"rte_percent", "rre_deg_per_m", "rse_percent"};
const char* kObjectMetrics[] = {"omte_percent", "omre_deg_per_m", "omse_percent"};

double quantile(std::vector<double> sorted_values, double q) {
  if (sorted_values.empty()) return kNaN;
  const double pos = q * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

std::string fmt(double v) { return std::isfinite(v) ? formatDouble(v) : "nan"; }

std::ofstream openOut(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

RunResult runOne(const ExperimentConfig& cfg, const Dataset& dataset, int run, EstimationMode mode) {
  RunResult rr;
  rr.run = run;
  rr.mode = mode;
  try {
    EstimatorConfig ec{mode, cfg.motion_mode, cfg.graphNoise(), cfg.solver};
    EstimationResult er = runEstimator(dataset, ec);
    rr.solves = er.stages;
    if (er.failed()) {
      rr.failed = true;
      for (const auto& s : er.stages)
        if (s.linear_solve_failed || !std::isfinite(s.final_cost)) rr.error = "solver: " + s.termination;
      return rr;
    }
    rr.metrics = evaluate(er.estimate, dataset);
    rr.traces = collectTraces(er.estimate, dataset);
  } catch (const std::exception& e) {
    rr.failed = true;
    rr.error = e.what();
  }
  return rr;
}

}  // namespace

Dataset simulateRun(const ExperimentConfig& cfg, int run) {
  SceneConfig scene = cfg.scene;
  NoiseConfig noise = cfg.noise;
  scene.rng_seed += static_cast<std::uint64_t>(run);
  noise.rng_seed += static_cast<std::uint64_t>(run);
  return observe(generateScene(scene), noise);
}

RunTraces collectTraces(const Estimate& estimate, const Dataset& dataset) {
  RunTraces t;
  for (const auto& [k, x] : estimate.robot_poses) {
    const auto g = dataset.ground_truth.robot_poses.find(k);
    if (g == dataset.ground_truth.robot_poses.end()) continue;
    t.robot.push_back({k, x.translation(), g->second.translation()});
  }
  std::map<std::pair<int, int>, std::pair<std::vector<Vec3>, std::vector<Vec3>>> groups;
  for (const auto& [key, p] : estimate.dynamic_points) {
    const auto g = dataset.ground_truth.points.find(key);
    if (g == dataset.ground_truth.points.end()) continue;
    auto& grp = groups[{p.object_id, key.first}];
    grp.first.push_back(p.position);
    grp.second.push_back(g->second);
  }
  for (const auto& [key, grp] : groups)
    t.centroids.push_back({key.first, key.second, centroid(grp.first), centroid(grp.second)});
  return t;
}

ExperimentResult runExperiment(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  ExperimentResult result;
  result.modes = cfg.modes;
  for (std::size_t j = 0; j < cfg.scene.objects.size(); ++j) result.object_ids.push_back(static_cast<int>(j) + 1);

  const int runs = cfg.monte_carlo_runs;
  result.runs.resize(static_cast<std::size_t>(runs) * cfg.modes.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < runs; r = next++) {
      const Dataset dataset = simulateRun(cfg, r);
      for (std::size_t m = 0; m < cfg.modes.size(); ++m)
        result.runs[static_cast<std::size_t>(r) * cfg.modes.size() + m] = runOne(cfg, dataset, r, cfg.modes[m]);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return result;
}

std::vector<MetricRow> metricRows(const ExperimentResult& result) {
  std::vector<MetricRow> rows;
  for (const RunResult& rr : result.runs) {
    const MetricsReport* m = rr.metrics ? &*rr.metrics : nullptr;
    const double cam[3] = {m ? m->rte_percent : kNaN, m ? m->rre_deg_per_m : kNaN, m ? m->rse_percent : kNaN};
    for (int i = 0; i < 3; ++i) rows.push_back({rr.run, rr.mode, "-", kCameraMetrics[i], cam[i]});
    for (int obj : result.object_ids) {
      const ObjectMetrics* om = nullptr;
      if (m)
        for (const auto& o : m->objects)
          if (o.object_id == obj) om = &o;
      const double vals[3] = {om ? om->omte_percent : kNaN, om ? om->omre_deg_per_m : kNaN,
                              om ? om->omse_percent : kNaN};
      for (int i = 0; i < 3; ++i) rows.push_back({rr.run, rr.mode, std::to_string(obj), kObjectMetrics[i], vals[i]});
    }
  }
  return rows;
}

std::vector<AggregateRow> aggregate(const ExperimentResult& result) {
  const auto rows = metricRows(result);
  std::vector<AggregateRow> out;
  for (EstimationMode mode : result.modes) {
    if (std::none_of(result.runs.begin(), result.runs.end(), [&](const RunResult& r) { return r.mode == mode; }))
      continue;
    std::vector<std::pair<std::string, std::string>> names;
    for (const char* n : kCameraMetrics) names.emplace_back("-", n);
    for (int obj : result.object_ids)
      for (const char* n : kObjectMetrics) names.emplace_back(std::to_string(obj), n);
    for (const auto& [object, metric] : names) {
      std::vector<double> vals;
      for (const auto& r : rows)
        if (r.mode == mode && r.object == object && r.metric == metric && std::isfinite(r.value)) vals.push_back(r.value);
      std::sort(vals.begin(), vals.end());
      out.push_back({mode, object, metric, quantile(vals, 0.5), quantile(vals, 0.25), quantile(vals, 0.75),
                     static_cast<int>(vals.size())});
    }
  }
  return out;
}

double medianOf(const ExperimentResult& result, EstimationMode mode, const std::string& object,
                const std::string& metric) {
  for (const auto& a : aggregate(result))
    if (a.mode == mode && a.object == object && a.metric == metric) return a.median;
  return kNaN;
}

std::string formatMetrics(const MetricsReport& report) {
  std::ostringstream os;
  const char* unit_note = report.absolute_pose_errors ? " (absolute: m, deg)" : "";
  os << "rte_percent = " << fmt(report.rte_percent) << unit_note << '\n';
  os << "rre_deg_per_m = " << fmt(report.rre_deg_per_m) << unit_note << '\n';
  os << "rse_percent = " << fmt(report.rse_percent) << '\n';
  for (const auto& o : report.objects) {
    os << "object." << o.object_id << ".omte_percent = " << fmt(o.omte_percent) << '\n';
    os << "object." << o.object_id << ".omre_deg_per_m = " << fmt(o.omre_deg_per_m) << '\n';
    os << "object." << o.object_id << ".omse_percent = " << fmt(o.omse_percent) << '\n';
    if (o.skipped_steps > 0) os << "object." << o.object_id << ".skipped_steps = " << o.skipped_steps << '\n';
  }
  return os.str();
}

void emitReport(const ExperimentResult& result, const std::filesystem::path& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + output_dir.string() + ": " + ec.message());

  {
    auto os = openOut(output_dir / "metrics.tsv");
    os << "run\tmode\tobject\tmetric\tvalue\n";
    for (const auto& r : metricRows(result))
      os << r.run << '\t' << toString(r.mode) << '\t' << r.object << '\t' << r.metric << '\t' << fmt(r.value) << '\n';
  }

  const auto agg = aggregate(result);
  {
    auto os = openOut(output_dir / "aggregate.tsv");
    os << "mode\tobject\tmetric\tmedian\tq1\tq3\tcount\n";
    for (const auto& a : agg)
      os << toString(a.mode) << '\t' << a.object << '\t' << a.metric << '\t' << fmt(a.median) << '\t' << fmt(a.q1)
         << '\t' << fmt(a.q3) << '\t' << a.count << '\n';
  }

  {
    auto os = openOut(output_dir / "summary.txt");
    os << "dynamic SLAM experiment summary\n";
    int runs = 0;
    for (const auto& r : result.runs) runs = std::max(runs, r.run + 1);
    os << "runs = " << runs << '\n';
    for (EstimationMode mode : result.modes) {
      int failed = 0;
      for (const auto& r : result.runs) failed += r.mode == mode && r.failed;
      os << "\n[" << toString(mode) << "] failed_runs = " << failed << '\n';
      for (const auto& a : agg) {
        if (a.mode != mode) continue;
        os << (a.object == "-" ? std::string() : "object." + a.object + ".") << a.metric
           << " median = " << fmt(a.median) << " iqr = [" << fmt(a.q1) << ", " << fmt(a.q3) << "] n = " << a.count
           << '\n';
      }
    }
    for (const auto& r : result.runs)
      if (r.failed) os << "run " << r.run << " " << toString(r.mode) << " failed: " << r.error << '\n';
  }

  for (const auto& r : result.runs) {
    const std::string tag = std::string(toString(r.mode)) + "_run" + std::to_string(r.run) + ".tsv";
    {
      auto os = openOut(output_dir / ("trajectory_" + tag));
      os << "frame\test_x\test_y\test_z\tgt_x\tgt_y\tgt_z\n";
      for (const auto& s : r.traces.robot)
        os << s.frame << '\t' << fmt(s.estimated.x()) << '\t' << fmt(s.estimated.y()) << '\t' << fmt(s.estimated.z())
           << '\t' << fmt(s.ground_truth.x()) << '\t' << fmt(s.ground_truth.y()) << '\t' << fmt(s.ground_truth.z())
           << '\n';
    }
    {
      auto os = openOut(output_dir / ("centroids_" + tag));
      os << "object\tframe\test_x\test_y\test_z\tgt_x\tgt_y\tgt_z\n";
      for (const auto& s : r.traces.centroids)
        os << s.object_id << '\t' << s.frame << '\t' << fmt(s.estimated.x()) << '\t' << fmt(s.estimated.y()) << '\t'
           << fmt(s.estimated.z()) << '\t' << fmt(s.ground_truth.x()) << '\t' << fmt(s.ground_truth.y()) << '\t'
           << fmt(s.ground_truth.z()) << '\n';
    }
    {
      auto os = openOut(output_dir / ("speed_" + tag));
      os << "object\tframe\test_mps\tgt_mps\n";
      if (r.metrics)
        for (const auto& o : r.metrics->objects)
          for (const auto& s : o.speed_trace)
            os << o.object_id << '\t' << s.frame << '\t' << fmt(s.estimated_mps) << '\t' << fmt(s.ground_truth_mps)
               << '\n';
    }
  }
}

}  // namespace dynslam
