#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynslam/metrics/metrics.hpp"
#include "dynslam/pipeline/config.hpp"
#include "dynslam/pipeline/estimator.hpp"

namespace dynslam {

struct TrajectorySample {
  int frame = 0;
  Vec3 estimated = Vec3::Zero();
  Vec3 ground_truth = Vec3::Zero();
};

struct CentroidSample {
  int object_id = 0;
  int frame = 0;
  Vec3 estimated = Vec3::Zero();     // mean of estimated dynamic landmarks
  Vec3 ground_truth = Vec3::Zero();  // mean of the same points' GT positions
};

/// Plot-ready data of one run.
struct RunTraces {
  std::vector<TrajectorySample> robot;
  std::vector<CentroidSample> centroids;
};

struct RunResult {
  int run = 0;
  EstimationMode mode = EstimationMode::Dynamic;
  bool failed = false;
  std::string error;
  std::vector<SolveReport> solves;
  std::optional<MetricsReport> metrics;
  RunTraces traces;
};

struct ExperimentResult {
  std::vector<EstimationMode> modes;
  std::vector<int> object_ids;  // objects present in the scene
  std::vector<RunResult> runs;  // ordered by (run, mode)
};

/// Seeds of Monte-Carlo run r: scene.rng_seed + r, noise.rng_seed + r.
Dataset simulateRun(const ExperimentConfig& cfg, int run);

RunTraces collectTraces(const Estimate& estimate, const Dataset& dataset);

/// Runs every (seed, mode) pair. Runs execute on up to `threads` workers
/// (0 = hardware concurrency); results do not depend on the thread count.
ExperimentResult runExperiment(const ExperimentConfig& cfg, unsigned threads = 0);

/// Names of the per-run metrics, in row order. Object metrics carry the object id.
struct MetricRow {
  int run = 0;
  EstimationMode mode = EstimationMode::Dynamic;
  std::string object;  // "-" for camera/structure metrics
  std::string metric;
  double value = 0.0;  // NaN when the mode does not estimate it or the run failed
};

std::vector<MetricRow> metricRows(const ExperimentResult& result);

struct AggregateRow {
  EstimationMode mode = EstimationMode::Dynamic;
  std::string object;
  std::string metric;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  int count = 0;  // finite samples
};

std::vector<AggregateRow> aggregate(const ExperimentResult& result);

/// Median of the finite values of `metric` for `mode` (object "-" for camera metrics).
double medianOf(const ExperimentResult& result, EstimationMode mode, const std::string& object,
                const std::string& metric);

/// Writes summary.txt, metrics.tsv, aggregate.tsv, and per run/mode
/// trajectory_*.tsv, centroids_*.tsv, speed_*.tsv into `output_dir`.
/// Throws std::runtime_error if the directory cannot be written.
void emitReport(const ExperimentResult& result, const std::filesystem::path& output_dir);

/// Flat `key = value` block for one MetricsReport.
std::string formatMetrics(const MetricsReport& report);

}  // namespace dynslam
