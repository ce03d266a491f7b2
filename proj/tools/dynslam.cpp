// Command-line front end: simulate, solve, evaluate, bench.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "dynslam/io/text_io.hpp"
#include "dynslam/pipeline/config.hpp"
#include "dynslam/pipeline/estimator.hpp"
#include "dynslam/pipeline/experiment.hpp"

using namespace dynslam;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

void writeText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

int simulate(const std::string& config_path, const std::filesystem::path& out) {
  const ExperimentConfig cfg = loadExperimentConfig(config_path);
  std::filesystem::create_directories(out);
  writeDataset(simulateRun(cfg, 0), out / "dataset.txt");
  std::cout << "wrote " << (out / "dataset.txt").string() << '\n';
  return kOk;
}

int solve(const std::string& dataset_path, const std::string& mode_name, const std::string& motion_name,
          const std::filesystem::path& out, const std::string& config_path) {
  const auto mode = parseEstimationMode(mode_name);
  const auto motion = parseMotionMode(motion_name);
  if (!mode || !motion) {
    std::cerr << "unknown mode or motion mode\n";
    return kUsage;
  }
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = loadExperimentConfig(config_path);
  const Dataset dataset = readDataset(std::filesystem::path(dataset_path));

  const EstimationResult result = runEstimator(dataset, {*mode, *motion, cfg.graphNoise(), cfg.solver});
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const SolveReport& s = result.stages[i];
    std::cout << "stage " << i << ": " << s.termination << " after " << s.iterations << " iterations, cost "
              << s.initial_cost << " -> " << s.final_cost << '\n';
  }
  if (result.failed()) {
    std::cerr << "solver failure\n";
    return kSolver;
  }

  std::filesystem::create_directories(out);
  writeEstimate(result.estimate, out / "estimate.txt");
  if (!dataset.ground_truth.empty()) {
    const MetricsReport metrics = evaluate(result.estimate, dataset);
    const std::string text = formatMetrics(metrics);
    writeText(out / "metrics.txt", text);
    std::cout << text;
  }
  return kOk;
}

int evaluateCmd(const std::string& estimate_path, const std::string& dataset_path) {
  const Estimate estimate = readEstimate(std::filesystem::path(estimate_path));
  const Dataset dataset = readDataset(std::filesystem::path(dataset_path));
  std::cout << formatMetrics(evaluate(estimate, dataset));
  return kOk;
}

int bench(const std::string& config_path, const std::string& out_override, unsigned threads) {
  ExperimentConfig cfg = loadExperimentConfig(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  const ExperimentResult result = runExperiment(cfg, threads);
  emitReport(result, cfg.output_dir);
  std::ifstream summary(cfg.output_dir / "summary.txt");
  std::cout << summary.rdbuf();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-aware dynamic SLAM backend"};
  app.require_subcommand(1);

  std::string config, dataset, estimate, mode = "dynamic", motion = "constant", out;
  unsigned threads = 0;

  auto* sim = app.add_subcommand("simulate", "Generate a dataset (Monte-Carlo run 0 of the config)");
  sim->add_option("--config", config, "Experiment config file")->required();
  sim->add_option("--out", out, "Output directory")->required();

  auto* slv = app.add_subcommand("solve", "Estimate from a dataset file");
  slv->add_option("--dataset", dataset, "Dataset file")->required();
  slv->add_option("--mode", mode, "dynamic | static | slam-mot");
  slv->add_option("--motion", motion, "per-step | smoothed | constant");
  slv->add_option("--out", out, "Output directory")->required();
  slv->add_option("--config", config, "Config supplying noise, graph and solver settings");

  auto* ev = app.add_subcommand("evaluate", "Score an estimate against a dataset's ground truth");
  ev->add_option("--estimate", estimate, "Estimate file")->required();
  ev->add_option("--dataset", dataset, "Dataset file")->required();

  auto* bn = app.add_subcommand("bench", "Monte-Carlo comparison of estimation modes");
  bn->add_option("--config", config, "Experiment config file")->required();
  bn->add_option("--out", out, "Output directory (overrides output_dir)");
  bn->add_option("--threads", threads, "Worker threads, 0 = hardware concurrency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return simulate(config, out);
    if (*slv) return solve(dataset, mode, motion, out, config);
    if (*ev) return evaluateCmd(estimate, dataset);
    if (*bn) return bench(config, out, threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const GraphBuildError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const MetricsError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
