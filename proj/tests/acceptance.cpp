// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "dynslam/geometry/motion.hpp"
#include "dynslam/io/text_io.hpp"
#include "dynslam/pipeline/config.hpp"
#include "dynslam/pipeline/estimator.hpp"
#include "dynslam/pipeline/experiment.hpp"
#include "jacobian_check.hpp"
#include "test_util.hpp"

using namespace dynslam;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += !o.pass;
  std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

ExperimentConfig benchConfig(double point_sigma) {
  ExperimentConfig cfg;  // default scene: circular robot, constant-motion ellipsoid, no static structure
  cfg.noise.point_sigma = point_sigma;
  cfg.monte_carlo_runs = 20;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

int main() {
  const unsigned threads = 0;

  // The baseline experiment feeds criteria 1, 2, 6 and the first sweep point of 8.
  const ExperimentConfig base_cfg = benchConfig(0.02);
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult base = runExperiment(base_cfg, threads);
  const double base_seconds = seconds(t0);

  auto median = [&](const ExperimentResult& r, EstimationMode m, const char* object, const char* metric) {
    return medianOf(r, m, object, metric);
  };
  const auto D = EstimationMode::Dynamic, S = EstimationMode::SlamMot;

  report(1, "object motion accuracy vs decoupled baseline", [&] {
    const double d_t = median(base, D, "1", "omte_percent"), s_t = median(base, S, "1", "omte_percent");
    const double d_r = median(base, D, "1", "omre_deg_per_m"), s_r = median(base, S, "1", "omre_deg_per_m");
    const bool pass = d_t <= 0.5 * s_t && d_r <= 0.5 * s_r && base_seconds < 60.0;
    return Outcome{pass, "OMTE " + num(d_t) + " vs " + num(s_t) + " %, OMRE " + num(d_r) + " vs " + num(s_r) +
                             " deg/m, 20 seeds in " + num(base_seconds) + " s"};
  });

  report(2, "solvable without static structure", [&] {
    int failed = 0, unconverged = 0;
    for (const RunResult& r : base.runs) {
      if (r.mode != D) continue;
      failed += r.failed;
      for (const SolveReport& s : r.solves) unconverged += !s.converged;
    }
    const double d_rte = median(base, D, "-", "rte_percent"), s_rte = median(base, S, "-", "rte_percent");
    const double d_rse = median(base, D, "-", "rse_percent"), s_rse = median(base, S, "-", "rse_percent");
    const bool pass = base_cfg.scene.n_static_points == 0 && failed == 0 && unconverged == 0 && d_rte < s_rte &&
                      d_rse < s_rse;
    return Outcome{pass, "failed " + std::to_string(failed) + ", unconverged " + std::to_string(unconverged) +
                             ", RTE " + num(d_rte) + " vs " + num(s_rte) + " %, RSE " + num(d_rse) + " vs " +
                             num(s_rse) + " %"};
  });

  report(3, "exact recovery without noise", [&] {
    ExperimentConfig cfg;
    cfg.scene.n_static_points = 20;  // so every mode has structure to score
    cfg.noise = {0.0, 0.0, 0.0, 1};
    const SceneGroundTruth gt = generateScene(cfg.scene);
    const Dataset ds = observe(gt, cfg.noise);
    double worst_metric = 0.0, worst_gt_cost = 0.0;
    bool ok = true;
    for (EstimationMode mode : {EstimationMode::Dynamic, EstimationMode::StaticOnly, EstimationMode::SlamMot}) {
      for (MotionMode motion : {MotionMode::PerStep, MotionMode::PerStepSmoothed, MotionMode::Constant}) {
        FactorGraph at_gt = buildGraph(ds, mode, motion, cfg.graphNoise());
        testing::setToGroundTruth(at_gt, gt, ds);
        worst_gt_cost = std::max(worst_gt_cost, robustCost(at_gt, cfg.solver));

        const EstimationResult r = runEstimator(ds, {mode, motion, cfg.graphNoise(), cfg.solver});
        ok &= !r.failed();
        const MetricsReport m = evaluate(r.estimate, ds);
        std::vector<double> values{m.rte_percent, m.rre_deg_per_m, m.rse_percent};
        for (const auto& o : m.objects) values.insert(values.end(), {o.omte_percent, o.omre_deg_per_m, o.omse_percent});
        ok &= m.objects.size() == (mode == EstimationMode::StaticOnly ? 0u : 1u);
        for (double v : values) {
          ok &= std::isfinite(v);
          worst_metric = std::max(worst_metric, std::abs(v));
        }
      }
    }
    return Outcome{ok && worst_metric < 1e-6 && worst_gt_cost < 1e-12,
                   "worst metric " + num(worst_metric) + ", worst cost at ground truth " + num(worst_gt_cost) +
                       " over 3 modes x 3 motion models"};
  });

  report(4, "analytic Jacobians match finite differences", [&] {
    double worst = 0.0;
    for (FactorKind kind : {FactorKind::PriorPose, FactorKind::Odometry, FactorKind::PointMeasurement,
                            FactorKind::Motion, FactorKind::MotionSmoothness}) {
      testing::Random rng(500 + static_cast<unsigned>(kind));
      for (int trial = 0; trial < 100; ++trial) {
        const testing::FactorConfig cfg = testing::randomFactorConfig(kind, rng);
        std::vector<const VariableValue*> ptrs;
        for (const auto& v : cfg.values) ptrs.push_back(&v);
        const FactorLinearization lin = linearizeFactor(cfg.factor, ptrs);
        const auto numeric = testing::numericJacobians(cfg.factor, cfg.values, 1e-6);
        for (std::size_t k = 0; k < numeric.size(); ++k)
          worst = std::max(worst, (lin.jacobians[k] - numeric[k]).norm() / std::max(numeric[k].norm(), 1.0));
      }
    }
    return Outcome{worst < 1e-5, "worst relative difference " + num(worst) + " over 5 kinds x 100 configurations"};
  });

  report(5, "rigid motion identities", [&] {
    using testing::poseDistance;
    testing::Random rng(600);
    double conj = 0.0, path = 0.0, transport = 0.0, velocity = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Pose L = rng.pose(20.0), C = rng.pose(2.0, 0.5), H = rng.pose(2.0, 0.5);
      conj = std::max({conj, poseDistance(bodyFrameMotion(L, refFrameMotion(L, C)), C),
                       poseDistance(refFrameMotion(L, bodyFrameMotion(L, H)), H)});

      const Vec3 body_point = rng.vec3(2.0);
      const Pose L_next = L * C;
      path = std::max(path, (L_next.transformPoint(body_point) -
                             applyMotion(refFrameMotion(L, C), L.transformPoint(body_point)))
                                .norm());

      Pose Lk = L;
      const Pose H0 = refFrameMotion(L, C);
      for (int k = 0; k < 5; ++k) {
        Lk = Lk * C;
        transport = std::max(transport, poseDistance(refFrameMotion(Lk, C), H0));
      }

      const VelocityEstimate v = linearVelocity(H0, L.translation());
      velocity = std::max(velocity, (v.linear_velocity - (L_next.translation() - L.translation())).norm());
    }
    const bool pass = conj < 1e-9 && path < 1e-9 && transport < 1e-9 && velocity < 1e-9;
    return Outcome{pass, "1000 cases each: conjugation " + num(conj) + ", path " + num(path) + ", transport " +
                             num(transport) + ", velocity " + num(velocity)};
  });

  report(6, "object speed from estimated motion and structure", [&] {
    const double omse = median(base, D, "1", "omse_percent");
    return Outcome{omse <= 5.0, "median OMSE " + num(omse) + " % over 20 seeds"};
  });

  report(7, "deterministic reports", [&] {
    const fs::path a = fs::temp_directory_path() / "dynslam_acceptance_a";
    const fs::path b = fs::temp_directory_path() / "dynslam_acceptance_b";
    fs::remove_all(a);
    fs::remove_all(b);
    emitReport(base, a);
    emitReport(runExperiment(base_cfg, threads), b);
    int files = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      differing += slurp(entry.path()) != slurp(b / entry.path().filename());
    }
    int files_b = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++files_b;
    fs::remove_all(a);
    fs::remove_all(b);
    return Outcome{files > 0 && files == files_b && differing == 0,
                   std::to_string(files) + " files, " + std::to_string(differing) + " differ"};
  });

  report(8, "errors grow with depth noise", [&] {
    std::vector<ExperimentResult> sweep;
    for (double sigma : {0.04, 0.06}) {
      ExperimentConfig cfg = benchConfig(sigma);
      cfg.modes = {D};
      sweep.push_back(runExperiment(cfg, threads));
    }
    bool pass = true;
    std::string detail;
    for (const auto& [object, metric] : {std::pair{"-", "rte_percent"}, std::pair{"-", "rse_percent"},
                                         std::pair{"1", "omte_percent"}}) {
      const double m0 = median(base, D, object, metric), m1 = median(sweep[0], D, object, metric),
                   m2 = median(sweep[1], D, object, metric);
      pass &= m0 <= m1 && m1 <= m2;
      detail += std::string(detail.empty() ? "" : ", ") + metric + " " + num(m0) + " / " + num(m1) + " / " + num(m2);
    }
    return Outcome{pass, detail + " at sigma 0.02 / 0.04 / 0.06 m"};
  });

  std::printf("%s\n", failures == 0 ? "ALL PASS" : (std::to_string(failures) + " FAILED").c_str());
  return failures == 0 ? 0 : 1;
}
