#include <gtest/gtest.h>

#include "dynslam/factors/factor.hpp"
#include "dynslam/factors/graph.hpp"
#include "dynslam/geometry/motion.hpp"
#include "dynslam/simulator/simulator.hpp"
#include "jacobian_check.hpp"
#include "test_util.hpp"

namespace dynslam {
namespace {

using testing::Random;

// Residual examples.

TEST(Residuals, Odometry) {
  EXPECT_EQ(residualOdometry(Pose(), Pose(), Pose()), Vec6::Zero());
  const Pose t = Pose::fromTranslation(Vec3(1, 0, 0));
  EXPECT_LT(residualOdometry(Pose(), t, t).norm(), 1e-15);

  Random rng(1);
  for (int i = 0; i < 50; ++i) {
    const Pose a = rng.pose(), b = rng.pose();
    const Pose o = a.inverse() * b;
    EXPECT_LT(residualOdometry(a, b, o).norm(), 1e-10);
    const Vec6 d = rng.vec6(1e-4);
    EXPECT_LT((residualOdometry(a, b * exp(d), o) - d).norm(), 1e-7);
  }
}

TEST(Residuals, Point) {
  EXPECT_EQ(residualPoint(Pose(), Vec3(1, 2, 3), Vec3(1, 2, 3)), Vec3::Zero());
  EXPECT_EQ(residualPoint(Pose::fromTranslation(Vec3(0, 0, 1)), Vec3(0, 0, 2), Vec3(0, 0, 1)), Vec3::Zero());

  Random rng(2);
  for (int i = 0; i < 50; ++i) {
    const Pose x = rng.pose(10.0);
    const Vec3 l = rng.vec3(20.0), w = rng.vec3(0.1);
    const Vec3 z = x.inverse().transformPoint(l);
    EXPECT_LT(residualPoint(x, l, z).norm(), 1e-10);
    EXPECT_LT((residualPoint(x, l, z + w) + w).norm(), 1e-10);
  }
}

TEST(Residuals, Motion) {
  const Vec3 l(1, -2, 0.5), d(0.3, 0.1, -0.2);
  EXPECT_EQ(residualMotion(l, l, Pose()), Vec3::Zero());
  EXPECT_LT(residualMotion(l, l + d, Pose::fromTranslation(d)).norm(), 1e-15);

  Random rng(3);
  for (int i = 0; i < 50; ++i) {
    const Pose H = rng.pose(2.0);
    const Vec3 l_prev = rng.vec3(10.0), q = rng.vec3(0.2);
    EXPECT_LT((residualMotion(l_prev, applyMotion(H, l_prev) + q, H) - q).norm(), 1e-10);
  }
}

TEST(Residuals, Smoothness) {
  Random rng(4);
  for (int i = 0; i < 50; ++i) {
    const Pose Ha = rng.pose(2.0);
    EXPECT_LT(residualSmoothness(Ha, Ha).norm(), 1e-12);
    Vec6 d = rng.vec6(0.5);
    EXPECT_LT((residualSmoothness(Ha, Ha * exp(d)) - d).norm(), 1e-9);
  }
}

TEST(Residuals, Prior) {
  Random rng(5);
  const Pose p = rng.pose();
  EXPECT_LT(residualPrior(p, p).norm(), 1e-12);
  const Vec6 d = rng.vec6(0.3);
  EXPECT_LT((residualPrior(p * exp(d), p) - d).norm(), 1e-9);
}

// Jacobians against central finite differences.

class JacobianTest : public ::testing::TestWithParam<FactorKind> {};

TEST_P(JacobianTest, MatchesCentralDifferences) {
  Random rng(100 + static_cast<unsigned>(GetParam()));
  for (int trial = 0; trial < 100; ++trial) {
    const testing::FactorConfig cfg = testing::randomFactorConfig(GetParam(), rng);
    std::vector<const VariableValue*> ptrs;
    for (const auto& v : cfg.values) ptrs.push_back(&v);
    const FactorLinearization lin = linearizeFactor(cfg.factor, ptrs);
    EXPECT_LT((lin.residual - evaluateResidual(cfg.factor, ptrs)).norm(), 1e-12);
    const auto numeric = testing::numericJacobians(cfg.factor, cfg.values, 1e-6);
    ASSERT_EQ(lin.jacobians.size(), numeric.size());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const double scale = std::max(numeric[k].norm(), 1.0);
      EXPECT_LT((lin.jacobians[k] - numeric[k]).norm() / scale, 1e-5)
          << toString(GetParam()) << " trial " << trial << " key " << k << "\nanalytic\n"
          << lin.jacobians[k] << "\nnumeric\n"
          << numeric[k];
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, JacobianTest,
                         ::testing::Values(FactorKind::PriorPose, FactorKind::Odometry, FactorKind::PointMeasurement,
                                           FactorKind::Motion, FactorKind::MotionSmoothness),
                         [](const auto& info) { return std::string(toString(info.param)); });

TEST(Jacobians, MotionFactorClosedForms) {
  Random rng(7);
  const Pose H = rng.pose(2.0);
  const VariableValue a = rng.vec3(), b = rng.vec3(), h = H;
  const Factor f{FactorKind::Motion,
                 {VariableKey::landmark(0, 1), VariableKey::landmark(1, 1), VariableKey::motion(1, 1)},
                 std::monostate{},
                 NoiseModel::isotropic(3, 0.1)};
  const auto lin = linearizeFactor(f, {&a, &b, &h});
  EXPECT_LT((lin.jacobians[0] + H.rotation()).norm(), 1e-15);
  EXPECT_EQ(lin.jacobians[1], Eigen::MatrixXd(Mat3::Identity()));
}

// Noise models.

TEST(NoiseModel, RejectsNonPositiveDefinite) {
  EXPECT_THROW(NoiseModel(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  EXPECT_THROW(NoiseModel{asym}, std::invalid_argument);
  EXPECT_THROW(NoiseModel::isotropic(3, -1.0), std::invalid_argument);
}

TEST(NoiseModel, WhitenerInvertsCovariance) {
  Eigen::MatrixXd cov(3, 3);
  cov << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const NoiseModel n(cov);
  const Eigen::MatrixXd W = n.whitener();
  EXPECT_LT((W.transpose() * W - cov.inverse()).norm(), 1e-12);
}

// Graph construction.

// Hand-built dataset: one static point (id 1), one object (id 1) with points 2 and 3,
// `frames` frames, zero noise, robot moving 1 m along x per frame.
Dataset smallDataset(int frames, bool include_point3_every_frame = true) {
  Dataset ds;
  const Pose H = Pose::fromTranslation(Vec3(0.5, 0, 0));
  Vec3 p2(3, 1, 0), p3(3, -1, 0);
  const Vec3 s(5, 5, 1);
  for (int k = 0; k < frames; ++k) {
    Frame f;
    f.index = k;
    const Pose x = Pose::fromTranslation(Vec3(k, 0, 0));
    if (k > 0) f.odometry = Pose::fromTranslation(Vec3(1, 0, 0));
    ds.ground_truth.robot_poses[k] = x;
    const Pose xi = x.inverse();
    f.observations.push_back({k, 1, 0, xi.transformPoint(s)});
    f.observations.push_back({k, 2, 1, xi.transformPoint(p2)});
    if (include_point3_every_frame || k != 1) f.observations.push_back({k, 3, 1, xi.transformPoint(p3)});
    ds.ground_truth.points[{k, 1}] = s;
    ds.ground_truth.points[{k, 2}] = p2;
    ds.ground_truth.points[{k, 3}] = p3;
    p2 = H.transformPoint(p2);
    p3 = H.transformPoint(p3);
    ds.frames.push_back(f);
  }
  return ds;
}

TEST(BuildGraph, CountsPerModeOnThreeFrames) {
  const Dataset ds = smallDataset(3);

  const FactorGraph per_step = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStep);
  EXPECT_EQ(per_step.countVariables(VariableKind::RobotPose), 3u);
  EXPECT_EQ(per_step.countVariables(VariableKind::Landmark), 1u + 6u);
  EXPECT_EQ(per_step.countVariables(VariableKind::Motion), 2u);
  EXPECT_EQ(per_step.countFactors(FactorKind::PriorPose), 1u);
  EXPECT_EQ(per_step.countFactors(FactorKind::Odometry), 2u);
  EXPECT_EQ(per_step.countFactors(FactorKind::PointMeasurement), 9u);
  EXPECT_EQ(per_step.countFactors(FactorKind::Motion), 4u);
  EXPECT_EQ(per_step.countFactors(FactorKind::MotionSmoothness), 0u);

  const FactorGraph constant = buildGraph(ds, EstimationMode::Dynamic, MotionMode::Constant);
  EXPECT_EQ(constant.countVariables(VariableKind::Motion), 1u);
  EXPECT_EQ(constant.countFactors(FactorKind::Motion), 4u);
  EXPECT_EQ(constant.motion_mode.at(1), MotionMode::Constant);

  const FactorGraph smoothed = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStepSmoothed);
  EXPECT_EQ(smoothed.countVariables(VariableKind::Motion), 2u);
  EXPECT_EQ(smoothed.countFactors(FactorKind::MotionSmoothness), 1u);

  for (EstimationMode mode : {EstimationMode::StaticOnly, EstimationMode::SlamMot}) {
    const FactorGraph g = buildGraph(ds, mode, MotionMode::Constant);
    EXPECT_EQ(g.countVariables(VariableKind::Landmark), 1u);
    EXPECT_EQ(g.countVariables(VariableKind::Motion), 0u);
    EXPECT_EQ(g.countFactors(FactorKind::PointMeasurement), 3u);
    EXPECT_EQ(g.countFactors(FactorKind::Motion), 0u);
  }
}

TEST(BuildGraph, StaticOnlyDatasetHasNoMotions) {
  Dataset ds = smallDataset(3);
  for (auto& f : ds.frames) std::erase_if(f.observations, [](const TrackedPoint& p) { return !p.isStatic(); });
  for (EstimationMode mode : {EstimationMode::Dynamic, EstimationMode::StaticOnly, EstimationMode::SlamMot})
    for (MotionMode mm : {MotionMode::PerStep, MotionMode::PerStepSmoothed, MotionMode::Constant})
      EXPECT_EQ(buildGraph(ds, mode, mm).countVariables(VariableKind::Motion), 0u);
}

TEST(BuildGraph, GapInTrackCreatesNoMotionFactor) {
  const Dataset ds = smallDataset(3, false);  // point 3 missing at frame 1
  const FactorGraph g = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStep);
  EXPECT_EQ(g.countVariables(VariableKind::Landmark), 1u + 3u + 2u);
  EXPECT_EQ(g.countFactors(FactorKind::Motion), 2u);  // point 2 only
}

TEST(BuildGraph, SimulatedSceneCountsMatchGenerator) {
  SceneConfig scene = defaultScene();
  scene.n_static_points = 50;
  scene.sensing_range = 1e6;  // everything visible, so the counts are closed form
  const Dataset ds = observe(generateScene(scene), NoiseConfig{});
  const std::size_t nx = static_cast<std::size_t>(scene.n_steps) + 1;
  const std::size_t nd = static_cast<std::size_t>(scene.objects[0].n_points);
  const std::size_t ns = static_cast<std::size_t>(scene.n_static_points);

  const FactorGraph g = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStep);
  EXPECT_EQ(g.countVariables(VariableKind::RobotPose), nx);
  EXPECT_EQ(g.countVariables(VariableKind::Landmark), ns + nd * nx);
  EXPECT_EQ(g.countVariables(VariableKind::Motion), nx - 1);
  EXPECT_EQ(g.countFactors(FactorKind::Odometry), nx - 1);
  EXPECT_EQ(g.countFactors(FactorKind::PointMeasurement), (ns + nd) * nx);
  EXPECT_EQ(g.countFactors(FactorKind::Motion), nd * (nx - 1));

  const FactorGraph c = buildGraph(ds, EstimationMode::Dynamic, MotionMode::Constant);
  EXPECT_EQ(c.countVariables(VariableKind::Motion), 1u);
}

TEST(BuildGraph, Deterministic) {
  const Dataset ds = observe(generateScene(defaultScene()), NoiseConfig{});
  const FactorGraph a = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStepSmoothed);
  const FactorGraph b = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStepSmoothed);
  ASSERT_EQ(a.variables().size(), b.variables().size());
  for (std::size_t i = 0; i < a.variables().size(); ++i) {
    EXPECT_EQ(a.variables()[i].key, b.variables()[i].key);
    EXPECT_EQ(a.variables()[i].value.index(), b.variables()[i].value.index());
  }
  ASSERT_EQ(a.factors().size(), b.factors().size());
  for (std::size_t i = 0; i < a.factors().size(); ++i) {
    EXPECT_EQ(a.factors()[i].kind, b.factors()[i].kind);
    EXPECT_EQ(a.factors()[i].keys, b.factors()[i].keys);
  }
}

TEST(BuildGraph, ResidualsVanishAtGroundTruth) {
  const SceneGroundTruth gt = generateScene(defaultScene());
  const Dataset ds = observe(gt, NoiseConfig{0.0, 0.0, 0.0, 7});
  for (MotionMode mm : {MotionMode::PerStep, MotionMode::PerStepSmoothed, MotionMode::Constant}) {
    FactorGraph g = buildGraph(ds, EstimationMode::Dynamic, mm);
    testing::setToGroundTruth(g, gt, ds);
    for (std::size_t i = 0; i < g.factors().size(); ++i)
      ASSERT_LT(evaluateResidual(g.factors()[i], g.factorValues(i)).norm(), 1e-10)
          << toString(g.factors()[i].kind) << " " << toString(mm);
  }
}

TEST(BuildGraph, InitialValues) {
  const Dataset ds = smallDataset(3);
  const FactorGraph g = buildGraph(ds, EstimationMode::Dynamic, MotionMode::PerStep);
  // poses from odometry integration, landmarks back-projected, motions identity
  EXPECT_TRUE(g.pose(VariableKey::pose(2)).isApprox(Pose::fromTranslation(Vec3(2, 0, 0)), 1e-12));
  EXPECT_LT((g.point(VariableKey::landmark(2, 2)) - ds.ground_truth.points.at({2, 2})).norm(), 1e-12);
  EXPECT_TRUE(g.pose(VariableKey::motion(1, 1)).isApprox(Pose(), 0.0));
}

TEST(BuildGraph, RejectsInconsistentDatasets) {
  Dataset missing_odom = smallDataset(3);
  missing_odom.frames[1].odometry.reset();
  EXPECT_THROW(buildGraph(missing_odom, EstimationMode::Dynamic, MotionMode::PerStep), GraphBuildError);

  Dataset object_switch = smallDataset(3);
  object_switch.frames[2].observations[1].object_id = 2;
  EXPECT_THROW(buildGraph(object_switch, EstimationMode::Dynamic, MotionMode::PerStep), GraphBuildError);

  Dataset duplicate = smallDataset(3);
  duplicate.frames[1].observations.push_back(duplicate.frames[1].observations[0]);
  EXPECT_THROW(buildGraph(duplicate, EstimationMode::Dynamic, MotionMode::PerStep), GraphBuildError);

  Dataset wrong_frame = smallDataset(3);
  wrong_frame.frames[1].observations[0].frame = 2;
  EXPECT_THROW(buildGraph(wrong_frame, EstimationMode::Dynamic, MotionMode::PerStep), GraphBuildError);

  Dataset gap = smallDataset(3);
  gap.frames[2].index = 5;
  EXPECT_THROW(buildGraph(gap, EstimationMode::Dynamic, MotionMode::PerStep), GraphBuildError);
}

TEST(BuildGraph, MotionOnlyGraphFreesOnlyMotions) {
  const Dataset ds = smallDataset(3);
  const FactorGraph g = buildMotionOnlyGraph(ds, integrateOdometry(ds), MotionMode::Constant);
  for (const auto& v : g.variables()) EXPECT_EQ(v.fixed, v.key.kind != VariableKind::Motion) << v.key.str();
  EXPECT_EQ(g.countFactors(FactorKind::Motion), 4u);
}

TEST(FactorGraph, RejectsBadFactors) {
  FactorGraph g;
  g.addVariable(VariableKey::pose(0), Pose());
  EXPECT_THROW(g.addVariable(VariableKey::pose(0), Pose()), std::invalid_argument);
  EXPECT_THROW(g.addFactor({FactorKind::Odometry, {VariableKey::pose(0)}, Pose(), NoiseModel::isotropic(6, 1.0)}),
               std::invalid_argument);
  EXPECT_THROW(g.addFactor({FactorKind::Odometry,
                            {VariableKey::pose(0), VariableKey::pose(1)},
                            Pose(),
                            NoiseModel::isotropic(6, 1.0)}),
               std::invalid_argument);
  EXPECT_THROW(g.addFactor({FactorKind::PriorPose, {VariableKey::pose(0)}, Pose(), NoiseModel::isotropic(3, 1.0)}),
               std::invalid_argument);
}

}  // namespace
}  // namespace dynslam
