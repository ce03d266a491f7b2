#include "dynslam/factors/factor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace dynslam {

std::string VariableKey::str() const {
  std::ostringstream os;
  switch (kind) {
    case VariableKind::RobotPose: os << "x" << frame; break;
    case VariableKind::Landmark: os << "l" << id << "@" << frame; break;
    case VariableKind::Motion: os << "H" << id << "@" << frame; break;
  }
  return os.str();
}

NoiseModel::NoiseModel(const Eigen::MatrixXd& covariance, std::optional<double> robust_delta)
    : covariance_(covariance), robust_delta_(robust_delta) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0)
    throw std::invalid_argument("noise covariance must be square and non-empty");
  if (!covariance.isApprox(covariance.transpose(), 1e-12))
    throw std::invalid_argument("noise covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("noise covariance is not positive definite");
  // covariance = L L^T  =>  covariance^-1 = L^-T L^-1, so W = L^-1.
  const Eigen::MatrixXd L = llt.matrixL();
  whitener_ = L.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols()));
  if (robust_delta_ && !(*robust_delta_ > 0.0)) throw std::invalid_argument("robust delta must be positive");
}

NoiseModel NoiseModel::isotropic(int dim, double sigma, std::optional<double> robust_delta) {
  if (!(sigma > 0.0)) throw std::invalid_argument("noise sigma must be > 0");
  return NoiseModel(Eigen::MatrixXd::Identity(dim, dim) * (sigma * sigma), robust_delta);
}

NoiseModel NoiseModel::diagonal(const Eigen::VectorXd& sigmas, std::optional<double> robust_delta) {
  if (!(sigmas.array() > 0.0).all()) throw std::invalid_argument("noise sigmas must be > 0");
  return NoiseModel(Eigen::MatrixXd(sigmas.array().square().matrix().asDiagonal()), robust_delta);
}

const char* toString(FactorKind kind) {
  switch (kind) {
    case FactorKind::PriorPose: return "prior";
    case FactorKind::Odometry: return "odometry";
    case FactorKind::PointMeasurement: return "point";
    case FactorKind::Motion: return "motion";
    case FactorKind::MotionSmoothness: return "smoothness";
  }
  return "?";
}

int expectedArity(FactorKind kind) {
  switch (kind) {
    case FactorKind::PriorPose: return 1;
    case FactorKind::Odometry: return 2;
    case FactorKind::PointMeasurement: return 2;
    case FactorKind::Motion: return 3;
    case FactorKind::MotionSmoothness: return 2;
  }
  return 0;
}

int residualDim(FactorKind kind) {
  switch (kind) {
    case FactorKind::PointMeasurement:
    case FactorKind::Motion: return 3;
    default: return 6;
  }
}

Vec6 residualPrior(const Pose& x, const Pose& prior) { return log(prior.inverse() * x).vector(); }

Vec6 residualOdometry(const Pose& x_prev, const Pose& x_curr, const Pose& measured) {
  return log(measured.inverse() * (x_prev.inverse() * x_curr)).vector();
}

Vec3 residualPoint(const Pose& x, const Vec3& landmark, const Vec3& measured) {
  return x.rotation().transpose() * (landmark - x.translation()) - measured;
}

Vec3 residualMotion(const Vec3& landmark_prev, const Vec3& landmark_curr, const Pose& motion) {
  return landmark_curr - motion.transformPoint(landmark_prev);
}

Vec6 residualSmoothness(const Pose& motion_a, const Pose& motion_b) {
  return log(motion_a.inverse() * motion_b).vector();
}

namespace {

const Pose& asPose(const VariableValue* v) {
  if (const auto* p = std::get_if<Pose>(v)) return *p;
  throw std::invalid_argument("factor expected a pose variable");
}

const Vec3& asPoint(const VariableValue* v) {
  if (const auto* p = std::get_if<Vec3>(v)) return *p;
  throw std::invalid_argument("factor expected a point variable");
}

template <typename T>
const T& measurementAs(const Factor& f) {
  if (const auto* m = std::get_if<T>(&f.measurement)) return *m;
  throw std::invalid_argument(std::string("missing measurement for ") + toString(f.kind) + " factor");
}

void checkArity(const Factor& f, std::size_t n) {
  if (static_cast<int>(n) != expectedArity(f.kind) || f.keys.size() != n)
    throw std::invalid_argument(std::string("arity mismatch for ") + toString(f.kind) + " factor");
}

// Jacobians of e = log(A^-1 B) for right perturbations of A and B.
void relativeLogJacobians(const Pose& A, const Pose& B, const Vec6& e, Eigen::MatrixXd& dA, Eigen::MatrixXd& dB) {
  const Mat6 Jri = rightJacobianInverse(e);
  dB = Jri;
  dA = -Jri * adjoint((A.inverse() * B).inverse());
}

}  // namespace

Eigen::VectorXd evaluateResidual(const Factor& f, const std::vector<const VariableValue*>& v) {
  checkArity(f, v.size());
  switch (f.kind) {
    case FactorKind::PriorPose: return residualPrior(asPose(v[0]), measurementAs<Pose>(f));
    case FactorKind::Odometry: return residualOdometry(asPose(v[0]), asPose(v[1]), measurementAs<Pose>(f));
    case FactorKind::PointMeasurement: return residualPoint(asPose(v[0]), asPoint(v[1]), measurementAs<Vec3>(f));
    case FactorKind::Motion: return residualMotion(asPoint(v[0]), asPoint(v[1]), asPose(v[2]));
    case FactorKind::MotionSmoothness: return residualSmoothness(asPose(v[0]), asPose(v[1]));
  }
  throw std::logic_error("unknown factor kind");
}

FactorLinearization linearizeFactor(const Factor& f, const std::vector<const VariableValue*>& v) {
  checkArity(f, v.size());
  FactorLinearization out;
  out.jacobians.resize(v.size());
  switch (f.kind) {
    case FactorKind::PriorPose: {
      const Vec6 e = residualPrior(asPose(v[0]), measurementAs<Pose>(f));
      out.residual = e;
      out.jacobians[0] = rightJacobianInverse(e);
      break;
    }
    case FactorKind::Odometry: {
      const Pose& a = asPose(v[0]);
      const Pose& b = asPose(v[1]);
      const Pose& o = measurementAs<Pose>(f);
      const Vec6 e = residualOdometry(a, b, o);
      out.residual = e;
      // o^-1 a^-1 b exp(d) = E exp(d); a exp(d) enters as E exp(-Ad_{(a^-1 b)^-1} d)
      relativeLogJacobians(a, b, e, out.jacobians[0], out.jacobians[1]);
      break;
    }
    case FactorKind::PointMeasurement: {
      const Pose& x = asPose(v[0]);
      const Vec3& l = asPoint(v[1]);
      const Mat3 Rt = x.rotation().transpose();
      const Vec3 local = Rt * (l - x.translation());
      out.residual = local - measurementAs<Vec3>(f);
      Eigen::MatrixXd Jx(3, 6);
      Jx.leftCols<3>() = skew(local);
      Jx.rightCols<3>() = -Mat3::Identity();
      out.jacobians[0] = Jx;
      out.jacobians[1] = Rt;
      break;
    }
    case FactorKind::Motion: {
      const Vec3& lp = asPoint(v[0]);
      const Vec3& lc = asPoint(v[1]);
      const Pose& H = asPose(v[2]);
      const Mat3 R = H.rotation();
      out.residual = residualMotion(lp, lc, H);
      out.jacobians[0] = -R;
      out.jacobians[1] = Mat3::Identity();
      Eigen::MatrixXd JH(3, 6);
      JH.leftCols<3>() = R * skew(lp);
      JH.rightCols<3>() = -R;
      out.jacobians[2] = JH;
      break;
    }
    case FactorKind::MotionSmoothness: {
      const Pose& a = asPose(v[0]);
      const Pose& b = asPose(v[1]);
      const Vec6 e = residualSmoothness(a, b);
      out.residual = e;
      relativeLogJacobians(a, b, e, out.jacobians[0], out.jacobians[1]);
      break;
    }
  }
  return out;
}

}  // namespace dynslam
