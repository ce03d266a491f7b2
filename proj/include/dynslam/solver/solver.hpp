#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dynslam/factors/graph.hpp"

namespace dynslam {

struct HuberResult {
  double rho = 0.0;
  double weight = 1.0;
};

/// rho = r^2 for r <= delta, delta (2r - delta) beyond; weight = min(1, delta / r).
HuberResult huber(double r_norm, double delta);

inline constexpr double kDefaultHuberDelta = 1.345;

struct SolverConfig {
  int max_iterations = 100;
  double relative_decrease_tol = 1e-8;
  /// Stop once the robust cost (whitened units) drops below this; 0 disables.
  double absolute_cost_tol = 1e-12;
  double gradient_norm_tol = 1e-10;
  double initial_lambda = 1e-4;
  /// Huber knee on whitened residual norms, indexed by FactorKind. Infinity disables.
  std::array<double, kNumFactorKinds> huber_delta{kDefaultHuberDelta, kDefaultHuberDelta, kDefaultHuberDelta,
                                                  kDefaultHuberDelta, kDefaultHuberDelta};

  double deltaFor(FactorKind kind) const { return huber_delta[static_cast<std::size_t>(kind)]; }
  void setAllHuberDeltas(double d) { huber_delta.fill(d); }
  /// Throws std::invalid_argument on a non-positive tolerance or iteration cap.
  void validate() const;
};

/// Maps free variables to offsets in the stacked tangent vector.
struct StateLayout {
  std::vector<int> offset;  // per graph variable, -1 when fixed
  int dim = 0;

  static StateLayout of(const FactorGraph& graph);
};

/// Knee used for a factor: its noise model's delta if set, else the solver's class default.
double effectiveHuberDelta(const Factor& factor, const SolverConfig& config);

/// Robust cost sum_i rho(||W_i r_i||).
double robustCost(const FactorGraph& graph, const SolverConfig& config);

/// Gauss-Newton normal equations of the IRLS-weighted, whitened problem:
/// hessian = J^T W J (lower and upper stored), gradient = J^T W r.
struct NormalEquations {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
  StateLayout layout;
};

NormalEquations linearize(const FactorGraph& graph, const SolverConfig& config);

/// Dense reference: stacks the full whitened Jacobian and forms J^T W J directly.
struct DenseNormalEquations {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

DenseNormalEquations linearizeDense(const FactorGraph& graph, const SolverConfig& config);

/// Applies a stacked tangent step: poses x <- x exp(d), points l <- l + d.
void applyStep(FactorGraph& graph, const StateLayout& layout, const Eigen::VectorXd& step);

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  bool linear_solve_failed = false;
  std::string termination;
  std::vector<double> cost_trace;  // cost after each accepted iteration, starting with the initial cost
};

/// Robust Levenberg-Marquardt. Updates the graph's free variables in place.
SolveReport optimize(FactorGraph& graph, const SolverConfig& config = {});

}  // namespace dynslam
