#include "dynslam/solver/solver.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace dynslam {

namespace {
using SparseCholesky = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;
}  // namespace

HuberResult huber(double r_norm, double delta) {
  if (r_norm <= delta) return {r_norm * r_norm, 1.0};
  return {delta * (2.0 * r_norm - delta), delta / r_norm};
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(relative_decrease_tol > 0.0) || !(gradient_norm_tol > 0.0) || !(initial_lambda > 0.0))
    throw std::invalid_argument("solver tolerances and initial lambda must be > 0");
  if (!(absolute_cost_tol >= 0.0)) throw std::invalid_argument("absolute_cost_tol must be >= 0");
  for (double d : huber_delta)
    if (!(d > 0.0)) throw std::invalid_argument("huber deltas must be > 0");
}

StateLayout StateLayout::of(const FactorGraph& graph) {
  StateLayout layout;
  layout.offset.reserve(graph.variables().size());
  for (const auto& v : graph.variables()) {
    if (v.fixed) {
      layout.offset.push_back(-1);
    } else {
      layout.offset.push_back(layout.dim);
      layout.dim += tangentDim(v.value);
    }
  }
  return layout;
}

double effectiveHuberDelta(const Factor& factor, const SolverConfig& config) {
  if (factor.noise.robustDelta()) return *factor.noise.robustDelta();
  return config.deltaFor(factor.kind);
}

double robustCost(const FactorGraph& graph, const SolverConfig& config) {
  double cost = 0.0;
  for (std::size_t i = 0; i < graph.factors().size(); ++i) {
    const Factor& f = graph.factors()[i];
    const Eigen::VectorXd e = f.noise.whiten(evaluateResidual(f, graph.factorValues(i)));
    cost += huber(e.norm(), effectiveHuberDelta(f, config)).rho;
  }
  return cost;
}

namespace {

struct WeightedFactor {
  Eigen::VectorXd whitened;
  std::vector<Eigen::MatrixXd> jacobians;  // whitened
  double weight = 1.0;
  double rho = 0.0;
};

WeightedFactor weightedLinearization(const FactorGraph& graph, std::size_t i, const SolverConfig& config) {
  const Factor& f = graph.factors()[i];
  FactorLinearization lin = linearizeFactor(f, graph.factorValues(i));
  WeightedFactor out;
  const Eigen::MatrixXd& W = f.noise.whitener();
  out.whitened = W * lin.residual;
  out.jacobians.reserve(lin.jacobians.size());
  for (const auto& J : lin.jacobians) out.jacobians.push_back(W * J);
  const HuberResult h = huber(out.whitened.norm(), effectiveHuberDelta(f, config));
  out.weight = h.weight;
  out.rho = h.rho;
  return out;
}

}  // namespace

NormalEquations linearize(const FactorGraph& graph, const SolverConfig& config) {
  NormalEquations ne;
  ne.layout = StateLayout::of(graph);
  const int n = ne.layout.dim;
  ne.gradient = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.factors().size() * 90);

  for (std::size_t i = 0; i < graph.factors().size(); ++i) {
    const WeightedFactor wf = weightedLinearization(graph, i, config);
    ne.cost += wf.rho;
    const auto& slots = graph.factorIndices()[i];
    for (std::size_t a = 0; a < slots.size(); ++a) {
      const int oa = ne.layout.offset[slots[a]];
      if (oa < 0) continue;
      const Eigen::MatrixXd& Ja = wf.jacobians[a];
      ne.gradient.segment(oa, Ja.cols()) += wf.weight * Ja.transpose() * wf.whitened;
      for (std::size_t b = 0; b < slots.size(); ++b) {
        const int ob = ne.layout.offset[slots[b]];
        if (ob < 0) continue;
        const Eigen::MatrixXd block = wf.weight * Ja.transpose() * wf.jacobians[b];
        for (int r = 0; r < block.rows(); ++r)
          for (int c = 0; c < block.cols(); ++c) triplets.emplace_back(oa + r, ob + c, block(r, c));
      }
    }
  }
  // Keep every diagonal entry present so damping never changes the pattern.
  for (int d = 0; d < n; ++d) triplets.emplace_back(d, d, 0.0);
  ne.hessian.resize(n, n);
  ne.hessian.setFromTriplets(triplets.begin(), triplets.end());
  return ne;
}

DenseNormalEquations linearizeDense(const FactorGraph& graph, const SolverConfig& config) {
  const StateLayout layout = StateLayout::of(graph);
  int rows = 0;
  for (const auto& f : graph.factors()) rows += f.noise.dim();

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows, layout.dim);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(rows);
  DenseNormalEquations out;

  int row = 0;
  for (std::size_t i = 0; i < graph.factors().size(); ++i) {
    const WeightedFactor wf = weightedLinearization(graph, i, config);
    const int m = static_cast<int>(wf.whitened.size());
    r.segment(row, m) = wf.whitened;
    w.segment(row, m).setConstant(wf.weight);
    out.cost += wf.rho;
    const auto& slots = graph.factorIndices()[i];
    for (std::size_t a = 0; a < slots.size(); ++a) {
      const int oa = layout.offset[slots[a]];
      if (oa < 0) continue;
      J.block(row, oa, m, wf.jacobians[a].cols()) = wf.jacobians[a];
    }
    row += m;
  }
  out.hessian = J.transpose() * w.asDiagonal() * J;
  out.gradient = J.transpose() * w.asDiagonal() * r;
  return out;
}

void applyStep(FactorGraph& graph, const StateLayout& layout, const Eigen::VectorXd& step) {
  auto& vars = graph.variables();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const int o = layout.offset[i];
    if (o < 0) continue;
    if (auto* p = std::get_if<Pose>(&vars[i].value)) {
      *p = p->retract(step.segment<6>(o));
    } else {
      std::get<Vec3>(vars[i].value) += step.segment<3>(o);
    }
  }
}

SolveReport optimize(FactorGraph& graph, const SolverConfig& config) {
  config.validate();
  SolveReport report;
  double cost = robustCost(graph, config);
  report.initial_cost = cost;
  report.final_cost = cost;
  report.cost_trace.push_back(cost);

  if (!std::isfinite(cost)) {
    report.termination = "non-finite initial cost";
    return report;
  }
  const StateLayout layout0 = StateLayout::of(graph);
  if (layout0.dim == 0 || cost <= config.absolute_cost_tol) {
    report.converged = true;
    report.termination = layout0.dim == 0 ? "no free variables" : "cost below absolute tolerance";
    return report;
  }

  constexpr double kMaxLambda = 1e16;
  double lambda = config.initial_lambda;
  SparseCholesky ldlt;
  bool analyzed = false;

  std::vector<VariableValue> snapshot;
  snapshot.reserve(graph.variables().size());

  while (report.iterations < config.max_iterations) {
    const NormalEquations ne = linearize(graph, config);
    if (ne.gradient.lpNorm<Eigen::Infinity>() < config.gradient_norm_tol) {
      report.converged = true;
      report.termination = "gradient norm";
      break;
    }
    if (!analyzed) {
      ldlt.analyzePattern(ne.hessian);
      analyzed = true;
    }
    const Eigen::VectorXd diag = ne.hessian.diagonal();

    bool accepted = false;
    double new_cost = cost;
    while (!accepted) {
      Eigen::SparseMatrix<double> damped = ne.hessian;
      for (int d = 0; d < damped.rows(); ++d) damped.coeffRef(d, d) += lambda * std::max(diag[d], 1e-12);
      ldlt.factorize(damped);
      if (ldlt.info() != Eigen::Success) {
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
        continue;
      }
      const Eigen::VectorXd step = ldlt.solve(-ne.gradient);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
        continue;
      }

      snapshot.clear();
      for (const auto& v : graph.variables()) snapshot.push_back(v.value);
      applyStep(graph, ne.layout, step);
      new_cost = robustCost(graph, config);
      if (std::isfinite(new_cost) && new_cost < cost) {
        accepted = true;
        lambda = std::max(lambda * 0.1, 1e-15);
      } else {
        for (std::size_t i = 0; i < snapshot.size(); ++i) graph.variables()[i].value = snapshot[i];
        lambda *= 10.0;
        if (lambda > kMaxLambda) break;
      }
    }

    if (!accepted) {
      // No descent direction left at any damping: either we sit at a minimum
      // or the system was singular throughout.
      const bool singular = ldlt.info() != Eigen::Success;
      report.linear_solve_failed = singular;
      report.converged = !singular;
      report.termination = singular ? "linear solve failed (rank deficient system)" : "no further decrease";
      break;
    }

    ++report.iterations;
    const double rel = (cost - new_cost) / std::max(cost, std::numeric_limits<double>::min());
    cost = new_cost;
    report.cost_trace.push_back(cost);
    if (cost <= config.absolute_cost_tol) {
      report.converged = true;
      report.termination = "cost below absolute tolerance";
      break;
    }
    if (rel < config.relative_decrease_tol) {
      report.converged = true;
      report.termination = "relative decrease";
      break;
    }
  }
  if (report.termination.empty()) report.termination = "max iterations";
  report.final_cost = cost;
  return report;
}

}  // namespace dynslam
