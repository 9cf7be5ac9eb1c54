#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "ccplan/reformulate.hpp"

namespace ccplan {

/// The subproblem is infeasible at the initial linearization (unreachable
/// target under the input box, or an infeasible risk allocation).
struct InfeasibleScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;  // sum of U_i' U_i
  double slack_sum = 0.0;
  double penalty = 0.0;
  double penalized_objective = 0.0;
  int backend_iterations = 0;
};

struct PlanSolution {
  BoundKind bound = BoundKind::VysochanskijPetunin;
  std::vector<Eigen::VectorXd> inputs;  // stacked input per vehicle
  std::vector<std::vector<Eigen::VectorXd>> mean_trajectories;  // per vehicle, k = 0..N
  double cost = 0.0;
  int iterations = 0;
  double slack_residual = 0.0;
  bool converged = false;
  bool certified = false;
  RiskAllocation allocation;  // final multipliers actually enforced
  std::vector<double> target_margins;     // slack of each target row at the solution
  std::vector<double> collision_margins;  // exact DC value of each collision row
  std::vector<IterationRecord> trace;
};

/// Runs the convex-concave procedure: assemble the linearized subproblem,
/// solve, relinearize, until the objective difference and the slack sum fall
/// under the configured tolerances. The first linearization assumes zero
/// input. On convergence with zero slack every collision row is certified
/// through its exact DC value.
PlanSolution solve_ccp(const Scenario& scenario, const RiskAllocation& allocation,
                       const CcpConfig& config, const SolverBackend& backend);

/// Convenience overload using the scenario's own allocation mode and config.
PlanSolution solve_ccp(const Scenario& scenario, const SolverBackend& backend);

struct BoundComparison {
  std::optional<PlanSolution> vp;
  std::optional<PlanSolution> cantelli;
  std::string vp_error;
  std::string cantelli_error;
};

/// Solves the same scenario under both tail bounds; a kind that fails
/// (infeasible allocation or subproblem) is flagged instead of solved.
BoundComparison compare_bounds(const Scenario& scenario, const CcpConfig& config,
                               const SolverBackend& backend);

}  // namespace ccplan
