#include "ccplan/solver.hpp"

#include <cmath>
#include <limits>

namespace ccplan {

namespace {

constexpr double kCutTol = 1e-10;
constexpr int kMaxCutRounds = 40;
constexpr double kPenaltyCap = 1e12;

struct SubproblemResult {
  Eigen::VectorXd x;
  std::vector<Eigen::VectorXd> inputs;
  double objective = 0.0;
  double slack_sum = 0.0;
  int backend_iterations = 0;
};

double input_cost(const std::vector<Eigen::VectorXd>& inputs) {
  double cost = 0.0;
  for (const Eigen::VectorXd& u : inputs) cost += u.squaredNorm();
  return cost;
}

}  // namespace

PlanSolution solve_ccp(const Scenario& scenario, const RiskAllocation& allocation,
                       const CcpConfig& config, const SolverBackend& backend) {
  config.validate();
  PlanContext ctx(scenario);
  RiskAllocation alloc = allocation;

  PlanSolution out;
  out.bound = alloc.kind;

  LinearizationPoint lin = LinearizationPoint::zero(scenario);
  double penalty = config.penalty0;
  double prev_objective = std::numeric_limits<double>::quiet_NaN();

  std::vector<RiskCut> cuts;
  bool optimizing = alloc.optimize_target_lambda;

  // Risk variables exist for non-degenerate target rows only.
  std::vector<size_t> risk_rows;
  for (size_t t = 0; t < ctx.target_rows().size(); ++t) {
    if (!ctx.target_rows()[t].degenerate) risk_rows.push_back(t);
  }
  if (risk_rows.empty()) optimizing = false;
  alloc.optimize_target_lambda = optimizing;

  if (optimizing) {
    // Seed each row's multiplier model at the uniform split and at the
    // budget end so the first master is well shaped.
    const double omega_uniform = scenario.alpha / static_cast<double>(risk_rows.size());
    for (int j = 0; j < static_cast<int>(risk_rows.size()); ++j) {
      cuts.push_back(make_risk_cut(alloc.kind, j, omega_uniform));
      cuts.push_back(make_risk_cut(alloc.kind, j, scenario.alpha));
    }
  }

  auto solve_subproblem = [&](RiskAllocation& a, bool with_cuts,
                              int ccp_iter) -> SubproblemResult {
    std::optional<std::pair<ConicSolution, AssembledProblem>> last_good;
    for (int round = 0;; ++round) {
      AssembledProblem prob =
          assemble_problem(ctx, a, lin, penalty, with_cuts ? cuts : std::vector<RiskCut>{});
      ConicSolution sol = backend.solve(prob.conic);
      if (sol.status != SolveStatus::Optimal) {
        if (last_good) {
          // A refinement round failed numerically; the previous round's
          // solution is valid for a slightly looser multiplier model and the
          // final fixed-allocation pass restores exactness.
          sol = std::move(last_good->first);
          prob = std::move(last_good->second);
        } else if (ccp_iter <= 1) {
          throw InfeasibleScenarioError(
              "subproblem " + to_string(sol.status) + " at the initial linearization; "
              "check target reachability under the input box and the risk levels");
        } else {
          throw std::runtime_error("conic backend returned " + to_string(sol.status) +
                                   " at CCP iteration " + std::to_string(ccp_iter));
        }
      } else if (a.optimize_target_lambda && prob.layout.num_risk > 0) {
        // Refine rows whose multiplier variable fell below the true convex
        // map; tangents at the solved risk levels are exact there.
        bool refined = false;
        if (round < kMaxCutRounds) {
          for (int j = 0; j < prob.layout.num_risk; ++j) {
            const double omega_hat = sol.x[prob.layout.omega_offset + j];
            const double y_hat = sol.x[prob.layout.lambda_offset + j];
            const double lambda_true = lambda_for_risk(a.kind, omega_hat);
            if (lambda_true - y_hat > kCutTol * std::max(1.0, lambda_true)) {
              cuts.push_back(make_risk_cut(a.kind, j, omega_hat));
              refined = true;
            }
          }
        }
        if (refined) {
          last_good = std::make_pair(sol, prob);
          continue;
        }
      }

      if (a.optimize_target_lambda && prob.layout.num_risk > 0) {
        // Record the exact multipliers for the solved risk levels.
        for (size_t j = 0; j < risk_rows.size(); ++j) {
          const auto& ref = ctx.target_rows()[risk_rows[j]].ref;
          const double omega_hat =
              std::clamp(sol.x[prob.layout.omega_offset + static_cast<int>(j)],
                         0.01 * a.alpha / prob.layout.num_risk, a.alpha);
          a.target_lambda[{ref.vehicle, ref.step, ref.row}] =
              lambda_for_risk(a.kind, omega_hat);
        }
      }

      SubproblemResult res;
      res.x = sol.x;
      res.inputs = split_inputs(sol.x, prob.layout);
      res.objective = input_cost(res.inputs);
      res.slack_sum =
          sol.x.segment(prob.layout.slack_offset, prob.layout.num_slack).cwiseMax(0.0).sum();
      res.backend_iterations = sol.iterations;
      return res;
    }
  };

  bool converged = false;
  SubproblemResult current;
  int iter = 0;
  for (iter = 1; iter <= config.max_iters; ++iter) {
    current = solve_subproblem(alloc, optimizing, iter);

    IterationRecord rec;
    rec.iter = iter;
    rec.objective = current.objective;
    rec.slack_sum = current.slack_sum;
    rec.penalty = penalty;
    rec.penalized_objective = current.objective + penalty * current.slack_sum;
    rec.backend_iterations = current.backend_iterations;
    out.trace.push_back(rec);

    lin.inputs = current.inputs;

    const bool no_dc_rows = ctx.collision_rows().empty();
    if (no_dc_rows ||
        (iter > 1 && std::abs(current.objective - prev_objective) < config.obj_tol &&
         current.slack_sum < config.slack_tol)) {
      converged = true;
      break;
    }
    prev_objective = current.objective;
    if (current.slack_sum >= config.slack_tol) {
      penalty = std::min(penalty * config.penalty_growth, kPenaltyCap);
    }
  }
  out.iterations = static_cast<int>(out.trace.size());
  out.converged = converged;

  if (optimizing) {
    // The budget row holds sum omega <= alpha up to solver tolerance;
    // project onto the exact budget and re-solve once with the allocation
    // fixed, so the certified solution carries an exactly feasible split.
    double risk = 0.0;
    std::vector<double> omegas(risk_rows.size());
    for (size_t j = 0; j < risk_rows.size(); ++j) {
      const auto& ref = ctx.target_rows()[risk_rows[j]].ref;
      omegas[j] = tail_bound(alloc.kind, alloc.target_lambda.at({ref.vehicle, ref.step, ref.row}));
      risk += omegas[j];
    }
    if (risk > alloc.alpha) {
      const double scale = alloc.alpha / risk * (1.0 - 1e-12);
      for (size_t j = 0; j < risk_rows.size(); ++j) {
        const auto& ref = ctx.target_rows()[risk_rows[j]].ref;
        alloc.target_lambda[{ref.vehicle, ref.step, ref.row}] =
            lambda_for_risk(alloc.kind, omegas[j] * scale);
      }
    }
    alloc.optimize_target_lambda = false;
    current = solve_subproblem(alloc, false, out.iterations);

    IterationRecord rec;
    rec.iter = ++out.iterations;
    rec.objective = current.objective;
    rec.slack_sum = current.slack_sum;
    rec.penalty = penalty;
    rec.penalized_objective = current.objective + penalty * current.slack_sum;
    rec.backend_iterations = current.backend_iterations;
    out.trace.push_back(rec);
    lin.inputs = current.inputs;
  }

  out.inputs = current.inputs;
  out.cost = current.objective;
  out.slack_residual = current.slack_sum;
  out.allocation = alloc;

  // Margins at the returned inputs.
  out.target_margins.reserve(ctx.target_rows().size());
  for (const PlanContext::TargetRow& row : ctx.target_rows()) {
    double lhs = row.coeff_u.dot(out.inputs[row.ref.vehicle]) + row.mean_const;
    if (!row.degenerate) {
      lhs += alloc.target_lambda.at({row.ref.vehicle, row.ref.step, row.ref.row}) * row.std;
    }
    out.target_margins.push_back(row.offset - lhs);
  }
  out.collision_margins.reserve(ctx.collision_rows().size());
  for (const PlanContext::CollisionRow& row : ctx.collision_rows()) {
    const auto& omega_map = row.pair.kind == CollisionKind::VehiclePair ? alloc.collision_omega
                                                                        : alloc.obstacle_omega;
    const double omega = omega_map.at({row.pair_index, row.step});
    out.collision_margins.push_back(exact_dc_row_value(ctx, row, out.inputs, alloc.kind, omega));
  }

  constexpr double kMarginTol = 1e-9;
  bool margins_ok = true;
  for (double m : out.target_margins) margins_ok = margins_ok && m >= -kMarginTol;
  for (double m : out.collision_margins) margins_ok = margins_ok && m >= -kMarginTol;
  const bool risk_ok = alloc.target_risk_sum() <= alloc.alpha * (1.0 + 1e-12) &&
                       alloc.collision_risk_sum() <= alloc.gamma * (1.0 + 1e-12) &&
                       alloc.obstacle_risk_sum() <= alloc.beta * (1.0 + 1e-12);
  out.certified = out.converged && out.slack_residual < config.slack_tol && margins_ok && risk_ok;

  // Mean trajectories, including the initial state.
  out.mean_trajectories.resize(scenario.num_vehicles());
  for (int v = 0; v < scenario.num_vehicles(); ++v) {
    std::vector<Eigen::VectorXd> traj;
    traj.push_back(scenario.vehicles[v].x0);
    const std::vector<Eigen::VectorXd> rest = mean_trajectory(
        ctx.dynamics(), scenario.vehicles[v].x0, out.inputs[v], scenario.disturbance.stacked_mean(v));
    traj.insert(traj.end(), rest.begin(), rest.end());
    out.mean_trajectories[v] = std::move(traj);
  }
  return out;
}

PlanSolution solve_ccp(const Scenario& scenario, const SolverBackend& backend) {
  return solve_ccp(scenario, make_allocation(scenario), scenario.ccp, backend);
}

BoundComparison compare_bounds(const Scenario& scenario, const CcpConfig& config,
                               const SolverBackend& backend) {
  BoundComparison out;
  for (BoundKind kind : {BoundKind::VysochanskijPetunin, BoundKind::Cantelli}) {
    std::optional<PlanSolution>& slot =
        kind == BoundKind::VysochanskijPetunin ? out.vp : out.cantelli;
    std::string& err = kind == BoundKind::VysochanskijPetunin ? out.vp_error : out.cantelli_error;
    try {
      const Scenario variant = with_bound(scenario, kind);
      slot = solve_ccp(variant, make_allocation(variant), config, backend);
    } catch (const std::exception& ex) {
      err = ex.what();
    }
  }
  return out;
}

}  // namespace ccplan
