#pragma once

#include <vector>

#include "ccplan/conic.hpp"
#include "ccplan/scenario.hpp"

namespace ccplan {

/// Previous iterate of the convex-concave procedure: one stacked input
/// vector per vehicle.
struct LinearizationPoint {
  std::vector<Eigen::VectorXd> inputs;

  static LinearizationPoint zero(const Scenario& scenario);
};

/// Variable layout of an assembled subproblem:
/// [U_1 ... U_Nv | slack | omega, multiplier pairs (optimized mode) |
///  epigraph t]. In optimized mode each non-degenerate target row gets a
/// risk level omega_j (linear budget sum omega <= alpha) and a multiplier
/// variable y_j kept above lambda(omega_j) by tangent cuts.
struct VariableLayout {
  int num_vehicles = 0;
  int inputs_per_vehicle = 0;
  int num_slack = 0;
  int num_risk = 0;  // optimized target rows; 0 in fixed mode
  int slack_offset = 0;
  int omega_offset = 0;
  int lambda_offset = 0;
  int epigraph_index = 0;
  int total = 0;

  int u_offset(int vehicle) const { return vehicle * inputs_per_vehicle; }
};

/// Input-independent data derived from a scenario: concatenated dynamics,
/// per-target-row statistics and per-collision-row moment blocks.
class PlanContext {
 public:
  explicit PlanContext(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  const ConcatenatedDynamics& dynamics() const { return cd_; }
  const Eigen::MatrixXd& selector() const { return selector_; }

  struct TargetRow {
    Scenario::TargetRowRef ref;
    Eigen::RowVectorXd coeff_u;  // G row applied through the input map
    double mean_const = 0.0;     // G (A^k x0 + D(k) E[W])
    double offset = 0.0;         // h
    double std = 0.0;            // disturbance-only; invariant to U
    bool degenerate = false;     // zero std: row is deterministic
  };
  const std::vector<TargetRow>& target_rows() const { return target_rows_; }

  struct CollisionRow {
    CollisionPair pair;
    int pair_index = 0;
    int step = 0;
    QuadraticMomentData moments;  // of the centered stochastic part
    Eigen::VectorXd zbar_const;
    Eigen::MatrixXd zbar_u;  // maps U_i (and, negated, U_j) into zbar
  };
  const std::vector<CollisionRow>& collision_rows() const { return collision_rows_; }

  /// zbar of one collision row at the given inputs.
  Eigen::VectorXd zbar_at(const CollisionRow& row, const std::vector<Eigen::VectorXd>& inputs) const;

 private:
  Scenario scenario_;
  ConcatenatedDynamics cd_;
  Eigen::MatrixXd selector_;
  std::vector<TargetRow> target_rows_;
  std::vector<CollisionRow> collision_rows_;
};

/// Deterministic row for one target halfspace over the full layout:
/// G E[x(k)] + lambda * Std[G x(k)] <= h. With lambda_var >= 0 the
/// multiplier is a decision variable; degenerate rows drop the std term.
AffineRow make_target_row(const PlanContext::TargetRow& row, double lambda,
                          const VariableLayout& layout, int lambda_var = -1);

/// Linearized difference-of-convex collision row as one SOC row over the
/// full layout. The norm side carries the scaled variance block; the right
/// side carries the slack entry plus the first-order expansion of the
/// squared-norm expectation about the linearization point.
SocRow make_collision_row(const PlanContext& ctx, const PlanContext::CollisionRow& row,
                          double multiplier, const LinearizationPoint& lin,
                          const VariableLayout& layout, int slack_var);

/// Exact (unlinearized) DC constraint value at a candidate input:
/// E||zbar + z||^2 - lambda(omega) * Std||zbar + z||^2 - r^2. Non-negative
/// values certify the chance constraint through the tail bound.
double exact_dc_row_value(const PlanContext& ctx, const PlanContext::CollisionRow& row,
                          const std::vector<Eigen::VectorXd>& inputs, BoundKind kind,
                          double omega);

/// Tangent of the convex multiplier map at one risk level:
/// y_row >= slope * omega_row + intercept.
struct RiskCut {
  int row = 0;  // index into the optimized-row order
  double slope = 0.0;
  double intercept = 0.0;
};

/// Tangent cut of lambda_for_risk at omega_hat for one optimized row.
RiskCut make_risk_cut(BoundKind kind, int row, double omega_hat);

struct AssembledProblem {
  ConicProblem conic;
  VariableLayout layout;
  // Multiplier variable index per target row; -1 when fixed or degenerate.
  std::vector<int> lambda_var_of_row;
  // Omega variable index per target row; -1 when fixed or degenerate.
  std::vector<int> omega_var_of_row;
};

/// Builds the convex subproblem at the given linearization point: fuel
/// objective through an epigraph cone, input box, hard target rows,
/// slack-relaxed collision rows and, in optimized mode, the linear risk
/// budget plus the accumulated multiplier cuts.
AssembledProblem assemble_problem(const PlanContext& ctx, const RiskAllocation& alloc,
                                  const LinearizationPoint& lin, double penalty,
                                  const std::vector<RiskCut>& cuts = {});

/// Splits a stacked solution vector into per-vehicle inputs.
std::vector<Eigen::VectorXd> split_inputs(const Eigen::VectorXd& x, const VariableLayout& layout);

}  // namespace ccplan
