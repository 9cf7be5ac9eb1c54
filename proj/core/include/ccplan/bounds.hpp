#pragma once

#include <map>
#include <string>
#include <tuple>

namespace ccplan {

/// Concentration inequality used to convert risk levels into sigma
/// multipliers. VysochanskijPetunin applies to unimodal statistics with
/// lambda > sqrt(5/3); Cantelli is distribution-free for lambda > 0.
enum class BoundKind { VysochanskijPetunin, Cantelli };

std::string to_string(BoundKind kind);

/// Smallest lambda admitted by the bound. sqrt(5/3) for VP, 0 for Cantelli.
double lambda_domain_min(BoundKind kind);

/// Largest per-constraint risk the bound can certify: 1/6 for VP (at the
/// lambda domain boundary), 1 for Cantelli.
double omega_domain_max(BoundKind kind);

/// Upper tail probability at lambda standard deviations:
/// 4/(9(lambda^2+1)) for VP, 1/(lambda^2+1) for Cantelli.
/// Throws std::domain_error when lambda is outside the bound's domain.
double tail_bound(BoundKind kind, double lambda);

/// Inverse of tail_bound: the sigma multiplier that certifies risk omega.
/// Throws std::domain_error when omega is outside the bound's range.
double lambda_for_risk(BoundKind kind, double omega);

/// Derivative of tail_bound with respect to lambda.
double tail_bound_derivative(BoundKind kind, double lambda);

/// Derivative of lambda_for_risk with respect to omega; lambda_for_risk is
/// convex on (0, 1/3), which makes per-row tangent outer approximations of
/// the multiplier valid.
double lambda_for_risk_derivative(BoundKind kind, double omega);

/// Key (vehicle, step, halfspace row) of one target chance constraint.
using TargetRowKey = std::tuple<int, int, int>;
/// Key (collision pair index, step) of one collision chance constraint.
using CollisionRowKey = std::tuple<int, int>;

/// Risk split across the individual chance constraints. Target rows carry
/// sigma multipliers lambda; collision rows carry risk levels omega.
struct RiskAllocation {
  BoundKind kind = BoundKind::VysochanskijPetunin;
  double alpha = 0.0;  // joint target budget
  double beta = 0.0;   // joint obstacle budget
  double gamma = 0.0;  // joint vehicle-pair budget
  std::map<TargetRowKey, double> target_lambda;
  std::map<CollisionRowKey, double> collision_omega;  // vehicle pairs
  std::map<CollisionRowKey, double> obstacle_omega;   // vehicle-obstacle pairs
  bool optimize_target_lambda = false;  // treat target lambdas as decision variables

  /// Sum of tail bounds over target rows; must not exceed alpha.
  double target_risk_sum() const;
  /// Sums of collision/obstacle omegas; must not exceed gamma/beta.
  double collision_risk_sum() const;
  double obstacle_risk_sum() const;
};

/// Result of splitting a joint budget uniformly over `count` constraints.
struct UniformAllocation {
  double omega = 0.0;
  double lambda = 0.0;
};

/// omega = total/count with lambda = lambda_for_risk(kind, omega).
/// Throws std::domain_error when total/count leaves the bound's omega domain
/// (infeasible allocation).
UniformAllocation uniform_allocation(double total, int count, BoundKind kind);

}  // namespace ccplan
