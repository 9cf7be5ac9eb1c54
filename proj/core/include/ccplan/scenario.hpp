#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccplan/bounds.hpp"
#include "ccplan/dynamics.hpp"
#include "ccplan/moments.hpp"

namespace ccplan {

/// Convex polytope { x : G x <= h }.
struct Polytope {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  int rows() const { return static_cast<int>(G.rows()); }
  void validate(int state_dim) const;
};

/// Steps at which a vehicle's target set applies (1-based).
struct TargetSchedule {
  bool terminal_only = true;
  std::vector<int> steps;

  std::vector<int> resolve(int horizon) const;
};

/// One polytopic target set together with the steps it applies to.
struct TargetSet {
  Polytope polytope;
  TargetSchedule schedule;
};

struct VehicleSpec {
  Eigen::VectorXd x0;
  std::vector<TargetSet> targets;  // union over sets gives the rows per step
};

/// Known, non-random object the vehicles must stay clear of.
struct ObstacleSpec {
  std::vector<Eigen::VectorXd> centers;  // o(k) for k = 1..N, state-dim vectors
  double radius = 0.0;

  const Eigen::VectorXd& center_at(int step) const;  // 1-based step
};

enum class CollisionKind { VehiclePair, VehicleObstacle };

/// One 2-norm clearance requirement, enumerated over all steps:
/// |S (x_i - x_j)| >= radius (pair) or |S (x_i - o(k))| >= radius (obstacle).
struct CollisionPair {
  CollisionKind kind = CollisionKind::VehiclePair;
  int i = 0;  // vehicle index
  int j = 0;  // second vehicle index (pair) or obstacle index
  double radius = 0.0;
};

/// How risk budgets are split across individual chance constraints.
///  - Uniform: fixed equal split of alpha/beta/gamma.
///  - Optimized: target multipliers become decision variables constrained by
///    the bound's risk-sum; collision risks stay uniform.
///  - Explicit: caller-provided per-constraint values.
enum class AllocationMode { Uniform, Optimized, Explicit };

struct CcpConfig {
  double obj_tol = 1e-6;
  double slack_tol = 1e-8;
  int max_iters = 100;
  double penalty0 = 1e4;
  double penalty_growth = 2.0;

  void validate() const;
};

/// Full problem description: dynamics, vehicles, clearance requirements,
/// disturbance, risk thresholds and solve configuration.
struct Scenario {
  LtiSystem system;
  std::optional<CwhParams> cwh;  // set when the system came from the CWH model
  InputModel input_model = InputModel::ImpulseAtStart;
  int horizon = 0;
  Eigen::VectorXd input_lo, input_hi;  // admissible input box, per input dim

  std::vector<VehicleSpec> vehicles;

  double collision_radius = 0.0;
  Eigen::VectorXd s_diag;  // diagonal of the position selector, length n
  bool all_pairs = true;
  std::vector<std::pair<int, int>> pair_list;  // used when !all_pairs, i < j
  std::vector<ObstacleSpec> obstacles;

  DisturbanceSpec disturbance;

  double alpha = 0.0;  // joint target violation budget
  double beta = 0.0;   // joint obstacle violation budget
  double gamma = 0.0;  // joint vehicle-pair violation budget

  BoundKind bound = BoundKind::VysochanskijPetunin;
  AllocationMode allocation = AllocationMode::Uniform;
  RiskAllocation explicit_allocation;  // used when allocation == Explicit

  CcpConfig ccp;
  std::uint64_t seed = 0;

  std::string canonical_json;  // filled by the IO layer; empty for in-memory scenarios

  int num_vehicles() const { return static_cast<int>(vehicles.size()); }
  int state_dim() const { return system.state_dim(); }
  int input_dim() const { return system.input_dim(); }

  /// Position selector S with zero rows dropped (q x n).
  Eigen::MatrixXd selector() const;

  /// Vehicle pairs followed by (vehicle, obstacle) pairs, in index order.
  std::vector<CollisionPair> collision_pairs() const;

  struct TargetRowRef {
    int vehicle = 0;
    int step = 0;  // 1-based
    int row = 0;   // halfspace index within the rows active at that step
  };
  /// All target chance-constraint rows in deterministic order
  /// (vehicle-major, then step, then row).
  std::vector<TargetRowRef> target_rows() const;

  /// Halfspaces (g, h) active for one vehicle at one step, concatenated over
  /// its scheduled target sets.
  std::vector<std::pair<Eigen::RowVectorXd, double>> target_rows_at(int vehicle, int step) const;

  bool has_vehicle_pairs() const;
  bool has_obstacles() const { return !obstacles.empty(); }

  /// Throws std::invalid_argument with a descriptive message on any
  /// inconsistency (thresholds outside (0, 1/6), dimension mismatches, ...).
  void validate() const;
};

/// Builds the risk allocation for the scenario's mode and bound kind.
/// Throws std::domain_error when a uniform split leaves the bound's domain.
RiskAllocation make_allocation(const Scenario& scenario);

/// Copy of the scenario with a different bound kind (used for comparisons).
Scenario with_bound(const Scenario& scenario, BoundKind kind);

}  // namespace ccplan
