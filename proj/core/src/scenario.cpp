#include "ccplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ccplan {

void Polytope::validate(int state_dim) const {
  if (G.rows() < 1) throw std::invalid_argument("Polytope: at least one halfspace row required");
  if (G.cols() != state_dim) throw std::invalid_argument("Polytope: G column count must equal state dim");
  if (G.rows() != h.size()) throw std::invalid_argument("Polytope: G/h row mismatch");
  if (!G.allFinite() || !h.allFinite()) throw std::invalid_argument("Polytope: non-finite entries");
}

std::vector<int> TargetSchedule::resolve(int horizon) const {
  if (terminal_only) return {horizon};
  return steps;
}

const Eigen::VectorXd& ObstacleSpec::center_at(int step) const {
  if (centers.size() == 1) return centers.front();  // static obstacle
  return centers.at(static_cast<size_t>(step) - 1);
}

void CcpConfig::validate() const {
  if (!(obj_tol > 0.0) || !(slack_tol > 0.0)) throw std::invalid_argument("CcpConfig: tolerances must be positive");
  if (max_iters < 1) throw std::invalid_argument("CcpConfig: max_iters must be >= 1");
  if (!(penalty0 > 0.0) || !(penalty_growth >= 1.0)) {
    throw std::invalid_argument("CcpConfig: penalty0 must be positive and growth >= 1");
  }
}

Eigen::MatrixXd Scenario::selector() const {
  const int n = state_dim();
  int q = 0;
  for (int i = 0; i < s_diag.size(); ++i)
    if (s_diag[i] != 0.0) ++q;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(q, n);
  int r = 0;
  for (int i = 0; i < s_diag.size(); ++i) {
    if (s_diag[i] != 0.0) s(r++, i) = s_diag[i];
  }
  return s;
}

std::vector<CollisionPair> Scenario::collision_pairs() const {
  std::vector<CollisionPair> pairs;
  if (num_vehicles() >= 2) {
    if (all_pairs) {
      for (int i = 0; i < num_vehicles() - 1; ++i) {
        for (int j = i + 1; j < num_vehicles(); ++j) {
          pairs.push_back({CollisionKind::VehiclePair, i, j, collision_radius});
        }
      }
    } else {
      for (const auto& [i, j] : pair_list) {
        pairs.push_back({CollisionKind::VehiclePair, i, j, collision_radius});
      }
    }
  }
  for (int v = 0; v < num_vehicles(); ++v) {
    for (size_t o = 0; o < obstacles.size(); ++o) {
      pairs.push_back({CollisionKind::VehicleObstacle, v, static_cast<int>(o), obstacles[o].radius});
    }
  }
  return pairs;
}

std::vector<std::pair<Eigen::RowVectorXd, double>> Scenario::target_rows_at(int vehicle,
                                                                            int step) const {
  std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
  for (const TargetSet& set : vehicles[vehicle].targets) {
    const std::vector<int> steps = set.schedule.resolve(horizon);
    if (std::find(steps.begin(), steps.end(), step) == steps.end()) continue;
    for (int r = 0; r < set.polytope.rows(); ++r) {
      rows.emplace_back(set.polytope.G.row(r), set.polytope.h[r]);
    }
  }
  return rows;
}

std::vector<Scenario::TargetRowRef> Scenario::target_rows() const {
  std::vector<TargetRowRef> rows;
  for (int v = 0; v < num_vehicles(); ++v) {
    for (int step = 1; step <= horizon; ++step) {
      const int count = static_cast<int>(target_rows_at(v, step).size());
      for (int r = 0; r < count; ++r) rows.push_back({v, step, r});
    }
  }
  return rows;
}

bool Scenario::has_vehicle_pairs() const {
  if (num_vehicles() < 2) return false;
  return all_pairs || !pair_list.empty();
}

namespace {

void check_threshold(double value, const char* name) {
  if (!(value > 0.0) || !(value < 1.0 / 6.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in (0, 1/6)");
  }
}

}  // namespace

void Scenario::validate() const {
  system.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const int n = state_dim();
  const int m = input_dim();
  if (input_lo.size() != m || input_hi.size() != m) {
    throw std::invalid_argument("input box must have one interval per input dimension");
  }
  if (((input_hi - input_lo).array() < 0.0).any()) throw std::invalid_argument("input box is empty");
  if (vehicles.empty()) throw std::invalid_argument("at least one vehicle required");

  for (size_t v = 0; v < vehicles.size(); ++v) {
    const VehicleSpec& veh = vehicles[v];
    if (veh.x0.size() != n) throw std::invalid_argument("vehicle x0 dimension mismatch");
    if (veh.targets.empty()) throw std::invalid_argument("vehicle needs at least one target set");
    for (const TargetSet& set : veh.targets) {
      set.polytope.validate(n);
      for (int step : set.schedule.resolve(horizon)) {
        if (step < 1 || step > horizon) throw std::invalid_argument("target step outside 1..N");
      }
    }
  }

  const bool pairs = has_vehicle_pairs();
  if (pairs || has_obstacles()) {
    if (s_diag.size() != n) throw std::invalid_argument("s_diag must have one entry per state dim");
    if ((s_diag.array() < 0.0).any()) throw std::invalid_argument("s_diag entries must be non-negative");
    if (selector().rows() == 0) throw std::invalid_argument("s_diag selects no state components");
  }
  if (pairs && !(collision_radius > 0.0)) throw std::invalid_argument("collision radius must be positive");
  for (const auto& [i, j] : pair_list) {
    if (i < 0 || j < 0 || i >= num_vehicles() || j >= num_vehicles() || i >= j) {
      throw std::invalid_argument("collision pair indices must satisfy 0 <= i < j < vehicle count");
    }
  }
  for (const ObstacleSpec& obs : obstacles) {
    if (!(obs.radius > 0.0)) throw std::invalid_argument("obstacle radius must be positive");
    if (obs.centers.size() != 1 && obs.centers.size() != static_cast<size_t>(horizon)) {
      throw std::invalid_argument("obstacle trajectory must have 1 or N centers");
    }
    for (const Eigen::VectorXd& c : obs.centers) {
      if (c.size() != n) throw std::invalid_argument("obstacle center dimension mismatch");
    }
  }

  if (disturbance.num_vehicles() != num_vehicles() || disturbance.horizon() != horizon ||
      disturbance.state_dim() != n) {
    throw std::invalid_argument("disturbance spec shape must match vehicles, horizon and state dim");
  }

  check_threshold(alpha, "alpha");
  if (pairs) check_threshold(gamma, "gamma");
  if (has_obstacles()) check_threshold(beta, "beta");

  ccp.validate();
}

namespace {

int count_nondegenerate_target_rows(const Scenario& scenario) {
  // Degenerate rows (zero disturbance std) are deterministic and consume no
  // risk budget; with a non-degenerate disturbance every row counts.
  if (scenario.disturbance.degenerate()) return 0;
  return static_cast<int>(scenario.target_rows().size());
}

}  // namespace

RiskAllocation make_allocation(const Scenario& scenario) {
  RiskAllocation alloc;
  alloc.kind = scenario.bound;
  alloc.alpha = scenario.alpha;
  alloc.beta = scenario.beta;
  alloc.gamma = scenario.gamma;

  if (scenario.allocation == AllocationMode::Explicit) {
    alloc = scenario.explicit_allocation;
    alloc.kind = scenario.bound;
    alloc.alpha = scenario.alpha;
    alloc.beta = scenario.beta;
    alloc.gamma = scenario.gamma;
    // Boole soundness of the caller-provided split.
    if (alloc.target_risk_sum() > scenario.alpha * (1.0 + 1e-12)) {
      throw std::domain_error("explicit allocation: target risk sum exceeds alpha");
    }
    if (alloc.collision_risk_sum() > scenario.gamma * (1.0 + 1e-12)) {
      throw std::domain_error("explicit allocation: collision risk sum exceeds gamma");
    }
    if (alloc.obstacle_risk_sum() > scenario.beta * (1.0 + 1e-12)) {
      throw std::domain_error("explicit allocation: obstacle risk sum exceeds beta");
    }
    for (const auto& [key, lambda] : alloc.target_lambda) {
      if (lambda < lambda_domain_min(alloc.kind)) {
        throw std::domain_error("explicit allocation: target lambda below the bound's domain");
      }
    }
    for (const auto& [key, omega] : alloc.collision_omega) {
      if (omega <= 0.0 || omega >= omega_domain_max(alloc.kind)) {
        throw std::domain_error("explicit allocation: collision omega outside the bound's domain");
      }
    }
    for (const auto& [key, omega] : alloc.obstacle_omega) {
      if (omega <= 0.0 || omega >= omega_domain_max(alloc.kind)) {
        throw std::domain_error("explicit allocation: obstacle omega outside the bound's domain");
      }
    }
    return alloc;
  }

  const int target_count = count_nondegenerate_target_rows(scenario);
  if (target_count > 0) {
    const UniformAllocation ua = uniform_allocation(scenario.alpha, target_count, scenario.bound);
    for (const Scenario::TargetRowRef& ref : scenario.target_rows()) {
      alloc.target_lambda[{ref.vehicle, ref.step, ref.row}] = ua.lambda;
    }
  }

  const std::vector<CollisionPair> pairs = scenario.collision_pairs();
  int pair_rows = 0;
  int obstacle_rows = 0;
  for (const CollisionPair& pair : pairs) {
    (pair.kind == CollisionKind::VehiclePair ? pair_rows : obstacle_rows) += scenario.horizon;
  }
  if (pair_rows > 0) {
    const UniformAllocation ua = uniform_allocation(scenario.gamma, pair_rows, scenario.bound);
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p].kind != CollisionKind::VehiclePair) continue;
      for (int k = 1; k <= scenario.horizon; ++k) {
        alloc.collision_omega[{static_cast<int>(p), k}] = ua.omega;
      }
    }
  }
  if (obstacle_rows > 0) {
    const UniformAllocation ua = uniform_allocation(scenario.beta, obstacle_rows, scenario.bound);
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p].kind != CollisionKind::VehicleObstacle) continue;
      for (int k = 1; k <= scenario.horizon; ++k) {
        alloc.obstacle_omega[{static_cast<int>(p), k}] = ua.omega;
      }
    }
  }

  alloc.optimize_target_lambda = (scenario.allocation == AllocationMode::Optimized);
  return alloc;
}

Scenario with_bound(const Scenario& scenario, BoundKind kind) {
  Scenario out = scenario;
  out.bound = kind;
  out.canonical_json.clear();  // hash must reflect the new bound
  return out;
}

}  // namespace ccplan
