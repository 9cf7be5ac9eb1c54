#pragma once

#include <cstdint>
#include <optional>

#include "ccplan/solver.hpp"

namespace ccplan {

/// The disturbance spec carries moments only and cannot be sampled.
struct NotSamplableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reproducible disturbance draws: one (N*n) x count matrix per vehicle.
struct SampleBatch {
  std::uint64_t seed = 0;
  int count = 0;
  std::vector<Eigen::MatrixXd> draws;
};

/// IID draws per vehicle, step and component from the spec's family.
/// Deterministic for a fixed seed. Throws NotSamplableError for
/// explicit-moment specs.
SampleBatch sample_disturbances(const DisturbanceSpec& spec, int count, std::uint64_t seed);

/// Empirical joint and per-row constraint satisfaction of a plan.
struct SatisfactionReport {
  int samples = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;

  std::optional<double> target_joint;     // present when target rows exist
  std::optional<double> collision_joint;  // present when vehicle pairs exist
  std::optional<double> obstacle_joint;   // present when obstacles exist

  std::vector<int> target_row_violations;     // aligned with Scenario::target_rows()
  std::vector<int> collision_row_violations;  // pair-major, then step
  std::vector<int> obstacle_row_violations;

  bool pass = false;     // every joint probability >= threshold - 3 binomial SE
  bool wide_ci = false;  // sample count too small for a meaningful interval
};

/// Propagates every draw through the dynamics under the plan's inputs and
/// counts joint and per-row constraint violations. Parallel over samples
/// with a deterministic reduction.
SatisfactionReport measure_satisfaction(const PlanSolution& solution, const Scenario& scenario,
                                        const SampleBatch& batch);

}  // namespace ccplan
