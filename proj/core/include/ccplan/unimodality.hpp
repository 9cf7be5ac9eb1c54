#pragma once

#include <cstdint>
#include <vector>

#include "ccplan/validation.hpp"

namespace ccplan {

/// Sorted sample values with empirical CDF heights i/Ns.
struct EcdfPoints {
  std::vector<double> values;
  std::vector<double> heights;
};

/// Builds the ECDF from at least two samples.
EcdfPoints ecdf(std::vector<double> samples);

struct UnimodalityConfig {
  double xi = 0.0;          // chord deviation threshold; <= 0 selects the default
  int min_samples = 10000;  // advisory floor for meaningful checks
};

/// Default deviation threshold: twice the DKW band at confidence 0.99,
/// 2 * sqrt(ln(2/0.01) / (2 Ns)), so the chord tolerance tracks sampling noise.
double default_xi(int num_samples);

/// Result of the piecewise-affine ECDF fit.
struct UnimodalityFit {
  bool unimodal = false;
  std::vector<double> slopes;  // one per fitted maximal segment
};

/// Greedily fits maximal affine segments to the ECDF (two-sided deviation
/// test against the chord) and accepts when the slope sequence rises to a
/// single peak and then falls; a convex-then-concave CDF. Fits with fewer
/// than three segments cannot refute unimodality and are accepted.
UnimodalityFit fit_unimodal(const EcdfPoints& points, const UnimodalityConfig& cfg);

bool check_unimodal(const EcdfPoints& points, const UnimodalityConfig& cfg);

/// Verdict for one constraint's scalar statistic.
struct ConstraintUnimodality {
  enum class Kind { TargetRow, VehiclePair, Obstacle } kind = Kind::TargetRow;
  int vehicle = 0;  // target rows: vehicle; collisions: first vehicle
  int other = 0;    // collisions: second vehicle / obstacle index; target rows: halfspace
  int step = 0;
  bool unimodal = false;
  int segments = 0;
};

struct UnimodalityReport {
  std::vector<ConstraintUnimodality> entries;
  bool all_unimodal = true;
  int samples = 0;
  double xi = 0.0;
};

/// Samples the constraint statistics of a solved plan (affine target values,
/// squared clearance norms) and runs the ECDF check on each.
UnimodalityReport validate_constraint_unimodality(const PlanSolution& solution,
                                                  const Scenario& scenario,
                                                  const SampleBatch& batch,
                                                  const UnimodalityConfig& cfg = {});

/// Overload that draws the batch internally from the scenario's disturbance.
UnimodalityReport validate_constraint_unimodality(const PlanSolution& solution,
                                                  const Scenario& scenario, int num_samples,
                                                  std::uint64_t seed,
                                                  const UnimodalityConfig& cfg = {});

}  // namespace ccplan
