#pragma once

#include <string>

#include "ccplan/scenario.hpp"
#include "ccplan/solver.hpp"
#include "ccplan/unimodality.hpp"
#include "ccplan/validation.hpp"

namespace ccplan {

struct ResultIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solution document: inputs, cost, allocation, margins, iteration trace and
/// run metadata, tied to the scenario by its canonical hash.
std::string solution_to_json(const Scenario& scenario, const PlanSolution& solution,
                             const std::string& backend_name);
void write_solution(const std::string& path, const Scenario& scenario,
                    const PlanSolution& solution, const std::string& backend_name);

/// Loads a solution file; verifies structure, not scenario identity.
struct LoadedSolution {
  PlanSolution solution;
  std::string scenario_hash;
};
LoadedSolution read_solution(const std::string& path, const Scenario& scenario);

/// Mean trajectories as RFC-4180 CSV with fixed columns
/// vehicle,k,x,y,vx,vy (general state dims get s0..s{n-1}).
void write_trajectories_csv(const std::string& path, const PlanSolution& solution);

std::string satisfaction_to_json(const SatisfactionReport& report,
                                 const std::string& scenario_hash);
void write_satisfaction(const std::string& path, const SatisfactionReport& report,
                        const std::string& scenario_hash);

std::string unimodality_to_json(const UnimodalityReport& report, const std::string& scenario_hash);
void write_unimodality(const std::string& path, const UnimodalityReport& report,
                       const std::string& scenario_hash);

/// One row of the bound-comparison table.
struct ComparisonRow {
  std::string method;
  bool solved = false;
  double cost = 0.0;
  int iterations = 0;
  double slack = 0.0;
  bool certified = false;
  std::optional<double> target_satisfaction;
  std::optional<double> collision_satisfaction;
  std::optional<double> obstacle_satisfaction;
};

/// RFC-4180 CSV with columns
/// method,cost,iterations,slack,certified,target_satisfaction,
/// collision_satisfaction,obstacle_satisfaction.
void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

/// Run metadata document (config hash, seed, version, backend).
std::string metadata_to_json(const Scenario& scenario, const std::string& backend_name);
void write_metadata(const std::string& path, const Scenario& scenario,
                    const std::string& backend_name);

}  // namespace ccplan
