#pragma once

#include "ccplan/conic.hpp"

namespace ccplan {

struct IpmSettings {
  double feastol = 1e-10;
  double abstol = 1e-10;
  double reltol = 1e-10;
  int max_iters = 100;
  int refine_steps = 2;
  double step_fraction = 0.99;
  bool verbose = false;
};

/// Reference conic backend: a homogeneous self-dual primal-dual
/// interior-point method with Nesterov-Todd scaling and Mehrotra
/// predictor-corrector steps, on dense linear algebra.
class InteriorPointSolver final : public SolverBackend {
 public:
  InteriorPointSolver() = default;
  explicit InteriorPointSolver(const IpmSettings& settings) : settings_(settings) {}

  std::string name() const override { return "ipm"; }
  ConicSolution solve(const ConicProblem& problem) const override;

 private:
  IpmSettings settings_;
};

}  // namespace ccplan
