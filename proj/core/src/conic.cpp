#include "ccplan/conic.hpp"

#include <cstdlib>
#include <stdexcept>

#include "ccplan/socp.hpp"

namespace ccplan {

void ConicProblem::validate() const {
  if (num_vars < 1) throw std::invalid_argument("ConicProblem: num_vars must be positive");
  if (cost.size() != num_vars) throw std::invalid_argument("ConicProblem: cost dimension mismatch");
  for (const AffineRow& row : affine) {
    if (row.a.size() != num_vars) throw std::invalid_argument("ConicProblem: affine row dimension mismatch");
  }
  for (const VarBound& bound : bounds) {
    if (bound.index < 0 || bound.index >= num_vars) {
      throw std::invalid_argument("ConicProblem: bound index out of range");
    }
    if (!(bound.lo <= bound.hi)) throw std::invalid_argument("ConicProblem: empty bound interval");
  }
  for (const SocRow& row : socs) {
    if (row.c.size() != num_vars || row.F.cols() != num_vars || row.F.rows() != row.g.size()) {
      throw std::invalid_argument("ConicProblem: SOC row dimension mismatch");
    }
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

std::shared_ptr<const SolverBackend> make_backend(const std::string& key) {
  if (key == "ipm" || key.empty()) return std::make_shared<InteriorPointSolver>();
  throw std::invalid_argument("make_backend: unknown backend key '" + key + "'");
}

std::shared_ptr<const SolverBackend> default_backend() {
  const char* env = std::getenv("CCPLAN_BACKEND");
  return make_backend(env ? std::string(env) : "ipm");
}

}  // namespace ccplan
