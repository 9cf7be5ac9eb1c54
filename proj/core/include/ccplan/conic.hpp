#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace ccplan {

/// One affine inequality a' x <= b.
struct AffineRow {
  Eigen::VectorXd a;
  double b = 0.0;
};

/// One second-order-cone inequality |F x + g| <= c' x + d.
struct SocRow {
  Eigen::MatrixXd F;
  Eigen::VectorXd g;
  Eigen::VectorXd c;
  double d = 0.0;
};

/// Interval bound on a single variable; expands to two affine rows.
struct VarBound {
  int index = 0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Solver-agnostic problem IR: linear objective over affine and
/// second-order-cone inequality rows.
struct ConicProblem {
  int num_vars = 0;
  Eigen::VectorXd cost;
  std::vector<AffineRow> affine;
  std::vector<VarBound> bounds;
  std::vector<SocRow> socs;

  void validate() const;  // throws std::invalid_argument on dimension mismatch
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure };

std::string to_string(SolveStatus status);

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

/// Backend contract: deterministic conic solves over the IR above.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution solve(const ConicProblem& problem) const = 0;
};

/// Looks up a backend by configuration key ("ipm" is the reference
/// implementation). Throws std::invalid_argument for unknown keys.
std::shared_ptr<const SolverBackend> make_backend(const std::string& key);

/// Backend chosen by the CCPLAN_BACKEND environment variable, falling back
/// to the reference backend.
std::shared_ptr<const SolverBackend> default_backend();

}  // namespace ccplan
