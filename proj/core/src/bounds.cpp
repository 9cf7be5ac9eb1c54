#include "ccplan/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace ccplan {

std::string to_string(BoundKind kind) {
  return kind == BoundKind::VysochanskijPetunin ? "vp" : "cantelli";
}

double lambda_domain_min(BoundKind kind) {
  return kind == BoundKind::VysochanskijPetunin ? std::sqrt(5.0 / 3.0) : 0.0;
}

double omega_domain_max(BoundKind kind) {
  return kind == BoundKind::VysochanskijPetunin ? 1.0 / 6.0 : 1.0;
}

double tail_bound(BoundKind kind, double lambda) {
  if (!std::isfinite(lambda) || lambda < lambda_domain_min(kind)) {
    throw std::domain_error("tail_bound: lambda outside the bound's domain");
  }
  const double denom = lambda * lambda + 1.0;
  return kind == BoundKind::VysochanskijPetunin ? 4.0 / (9.0 * denom) : 1.0 / denom;
}

double lambda_for_risk(BoundKind kind, double omega) {
  if (!std::isfinite(omega) || omega <= 0.0 || omega > omega_domain_max(kind)) {
    throw std::domain_error("lambda_for_risk: omega outside the bound's range");
  }
  if (kind == BoundKind::VysochanskijPetunin) {
    return std::sqrt(4.0 / (9.0 * omega) - 1.0);
  }
  return std::sqrt(1.0 / omega - 1.0);
}

double tail_bound_derivative(BoundKind kind, double lambda) {
  const double denom = lambda * lambda + 1.0;
  if (kind == BoundKind::VysochanskijPetunin) {
    return -8.0 * lambda / (9.0 * denom * denom);
  }
  return -2.0 * lambda / (denom * denom);
}

double lambda_for_risk_derivative(BoundKind kind, double omega) {
  const double lambda = lambda_for_risk(kind, omega);
  if (kind == BoundKind::VysochanskijPetunin) {
    return -2.0 / (9.0 * lambda * omega * omega);
  }
  return -1.0 / (2.0 * lambda * omega * omega);
}

double RiskAllocation::target_risk_sum() const {
  double sum = 0.0;
  for (const auto& [key, lambda] : target_lambda) sum += tail_bound(kind, lambda);
  return sum;
}

double RiskAllocation::collision_risk_sum() const {
  double sum = 0.0;
  for (const auto& [key, omega] : collision_omega) sum += omega;
  return sum;
}

double RiskAllocation::obstacle_risk_sum() const {
  double sum = 0.0;
  for (const auto& [key, omega] : obstacle_omega) sum += omega;
  return sum;
}

UniformAllocation uniform_allocation(double total, int count, BoundKind kind) {
  if (count < 1) throw std::invalid_argument("uniform_allocation: count must be positive");
  if (!(total > 0.0)) throw std::domain_error("uniform_allocation: total must be positive");
  UniformAllocation out;
  out.omega = total / count;
  if (out.omega >= omega_domain_max(kind)) {
    throw std::domain_error("uniform_allocation: per-constraint risk leaves the bound's domain");
  }
  out.lambda = lambda_for_risk(kind, out.omega);
  return out;
}

}  // namespace ccplan
