#include "ccplan/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace ccplan {

void LtiSystem::validate() const {
  if (A.rows() != A.cols()) throw std::invalid_argument("LtiSystem: A must be square");
  if (B.rows() != A.rows()) throw std::invalid_argument("LtiSystem: B row count must equal state dim");
  if (!(dt > 0.0)) throw std::invalid_argument("LtiSystem: dt must be positive");
  if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("LtiSystem: non-finite entries");
}

double CwhParams::orbital_rate() const {
  if (!(mu > 0.0) || !(r0 > 0.0)) throw std::invalid_argument("CwhParams: mu and r0 must be positive");
  return std::sqrt(mu / (r0 * r0 * r0));
}

Eigen::Matrix4d cwh_continuous_a(double omega) {
  Eigen::Matrix4d ac = Eigen::Matrix4d::Zero();
  ac(0, 2) = 1.0;
  ac(1, 3) = 1.0;
  ac(2, 0) = 3.0 * omega * omega;
  ac(2, 3) = 2.0 * omega;
  ac(3, 2) = -2.0 * omega;
  return ac;
}

namespace {

// Closed-form transition of xddot = 3 w^2 x + 2 w ydot, yddot = -2 w xdot.
Eigen::Matrix4d cwh_transition(double omega, double dt) {
  Eigen::Matrix4d a;
  if (omega == 0.0) {
    // Free relative motion: double integrator in each axis.
    a << 1, 0, dt, 0,
         0, 1, 0, dt,
         0, 0, 1, 0,
         0, 0, 0, 1;
    return a;
  }
  const double wt = omega * dt;
  const double s = std::sin(wt);
  const double c = std::cos(wt);
  a << 4.0 - 3.0 * c,          0, s / omega,              2.0 * (1.0 - c) / omega,
       6.0 * (s - wt),         1, 2.0 * (c - 1.0) / omega, (4.0 * s - 3.0 * wt) / omega,
       3.0 * omega * s,        0, c,                      2.0 * s,
       6.0 * omega * (c - 1.0), 0, -2.0 * s,              4.0 * c - 3.0;
  return a;
}

}  // namespace

LtiSystem discretize_cwh(const CwhParams& params, double dt, InputModel input_model) {
  if (!(params.mu > 0.0) || !(params.r0 > 0.0) || !(params.mc > 0.0)) {
    throw std::invalid_argument("discretize_cwh: parameters must be strictly positive");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("discretize_cwh: dt must be positive");

  const double omega = params.orbital_rate();
  LtiSystem sys;
  sys.dt = dt;
  sys.A = cwh_transition(omega, dt);

  Eigen::Matrix<double, 4, 2> impulse_map = Eigen::Matrix<double, 4, 2>::Zero();
  impulse_map(2, 0) = 1.0 / params.mc;
  impulse_map(3, 1) = 1.0 / params.mc;

  switch (input_model) {
    case InputModel::ImpulseAtStart:
      // Velocity change at interval start followed by free flight.
      sys.B = sys.A * impulse_map;
      break;
    case InputModel::ZeroOrderHold: {
      // Van Loan block-exponential for the held-force map; the commanded
      // value is interpreted as total impulse over the interval, so the
      // force is u/dt and B picks up a 1/dt factor.
      Eigen::Matrix<double, 6, 6> block = Eigen::Matrix<double, 6, 6>::Zero();
      block.topLeftCorner<4, 4>() = cwh_continuous_a(omega);
      block.topRightCorner<4, 2>() = impulse_map;
      Eigen::Matrix<double, 6, 6> phi = (block * dt).exp();
      sys.B = phi.topRightCorner<4, 2>() / dt;
      break;
    }
  }
  return sys;
}

ConcatenatedDynamics::ConcatenatedDynamics(const LtiSystem& sys, int horizon)
    : horizon_(horizon), n_(sys.state_dim()), m_(sys.input_dim()) {
  sys.validate();
  if (horizon < 1) throw std::invalid_argument("ConcatenatedDynamics: horizon must be >= 1");

  powers_.resize(horizon_);
  powers_[0] = sys.A;
  for (int k = 1; k < horizon_; ++k) powers_[k] = sys.A * powers_[k - 1];

  input_maps_.resize(horizon_);
  disturbance_maps_.resize(horizon_);
  for (int k = 1; k <= horizon_; ++k) {
    Eigen::MatrixXd cmap = Eigen::MatrixXd::Zero(n_, horizon_ * m_);
    Eigen::MatrixXd dmap = Eigen::MatrixXd::Zero(n_, horizon_ * n_);
    for (int j = 0; j < k; ++j) {
      // Block j holds A^{k-1-j} B (resp. A^{k-1-j}); block k-1 is B (resp. I).
      const int p = k - 1 - j;
      const Eigen::MatrixXd& apow =
          (p == 0) ? Eigen::MatrixXd::Identity(n_, n_).eval() : powers_[p - 1];
      cmap.middleCols(j * m_, m_) = apow * sys.B;
      dmap.middleCols(j * n_, n_) = apow;
    }
    input_maps_[k - 1] = std::move(cmap);
    disturbance_maps_[k - 1] = std::move(dmap);
  }
}

const Eigen::MatrixXd& ConcatenatedDynamics::state_power(int k) const {
  if (k < 1 || k > horizon_) throw std::out_of_range("state_power: k out of 1..N");
  return powers_[k - 1];
}

const Eigen::MatrixXd& ConcatenatedDynamics::input_map(int k) const {
  if (k < 1 || k > horizon_) throw std::out_of_range("input_map: k out of 1..N");
  return input_maps_[k - 1];
}

const Eigen::MatrixXd& ConcatenatedDynamics::disturbance_map(int k) const {
  if (k < 1 || k > horizon_) throw std::out_of_range("disturbance_map: k out of 1..N");
  return disturbance_maps_[k - 1];
}

std::vector<Eigen::VectorXd> mean_trajectory(const ConcatenatedDynamics& cd,
                                             const Eigen::VectorXd& x0,
                                             const Eigen::VectorXd& input,
                                             const Eigen::VectorXd& disturbance_mean) {
  const int n = cd.state_dim();
  const int m = cd.input_dim();
  const int horizon = cd.horizon();
  if (x0.size() != n) throw std::invalid_argument("mean_trajectory: x0 dimension mismatch");
  if (input.size() != horizon * m) throw std::invalid_argument("mean_trajectory: input dimension mismatch");
  if (disturbance_mean.size() != horizon * n) {
    throw std::invalid_argument("mean_trajectory: disturbance mean dimension mismatch");
  }

  std::vector<Eigen::VectorXd> states(horizon);
  for (int k = 1; k <= horizon; ++k) {
    states[k - 1] = cd.state_power(k) * x0 + cd.input_map(k) * input +
                    cd.disturbance_map(k) * disturbance_mean;
  }
  return states;
}

}  // namespace ccplan
