#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ccplan {

/// Discrete-time LTI model x(k+1) = A x(k) + B u(k) + w(k).
struct LtiSystem {
  Eigen::MatrixXd A;  // n x n state transition over one step
  Eigen::MatrixXd B;  // n x m input map
  double dt = 0.0;    // seconds per step

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }

  /// Throws std::invalid_argument on shape mismatch or dt <= 0.
  void validate() const;
};

/// Physical parameters of a deputy on a circular orbit about a chief.
struct CwhParams {
  double mu = 3.986004418e14;  // gravitational parameter [m^3/s^2]
  double r0 = 4.2164e7;        // orbital radius of the chief [m]
  double mc = 10.0;            // deputy mass [kg]

  double orbital_rate() const;  // sqrt(mu / r0^3) [rad/s]
};

/// How a commanded input enters the discretized model.
enum class InputModel {
  ImpulseAtStart,  // velocity change applied at the start of the interval
  ZeroOrderHold,   // constant force held over the interval
};

/// Continuous-time planar relative-motion system matrix for orbital rate
/// omega, state ordered (x, y, xdot, ydot).
Eigen::Matrix4d cwh_continuous_a(double omega);

/// Exact discretization of the planar relative-motion equations.
///
/// The returned A is the closed-form state transition over dt. With
/// InputModel::ImpulseAtStart the input is a momentum change [N s] applied at
/// the start of each interval, so B = A(dt) * [0; I/mc].
LtiSystem discretize_cwh(const CwhParams& params, double dt,
                         InputModel input_model = InputModel::ImpulseAtStart);

/// Horizon-stacked form of the dynamics:
///   x(k) = A^k x(0) + input_map(k) U + disturbance_map(k) W
/// with U = [u(0); ...; u(N-1)] and W = [w(0); ...; w(N-1)].
class ConcatenatedDynamics {
 public:
  ConcatenatedDynamics(const LtiSystem& sys, int horizon);

  int horizon() const { return horizon_; }
  int state_dim() const { return n_; }
  int input_dim() const { return m_; }

  /// A^k for k in 1..N.
  const Eigen::MatrixXd& state_power(int k) const;
  /// [A^{k-1}B ... AB B 0], n x Nm, for k in 1..N.
  const Eigen::MatrixXd& input_map(int k) const;
  /// [A^{k-1} ... A I 0], n x Nn, for k in 1..N.
  const Eigen::MatrixXd& disturbance_map(int k) const;

 private:
  int horizon_;
  int n_;
  int m_;
  std::vector<Eigen::MatrixXd> powers_;
  std::vector<Eigen::MatrixXd> input_maps_;
  std::vector<Eigen::MatrixXd> disturbance_maps_;
};

/// Mean states for k = 1..N given the stacked input and the stacked
/// disturbance mean.
std::vector<Eigen::VectorXd> mean_trajectory(const ConcatenatedDynamics& cd,
                                             const Eigen::VectorXd& x0,
                                             const Eigen::VectorXd& input,
                                             const Eigen::VectorXd& disturbance_mean);

}  // namespace ccplan
