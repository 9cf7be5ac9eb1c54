#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ccplan/dynamics.hpp"

namespace ccplan {

/// Moments of one scalar disturbance component: mean plus central moments
/// through order four.
struct ComponentMoments {
  double mean = 0.0;
  double var = 0.0;  // central second moment
  double c3 = 0.0;   // central third moment
  double c4 = 0.0;   // central fourth moment
};

/// Raw (non-central) moments E[x], E[x^2], E[x^3], E[x^4].
struct RawMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

/// E[x^n] = n!/rate^n for x ~ Exp(rate), n in 1..4.
double exponential_raw_moment(double rate, int order);

/// Raw-to-central conversion. Throws std::domain_error if the implied
/// variance is not strictly positive (degenerate distribution) or the
/// implied fourth moment violates c4 >= var^2.
ComponentMoments centered_moments(const RawMoments& raw);

/// Moments of a - b for independent components a and b.
ComponentMoments difference_moments(const ComponentMoments& a, const ComponentMoments& b);

/// Moments of an exponential component with the given rate.
ComponentMoments exponential_moments(double rate);

/// Moments of a Gaussian component.
ComponentMoments gaussian_moments(double mean, double var);

/// One weighted Gaussian mode of a mixture component.
struct MixtureMode {
  double weight = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

/// Moments of a finite Gaussian mixture (weights must sum to 1).
ComponentMoments gaussian_mixture_moments(const std::vector<MixtureMode>& modes);

enum class DisturbanceFamily { None, Gaussian, Exponential, GaussianMixture, Explicit };

/// Per-vehicle, per-step, per-component disturbance description. Components
/// are mutually independent; the factories replicate one per-state-component
/// pattern across every vehicle and step.
class DisturbanceSpec {
 public:
  DisturbanceSpec() = default;

  static DisturbanceSpec none(int num_vehicles, int horizon, int state_dim);
  static DisturbanceSpec gaussian(int num_vehicles, int horizon,
                                  const Eigen::VectorXd& mean, const Eigen::VectorXd& var);
  static DisturbanceSpec exponential(int num_vehicles, int horizon,
                                     const Eigen::VectorXd& rates);
  static DisturbanceSpec gaussian_mixture(int num_vehicles, int horizon,
                                          const std::vector<std::vector<MixtureMode>>& modes);
  static DisturbanceSpec explicit_moments(int num_vehicles, int horizon,
                                          const std::vector<ComponentMoments>& per_component);

  DisturbanceFamily family() const { return family_; }
  int num_vehicles() const { return num_vehicles_; }
  int horizon() const { return horizon_; }
  int state_dim() const { return state_dim_; }

  const ComponentMoments& component(int vehicle, int step, int comp) const;

  /// Stacked E[W] for one vehicle, length N*n.
  Eigen::VectorXd stacked_mean(int vehicle) const;
  /// Diagonal of Var[W] for one vehicle, length N*n.
  Eigen::VectorXd stacked_var(int vehicle) const;

  /// True when draws can be generated (None, Gaussian, Exponential, mixture).
  bool samplable() const { return family_ != DisturbanceFamily::Explicit; }
  /// True for the zero-disturbance spec.
  bool degenerate() const { return family_ == DisturbanceFamily::None; }

  // Family parameters, valid per the tag; used by the sampler and the IO layer.
  const Eigen::VectorXd& gaussian_mean() const { return gaussian_mean_; }
  const Eigen::VectorXd& gaussian_var() const { return gaussian_var_; }
  const Eigen::VectorXd& exponential_rates() const { return exponential_rates_; }
  const std::vector<std::vector<MixtureMode>>& mixture_modes() const { return mixture_modes_; }

 private:
  DisturbanceFamily family_ = DisturbanceFamily::None;
  int num_vehicles_ = 0;
  int horizon_ = 0;
  int state_dim_ = 0;
  std::vector<ComponentMoments> grid_;  // flattened [vehicle][step][comp]
  Eigen::VectorXd gaussian_mean_, gaussian_var_, exponential_rates_;
  std::vector<std::vector<MixtureMode>> mixture_modes_;

  void fill_grid(const std::vector<ComponentMoments>& per_component);
};

/// Mean shift and standard deviation of g * x(k) contributed by the
/// disturbance: g * D(k) * E[W] and sqrt(g D(k) Var[W] D(k)' g').
struct AffineStat {
  double mean_shift = 0.0;
  double std = 0.0;
  bool degenerate = false;  // zero standard deviation; tail bounds do not apply
};

AffineStat affine_moments(const Eigen::RowVectorXd& g, const ConcatenatedDynamics& cd,
                          const DisturbanceSpec& spec, int step, int vehicle);

/// Moment data for the quadratic form |zbar + z|^2 where z = M * w with w a
/// vector of independent zero-mean components. Means of the physical
/// disturbance must be absorbed into zbar by the caller.
struct QuadraticMomentData {
  Eigen::MatrixXd var_z;        // q x q covariance of z
  double e_ztz = 0.0;           // E[z'z]
  double var_ztz = 0.0;         // Var[z'z]
  Eigen::VectorXd cov_z_ztz;    // Cov(z, z'z)
  Eigen::MatrixXd a;            // M'M
  Eigen::MatrixXd exp_block_sqrt;  // sqrt of [[I, 0], [0, E[z'z]]]
  Eigen::MatrixXd var_block_sqrt;  // sqrt of [[4 Var z, 2 Cov], [2 Cov', Var z'z]]

  /// E[|zbar + z|^2] = |zbar|^2 + E[z'z].
  double expectation_at(const Eigen::VectorXd& zbar) const;
  /// Var[|zbar + z|^2] = 4 zbar' Var[z] zbar + 4 zbar' Cov + Var[z'z].
  double variance_at(const Eigen::VectorXd& zbar) const;
  /// Std[|zbar + z|^2] as the norm form |var_block_sqrt * (zbar; 1)|.
  double std_at(const Eigen::VectorXd& zbar) const;
};

/// Computes QuadraticMomentData from the map M and the component moments
/// (means ignored; components are centered by convention).
QuadraticMomentData quadratic_moments(const Eigen::MatrixXd& map,
                                      const std::vector<ComponentMoments>& comps);

/// Symmetric PSD square root with negative eigenvalues clipped to zero.
/// Throws std::domain_error when an eigenvalue falls below the PSD tolerance.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym);

}  // namespace ccplan
