#include "ccplan/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace ccplan {

namespace {

constexpr double kMomentConsistencyTol = 1e-9;

void check_component(const ComponentMoments& cm) {
  if (!(cm.var > 0.0)) throw std::domain_error("ComponentMoments: variance must be positive");
  if (cm.c4 < cm.var * cm.var * (1.0 - kMomentConsistencyTol)) {
    throw std::domain_error("ComponentMoments: fourth central moment below var^2");
  }
}

}  // namespace

double exponential_raw_moment(double rate, int order) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential_raw_moment: rate must be positive");
  if (order < 1 || order > 4) throw std::invalid_argument("exponential_raw_moment: order must be in 1..4");
  static const double factorial[5] = {1, 1, 2, 6, 24};
  return factorial[order] / std::pow(rate, order);
}

ComponentMoments centered_moments(const RawMoments& raw) {
  const double m1 = raw.m1, m2 = raw.m2, m3 = raw.m3, m4 = raw.m4;
  if (!std::isfinite(m1) || !std::isfinite(m2) || !std::isfinite(m3) || !std::isfinite(m4)) {
    throw std::invalid_argument("centered_moments: moments must be finite");
  }
  ComponentMoments cm;
  cm.mean = m1;
  cm.var = m2 - m1 * m1;
  cm.c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  cm.c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
  check_component(cm);
  return cm;
}

ComponentMoments difference_moments(const ComponentMoments& a, const ComponentMoments& b) {
  ComponentMoments cm;
  cm.mean = a.mean - b.mean;
  cm.var = a.var + b.var;
  cm.c3 = a.c3 - b.c3;
  cm.c4 = a.c4 + b.c4 + 6.0 * a.var * b.var;
  return cm;
}

ComponentMoments exponential_moments(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential_moments: rate must be positive");
  ComponentMoments cm;
  cm.mean = 1.0 / rate;
  cm.var = 1.0 / (rate * rate);
  cm.c3 = 2.0 / (rate * rate * rate);
  cm.c4 = 9.0 / (rate * rate * rate * rate);
  return cm;
}

ComponentMoments gaussian_moments(double mean, double var) {
  if (!(var > 0.0)) throw std::invalid_argument("gaussian_moments: variance must be positive");
  ComponentMoments cm;
  cm.mean = mean;
  cm.var = var;
  cm.c3 = 0.0;
  cm.c4 = 3.0 * var * var;
  return cm;
}

ComponentMoments gaussian_mixture_moments(const std::vector<MixtureMode>& modes) {
  if (modes.empty()) throw std::invalid_argument("gaussian_mixture_moments: no modes");
  double wsum = 0.0;
  RawMoments raw;
  for (const MixtureMode& mode : modes) {
    if (!(mode.weight > 0.0)) throw std::invalid_argument("gaussian_mixture_moments: weights must be positive");
    if (!(mode.var > 0.0)) throw std::invalid_argument("gaussian_mixture_moments: variances must be positive");
    wsum += mode.weight;
    const double mu = mode.mean, v = mode.var;
    raw.m1 += mode.weight * mu;
    raw.m2 += mode.weight * (mu * mu + v);
    raw.m3 += mode.weight * (mu * mu * mu + 3.0 * mu * v);
    raw.m4 += mode.weight * (mu * mu * mu * mu + 6.0 * mu * mu * v + 3.0 * v * v);
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw std::invalid_argument("gaussian_mixture_moments: weights must sum to 1");
  }
  return centered_moments(raw);
}

void DisturbanceSpec::fill_grid(const std::vector<ComponentMoments>& per_component) {
  if (static_cast<int>(per_component.size()) != state_dim_) {
    throw std::invalid_argument("DisturbanceSpec: per-component list size must equal state dim");
  }
  grid_.resize(static_cast<size_t>(num_vehicles_) * horizon_ * state_dim_);
  for (int v = 0; v < num_vehicles_; ++v) {
    for (int k = 0; k < horizon_; ++k) {
      for (int c = 0; c < state_dim_; ++c) {
        grid_[(static_cast<size_t>(v) * horizon_ + k) * state_dim_ + c] = per_component[c];
      }
    }
  }
}

DisturbanceSpec DisturbanceSpec::none(int num_vehicles, int horizon, int state_dim) {
  DisturbanceSpec spec;
  spec.family_ = DisturbanceFamily::None;
  spec.num_vehicles_ = num_vehicles;
  spec.horizon_ = horizon;
  spec.state_dim_ = state_dim;
  spec.fill_grid(std::vector<ComponentMoments>(state_dim));
  return spec;
}

DisturbanceSpec DisturbanceSpec::gaussian(int num_vehicles, int horizon,
                                          const Eigen::VectorXd& mean, const Eigen::VectorXd& var) {
  if (mean.size() != var.size()) throw std::invalid_argument("DisturbanceSpec: mean/var size mismatch");
  DisturbanceSpec spec;
  spec.family_ = DisturbanceFamily::Gaussian;
  spec.num_vehicles_ = num_vehicles;
  spec.horizon_ = horizon;
  spec.state_dim_ = static_cast<int>(mean.size());
  spec.gaussian_mean_ = mean;
  spec.gaussian_var_ = var;
  std::vector<ComponentMoments> comps(spec.state_dim_);
  for (int c = 0; c < spec.state_dim_; ++c) comps[c] = gaussian_moments(mean[c], var[c]);
  spec.fill_grid(comps);
  return spec;
}

DisturbanceSpec DisturbanceSpec::exponential(int num_vehicles, int horizon,
                                             const Eigen::VectorXd& rates) {
  DisturbanceSpec spec;
  spec.family_ = DisturbanceFamily::Exponential;
  spec.num_vehicles_ = num_vehicles;
  spec.horizon_ = horizon;
  spec.state_dim_ = static_cast<int>(rates.size());
  spec.exponential_rates_ = rates;
  std::vector<ComponentMoments> comps(spec.state_dim_);
  for (int c = 0; c < spec.state_dim_; ++c) comps[c] = exponential_moments(rates[c]);
  spec.fill_grid(comps);
  return spec;
}

DisturbanceSpec DisturbanceSpec::gaussian_mixture(int num_vehicles, int horizon,
                                                  const std::vector<std::vector<MixtureMode>>& modes) {
  DisturbanceSpec spec;
  spec.family_ = DisturbanceFamily::GaussianMixture;
  spec.num_vehicles_ = num_vehicles;
  spec.horizon_ = horizon;
  spec.state_dim_ = static_cast<int>(modes.size());
  spec.mixture_modes_ = modes;
  std::vector<ComponentMoments> comps(spec.state_dim_);
  for (int c = 0; c < spec.state_dim_; ++c) comps[c] = gaussian_mixture_moments(modes[c]);
  spec.fill_grid(comps);
  return spec;
}

DisturbanceSpec DisturbanceSpec::explicit_moments(int num_vehicles, int horizon,
                                                  const std::vector<ComponentMoments>& per_component) {
  DisturbanceSpec spec;
  spec.family_ = DisturbanceFamily::Explicit;
  spec.num_vehicles_ = num_vehicles;
  spec.horizon_ = horizon;
  spec.state_dim_ = static_cast<int>(per_component.size());
  for (const ComponentMoments& cm : per_component) check_component(cm);
  spec.fill_grid(per_component);
  return spec;
}

const ComponentMoments& DisturbanceSpec::component(int vehicle, int step, int comp) const {
  if (vehicle < 0 || vehicle >= num_vehicles_ || step < 0 || step >= horizon_ || comp < 0 ||
      comp >= state_dim_) {
    throw std::out_of_range("DisturbanceSpec::component: index out of range");
  }
  return grid_[(static_cast<size_t>(vehicle) * horizon_ + step) * state_dim_ + comp];
}

Eigen::VectorXd DisturbanceSpec::stacked_mean(int vehicle) const {
  Eigen::VectorXd mean(static_cast<Eigen::Index>(horizon_) * state_dim_);
  for (int k = 0; k < horizon_; ++k)
    for (int c = 0; c < state_dim_; ++c) mean[k * state_dim_ + c] = component(vehicle, k, c).mean;
  return mean;
}

Eigen::VectorXd DisturbanceSpec::stacked_var(int vehicle) const {
  Eigen::VectorXd var(static_cast<Eigen::Index>(horizon_) * state_dim_);
  for (int k = 0; k < horizon_; ++k)
    for (int c = 0; c < state_dim_; ++c) var[k * state_dim_ + c] = component(vehicle, k, c).var;
  return var;
}

AffineStat affine_moments(const Eigen::RowVectorXd& g, const ConcatenatedDynamics& cd,
                          const DisturbanceSpec& spec, int step, int vehicle) {
  if (g.size() != cd.state_dim()) throw std::invalid_argument("affine_moments: g length must equal state dim");
  if (spec.state_dim() != cd.state_dim() || spec.horizon() != cd.horizon()) {
    throw std::invalid_argument("affine_moments: spec does not match dynamics");
  }
  const Eigen::MatrixXd& dmap = cd.disturbance_map(step);
  const Eigen::RowVectorXd gd = g * dmap;

  AffineStat out;
  out.mean_shift = gd.dot(spec.stacked_mean(vehicle));
  const double variance = gd.cwiseProduct(gd).dot(spec.stacked_var(vehicle));
  out.std = variance > 0.0 ? std::sqrt(variance) : 0.0;
  out.degenerate = !(out.std > 0.0);
  return out;
}

double QuadraticMomentData::expectation_at(const Eigen::VectorXd& zbar) const {
  return zbar.squaredNorm() + e_ztz;
}

double QuadraticMomentData::variance_at(const Eigen::VectorXd& zbar) const {
  return 4.0 * zbar.dot(var_z * zbar) + 4.0 * zbar.dot(cov_z_ztz) + var_ztz;
}

double QuadraticMomentData::std_at(const Eigen::VectorXd& zbar) const {
  Eigen::VectorXd ext(zbar.size() + 1);
  ext.head(zbar.size()) = zbar;
  ext[zbar.size()] = 1.0;
  return (var_block_sqrt * ext).norm();
}

QuadraticMomentData quadratic_moments(const Eigen::MatrixXd& map,
                                      const std::vector<ComponentMoments>& comps) {
  const Eigen::Index q = map.rows();
  const Eigen::Index p = map.cols();
  if (static_cast<Eigen::Index>(comps.size()) != p) {
    throw std::invalid_argument("quadratic_moments: component count must equal map columns");
  }

  Eigen::VectorXd var(p), c3(p), c4(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    var[i] = comps[i].var;
    c3[i] = comps[i].c3;
    c4[i] = comps[i].c4;
  }

  QuadraticMomentData data;
  data.var_z = map * var.asDiagonal() * map.transpose();
  data.a = map.transpose() * map;
  data.e_ztz = data.var_z.trace();

  // Var[z'z] = sum_p a_pp^2 (c4_p - 3 var_p^2) + 2 sum_{p,q} a_pq^2 var_p var_q
  double quartic = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double app = data.a(i, i);
    quartic += app * app * (c4[i] - 3.0 * var[i] * var[i]);
  }
  const Eigen::MatrixXd scaled = var.cwiseSqrt().asDiagonal() * data.a * var.cwiseSqrt().asDiagonal();
  data.var_ztz = quartic + 2.0 * scaled.squaredNorm();

  data.cov_z_ztz = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < p; ++i) {
    data.cov_z_ztz += map.col(i) * (data.a(i, i) * c3[i]);
  }

  Eigen::MatrixXd exp_block = Eigen::MatrixXd::Zero(q + 1, q + 1);
  exp_block.topLeftCorner(q, q).setIdentity();
  exp_block(q, q) = data.e_ztz;

  Eigen::MatrixXd var_block(q + 1, q + 1);
  var_block.topLeftCorner(q, q) = 4.0 * data.var_z;
  var_block.topRightCorner(q, 1) = 2.0 * data.cov_z_ztz;
  var_block.bottomLeftCorner(1, q) = 2.0 * data.cov_z_ztz.transpose();
  var_block(q, q) = data.var_ztz;

  data.exp_block_sqrt = psd_sqrt(exp_block);
  data.var_block_sqrt = psd_sqrt(var_block);
  return data;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym) {
  if (sym.rows() != sym.cols()) throw std::invalid_argument("psd_sqrt: matrix must be square");
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("psd_sqrt: matrix must be symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sym + sym.transpose()));
  if (eig.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigendecomposition failed");

  Eigen::VectorXd evals = eig.eigenvalues();
  if (evals.minCoeff() < -1e-10 * scale) {
    throw std::domain_error("psd_sqrt: matrix is not positive semi-definite");
  }
  evals = evals.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * evals.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace ccplan
