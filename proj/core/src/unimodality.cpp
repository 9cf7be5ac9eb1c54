#include "ccplan/unimodality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccplan {

EcdfPoints ecdf(std::vector<double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("ecdf: at least two samples required");
  std::sort(samples.begin(), samples.end());
  EcdfPoints points;
  points.heights.resize(samples.size());
  const double ns = static_cast<double>(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) points.heights[i] = static_cast<double>(i + 1) / ns;
  points.values = std::move(samples);
  return points;
}

double default_xi(int num_samples) {
  return 2.0 * std::sqrt(std::log(2.0 / 0.01) / (2.0 * num_samples));
}

UnimodalityFit fit_unimodal(const EcdfPoints& points, const UnimodalityConfig& cfg) {
  if (points.values.size() != points.heights.size() || points.values.size() < 2) {
    throw std::invalid_argument("fit_unimodal: malformed ECDF");
  }
  const double xi = cfg.xi > 0.0 ? cfg.xi : default_xi(static_cast<int>(points.values.size()));

  // Collapse duplicate abscissae (keep the top height) so chords are finite.
  std::vector<double> x, f;
  x.reserve(points.values.size());
  f.reserve(points.values.size());
  for (size_t i = 0; i < points.values.size(); ++i) {
    if (!x.empty() && points.values[i] == x.back()) {
      f.back() = points.heights[i];
    } else {
      x.push_back(points.values[i]);
      f.push_back(points.heights[i]);
    }
  }

  UnimodalityFit fit;
  const size_t last = x.size() - 1;
  size_t anchor = 0;
  while (anchor < last) {
    for (size_t j = last; j > anchor; --j) {
      const double slope = (f[j] - f[anchor]) / (x[j] - x[anchor]);
      const double intercept = f[j] - x[j] * slope;
      bool fits = true;
      for (size_t k = anchor + 1; k < j; ++k) {
        if (std::abs(f[k] - (x[k] * slope + intercept)) > xi) {
          fits = false;
          break;
        }
      }
      if (fits) {
        fit.slopes.push_back(slope);
        anchor = j;
        break;
      }
    }
  }

  // Slopes must rise to a single peak and then fall.
  bool descending = false;
  fit.unimodal = true;
  for (size_t i = 1; i < fit.slopes.size(); ++i) {
    if (fit.slopes[i] >= fit.slopes[i - 1]) {
      if (descending) {
        fit.unimodal = false;
        break;
      }
    } else {
      descending = true;
    }
  }
  return fit;
}

bool check_unimodal(const EcdfPoints& points, const UnimodalityConfig& cfg) {
  return fit_unimodal(points, cfg).unimodal;
}

UnimodalityReport validate_constraint_unimodality(const PlanSolution& solution,
                                                  const Scenario& scenario,
                                                  const SampleBatch& batch,
                                                  const UnimodalityConfig& cfg) {
  const int n = scenario.state_dim();
  const int m = scenario.input_dim();
  const int horizon = scenario.horizon;
  const int nv = scenario.num_vehicles();
  const int ns = batch.count;
  if (static_cast<int>(solution.inputs.size()) != nv) {
    throw std::invalid_argument("validate_constraint_unimodality: solution does not match scenario");
  }

  const std::vector<Scenario::TargetRowRef> target_refs = scenario.target_rows();
  std::vector<std::pair<Eigen::RowVectorXd, double>> target_data;
  target_data.reserve(target_refs.size());
  for (const auto& ref : target_refs) {
    target_data.push_back(scenario.target_rows_at(ref.vehicle, ref.step)[ref.row]);
  }
  const std::vector<CollisionPair> pairs = scenario.collision_pairs();
  const Eigen::MatrixXd selector = (scenario.has_vehicle_pairs() || scenario.has_obstacles())
                                       ? scenario.selector()
                                       : Eigen::MatrixXd();

  // One statistic stream per constraint.
  const size_t num_stats = target_refs.size() + pairs.size() * static_cast<size_t>(horizon);
  std::vector<std::vector<double>> stats(num_stats, std::vector<double>(ns));

  std::vector<Eigen::MatrixXd> traj(nv);
  for (int s = 0; s < ns; ++s) {
    for (int v = 0; v < nv; ++v) {
      Eigen::MatrixXd& x = traj[v];
      x.resize(n, horizon + 1);
      x.col(0) = scenario.vehicles[v].x0;
      for (int k = 0; k < horizon; ++k) {
        x.col(k + 1) = scenario.system.A * x.col(k) +
                       scenario.system.B * solution.inputs[v].segment(k * m, m) +
                       batch.draws[v].col(s).segment(k * n, n);
      }
    }
    size_t idx = 0;
    for (size_t t = 0; t < target_refs.size(); ++t) {
      stats[idx++][s] = target_data[t].first.dot(traj[target_refs[t].vehicle].col(target_refs[t].step));
    }
    for (const CollisionPair& pair : pairs) {
      for (int k = 1; k <= horizon; ++k) {
        const Eigen::VectorXd diff =
            pair.kind == CollisionKind::VehiclePair
                ? Eigen::VectorXd(traj[pair.i].col(k) - traj[pair.j].col(k))
                : Eigen::VectorXd(traj[pair.i].col(k) -
                                  scenario.obstacles[pair.j].center_at(k));
        stats[idx++][s] = (selector * diff).squaredNorm();
      }
    }
  }

  UnimodalityConfig effective = cfg;
  if (effective.xi <= 0.0) effective.xi = default_xi(ns);

  UnimodalityReport report;
  report.samples = ns;
  report.xi = effective.xi;

  size_t idx = 0;
  for (const auto& ref : target_refs) {
    const UnimodalityFit fit = fit_unimodal(ecdf(std::move(stats[idx])), effective);
    ++idx;
    ConstraintUnimodality entry;
    entry.kind = ConstraintUnimodality::Kind::TargetRow;
    entry.vehicle = ref.vehicle;
    entry.other = ref.row;
    entry.step = ref.step;
    entry.unimodal = fit.unimodal;
    entry.segments = static_cast<int>(fit.slopes.size());
    report.all_unimodal = report.all_unimodal && fit.unimodal;
    report.entries.push_back(entry);
  }
  for (const CollisionPair& pair : pairs) {
    for (int k = 1; k <= horizon; ++k) {
      const UnimodalityFit fit = fit_unimodal(ecdf(std::move(stats[idx])), effective);
      ++idx;
      ConstraintUnimodality entry;
      entry.kind = pair.kind == CollisionKind::VehiclePair
                       ? ConstraintUnimodality::Kind::VehiclePair
                       : ConstraintUnimodality::Kind::Obstacle;
      entry.vehicle = pair.i;
      entry.other = pair.j;
      entry.step = k;
      entry.unimodal = fit.unimodal;
      entry.segments = static_cast<int>(fit.slopes.size());
      report.all_unimodal = report.all_unimodal && fit.unimodal;
      report.entries.push_back(entry);
    }
  }
  return report;
}

UnimodalityReport validate_constraint_unimodality(const PlanSolution& solution,
                                                  const Scenario& scenario, int num_samples,
                                                  std::uint64_t seed,
                                                  const UnimodalityConfig& cfg) {
  const SampleBatch batch = sample_disturbances(scenario.disturbance, num_samples, seed);
  return validate_constraint_unimodality(solution, scenario, batch, cfg);
}

}  // namespace ccplan
