#include "ccplan/validation.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace ccplan {

namespace {

// Fixed-layout draws through explicit inverse transforms so batches are
// identical across platforms for a given seed.
class ComponentSampler {
 public:
  explicit ComponentSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() {  // (0, 1]
    return 1.0 - (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
  }

  double gaussian(double mean, double var) {
    const double u1 = uniform();
    const double u2 = uniform();
    return mean + std::sqrt(var) * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double mixture(const std::vector<MixtureMode>& modes) {
    const double pick = uniform();
    double acc = 0.0;
    for (const MixtureMode& mode : modes) {
      acc += mode.weight;
      if (pick <= acc) return gaussian(mode.mean, mode.var);
    }
    return gaussian(modes.back().mean, modes.back().var);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

SampleBatch sample_disturbances(const DisturbanceSpec& spec, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_disturbances: count must be positive");
  if (!spec.samplable()) {
    throw NotSamplableError("sample_disturbances: explicit-moment specs carry no sampling family");
  }

  SampleBatch batch;
  batch.seed = seed;
  batch.count = count;
  batch.draws.resize(spec.num_vehicles());

  ComponentSampler sampler(seed);
  const int rows = spec.horizon() * spec.state_dim();
  for (int v = 0; v < spec.num_vehicles(); ++v) {
    Eigen::MatrixXd& draws = batch.draws[v];
    draws.resize(rows, count);
    if (spec.family() == DisturbanceFamily::None) {
      draws.setZero();
      continue;
    }
    for (int s = 0; s < count; ++s) {
      for (int k = 0; k < spec.horizon(); ++k) {
        for (int c = 0; c < spec.state_dim(); ++c) {
          double value = 0.0;
          switch (spec.family()) {
            case DisturbanceFamily::Gaussian:
              value = sampler.gaussian(spec.gaussian_mean()[c], spec.gaussian_var()[c]);
              break;
            case DisturbanceFamily::Exponential:
              value = sampler.exponential(spec.exponential_rates()[c]);
              break;
            case DisturbanceFamily::GaussianMixture:
              value = sampler.mixture(spec.mixture_modes()[c]);
              break;
            default:
              break;
          }
          draws(k * spec.state_dim() + c, s) = value;
        }
      }
    }
  }
  return batch;
}

namespace {

struct Counts {
  long target_joint = 0;
  long collision_joint = 0;
  long obstacle_joint = 0;
  std::vector<long> target_rows;
  std::vector<long> collision_rows;
  std::vector<long> obstacle_rows;
};

}  // namespace

SatisfactionReport measure_satisfaction(const PlanSolution& solution, const Scenario& scenario,
                                        const SampleBatch& batch) {
  const int n = scenario.state_dim();
  const int m = scenario.input_dim();
  const int horizon = scenario.horizon;
  const int nv = scenario.num_vehicles();
  if (static_cast<int>(batch.draws.size()) != nv ||
      (nv > 0 && batch.draws[0].rows() != horizon * n)) {
    throw std::invalid_argument("measure_satisfaction: batch does not match the scenario");
  }
  if (static_cast<int>(solution.inputs.size()) != nv) {
    throw std::invalid_argument("measure_satisfaction: solution does not match the scenario");
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

  int num_pair_rows = 0, num_obstacle_rows = 0;
  for (const CollisionPair& pair : pairs) {
    (pair.kind == CollisionKind::VehiclePair ? num_pair_rows : num_obstacle_rows) += horizon;
  }

  const int ns = batch.count;
  auto worker = [&](int begin, int end, Counts& counts) {
    counts.target_rows.assign(target_refs.size(), 0);
    counts.collision_rows.assign(num_pair_rows, 0);
    counts.obstacle_rows.assign(num_obstacle_rows, 0);
    std::vector<Eigen::MatrixXd> traj(nv);  // n x (N+1) states per vehicle

    for (int s = begin; s < end; ++s) {
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

      bool target_ok = true;
      for (size_t t = 0; t < target_refs.size(); ++t) {
        const auto& ref = target_refs[t];
        const double value = target_data[t].first.dot(traj[ref.vehicle].col(ref.step));
        if (value > target_data[t].second) {
          target_ok = false;
          ++counts.target_rows[t];
        }
      }
      if (target_ok) ++counts.target_joint;

      bool collision_ok = true;
      bool obstacle_ok = true;
      int pair_row = 0, obstacle_row = 0;
      for (const CollisionPair& pair : pairs) {
        for (int k = 1; k <= horizon; ++k) {
          if (pair.kind == CollisionKind::VehiclePair) {
            const double dist = (selector * (traj[pair.i].col(k) - traj[pair.j].col(k))).norm();
            if (dist < pair.radius) {
              collision_ok = false;
              ++counts.collision_rows[pair_row];
            }
            ++pair_row;
          } else {
            const ObstacleSpec& obs = scenario.obstacles[pair.j];
            const double dist = (selector * (traj[pair.i].col(k) - obs.center_at(k))).norm();
            if (dist < pair.radius) {
              obstacle_ok = false;
              ++counts.obstacle_rows[obstacle_row];
            }
            ++obstacle_row;
          }
        }
      }
      if (collision_ok) ++counts.collision_joint;
      if (obstacle_ok) ++counts.obstacle_joint;
    }
  };

  // Fixed chunking keeps the reduction deterministic regardless of hardware.
  constexpr int kChunks = 8;
  std::vector<Counts> partial(kChunks);
  {
    std::vector<std::thread> threads;
    threads.reserve(kChunks);
    for (int cidx = 0; cidx < kChunks; ++cidx) {
      const int begin = static_cast<int>(static_cast<long>(ns) * cidx / kChunks);
      const int end = static_cast<int>(static_cast<long>(ns) * (cidx + 1) / kChunks);
      threads.emplace_back(worker, begin, end, std::ref(partial[cidx]));
    }
    for (std::thread& t : threads) t.join();
  }

  Counts total;
  total.target_rows.assign(target_refs.size(), 0);
  total.collision_rows.assign(num_pair_rows, 0);
  total.obstacle_rows.assign(num_obstacle_rows, 0);
  for (const Counts& c : partial) {
    total.target_joint += c.target_joint;
    total.collision_joint += c.collision_joint;
    total.obstacle_joint += c.obstacle_joint;
    for (size_t i = 0; i < total.target_rows.size(); ++i) total.target_rows[i] += c.target_rows[i];
    for (size_t i = 0; i < total.collision_rows.size(); ++i)
      total.collision_rows[i] += c.collision_rows[i];
    for (size_t i = 0; i < total.obstacle_rows.size(); ++i)
      total.obstacle_rows[i] += c.obstacle_rows[i];
  }

  SatisfactionReport report;
  report.samples = ns;
  report.seed = batch.seed;
  report.alpha = scenario.alpha;
  report.beta = scenario.beta;
  report.gamma = scenario.gamma;
  report.target_row_violations.assign(total.target_rows.begin(), total.target_rows.end());
  report.collision_row_violations.assign(total.collision_rows.begin(), total.collision_rows.end());
  report.obstacle_row_violations.assign(total.obstacle_rows.begin(), total.obstacle_rows.end());

  bool pass = true;
  auto check_joint = [&](long hits, double budget) -> double {
    const double p = static_cast<double>(hits) / ns;
    const double threshold = 1.0 - budget;
    const double se = std::sqrt(threshold * (1.0 - threshold) / ns);
    if (p < threshold - 3.0 * se) pass = false;
    return p;
  };

  if (!target_refs.empty()) report.target_joint = check_joint(total.target_joint, scenario.alpha);
  if (num_pair_rows > 0) report.collision_joint = check_joint(total.collision_joint, scenario.gamma);
  if (num_obstacle_rows > 0) report.obstacle_joint = check_joint(total.obstacle_joint, scenario.beta);

  report.pass = pass;
  report.wide_ci = ns < 1000;
  return report;
}

}  // namespace ccplan
