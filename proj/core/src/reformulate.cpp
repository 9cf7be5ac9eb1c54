#include "ccplan/reformulate.hpp"

#include <cmath>
#include <stdexcept>

namespace ccplan {

LinearizationPoint LinearizationPoint::zero(const Scenario& scenario) {
  LinearizationPoint lin;
  lin.inputs.assign(scenario.num_vehicles(),
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scenario.horizon) *
                                          scenario.input_dim()));
  return lin;
}

PlanContext::PlanContext(const Scenario& scenario)
    : scenario_(scenario), cd_(scenario.system, scenario.horizon), selector_(scenario.selector()) {
  scenario_.validate();
  const DisturbanceSpec& spec = scenario_.disturbance;
  const int n = scenario_.state_dim();

  for (int v = 0; v < scenario_.num_vehicles(); ++v) {
    const VehicleSpec& veh = scenario_.vehicles[v];
    for (int step = 1; step <= scenario_.horizon; ++step) {
      const auto rows_at = scenario_.target_rows_at(v, step);
      for (size_t r = 0; r < rows_at.size(); ++r) {
        const Eigen::RowVectorXd& g = rows_at[r].first;
        TargetRow row;
        row.ref = {v, step, static_cast<int>(r)};
        row.coeff_u = g * cd_.input_map(step);
        const AffineStat stat = affine_moments(g, cd_, spec, step, v);
        row.mean_const = g * (cd_.state_power(step) * veh.x0) + stat.mean_shift;
        row.offset = rows_at[r].second;
        row.std = stat.std;
        row.degenerate = stat.degenerate;
        target_rows_.push_back(std::move(row));
      }
    }
  }

  const std::vector<CollisionPair> pairs = scenario_.collision_pairs();
  for (size_t p = 0; p < pairs.size(); ++p) {
    const CollisionPair& pair = pairs[p];
    for (int k = 1; k <= scenario_.horizon; ++k) {
      CollisionRow row;
      row.pair = pair;
      row.pair_index = static_cast<int>(p);
      row.step = k;

      const Eigen::MatrixXd map = selector_ * cd_.disturbance_map(k);
      std::vector<ComponentMoments> comps(static_cast<size_t>(scenario_.horizon) * n);
      for (int step = 0; step < scenario_.horizon; ++step) {
        for (int c = 0; c < n; ++c) {
          const ComponentMoments& own = spec.component(pair.i, step, c);
          comps[static_cast<size_t>(step) * n + c] =
              pair.kind == CollisionKind::VehiclePair
                  ? difference_moments(own, spec.component(pair.j, step, c))
                  : own;
        }
      }
      row.moments = quadratic_moments(map, comps);

      row.zbar_u = selector_ * cd_.input_map(k);
      if (pair.kind == CollisionKind::VehiclePair) {
        row.zbar_const =
            selector_ * (cd_.state_power(k) * (scenario_.vehicles[pair.i].x0 -
                                               scenario_.vehicles[pair.j].x0)) +
            map * (spec.stacked_mean(pair.i) - spec.stacked_mean(pair.j));
      } else {
        const ObstacleSpec& obs = scenario_.obstacles[pair.j];
        row.zbar_const = selector_ * (cd_.state_power(k) * scenario_.vehicles[pair.i].x0 -
                                      obs.center_at(k)) +
                         map * spec.stacked_mean(pair.i);
      }
      collision_rows_.push_back(std::move(row));
    }
  }
}

Eigen::VectorXd PlanContext::zbar_at(const CollisionRow& row,
                                     const std::vector<Eigen::VectorXd>& inputs) const {
  if (row.pair.kind == CollisionKind::VehiclePair) {
    return row.zbar_const + row.zbar_u * (inputs[row.pair.i] - inputs[row.pair.j]);
  }
  return row.zbar_const + row.zbar_u * inputs[row.pair.i];
}

AffineRow make_target_row(const PlanContext::TargetRow& row, double lambda,
                          const VariableLayout& layout, int lambda_var) {
  AffineRow out;
  out.a = Eigen::VectorXd::Zero(layout.total);
  out.a.segment(layout.u_offset(row.ref.vehicle), layout.inputs_per_vehicle) = row.coeff_u;
  out.b = row.offset - row.mean_const;
  if (!row.degenerate) {
    if (lambda_var >= 0) {
      out.a[lambda_var] = row.std;
    } else {
      out.b -= lambda * row.std;
    }
  }
  return out;
}

namespace {

// zbar extended with the homogeneous 1, as an affine map of the layout vars.
void collision_zbar_map(const PlanContext::CollisionRow& row, const VariableLayout& layout,
                        Eigen::MatrixXd& zext_x, Eigen::VectorXd& zext_0) {
  const Eigen::Index q = row.zbar_const.size();
  zext_x = Eigen::MatrixXd::Zero(q + 1, layout.total);
  zext_x.block(0, layout.u_offset(row.pair.i), q, layout.inputs_per_vehicle) = row.zbar_u;
  if (row.pair.kind == CollisionKind::VehiclePair) {
    zext_x.block(0, layout.u_offset(row.pair.j), q, layout.inputs_per_vehicle) = -row.zbar_u;
  }
  zext_0 = Eigen::VectorXd::Zero(q + 1);
  zext_0.head(q) = row.zbar_const;
  zext_0[q] = 1.0;
}

}  // namespace

SocRow make_collision_row(const PlanContext& ctx, const PlanContext::CollisionRow& row,
                          double multiplier, const LinearizationPoint& lin,
                          const VariableLayout& layout, int slack_var) {
  if (static_cast<int>(lin.inputs.size()) != layout.num_vehicles) {
    throw std::invalid_argument("make_collision_row: linearization point missing");
  }
  const Eigen::VectorXd zbar_prev = ctx.zbar_at(row, lin.inputs);

  Eigen::MatrixXd zext_x;
  Eigen::VectorXd zext_0;
  collision_zbar_map(row, layout, zext_x, zext_0);

  SocRow out;
  out.F = multiplier * row.moments.var_block_sqrt * zext_x;
  out.g = multiplier * row.moments.var_block_sqrt * zext_0;

  // First-order expansion of E||zbar + z||^2 about the previous iterate:
  //   |zbar_p|^2 + E[z'z] + 2 zbar_p' (zbar(U) - zbar_p)
  const Eigen::Index q = row.zbar_const.size();
  out.c = Eigen::VectorXd::Zero(layout.total);
  out.c += zext_x.topRows(q).transpose() * (2.0 * zbar_prev);
  out.c[slack_var] += 1.0;
  out.d = -row.pair.radius * row.pair.radius + row.moments.e_ztz + zbar_prev.squaredNorm() +
          2.0 * zbar_prev.dot(row.zbar_const - zbar_prev);
  return out;
}

double exact_dc_row_value(const PlanContext& ctx, const PlanContext::CollisionRow& row,
                          const std::vector<Eigen::VectorXd>& inputs, BoundKind kind,
                          double omega) {
  const Eigen::VectorXd zbar = ctx.zbar_at(row, inputs);
  const double multiplier = lambda_for_risk(kind, omega);
  return row.moments.expectation_at(zbar) - multiplier * row.moments.std_at(zbar) -
         row.pair.radius * row.pair.radius;
}

std::vector<Eigen::VectorXd> split_inputs(const Eigen::VectorXd& x, const VariableLayout& layout) {
  std::vector<Eigen::VectorXd> inputs(layout.num_vehicles);
  for (int v = 0; v < layout.num_vehicles; ++v) {
    inputs[v] = x.segment(layout.u_offset(v), layout.inputs_per_vehicle);
  }
  return inputs;
}

RiskCut make_risk_cut(BoundKind kind, int row, double omega_hat) {
  RiskCut cut;
  cut.row = row;
  cut.slope = lambda_for_risk_derivative(kind, omega_hat);
  cut.intercept = lambda_for_risk(kind, omega_hat) - cut.slope * omega_hat;
  return cut;
}

AssembledProblem assemble_problem(const PlanContext& ctx, const RiskAllocation& alloc,
                                  const LinearizationPoint& lin, double penalty,
                                  const std::vector<RiskCut>& cuts) {
  const Scenario& scenario = ctx.scenario();
  AssembledProblem out;
  VariableLayout& layout = out.layout;
  layout.num_vehicles = scenario.num_vehicles();
  layout.inputs_per_vehicle = scenario.horizon * scenario.input_dim();
  layout.num_slack = static_cast<int>(ctx.collision_rows().size());
  layout.slack_offset = layout.num_vehicles * layout.inputs_per_vehicle;

  out.lambda_var_of_row.assign(ctx.target_rows().size(), -1);
  out.omega_var_of_row.assign(ctx.target_rows().size(), -1);
  layout.omega_offset = layout.slack_offset + layout.num_slack;
  if (alloc.optimize_target_lambda) {
    int count = 0;
    for (size_t t = 0; t < ctx.target_rows().size(); ++t) {
      if (!ctx.target_rows()[t].degenerate) ++count;
    }
    layout.num_risk = count;
  }
  layout.lambda_offset = layout.omega_offset + layout.num_risk;
  if (alloc.optimize_target_lambda) {
    int next = 0;
    for (size_t t = 0; t < ctx.target_rows().size(); ++t) {
      if (!ctx.target_rows()[t].degenerate) {
        out.omega_var_of_row[t] = layout.omega_offset + next;
        out.lambda_var_of_row[t] = layout.lambda_offset + next;
        ++next;
      }
    }
  }
  layout.epigraph_index = layout.lambda_offset + layout.num_risk;
  layout.total = layout.epigraph_index + 1;

  ConicProblem& prob = out.conic;
  prob.num_vars = layout.total;
  prob.cost = Eigen::VectorXd::Zero(layout.total);
  prob.cost[layout.epigraph_index] = 1.0;
  for (int i = 0; i < layout.num_slack; ++i) prob.cost[layout.slack_offset + i] = penalty;

  // Input box, repeated over vehicles and steps.
  const int m = scenario.input_dim();
  for (int v = 0; v < layout.num_vehicles; ++v) {
    for (int k = 0; k < scenario.horizon; ++k) {
      for (int d = 0; d < m; ++d) {
        prob.bounds.push_back({layout.u_offset(v) + k * m + d, scenario.input_lo[d],
                               scenario.input_hi[d]});
      }
    }
  }

  // Slack non-negativity.
  for (int i = 0; i < layout.num_slack; ++i) {
    AffineRow row;
    row.a = Eigen::VectorXd::Zero(layout.total);
    row.a[layout.slack_offset + i] = -1.0;
    row.b = 0.0;
    prob.affine.push_back(std::move(row));
  }

  // Optimized mode: per-row risk levels with the linear Boole budget, and
  // multiplier variables boxed to the bound's domain. The risk floor (one
  // percent of a uniform share) costs at most one percent of the budget and
  // keeps the multiplier map's tangents numerically tame.
  if (layout.num_risk > 0) {
    const double omega_lo = 0.01 * alloc.alpha / layout.num_risk;
    for (int i = 0; i < layout.num_risk; ++i) {
      prob.bounds.push_back({layout.omega_offset + i, omega_lo, alloc.alpha});
      prob.bounds.push_back({layout.lambda_offset + i,
                             lambda_for_risk(alloc.kind, alloc.alpha),
                             lambda_for_risk(alloc.kind, omega_lo)});
    }
    AffineRow budget;
    budget.a = Eigen::VectorXd::Zero(layout.total);
    budget.a.segment(layout.omega_offset, layout.num_risk).setOnes();
    budget.b = alloc.alpha;
    prob.affine.push_back(std::move(budget));
  }

  // Target rows.
  for (size_t t = 0; t < ctx.target_rows().size(); ++t) {
    const PlanContext::TargetRow& row = ctx.target_rows()[t];
    double lambda = 0.0;
    if (!row.degenerate) {
      const auto it = alloc.target_lambda.find({row.ref.vehicle, row.ref.step, row.ref.row});
      if (it == alloc.target_lambda.end()) {
        throw std::invalid_argument("assemble_problem: allocation missing a target row");
      }
      lambda = it->second;
    }
    prob.affine.push_back(make_target_row(row, lambda, layout, out.lambda_var_of_row[t]));
  }

  // Collision rows, one slack each.
  for (size_t cidx = 0; cidx < ctx.collision_rows().size(); ++cidx) {
    const PlanContext::CollisionRow& row = ctx.collision_rows()[cidx];
    const auto& omega_map = row.pair.kind == CollisionKind::VehiclePair ? alloc.collision_omega
                                                                        : alloc.obstacle_omega;
    const auto it = omega_map.find({row.pair_index, row.step});
    if (it == omega_map.end()) {
      throw std::invalid_argument("assemble_problem: allocation missing a collision row");
    }
    const double multiplier = lambda_for_risk(alloc.kind, it->second);
    const int slack_var = layout.slack_offset + static_cast<int>(cidx);
    SocRow soc = make_collision_row(ctx, row, multiplier, lin, layout, slack_var);
    if (soc.F.isZero(0.0) && soc.g.isZero(0.0)) {
      // Zero-variance limit: deterministic separation row.
      AffineRow det;
      det.a = -soc.c;
      det.b = soc.d;
      prob.affine.push_back(std::move(det));
    } else {
      prob.socs.push_back(std::move(soc));
    }
  }

  // Accumulated tangent cuts y_j >= slope * omega_j + intercept.
  for (const RiskCut& cut : cuts) {
    if (cut.row < 0 || cut.row >= layout.num_risk) {
      throw std::invalid_argument("assemble_problem: cut row out of range");
    }
    AffineRow row;
    row.a = Eigen::VectorXd::Zero(layout.total);
    row.a[layout.omega_offset + cut.row] = cut.slope;
    row.a[layout.lambda_offset + cut.row] = -1.0;
    row.b = -cut.intercept;
    prob.affine.push_back(std::move(row));
  }

  // Fuel objective t >= |U|^2 as the cone |(2U; 1 - t)| <= 1 + t.
  const int nu = layout.num_vehicles * layout.inputs_per_vehicle;
  SocRow epi;
  epi.F = Eigen::MatrixXd::Zero(nu + 1, layout.total);
  epi.F.topLeftCorner(nu, nu) = 2.0 * Eigen::MatrixXd::Identity(nu, nu);
  epi.F(nu, layout.epigraph_index) = -1.0;
  epi.g = Eigen::VectorXd::Zero(nu + 1);
  epi.g[nu] = 1.0;
  epi.c = Eigen::VectorXd::Zero(layout.total);
  epi.c[layout.epigraph_index] = 1.0;
  epi.d = 1.0;
  prob.socs.push_back(std::move(epi));

  return out;
}

}  // namespace ccplan
