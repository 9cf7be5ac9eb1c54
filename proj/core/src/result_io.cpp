#include "ccplan/result_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ccplan/scenario_io.hpp"
#include "ccplan/version.hpp"

namespace ccplan {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResultIoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw ResultIoError("write failed: " + path);
}

json metadata_json(const Scenario& scenario, const std::string& backend_name) {
  return json{{"config_hash", scenario_hash(scenario)},
              {"seed", scenario.seed},
              {"version", kVersion},
              {"backend", backend_name}};
}

}  // namespace

std::string solution_to_json(const Scenario& scenario, const PlanSolution& solution,
                             const std::string& backend_name) {
  json j;
  j["scenario_hash"] = scenario_hash(scenario);
  j["bound"] = to_string(solution.bound);
  j["status"] = solution.certified ? "certified" : "non_certified";
  j["converged"] = solution.converged;
  j["cost"] = solution.cost;
  j["iterations"] = solution.iterations;
  j["slack_residual"] = solution.slack_residual;

  json inputs = json::array();
  for (const Eigen::VectorXd& u : solution.inputs) inputs.push_back(vector_to_json(u));
  j["u"] = inputs;

  json trajectories = json::array();
  for (const auto& traj : solution.mean_trajectories) {
    json veh = json::array();
    for (const Eigen::VectorXd& state : traj) veh.push_back(vector_to_json(state));
    trajectories.push_back(veh);
  }
  j["mean_trajectories"] = trajectories;

  json alloc;
  {
    json lambdas = json::array();
    for (const auto& [key, value] : solution.allocation.target_lambda) {
      lambdas.push_back({{"vehicle", std::get<0>(key)},
                         {"step", std::get<1>(key)},
                         {"row", std::get<2>(key)},
                         {"lambda", value}});
    }
    alloc["target_lambda"] = lambdas;
    json omegas = json::array();
    for (const auto& [key, value] : solution.allocation.collision_omega) {
      omegas.push_back({{"pair", std::get<0>(key)}, {"step", std::get<1>(key)}, {"omega", value}});
    }
    alloc["collision_omega"] = omegas;
    json obstacle = json::array();
    for (const auto& [key, value] : solution.allocation.obstacle_omega) {
      obstacle.push_back({{"pair", std::get<0>(key)}, {"step", std::get<1>(key)}, {"omega", value}});
    }
    alloc["obstacle_omega"] = obstacle;
  }
  j["allocation"] = alloc;

  j["margins"] = {{"target", solution.target_margins}, {"collision", solution.collision_margins}};

  json trace = json::array();
  for (const IterationRecord& rec : solution.trace) {
    trace.push_back({{"iter", rec.iter},
                     {"objective", rec.objective},
                     {"slack_sum", rec.slack_sum},
                     {"penalty", rec.penalty},
                     {"penalized_objective", rec.penalized_objective},
                     {"backend_iterations", rec.backend_iterations}});
  }
  j["trace"] = trace;
  j["metadata"] = metadata_json(scenario, backend_name);
  return j.dump(2);
}

void write_solution(const std::string& path, const Scenario& scenario,
                    const PlanSolution& solution, const std::string& backend_name) {
  write_text(path, solution_to_json(scenario, solution, backend_name));
}

LoadedSolution read_solution(const std::string& path, const Scenario& scenario) {
  std::ifstream in(path);
  if (!in) throw ResultIoError("cannot open solution file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& ex) {
    throw ResultIoError(std::string("corrupted solution file: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("scenario_hash") || !j.contains("u") || !j.contains("bound")) {
    throw ResultIoError("corrupted solution file: missing scenario_hash, bound or u");
  }

  LoadedSolution out;
  out.scenario_hash = j.at("scenario_hash").get<std::string>();

  PlanSolution& sol = out.solution;
  sol.bound = j.at("bound").get<std::string>() == "cantelli" ? BoundKind::Cantelli
                                                             : BoundKind::VysochanskijPetunin;
  const json& u = j.at("u");
  if (!u.is_array() || static_cast<int>(u.size()) != scenario.num_vehicles()) {
    throw ResultIoError("corrupted solution file: input count does not match the scenario");
  }
  const int expected = scenario.horizon * scenario.input_dim();
  for (const json& veh : u) {
    if (!veh.is_array() || static_cast<int>(veh.size()) != expected) {
      throw ResultIoError("corrupted solution file: input length does not match the scenario");
    }
    Eigen::VectorXd input(expected);
    for (int i = 0; i < expected; ++i) {
      if (!veh[i].is_number()) throw ResultIoError("corrupted solution file: non-numeric input");
      input[i] = veh[i].get<double>();
    }
    sol.inputs.push_back(std::move(input));
  }
  if (j.contains("cost")) sol.cost = j.at("cost").get<double>();
  if (j.contains("iterations")) sol.iterations = j.at("iterations").get<int>();
  if (j.contains("slack_residual")) sol.slack_residual = j.at("slack_residual").get<double>();
  if (j.contains("converged")) sol.converged = j.at("converged").get<bool>();
  if (j.contains("status")) sol.certified = j.at("status").get<std::string>() == "certified";
  return out;
}

void write_trajectories_csv(const std::string& path, const PlanSolution& solution) {
  std::ostringstream out;
  const int n = solution.mean_trajectories.empty() || solution.mean_trajectories[0].empty()
                    ? 0
                    : static_cast<int>(solution.mean_trajectories[0][0].size());
  if (n == 4) {
    out << "vehicle,k,x,y,vx,vy\r\n";
  } else {
    out << "vehicle,k";
    for (int c = 0; c < n; ++c) out << ",s" << c;
    out << "\r\n";
  }
  for (size_t v = 0; v < solution.mean_trajectories.size(); ++v) {
    const auto& traj = solution.mean_trajectories[v];
    for (size_t k = 0; k < traj.size(); ++k) {
      out << v << "," << k;
      for (Eigen::Index c = 0; c < traj[k].size(); ++c) {
        out << "," << json(traj[k][c]).dump();
      }
      out << "\r\n";
    }
  }
  write_text(path, out.str());
}

std::string satisfaction_to_json(const SatisfactionReport& report,
                                 const std::string& scenario_hash_value) {
  json j;
  j["scenario_hash"] = scenario_hash_value;
  j["samples"] = report.samples;
  j["seed"] = report.seed;
  j["thresholds"] = {{"alpha", report.alpha}, {"beta", report.beta}, {"gamma", report.gamma}};
  json joint;
  if (report.target_joint) joint["target"] = *report.target_joint;
  if (report.collision_joint) joint["collision"] = *report.collision_joint;
  if (report.obstacle_joint) joint["obstacle"] = *report.obstacle_joint;
  j["joint"] = joint;
  j["row_violations"] = {{"target", report.target_row_violations},
                         {"collision", report.collision_row_violations},
                         {"obstacle", report.obstacle_row_violations}};
  j["pass"] = report.pass;
  j["wide_ci_warning"] = report.wide_ci;
  return j.dump(2);
}

void write_satisfaction(const std::string& path, const SatisfactionReport& report,
                        const std::string& scenario_hash_value) {
  write_text(path, satisfaction_to_json(report, scenario_hash_value));
}

std::string unimodality_to_json(const UnimodalityReport& report,
                                const std::string& scenario_hash_value) {
  json j;
  j["scenario_hash"] = scenario_hash_value;
  j["samples"] = report.samples;
  j["xi"] = report.xi;
  j["all_unimodal"] = report.all_unimodal;
  json entries = json::array();
  for (const ConstraintUnimodality& entry : report.entries) {
    const char* kind = entry.kind == ConstraintUnimodality::Kind::TargetRow ? "target"
                       : entry.kind == ConstraintUnimodality::Kind::VehiclePair ? "pair"
                                                                                : "obstacle";
    entries.push_back({{"kind", kind},
                       {"vehicle", entry.vehicle},
                       {"other", entry.other},
                       {"step", entry.step},
                       {"unimodal", entry.unimodal},
                       {"segments", entry.segments}});
  }
  j["constraints"] = entries;
  return j.dump(2);
}

void write_unimodality(const std::string& path, const UnimodalityReport& report,
                       const std::string& scenario_hash_value) {
  write_text(path, unimodality_to_json(report, scenario_hash_value));
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "method,cost,iterations,slack,certified,target_satisfaction,collision_satisfaction,"
         "obstacle_satisfaction\r\n";
  auto opt = [](const std::optional<double>& v) { return v ? json(*v).dump() : std::string(); };
  for (const ComparisonRow& row : rows) {
    out << row.method << ",";
    if (row.solved) {
      out << json(row.cost).dump() << "," << row.iterations << "," << json(row.slack).dump() << ","
          << (row.certified ? "true" : "false");
    } else {
      out << ",,,false";
    }
    out << "," << opt(row.target_satisfaction) << "," << opt(row.collision_satisfaction) << ","
        << opt(row.obstacle_satisfaction) << "\r\n";
  }
  write_text(path, out.str());
}

std::string metadata_to_json(const Scenario& scenario, const std::string& backend_name) {
  return metadata_json(scenario, backend_name).dump(2);
}

void write_metadata(const std::string& path, const Scenario& scenario,
                    const std::string& backend_name) {
  write_text(path, metadata_to_json(scenario, backend_name));
}

}  // namespace ccplan
