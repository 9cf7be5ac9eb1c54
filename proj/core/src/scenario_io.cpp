#include "ccplan/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ccplan {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ScenarioParseError(path + ": " + message);
}

void expect_object(const json& j, const std::string& path,
                   const std::set<std::string>& required, const std::set<std::string>& optional) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!required.count(key) && !optional.count(key)) fail(path + "." + key, "unknown key");
  }
  for (const std::string& key : required) {
    if (!j.contains(key)) fail(path + "." + key, "missing required key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& path, int expected_size = -1) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = get_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  if (expected_size >= 0 && v.size() != expected_size) {
    fail(path, "expected " + std::to_string(expected_size) + " entries, got " +
                   std::to_string(v.size()));
  }
  return v;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "expected rows to be non-empty arrays");
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const Eigen::VectorXd row = get_vector(j[r], row_path, static_cast<int>(cols));
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) arr.push_back(to_json(Eigen::VectorXd(m.row(r))));
  return arr;
}

void parse_dynamics(const json& j, Scenario& scenario) {
  expect_object(j, "$.dynamics", {"kind", "dt"}, {"params", "a", "b", "input_model"});
  const std::string kind = get_string(j.at("kind"), "$.dynamics.kind");
  const double dt = get_number(j.at("dt"), "$.dynamics.dt");
  if (!(dt > 0.0)) fail("$.dynamics.dt", "must be positive");

  if (kind == "cwh") {
    if (!j.contains("params")) fail("$.dynamics.params", "missing required key");
    expect_object(j.at("params"), "$.dynamics.params", {"mu", "r0", "mc"}, {});
    CwhParams params;
    params.mu = get_number(j.at("params").at("mu"), "$.dynamics.params.mu");
    params.r0 = get_number(j.at("params").at("r0"), "$.dynamics.params.r0");
    params.mc = get_number(j.at("params").at("mc"), "$.dynamics.params.mc");
    InputModel model = InputModel::ImpulseAtStart;
    if (j.contains("input_model")) {
      const std::string name = get_string(j.at("input_model"), "$.dynamics.input_model");
      if (name == "impulse") {
        model = InputModel::ImpulseAtStart;
      } else if (name == "zoh") {
        model = InputModel::ZeroOrderHold;
      } else {
        fail("$.dynamics.input_model", "expected \"impulse\" or \"zoh\"");
      }
    }
    if (!(params.mu > 0.0) || !(params.r0 > 0.0) || !(params.mc > 0.0)) {
      fail("$.dynamics.params", "mu, r0 and mc must be positive");
    }
    scenario.cwh = params;
    scenario.input_model = model;
    scenario.system = discretize_cwh(params, dt, model);
  } else if (kind == "explicit") {
    if (!j.contains("a") || !j.contains("b")) fail("$.dynamics", "explicit dynamics need a and b");
    scenario.system.A = get_matrix(j.at("a"), "$.dynamics.a");
    scenario.system.B = get_matrix(j.at("b"), "$.dynamics.b");
    scenario.system.dt = dt;
    scenario.system.validate();
  } else {
    fail("$.dynamics.kind", "expected \"cwh\" or \"explicit\"");
  }
}

TargetSet parse_target_set(const json& j, const std::string& path, int n) {
  expect_object(j, path, {"rows", "steps"}, {});
  TargetSet set;
  const json& rows = j.at("rows");
  if (!rows.is_array() || rows.empty()) fail(path + ".rows", "expected a non-empty array");
  set.polytope.G.resize(rows.size(), n);
  set.polytope.h.resize(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const std::string row_path = path + ".rows[" + std::to_string(r) + "]";
    expect_object(rows[r], row_path, {"g", "h"}, {});
    set.polytope.G.row(static_cast<Eigen::Index>(r)) =
        get_vector(rows[r].at("g"), row_path + ".g", n).transpose();
    set.polytope.h[static_cast<Eigen::Index>(r)] = get_number(rows[r].at("h"), row_path + ".h");
  }

  const json& steps = j.at("steps");
  if (steps.is_string()) {
    if (steps.get<std::string>() != "terminal") {
      fail(path + ".steps", "expected \"terminal\" or an array of steps");
    }
    set.schedule.terminal_only = true;
  } else if (steps.is_array()) {
    set.schedule.terminal_only = false;
    for (size_t s = 0; s < steps.size(); ++s) {
      set.schedule.steps.push_back(get_int(steps[s], path + ".steps[" + std::to_string(s) + "]"));
    }
  } else {
    fail(path + ".steps", "expected \"terminal\" or an array of steps");
  }
  return set;
}

void parse_vehicles(const json& j, Scenario& scenario) {
  if (!j.is_array() || j.empty()) fail("$.vehicles", "expected a non-empty array");
  const int n = scenario.state_dim();
  for (size_t v = 0; v < j.size(); ++v) {
    const std::string path = "$.vehicles[" + std::to_string(v) + "]";
    expect_object(j[v], path, {"x0", "target"}, {});
    VehicleSpec veh;
    veh.x0 = get_vector(j[v].at("x0"), path + ".x0", n);

    const json& target = j[v].at("target");
    if (target.is_array()) {
      if (target.empty()) fail(path + ".target", "expected at least one target set");
      for (size_t t = 0; t < target.size(); ++t) {
        veh.targets.push_back(
            parse_target_set(target[t], path + ".target[" + std::to_string(t) + "]", n));
      }
    } else {
      veh.targets.push_back(parse_target_set(target, path + ".target", n));
    }
    scenario.vehicles.push_back(std::move(veh));
  }
}

void parse_collisions(const json& j, Scenario& scenario) {
  expect_object(j, "$.collisions", {}, {"r", "s_diag", "pairs", "obstacles"});
  const int n = scenario.state_dim();
  if (j.contains("r")) scenario.collision_radius = get_number(j.at("r"), "$.collisions.r");
  if (j.contains("s_diag")) {
    scenario.s_diag = get_vector(j.at("s_diag"), "$.collisions.s_diag", n);
  }
  if (j.contains("pairs")) {
    const json& pairs = j.at("pairs");
    if (pairs.is_string()) {
      if (pairs.get<std::string>() != "all") fail("$.collisions.pairs", "expected \"all\" or a list");
      scenario.all_pairs = true;
    } else if (pairs.is_array()) {
      scenario.all_pairs = false;
      for (size_t p = 0; p < pairs.size(); ++p) {
        const std::string path = "$.collisions.pairs[" + std::to_string(p) + "]";
        if (!pairs[p].is_array() || pairs[p].size() != 2) fail(path, "expected [i, j]");
        scenario.pair_list.emplace_back(get_int(pairs[p][0], path + "[0]"),
                                        get_int(pairs[p][1], path + "[1]"));
      }
    } else {
      fail("$.collisions.pairs", "expected \"all\" or a list");
    }
  }
  if (j.contains("obstacles")) {
    const json& obstacles = j.at("obstacles");
    if (!obstacles.is_array()) fail("$.collisions.obstacles", "expected an array");
    for (size_t o = 0; o < obstacles.size(); ++o) {
      const std::string path = "$.collisions.obstacles[" + std::to_string(o) + "]";
      expect_object(obstacles[o], path, {"center", "r"}, {});
      ObstacleSpec obs;
      obs.radius = get_number(obstacles[o].at("r"), path + ".r");
      const json& center = obstacles[o].at("center");
      if (!center.is_array() || center.empty()) fail(path + ".center", "expected an array");
      if (center[0].is_array()) {
        for (size_t k = 0; k < center.size(); ++k) {
          obs.centers.push_back(
              get_vector(center[k], path + ".center[" + std::to_string(k) + "]", n));
        }
      } else {
        obs.centers.push_back(get_vector(center, path + ".center", n));
      }
      scenario.obstacles.push_back(std::move(obs));
    }
  }
}

ComponentMoments parse_component_moments(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object of moments");
  if (j.contains("m1") || j.contains("m2")) {
    expect_object(j, path, {"m1", "m2", "m3", "m4"}, {});
    RawMoments raw;
    raw.m1 = get_number(j.at("m1"), path + ".m1");
    raw.m2 = get_number(j.at("m2"), path + ".m2");
    raw.m3 = get_number(j.at("m3"), path + ".m3");
    raw.m4 = get_number(j.at("m4"), path + ".m4");
    try {
      return centered_moments(raw);
    } catch (const std::exception& ex) {
      fail(path, ex.what());
    }
  }
  expect_object(j, path, {"mean", "var", "c3", "c4"}, {});
  ComponentMoments cm;
  cm.mean = get_number(j.at("mean"), path + ".mean");
  cm.var = get_number(j.at("var"), path + ".var");
  cm.c3 = get_number(j.at("c3"), path + ".c3");
  cm.c4 = get_number(j.at("c4"), path + ".c4");
  return cm;
}

void parse_disturbance(const json& j, Scenario& scenario) {
  const int n = scenario.state_dim();
  const int nv = scenario.num_vehicles();
  const int horizon = scenario.horizon;
  expect_object(j, "$.disturbance", {"family"}, {"rates", "mean", "var", "modes", "moments"});
  const std::string family = get_string(j.at("family"), "$.disturbance.family");

  if (family == "none") {
    scenario.disturbance = DisturbanceSpec::none(nv, horizon, n);
  } else if (family == "gaussian") {
    if (!j.contains("mean") || !j.contains("var")) {
      fail("$.disturbance", "gaussian family needs mean and var");
    }
    scenario.disturbance = DisturbanceSpec::gaussian(
        nv, horizon, get_vector(j.at("mean"), "$.disturbance.mean", n),
        get_vector(j.at("var"), "$.disturbance.var", n));
  } else if (family == "exponential") {
    if (!j.contains("rates")) fail("$.disturbance.rates", "missing required key");
    scenario.disturbance = DisturbanceSpec::exponential(
        nv, horizon, get_vector(j.at("rates"), "$.disturbance.rates", n));
  } else if (family == "gaussian_mixture") {
    if (!j.contains("modes")) fail("$.disturbance.modes", "missing required key");
    const json& modes = j.at("modes");
    if (!modes.is_array() || static_cast<int>(modes.size()) != n) {
      fail("$.disturbance.modes", "expected one mode list per state component");
    }
    std::vector<std::vector<MixtureMode>> all(n);
    for (int c = 0; c < n; ++c) {
      const std::string cpath = "$.disturbance.modes[" + std::to_string(c) + "]";
      if (!modes[c].is_array() || modes[c].empty()) fail(cpath, "expected a non-empty array");
      for (size_t k = 0; k < modes[c].size(); ++k) {
        const std::string mpath = cpath + "[" + std::to_string(k) + "]";
        expect_object(modes[c][k], mpath, {"weight", "mean", "var"}, {});
        MixtureMode mode;
        mode.weight = get_number(modes[c][k].at("weight"), mpath + ".weight");
        mode.mean = get_number(modes[c][k].at("mean"), mpath + ".mean");
        mode.var = get_number(modes[c][k].at("var"), mpath + ".var");
        all[c].push_back(mode);
      }
    }
    try {
      scenario.disturbance = DisturbanceSpec::gaussian_mixture(nv, horizon, all);
    } catch (const std::exception& ex) {
      fail("$.disturbance.modes", ex.what());
    }
  } else if (family == "explicit") {
    if (!j.contains("moments")) fail("$.disturbance.moments", "missing required key");
    const json& moments = j.at("moments");
    if (!moments.is_array() || static_cast<int>(moments.size()) != n) {
      fail("$.disturbance.moments", "expected one moment set per state component");
    }
    std::vector<ComponentMoments> comps(n);
    for (int c = 0; c < n; ++c) {
      comps[c] = parse_component_moments(moments[c],
                                         "$.disturbance.moments[" + std::to_string(c) + "]");
    }
    try {
      scenario.disturbance = DisturbanceSpec::explicit_moments(nv, horizon, comps);
    } catch (const std::exception& ex) {
      fail("$.disturbance.moments", ex.what());
    }
  } else {
    fail("$.disturbance.family",
         "expected \"none\", \"gaussian\", \"exponential\", \"gaussian_mixture\" or \"explicit\"");
  }
}

void parse_allocation(const json& j, Scenario& scenario) {
  if (j.is_string()) {
    const std::string mode = j.get<std::string>();
    if (mode == "uniform") {
      scenario.allocation = AllocationMode::Uniform;
    } else if (mode == "optimized") {
      scenario.allocation = AllocationMode::Optimized;
    } else {
      fail("$.allocation", "expected \"uniform\", \"optimized\" or an explicit object");
    }
    return;
  }
  expect_object(j, "$.allocation", {}, {"target_lambda", "collision_omega", "obstacle_omega"});
  scenario.allocation = AllocationMode::Explicit;
  RiskAllocation& alloc = scenario.explicit_allocation;
  alloc.kind = scenario.bound;

  const auto target_refs = scenario.target_rows();
  if (j.contains("target_lambda")) {
    const Eigen::VectorXd values = get_vector(j.at("target_lambda"), "$.allocation.target_lambda",
                                              static_cast<int>(target_refs.size()));
    for (size_t t = 0; t < target_refs.size(); ++t) {
      alloc.target_lambda[{target_refs[t].vehicle, target_refs[t].step, target_refs[t].row}] =
          values[static_cast<Eigen::Index>(t)];
    }
  }
  const auto pairs = scenario.collision_pairs();
  auto parse_omega = [&](const char* key, CollisionKind kind,
                         std::map<CollisionRowKey, double>& dest) {
    if (!j.contains(key)) return;
    int rows = 0;
    for (const CollisionPair& pair : pairs) {
      if (pair.kind == kind) rows += scenario.horizon;
    }
    const Eigen::VectorXd values =
        get_vector(j.at(key), std::string("$.allocation.") + key, rows);
    int idx = 0;
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p].kind != kind) continue;
      for (int k = 1; k <= scenario.horizon; ++k) {
        dest[{static_cast<int>(p), k}] = values[idx++];
      }
    }
  };
  parse_omega("collision_omega", CollisionKind::VehiclePair, alloc.collision_omega);
  parse_omega("obstacle_omega", CollisionKind::VehicleObstacle, alloc.obstacle_omega);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ScenarioParseError(std::string("$: invalid JSON: ") + ex.what());
  }

  expect_object(j, "$",
                {"dynamics", "horizon", "input_box", "vehicles", "disturbance", "thresholds"},
                {"collisions", "bound", "allocation", "ccp", "seed"});

  Scenario scenario;
  parse_dynamics(j.at("dynamics"), scenario);

  scenario.horizon = get_int(j.at("horizon"), "$.horizon");
  if (scenario.horizon < 1) fail("$.horizon", "must be >= 1");

  expect_object(j.at("input_box"), "$.input_box", {"lo", "hi"}, {});
  scenario.input_lo = get_vector(j.at("input_box").at("lo"), "$.input_box.lo", scenario.input_dim());
  scenario.input_hi = get_vector(j.at("input_box").at("hi"), "$.input_box.hi", scenario.input_dim());

  parse_vehicles(j.at("vehicles"), scenario);
  if (j.contains("collisions")) parse_collisions(j.at("collisions"), scenario);
  if (scenario.s_diag.size() == 0) scenario.s_diag = Eigen::VectorXd::Zero(scenario.state_dim());
  parse_disturbance(j.at("disturbance"), scenario);

  expect_object(j.at("thresholds"), "$.thresholds", {"alpha"}, {"beta", "gamma"});
  scenario.alpha = get_number(j.at("thresholds").at("alpha"), "$.thresholds.alpha");
  if (j.at("thresholds").contains("beta")) {
    scenario.beta = get_number(j.at("thresholds").at("beta"), "$.thresholds.beta");
  }
  if (j.at("thresholds").contains("gamma")) {
    scenario.gamma = get_number(j.at("thresholds").at("gamma"), "$.thresholds.gamma");
  }

  if (j.contains("bound")) {
    const std::string bound = get_string(j.at("bound"), "$.bound");
    if (bound == "vp") {
      scenario.bound = BoundKind::VysochanskijPetunin;
    } else if (bound == "cantelli") {
      scenario.bound = BoundKind::Cantelli;
    } else {
      fail("$.bound", "expected \"vp\" or \"cantelli\"");
    }
  }
  if (j.contains("allocation")) parse_allocation(j.at("allocation"), scenario);

  if (j.contains("ccp")) {
    expect_object(j.at("ccp"), "$.ccp", {},
                  {"obj_tol", "slack_tol", "max_iters", "penalty0", "penalty_growth"});
    const json& ccp = j.at("ccp");
    if (ccp.contains("obj_tol")) scenario.ccp.obj_tol = get_number(ccp.at("obj_tol"), "$.ccp.obj_tol");
    if (ccp.contains("slack_tol")) {
      scenario.ccp.slack_tol = get_number(ccp.at("slack_tol"), "$.ccp.slack_tol");
    }
    if (ccp.contains("max_iters")) scenario.ccp.max_iters = get_int(ccp.at("max_iters"), "$.ccp.max_iters");
    if (ccp.contains("penalty0")) scenario.ccp.penalty0 = get_number(ccp.at("penalty0"), "$.ccp.penalty0");
    if (ccp.contains("penalty_growth")) {
      scenario.ccp.penalty_growth = get_number(ccp.at("penalty_growth"), "$.ccp.penalty_growth");
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      fail("$.seed", "expected a non-negative integer");
    }
    scenario.seed = j.at("seed").get<std::uint64_t>();
  }

  try {
    scenario.validate();
  } catch (const std::exception& ex) {
    throw ScenarioParseError(std::string("$: ") + ex.what());
  }
  scenario.canonical_json = serialize_scenario(scenario);
  return scenario;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("$: cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& scenario) {
  json j;

  json dyn;
  if (scenario.cwh) {
    dyn["kind"] = "cwh";
    dyn["params"] = {{"mu", scenario.cwh->mu}, {"r0", scenario.cwh->r0}, {"mc", scenario.cwh->mc}};
    dyn["input_model"] = scenario.input_model == InputModel::ImpulseAtStart ? "impulse" : "zoh";
  } else {
    dyn["kind"] = "explicit";
    dyn["a"] = to_json(scenario.system.A);
    dyn["b"] = to_json(scenario.system.B);
  }
  dyn["dt"] = scenario.system.dt;
  j["dynamics"] = dyn;

  j["horizon"] = scenario.horizon;
  j["input_box"] = {{"lo", to_json(scenario.input_lo)}, {"hi", to_json(scenario.input_hi)}};

  json vehicles = json::array();
  for (const VehicleSpec& veh : scenario.vehicles) {
    json sets = json::array();
    for (const TargetSet& set : veh.targets) {
      json rows = json::array();
      for (int r = 0; r < set.polytope.rows(); ++r) {
        rows.push_back({{"g", to_json(Eigen::VectorXd(set.polytope.G.row(r)))},
                        {"h", set.polytope.h[r]}});
      }
      json target = {{"rows", rows}};
      if (set.schedule.terminal_only) {
        target["steps"] = "terminal";
      } else {
        target["steps"] = set.schedule.steps;
      }
      sets.push_back(target);
    }
    vehicles.push_back({{"x0", to_json(veh.x0)}, {"target", sets}});
  }
  j["vehicles"] = vehicles;

  if (scenario.has_vehicle_pairs() || scenario.has_obstacles()) {
    json collisions;
    if (scenario.has_vehicle_pairs()) {
      collisions["r"] = scenario.collision_radius;
      if (scenario.all_pairs) {
        collisions["pairs"] = "all";
      } else {
        json pairs = json::array();
        for (const auto& [i, jdx] : scenario.pair_list) pairs.push_back({i, jdx});
        collisions["pairs"] = pairs;
      }
    }
    collisions["s_diag"] = to_json(scenario.s_diag);
    if (scenario.has_obstacles()) {
      json obstacles = json::array();
      for (const ObstacleSpec& obs : scenario.obstacles) {
        json centers = json::array();
        for (const Eigen::VectorXd& c : obs.centers) centers.push_back(to_json(c));
        obstacles.push_back({{"center", centers}, {"r", obs.radius}});
      }
      collisions["obstacles"] = obstacles;
    }
    j["collisions"] = collisions;
  }

  json disturbance;
  switch (scenario.disturbance.family()) {
    case DisturbanceFamily::None:
      disturbance["family"] = "none";
      break;
    case DisturbanceFamily::Gaussian:
      disturbance["family"] = "gaussian";
      disturbance["mean"] = to_json(scenario.disturbance.gaussian_mean());
      disturbance["var"] = to_json(scenario.disturbance.gaussian_var());
      break;
    case DisturbanceFamily::Exponential:
      disturbance["family"] = "exponential";
      disturbance["rates"] = to_json(scenario.disturbance.exponential_rates());
      break;
    case DisturbanceFamily::GaussianMixture: {
      disturbance["family"] = "gaussian_mixture";
      json modes = json::array();
      for (const auto& comp : scenario.disturbance.mixture_modes()) {
        json list = json::array();
        for (const MixtureMode& mode : comp) {
          list.push_back({{"weight", mode.weight}, {"mean", mode.mean}, {"var", mode.var}});
        }
        modes.push_back(list);
      }
      disturbance["modes"] = modes;
      break;
    }
    case DisturbanceFamily::Explicit: {
      disturbance["family"] = "explicit";
      json moments = json::array();
      for (int c = 0; c < scenario.state_dim(); ++c) {
        const ComponentMoments& cm = scenario.disturbance.component(0, 0, c);
        moments.push_back({{"mean", cm.mean}, {"var", cm.var}, {"c3", cm.c3}, {"c4", cm.c4}});
      }
      disturbance["moments"] = moments;
      break;
    }
  }
  j["disturbance"] = disturbance;

  json thresholds = {{"alpha", scenario.alpha}};
  if (scenario.gamma != 0.0) thresholds["gamma"] = scenario.gamma;
  if (scenario.beta != 0.0) thresholds["beta"] = scenario.beta;
  j["thresholds"] = thresholds;

  j["bound"] = to_string(scenario.bound);

  switch (scenario.allocation) {
    case AllocationMode::Uniform:
      j["allocation"] = "uniform";
      break;
    case AllocationMode::Optimized:
      j["allocation"] = "optimized";
      break;
    case AllocationMode::Explicit: {
      json alloc;
      const RiskAllocation& a = scenario.explicit_allocation;
      if (!a.target_lambda.empty()) {
        json values = json::array();
        for (const auto& ref : scenario.target_rows()) {
          values.push_back(a.target_lambda.at({ref.vehicle, ref.step, ref.row}));
        }
        alloc["target_lambda"] = values;
      }
      const auto pairs = scenario.collision_pairs();
      auto dump_omega = [&](CollisionKind kind, const std::map<CollisionRowKey, double>& src,
                            const char* key) {
        if (src.empty()) return;
        json values = json::array();
        for (size_t p = 0; p < pairs.size(); ++p) {
          if (pairs[p].kind != kind) continue;
          for (int k = 1; k <= scenario.horizon; ++k) {
            values.push_back(src.at({static_cast<int>(p), k}));
          }
        }
        alloc[key] = values;
      };
      dump_omega(CollisionKind::VehiclePair, a.collision_omega, "collision_omega");
      dump_omega(CollisionKind::VehicleObstacle, a.obstacle_omega, "obstacle_omega");
      j["allocation"] = alloc;
      break;
    }
  }

  j["ccp"] = {{"obj_tol", scenario.ccp.obj_tol},
              {"slack_tol", scenario.ccp.slack_tol},
              {"max_iters", scenario.ccp.max_iters},
              {"penalty0", scenario.ccp.penalty0},
              {"penalty_growth", scenario.ccp.penalty_growth}};
  j["seed"] = scenario.seed;

  return j.dump();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buffer);
}

std::string scenario_hash(const Scenario& scenario) {
  const std::string canonical =
      scenario.canonical_json.empty() ? serialize_scenario(scenario) : scenario.canonical_json;
  return fnv1a_hex(canonical);
}

}  // namespace ccplan
