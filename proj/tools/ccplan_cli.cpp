// Command-line front end: plan, validate, unimodal-check and compare
// subcommands over scenario JSON files.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ccplan/result_io.hpp"
#include "ccplan/scenario_io.hpp"
#include "ccplan/solver.hpp"
#include "ccplan/unimodality.hpp"
#include "ccplan/validation.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotCertified = 2;

ccplan::Scenario load_or_exit(const std::string& path) {
  return ccplan::load_scenario(path);  // ScenarioParseError handled by main
}

// Accept solutions produced either from the file as-is or with a --bound
// override at plan time.
void check_solution_hash(const ccplan::Scenario& scenario, const ccplan::LoadedSolution& loaded) {
  const std::string file_hash = ccplan::scenario_hash(scenario);
  const std::string bound_hash =
      ccplan::scenario_hash(ccplan::with_bound(scenario, loaded.solution.bound));
  if (loaded.scenario_hash != file_hash && loaded.scenario_hash != bound_hash) {
    throw ccplan::ResultIoError("solution was computed from a different scenario (hash mismatch)");
  }
}

int cmd_plan(const std::string& scenario_path, const std::optional<std::string>& bound,
             const std::string& out_dir) {
  ccplan::Scenario scenario = load_or_exit(scenario_path);
  if (bound) {
    if (*bound == "vp") {
      scenario = ccplan::with_bound(scenario, ccplan::BoundKind::VysochanskijPetunin);
    } else if (*bound == "cantelli") {
      scenario = ccplan::with_bound(scenario, ccplan::BoundKind::Cantelli);
    } else {
      std::cerr << "error: --bound expects vp or cantelli\n";
      return kExitError;
    }
  }

  const auto backend = ccplan::default_backend();
  const ccplan::PlanSolution solution = ccplan::solve_ccp(scenario, *backend);

  fs::create_directories(out_dir);
  ccplan::write_solution((fs::path(out_dir) / "solution.json").string(), scenario, solution,
                         backend->name());
  ccplan::write_trajectories_csv((fs::path(out_dir) / "trajectories.csv").string(), solution);
  ccplan::write_metadata((fs::path(out_dir) / "metadata.json").string(), scenario,
                         backend->name());

  std::cout << "cost " << solution.cost << ", iterations " << solution.iterations << ", slack "
            << solution.slack_residual << (solution.certified ? ", certified" : ", NOT certified")
            << "\n";
  return solution.certified ? kExitOk : kExitNotCertified;
}

int cmd_validate(const std::string& scenario_path, const std::string& solution_path, int samples,
                 std::optional<std::uint64_t> seed, const std::string& out_file) {
  const ccplan::Scenario scenario = load_or_exit(scenario_path);
  const ccplan::LoadedSolution loaded = ccplan::read_solution(solution_path, scenario);
  check_solution_hash(scenario, loaded);

  const std::uint64_t effective_seed = seed.value_or(scenario.seed);
  const ccplan::SampleBatch batch =
      ccplan::sample_disturbances(scenario.disturbance, samples, effective_seed);
  const ccplan::SatisfactionReport report =
      ccplan::measure_satisfaction(loaded.solution, scenario, batch);

  ccplan::write_satisfaction(out_file, report, loaded.scenario_hash);

  if (report.wide_ci) {
    std::cerr << "warning: " << samples
              << " samples give a wide confidence interval; use 10^4 or more\n";
  }
  auto print_joint = [](const char* name, const std::optional<double>& p) {
    if (p) std::cout << name << " joint satisfaction " << *p << "\n";
  };
  print_joint("target", report.target_joint);
  print_joint("collision", report.collision_joint);
  print_joint("obstacle", report.obstacle_joint);
  return report.pass ? kExitOk : kExitError;
}

int cmd_unimodal_check(const std::string& scenario_path, const std::string& solution_path,
                       int samples, double xi, std::optional<std::uint64_t> seed,
                       const std::string& out_file) {
  const ccplan::Scenario scenario = load_or_exit(scenario_path);
  const ccplan::LoadedSolution loaded = ccplan::read_solution(solution_path, scenario);
  check_solution_hash(scenario, loaded);

  ccplan::UnimodalityConfig cfg;
  cfg.xi = xi;
  const std::uint64_t effective_seed = seed.value_or(scenario.seed);
  const ccplan::UnimodalityReport report = ccplan::validate_constraint_unimodality(
      loaded.solution, scenario, samples, effective_seed, cfg);

  ccplan::write_unimodality(out_file, report, loaded.scenario_hash);

  int failures = 0;
  for (const auto& entry : report.entries) failures += entry.unimodal ? 0 : 1;
  std::cout << report.entries.size() << " constraints checked, " << failures << " not unimodal\n";
  return report.all_unimodal ? kExitOk : kExitNotCertified;
}

int cmd_compare(const std::string& scenario_path, const std::string& out_dir, int samples,
                std::optional<std::uint64_t> seed) {
  const ccplan::Scenario scenario = load_or_exit(scenario_path);
  const auto backend = ccplan::default_backend();
  const ccplan::BoundComparison comparison =
      ccplan::compare_bounds(scenario, scenario.ccp, *backend);

  const std::uint64_t effective_seed = seed.value_or(scenario.seed);
  const ccplan::SampleBatch batch =
      scenario.disturbance.samplable()
          ? ccplan::sample_disturbances(scenario.disturbance, samples, effective_seed)
          : ccplan::SampleBatch{};

  std::vector<ccplan::ComparisonRow> rows;
  auto add_row = [&](const char* method, const std::optional<ccplan::PlanSolution>& solution,
                     const std::string& error) {
    ccplan::ComparisonRow row;
    row.method = method;
    if (solution) {
      row.solved = true;
      row.cost = solution->cost;
      row.iterations = solution->iterations;
      row.slack = solution->slack_residual;
      row.certified = solution->certified;
      if (batch.count > 0) {
        const ccplan::SatisfactionReport report =
            ccplan::measure_satisfaction(*solution, scenario, batch);
        row.target_satisfaction = report.target_joint;
        row.collision_satisfaction = report.collision_joint;
        row.obstacle_satisfaction = report.obstacle_joint;
      }
    } else {
      std::cerr << method << " failed: " << error << "\n";
    }
    rows.push_back(row);
  };
  add_row("vp", comparison.vp, comparison.vp_error);
  add_row("cantelli", comparison.cantelli, comparison.cantelli_error);

  fs::create_directories(out_dir);
  ccplan::write_comparison_csv((fs::path(out_dir) / "comparison.csv").string(), rows);
  ccplan::write_metadata((fs::path(out_dir) / "metadata.json").string(), scenario,
                         backend->name());

  for (const ccplan::ComparisonRow& row : rows) {
    std::cout << row.method << ": "
              << (row.solved ? "cost " + std::to_string(row.cost) : std::string("failed")) << "\n";
  }
  return (comparison.vp && comparison.cantelli) ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained multi-vehicle trajectory planning"};
  app.require_subcommand(1);

  std::string scenario_path, solution_path;
  std::string out_dir = ".";
  std::string out_file;
  std::string bound_value;
  int samples = 10000;
  double xi = 0.0;
  std::optional<std::uint64_t> seed;

  CLI::App* plan = app.add_subcommand("plan", "Solve a scenario and write the result bundle");
  plan->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  plan->add_option("--bound", bound_value, "Tail bound: vp or cantelli")
      ->check(CLI::IsMember({"vp", "cantelli"}));
  plan->add_option("--out", out_dir, "Output directory");

  CLI::App* validate = app.add_subcommand("validate", "Monte Carlo constraint satisfaction");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  validate->add_option("solution", solution_path, "Solution JSON file")->required();
  validate->add_option("--samples", samples, "Monte Carlo sample count");
  validate->add_option("--seed", seed, "Sampling seed (defaults to the scenario seed)");
  validate->add_option("--out", out_file, "Report file (default satisfaction.json)");

  CLI::App* unimodal = app.add_subcommand("unimodal-check", "ECDF unimodality validation");
  unimodal->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  unimodal->add_option("solution", solution_path, "Solution JSON file")->required();
  unimodal->add_option("--samples", samples, "Sample count (default 50000)");
  unimodal->add_option("--xi", xi, "Chord deviation threshold (default: DKW-based)");
  unimodal->add_option("--seed", seed, "Sampling seed (defaults to the scenario seed)");
  unimodal->add_option("--out", out_file, "Report file (default unimodality.json)");

  CLI::App* compare = app.add_subcommand("compare", "Solve under both tail bounds and tabulate");
  compare->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  compare->add_option("--out", out_dir, "Output directory");
  compare->add_option("--samples", samples, "Monte Carlo sample count");
  compare->add_option("--seed", seed, "Sampling seed (defaults to the scenario seed)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(plan)) {
      const std::optional<std::string> bound =
          bound_value.empty() ? std::nullopt : std::make_optional(bound_value);
      return cmd_plan(scenario_path, bound, out_dir);
    }
    if (app.got_subcommand(validate)) {
      if (out_file.empty()) out_file = "satisfaction.json";
      return cmd_validate(scenario_path, solution_path, samples, seed, out_file);
    }
    if (app.got_subcommand(unimodal)) {
      if (out_file.empty()) out_file = "unimodality.json";
      if (unimodal->count("--samples") == 0) samples = 50000;
      return cmd_unimodal_check(scenario_path, solution_path, samples, xi, seed, out_file);
    }
    if (app.got_subcommand(compare)) {
      return cmd_compare(scenario_path, out_dir, samples, seed);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
