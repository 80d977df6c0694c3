// Command-line front end: solve a scenario, reproduce the experiment tables,
// or run the brute-force oracle on a small instance.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "ehsched/app/outputs.hpp"
#include "ehsched/app/reproduce.hpp"
#include "ehsched/app/scenario.hpp"
#include "ehsched/bcd.hpp"
#include "ehsched/metrics.hpp"
#include "ehsched/oracle.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ehsched;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

void configure_logging() {
  const char* env = std::getenv("EH_SCHED_LOG");
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (env && *env) spdlog::set_level(spdlog::level::from_str(env));
}

app::Scenario resolve_scenario(const std::string& arg) {
  if (fs::exists(arg)) return app::load_scenario(arg);
  if (auto builtin = app::builtin_scenario(arg)) return *builtin;
  throw app::ScenarioError(0, "no scenario file or built-in scenario named '" + arg + "'");
}

int cmd_run(const std::string& file, const fs::path& out_dir, std::uint64_t seed, int multistart) {
  const app::Scenario sc = resolve_scenario(file);
  const auto users = sc.users();
  spdlog::info("scenario '{}': {} users, {} slots", sc.name, users.size(), sc.profile.slots());

  BcdReport report = [&] {
    if (multistart <= 1) return run_bcd(sc.profile, users, sc.params, sc.solver);
    auto runs = run_bcd_multistart(sc.profile, users, sc.params, sc.solver, multistart, seed);
    std::size_t best = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      spdlog::info("start {}: utility {:.6f} after {} iterations", i, runs[i].utility_trace.back(),
                   runs[i].iterations);
      if (runs[i].utility_trace.back() > runs[best].utility_trace.back()) best = i;
    }
    return std::move(runs[best]);
  }();
  for (const auto& w : report.warnings) spdlog::warn("{}", w);

  const Schedule baseline = initial_schedule(sc.profile, users, sc.params);
  const MetricsReport metrics = improvement_metrics(report.schedule, baseline, users);

  fs::create_directories(out_dir);
  app::write_file_atomic(out_dir / "schedule.csv", app::schedule_csv(report.schedule));
  app::write_file_atomic(out_dir / "trace.csv", app::trace_csv(report.utility_trace));
  app::write_file_atomic(out_dir / "metrics.csv",
                         app::metrics_csv(metrics, report.schedule, baseline, report));

  std::cout << "utility " << app::fmt6(metrics.candidate_utility) << "\n";
  spdlog::info("improvement over SG+TDMA {:.4f}%, Jain {:.4f}", metrics.utility_improvement_pct,
               metrics.jain_index);
  if (!report.converged) {
    spdlog::warn("BCD stopped at the iteration limit ({})", report.iterations);
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_reproduce(const std::string& target, const fs::path& out_dir) {
  for (const auto& path : app::reproduce(target, out_dir)) std::cout << path.string() << "\n";
  return kExitOk;
}

int cmd_oracle(const std::string& file, double step) {
  const app::Scenario sc = resolve_scenario(file);
  const auto users = sc.users();
  const oracle::GridResult grid = oracle::grid_global_optimum(sc.profile, users, sc.params, step);
  std::cout << "grid_utility " << app::fmt6(grid.utility) << "\n"
            << "resolution_bound " << app::fmt6(grid.resolution_bound) << "\n"
            << "refined_utility " << app::fmt6(grid.refined_utility) << "\n"
            << "points " << grid.evaluated_points << "\n";
  const BcdReport bcd = run_bcd(sc.profile, users, sc.params, sc.solver);
  std::cout << "bcd_utility " << app::fmt6(bcd.utility_trace.back()) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App cli{"Proportional-fair power/time scheduling for an energy-harvesting downlink"};
  cli.require_subcommand(1);

  std::string run_file;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int multistart = 1;
  auto* run = cli.add_subcommand("run", "Solve a scenario file or built-in scenario");
  run->add_option("file", run_file, "Scenario JSON file or built-in name")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Seed for multistart random starts");
  run->add_option("--multistart", multistart, "Number of BCD starts (first is SG+TDMA)")
      ->check(CLI::PositiveNumber);

  std::string target;
  std::string repro_out = ".";
  auto* repro = cli.add_subcommand("reproduce", "Reproduce an experiment as CSV");
  repro->add_option("target", target, "table1 | table2 | sweep-users")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "sweep-users"}));
  repro->add_option("--out", repro_out, "Output directory");

  std::string oracle_file;
  double step = 0.05;
  auto* orc = cli.add_subcommand("oracle", "Brute-force grid optimum on a small instance");
  orc->add_option("file", oracle_file, "Scenario JSON file or built-in name")->required();
  orc->add_option("--step", step, "Power grid spacing (W)")->check(CLI::PositiveNumber);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run) return cmd_run(run_file, out_dir, seed, multistart);
    if (*repro) return cmd_reproduce(target, repro_out);
    if (*orc) return cmd_oracle(oracle_file, step);
  } catch (const app::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
