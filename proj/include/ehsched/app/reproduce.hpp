#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ehsched/app/scenario.hpp"
#include "ehsched/bcd.hpp"
#include "ehsched/metrics.hpp"

namespace ehsched::app {

struct ScenarioOutcome {
  Scenario scenario;
  BcdReport report;
  Schedule baseline;
  MetricsReport metrics;
  double seconds = 0.0;
};

// BCD from SG+TDMA plus metrics against the SG+TDMA baseline.
ScenarioOutcome solve_scenario(const Scenario& scenario);

// Solves the named built-in scenarios concurrently; results keep the order.
std::vector<ScenarioOutcome> solve_builtins(const std::vector<std::string>& names);

std::vector<std::string> table1_names();
std::vector<std::string> table2_names();
std::vector<std::string> sweep_names();

std::string table1_csv(const std::vector<ScenarioOutcome>& outcomes);
std::string table2_csv(const std::vector<ScenarioOutcome>& outcomes);
std::string sweep_csv(const std::vector<ScenarioOutcome>& outcomes);

// Writes the CSV bundle for table1 | table2 | sweep-users into out_dir and
// returns the files written. Throws DomainError for an unknown target.
std::vector<std::filesystem::path> reproduce(std::string_view target,
                                             const std::filesystem::path& out_dir);

}  // namespace ehsched::app
