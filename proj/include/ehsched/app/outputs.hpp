#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ehsched/bcd.hpp"
#include "ehsched/metrics.hpp"

namespace ehsched::app {

// %.6g formatting used by every CSV.
std::string fmt6(double v);

// Row "p,<K values>" then "tau_<n>,<K values>" for n = 1..N.
std::string schedule_csv(const Schedule& sched);
// Header "iter,utility", one row per outer iteration (0 = start).
std::string trace_csv(const std::vector<double>& utility_trace);
// Header "key,value"; utilities, improvement, Jain indices, mean path loss,
// per-user bits of both schedules and per-user throughput improvement.
std::string metrics_csv(const MetricsReport& metrics, const Schedule& candidate,
                        const Schedule& baseline, const BcdReport& report);

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace ehsched::app
