#include "ehsched/app/reproduce.hpp"

#include <chrono>
#include <future>
#include <sstream>

#include "ehsched/app/outputs.hpp"

namespace ehsched::app {

ScenarioOutcome solve_scenario(const Scenario& scenario) {
  const auto start = std::chrono::steady_clock::now();
  const auto users = scenario.users();
  BcdReport report = run_bcd(scenario.profile, users, scenario.params, scenario.solver);
  Schedule baseline = initial_schedule(scenario.profile, users, scenario.params);
  MetricsReport metrics = improvement_metrics(report.schedule, baseline, users);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ScenarioOutcome{scenario, std::move(report), std::move(baseline), std::move(metrics), secs};
}

std::vector<ScenarioOutcome> solve_builtins(const std::vector<std::string>& names) {
  std::vector<std::future<ScenarioOutcome>> jobs;
  for (const auto& name : names) {
    const auto sc = builtin_scenario(name);
    if (!sc) throw DomainError("unknown built-in scenario '" + name + "'");
    jobs.push_back(std::async(std::launch::async, [s = *sc] { return solve_scenario(s); }));
  }
  std::vector<ScenarioOutcome> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::vector<std::string> table1_names() {
  return {"table1-s1", "table1-s1tilde", "table1-s2", "table1-s2tilde"};
}

std::vector<std::string> table2_names() {
  std::vector<std::string> out;
  for (int i = 1; i <= 6; ++i) out.push_back("table2-" + std::to_string(i));
  return out;
}

std::vector<std::string> sweep_names() {
  std::vector<std::string> out;
  for (char c : {'a', 'b', 'c'}) {
    for (int n = 2; n <= 8; ++n) out.push_back(std::string("sweep-") + c + "-" + std::to_string(n));
  }
  return out;
}

std::string table1_csv(const std::vector<ScenarioOutcome>& outcomes) {
  std::ostringstream os;
  os << "sequence,utility,baseline_utility,improvement_pct,iterations,converged\n";
  for (const auto& o : outcomes) {
    os << o.scenario.name << ',' << fmt6(o.metrics.candidate_utility) << ','
       << fmt6(o.metrics.baseline_utility) << ',' << fmt6(o.metrics.utility_improvement_pct) << ','
       << o.report.iterations << ',' << (o.report.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string table2_csv(const std::vector<ScenarioOutcome>& outcomes) {
  std::ostringstream os;
  os << "sequence,slots,harvests,utility,baseline_utility,improvement_pct,iterations\n";
  for (const auto& o : outcomes) {
    const auto& e = o.scenario.profile.harvests();
    std::string harvests;
    for (Eigen::Index t = 0; t < e.size(); ++t) harvests += (t ? " " : "") + fmt6(e[t]);
    os << o.scenario.name << ',' << o.scenario.profile.slots() << ',' << harvests << ','
       << fmt6(o.metrics.candidate_utility) << ',' << fmt6(o.metrics.baseline_utility) << ','
       << fmt6(o.metrics.utility_improvement_pct) << ',' << o.report.iterations << '\n';
  }
  return os.str();
}

std::string sweep_csv(const std::vector<ScenarioOutcome>& outcomes) {
  std::ostringstream os;
  os << "case,strongest_loss_db,users,utility_sg,utility_bcd,improvement_pct,jain_sg,jain_bcd,"
        "iterations\n";
  for (const auto& o : outcomes) {
    const auto& name = o.scenario.name;
    os << (name.size() > 6 ? name.substr(6, 1) : "?") << ','
       << fmt6(o.scenario.path_loss_db.front()) << ',' << o.scenario.path_loss_db.size() << ','
       << fmt6(o.metrics.baseline_utility) << ',' << fmt6(o.metrics.candidate_utility) << ','
       << fmt6(o.metrics.utility_improvement_pct) << ',' << fmt6(o.metrics.baseline_jain_index)
       << ',' << fmt6(o.metrics.jain_index) << ',' << o.report.iterations << '\n';
  }
  return os.str();
}

std::vector<std::filesystem::path> reproduce(std::string_view target,
                                             const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto emit_traces = [&](const std::vector<ScenarioOutcome>& outcomes) {
    for (const auto& o : outcomes) {
      const auto path = out_dir / (o.scenario.name + "_trace.csv");
      write_file_atomic(path, trace_csv(o.report.utility_trace));
      written.push_back(path);
      const auto sched = out_dir / (o.scenario.name + "_schedule.csv");
      write_file_atomic(sched, schedule_csv(o.report.schedule));
      written.push_back(sched);
    }
  };
  if (target == "table1") {
    const auto outcomes = solve_builtins(table1_names());
    const auto path = out_dir / "table1.csv";
    write_file_atomic(path, table1_csv(outcomes));
    written.push_back(path);
    emit_traces(outcomes);
  } else if (target == "table2") {
    const auto outcomes = solve_builtins(table2_names());
    const auto path = out_dir / "table2.csv";
    write_file_atomic(path, table2_csv(outcomes));
    written.push_back(path);
  } else if (target == "sweep-users") {
    const auto outcomes = solve_builtins(sweep_names());
    const auto path = out_dir / "sweep_users.csv";
    write_file_atomic(path, sweep_csv(outcomes));
    written.push_back(path);
  } else {
    throw DomainError("unknown reproduce target '" + std::string(target) +
                      "' (expected table1, table2 or sweep-users)");
  }
  return written;
}

}  // namespace ehsched::app
