#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched::app {

inline constexpr double kDefaultBandwidthHz = 1000.0;
inline constexpr double kDefaultNoiseDensity = 1e-6;

struct Scenario {
  std::string name;
  SystemParams params{kDefaultBandwidthHz, kDefaultNoiseDensity};
  std::vector<double> path_loss_db;
  EnergyProfile profile{{1.0}, {1.0}};
  SolverOptions solver;

  std::vector<UserChannel> users() const { return make_users(path_loss_db, params); }
};

// Input error carrying the 1-based line of the offending JSON text.
class ScenarioError : public Error {
 public:
  ScenarioError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// JSON object with keys name, bandwidth_hz, noise_density, path_loss_db[],
// slot_lengths[], harvests[] and an optional solver{} block. Unknown keys
// are rejected.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string to_json(const Scenario& scenario);

// Built-in scenarios: table1-s1, table1-s1tilde, table1-s2, table1-s2tilde,
// table2-1 .. table2-6, sweep-<a|b|c>-<N>.
std::optional<Scenario> builtin_scenario(std::string_view name);
std::vector<std::string> builtin_names();

// Path losses strongest_db, strongest_db + 3, ... for n users.
std::vector<double> stepped_losses(double strongest_db, int n);

}  // namespace ehsched::app
