#include "ehsched/app/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ehsched::app {

namespace {

using nlohmann::json;

const std::vector<double> kStandardHarvests = {20, 100, 1, 1, 1, 70, 100, 1, 10, 40};
const std::vector<double> kTable1Losses = {25, 28, 31, 34, 37};
const std::vector<double> kTable2Losses = {19, 22, 25, 28, 31, 34};

const std::vector<std::vector<double>> kTable2Harvests = {
    {20, 100, 10, 60, 10, 70, 100, 10, 10, 40},
    {20, 100, 1, 1, 1, 70, 100, 1, 10, 40},
    {20, 60, 100, 1, 1, 1, 70, 85, 100, 1, 10, 40},
    {20, 60, 100, 0.5, 1, 0.5, 70, 85, 100, 0.5, 10, 40},
    {20, 60, 100, 0.5, 50, 0.5, 70, 85, 100, 0.5, 10, 40},
    {20, 60, 100, 1, 0.5, 0.5, 1, 1, 100, 0.5, 10, 40},
};

int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the first occurrence of "key" in the text, or 1.
int line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 1 : line_of_offset(text, pos);
}

class Reader {
 public:
  Reader(std::string_view text, const json& doc) : text_(text), doc_(doc) {}

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw ScenarioError(line_of_key(text_, key), what);
  }

  double number(const json& obj, std::string_view key, double fallback) const {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number()) fail(key, "'" + std::string(key) + "' must be a number");
    return it->get<double>();
  }

  int integer(const json& obj, std::string_view key, int fallback) const {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) fail(key, "'" + std::string(key) + "' must be an integer");
    return it->get<int>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const auto it = doc_.find(std::string(key));
    if (it == doc_.end()) fail(key, "missing required key '" + std::string(key) + "'");
    if (!it->is_array()) fail(key, "'" + std::string(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : *it) {
      if (!v.is_number()) fail(key, "'" + std::string(key) + "' must contain only numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

 private:
  std::string_view text_;
  const json& doc_;
};

const std::vector<std::string> kTopKeys = {"name",   "bandwidth_hz",  "noise_density",
                                           "path_loss_db", "slot_lengths", "harvests",
                                           "solver"};
const std::vector<std::string> kSolverKeys = {
    "epsilon_time",   "time_sum_tol",  "energy_tol",      "utility_tol",
    "var_tol",        "max_bcd_iters", "barrier_initial_weight", "barrier_growth",
    "barrier_stop",   "inner_tol",     "max_inner_iters", "max_outer_rounds",
    "kkt_tol",        "waterfill_tol", "certificate_tol"};

SolverOptions parse_solver(const Reader& rd, const json& obj) {
  SolverOptions o;
  if (obj.contains("epsilon_time")) o.epsilon_time = rd.number(obj, "epsilon_time", 0.0);
  o.time_sum_tol = rd.number(obj, "time_sum_tol", o.time_sum_tol);
  o.energy_tol = rd.number(obj, "energy_tol", o.energy_tol);
  o.utility_tol = rd.number(obj, "utility_tol", o.utility_tol);
  o.var_tol = rd.number(obj, "var_tol", o.var_tol);
  o.max_bcd_iters = rd.integer(obj, "max_bcd_iters", o.max_bcd_iters);
  o.barrier_initial_weight = rd.number(obj, "barrier_initial_weight", o.barrier_initial_weight);
  o.barrier_growth = rd.number(obj, "barrier_growth", o.barrier_growth);
  o.barrier_stop = rd.number(obj, "barrier_stop", o.barrier_stop);
  o.inner_tol = rd.number(obj, "inner_tol", o.inner_tol);
  o.max_inner_iters = rd.integer(obj, "max_inner_iters", o.max_inner_iters);
  o.max_outer_rounds = rd.integer(obj, "max_outer_rounds", o.max_outer_rounds);
  o.kkt_tol = rd.number(obj, "kkt_tol", o.kkt_tol);
  o.waterfill_tol = rd.number(obj, "waterfill_tol", o.waterfill_tol);
  o.certificate_tol = rd.number(obj, "certificate_tol", o.certificate_tol);
  try {
    o.validate();
  } catch (const DomainError& e) {
    rd.fail("solver", e.what());
  }
  return o;
}

Scenario make(std::string name, std::vector<double> losses, std::vector<double> slots,
              std::vector<double> harvests) {
  Scenario s;
  s.name = std::move(name);
  s.path_loss_db = std::move(losses);
  s.profile = EnergyProfile(std::move(slots), std::move(harvests));
  return s;
}

}  // namespace

std::vector<double> stepped_losses(double strongest_db, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(strongest_db + 3.0 * i);
  return out;
}

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError(line_of_offset(json_text, e.byte > 0 ? e.byte - 1 : 0),
                        std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError(1, "scenario must be a JSON object");
  const Reader rd(json_text, doc);
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kTopKeys.begin(), kTopKeys.end(), key) == kTopKeys.end()) {
      rd.fail(key, "unknown key '" + key + "'");
    }
  }

  Scenario s;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) rd.fail("name", "'name' must be a string");
    s.name = doc["name"].get<std::string>();
  }
  try {
    s.params = SystemParams(rd.number(doc, "bandwidth_hz", kDefaultBandwidthHz),
                            rd.number(doc, "noise_density", kDefaultNoiseDensity));
  } catch (const DomainError& e) {
    rd.fail(doc.contains("bandwidth_hz") ? "bandwidth_hz" : "noise_density", e.what());
  }

  s.path_loss_db = rd.numbers("path_loss_db");
  if (s.path_loss_db.empty()) rd.fail("path_loss_db", "'path_loss_db' must list at least one user");
  try {
    (void)s.users();
  } catch (const Error& e) {
    rd.fail("path_loss_db", e.what());
  }

  auto slots = rd.numbers("slot_lengths");
  auto harvests = rd.numbers("harvests");
  if (slots.empty()) rd.fail("slot_lengths", "'slot_lengths' must list at least one slot");
  try {
    s.profile = EnergyProfile(std::move(slots), std::move(harvests));
  } catch (const Error& e) {
    rd.fail("harvests", e.what());
  }

  if (doc.contains("solver")) {
    if (!doc["solver"].is_object()) rd.fail("solver", "'solver' must be an object");
    for (const auto& [key, value] : doc["solver"].items()) {
      if (std::find(kSolverKeys.begin(), kSolverKeys.end(), key) == kSolverKeys.end()) {
        rd.fail(key, "unknown solver option '" + key + "'");
      }
    }
    s.solver = parse_solver(rd, doc["solver"]);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["bandwidth_hz"] = s.params.bandwidth_hz();
  doc["noise_density"] = s.params.noise_density();
  doc["path_loss_db"] = s.path_loss_db;
  const auto& T = s.profile.slot_lengths();
  const auto& E = s.profile.harvests();
  doc["slot_lengths"] = std::vector<double>(T.data(), T.data() + T.size());
  doc["harvests"] = std::vector<double>(E.data(), E.data() + E.size());
  const SolverOptions& o = s.solver;
  json solver;
  if (o.epsilon_time) solver["epsilon_time"] = *o.epsilon_time;
  solver["time_sum_tol"] = o.time_sum_tol;
  solver["energy_tol"] = o.energy_tol;
  solver["utility_tol"] = o.utility_tol;
  solver["var_tol"] = o.var_tol;
  solver["max_bcd_iters"] = o.max_bcd_iters;
  solver["barrier_initial_weight"] = o.barrier_initial_weight;
  solver["barrier_growth"] = o.barrier_growth;
  solver["barrier_stop"] = o.barrier_stop;
  solver["inner_tol"] = o.inner_tol;
  solver["max_inner_iters"] = o.max_inner_iters;
  solver["max_outer_rounds"] = o.max_outer_rounds;
  solver["kkt_tol"] = o.kkt_tol;
  solver["waterfill_tol"] = o.waterfill_tol;
  solver["certificate_tol"] = o.certificate_tol;
  doc["solver"] = solver;
  return doc.dump(2);
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "table1-s1") {
    return make("table1-s1", kTable1Losses, {10, 12, 5, 7, 4, 15, 20, 2, 10, 15}, kStandardHarvests);
  }
  if (name == "table1-s1tilde") {
    return make("table1-s1tilde", kTable1Losses, std::vector<double>(10, 10.0), kStandardHarvests);
  }
  if (name == "table1-s2") {
    return make("table1-s2", kTable1Losses, {25, 44, 14, 7, 3, 32, 47, 19, 26, 38}, kStandardHarvests);
  }
  if (name == "table1-s2tilde") {
    return make("table1-s2tilde", kTable1Losses, std::vector<double>(10, 25.5), kStandardHarvests);
  }
  for (std::size_t i = 0; i < kTable2Harvests.size(); ++i) {
    if (name == "table2-" + std::to_string(i + 1)) {
      const auto& e = kTable2Harvests[i];
      return make(std::string(name), kTable2Losses, std::vector<double>(e.size(), 10.0), e);
    }
  }
  if (name.starts_with("sweep-") && name.size() > 8 && name[7] == '-') {
    const char c = name[6];
    const double strongest = c == 'a' ? 13.0 : c == 'b' ? 19.0 : c == 'c' ? 25.0 : -1.0;
    int users = 0;
    try {
      users = std::stoi(std::string(name.substr(8)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (strongest < 0.0 || users < 1 || users > 10) return std::nullopt;
    return make(std::string(name), stepped_losses(strongest, users), std::vector<double>(10, 10.0),
                kStandardHarvests);
  }
  return std::nullopt;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names = {"table1-s1", "table1-s1tilde", "table1-s2", "table1-s2tilde"};
  for (std::size_t i = 0; i < kTable2Harvests.size(); ++i) names.push_back("table2-" + std::to_string(i + 1));
  for (char c : {'a', 'b', 'c'}) {
    for (int n = 2; n <= 8; ++n) names.push_back(std::string("sweep-") + c + "-" + std::to_string(n));
  }
  return names;
}

}  // namespace ehsched::app
