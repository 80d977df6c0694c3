#include "ehsched/bcd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "ehsched/metrics.hpp"
#include "ehsched/power_solver.hpp"
#include "ehsched/time_solver.hpp"

namespace ehsched {

namespace {

void require_servable(std::span<const UserChannel> users) {
  if (users.empty()) throw SetupError("instance has no users");
  for (std::size_t n = 0; n < users.size(); ++n) {
    if (!(users[n].norm_gain() > 0.0) || !std::isfinite(users[n].norm_gain())) {
      throw SetupError("user " + std::to_string(n + 1) + " has zero channel gain");
    }
  }
}

double max_change(const Schedule& a, const Schedule& b) {
  return std::max((a.powers() - b.powers()).cwiseAbs().maxCoeff(),
                  (a.time_alloc() - b.time_alloc()).cwiseAbs().maxCoeff());
}

}  // namespace

Schedule initial_schedule(const EnergyProfile& profile, std::span<const UserChannel> users,
                          const SystemParams& params) {
  if (profile.slots() >= users.size()) return sg_tdma_schedule(profile, users, params);
  const auto n = static_cast<Eigen::Index>(users.size());
  Eigen::MatrixXd tau(n, static_cast<Eigen::Index>(profile.slots()));
  for (Eigen::Index t = 0; t < tau.cols(); ++t) {
    tau.col(t).setConstant(profile.slot_lengths()[t] / static_cast<double>(n));
  }
  return Schedule(profile.harvests().cwiseQuotient(profile.slot_lengths()), std::move(tau),
                  users, params);
}

Schedule random_feasible_schedule(const EnergyProfile& profile,
                                  std::span<const UserChannel> users,
                                  const SystemParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const auto n = static_cast<Eigen::Index>(users.size());
  Eigen::MatrixXd tau(n, static_cast<Eigen::Index>(profile.slots()));
  for (Eigen::Index t = 0; t < tau.cols(); ++t) {
    for (Eigen::Index i = 0; i < n; ++i) tau(i, t) = weight(rng);
    tau.col(t) *= profile.slot_lengths()[t] / tau.col(t).sum();
  }
  return Schedule(profile.harvests().cwiseQuotient(profile.slot_lengths()), std::move(tau),
                  users, params);
}

BcdReport run_bcd(const EnergyProfile& profile, std::span<const UserChannel> users,
                  const SystemParams& params, const SolverOptions& opts) {
  require_servable(users);
  return run_bcd(initial_schedule(profile, users, params), profile, users, params, opts);
}

BcdReport run_bcd(const Schedule& start, const EnergyProfile& profile,
                  std::span<const UserChannel> users, const SystemParams& params,
                  const SolverOptions& opts) {
  opts.validate();
  require_servable(users);
  if (start.slots() != profile.slots() || start.users() != users.size()) {
    throw ShapeError("start schedule does not match the instance");
  }
  const FeasibilityReport start_check = check_feasible(start, profile, opts);
  if (!start_check.feasible()) {
    throw PreconditionError("BCD start schedule is infeasible:\n" + start_check.describe());
  }

  BcdReport rep{start, {}, {}, 0, false, {}, 0.0, 0.0, {}};
  Schedule current = start;
  double u = utility(current);
  rep.utility_trace.push_back(u);
  rep.block_trace.push_back(u);
  const double eps = opts.effective_epsilon(profile);
  bool warned_epsilon = false;

  for (int it = 0; it < opts.max_bcd_iters; ++it) {
    const Schedule previous = current;

    const PowerSolution ps = solve_power(current.time_alloc(), profile, users, params, opts);
    rep.max_power_kkt_residual = std::max(rep.max_power_kkt_residual, ps.kkt_residual);
    if (!ps.converged) {
      std::ostringstream os;
      os << "iteration " << it + 1 << ": power block stopped with KKT residual "
         << ps.kkt_residual;
      rep.warnings.push_back(os.str());
    }
    current = Schedule(ps.powers, current.time_alloc(), users, params);
    rep.block_trace.push_back(utility(current));

    current = full_time_pass(current, profile, users, params, opts);
    const double u_next = utility(current);
    rep.block_trace.push_back(u_next);
    rep.utility_trace.push_back(u_next);
    rep.iterations = it + 1;

    const FeasibilityReport check = check_feasible(current, profile, opts);
    if (!check.feasible()) {
      rep.warnings.push_back("iteration " + std::to_string(it + 1) + " left the feasible set:\n" +
                             check.describe());
    }
    if (!warned_epsilon && (current.time_alloc().rowwise().sum().array() < 10.0 * eps).any()) {
      rep.warnings.push_back("a user's total time is within 10 epsilon of the minimum");
      warned_epsilon = true;
    }

    const double rel = std::abs(u_next - u) / std::max(1.0, std::abs(u));
    u = u_next;
    if (rel < opts.utility_tol && max_change(current, previous) < opts.var_tol) {
      rep.converged = true;
      break;
    }
  }

  for (std::size_t t = 0; t < profile.slots(); ++t) {
    rep.final_waterfill_residual =
        std::max(rep.final_waterfill_residual, waterfill_residual(t, current, users, params));
  }
  rep.certificate = verify_partial_optimum(current, profile, users, params, opts);
  rep.schedule = std::move(current);
  return rep;
}

std::vector<BcdReport> run_bcd_multistart(const EnergyProfile& profile,
                                          std::span<const UserChannel> users,
                                          const SystemParams& params, const SolverOptions& opts,
                                          int starts, std::uint64_t seed) {
  if (starts < 1) throw DomainError("multistart needs at least one start");
  require_servable(users);
  std::vector<Schedule> inits;
  inits.push_back(initial_schedule(profile, users, params));
  std::mt19937_64 rng(seed);
  for (int s = 1; s < starts; ++s) inits.push_back(random_feasible_schedule(profile, users, params, rng));

  std::vector<std::future<BcdReport>> jobs;
  jobs.reserve(inits.size());
  for (const auto& init : inits) {
    jobs.push_back(std::async(std::launch::async, [&, init] {
      return run_bcd(init, profile, users, params, opts);
    }));
  }
  std::vector<BcdReport> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

PartialOptimumCertificate verify_partial_optimum(const Schedule& sched,
                                                 const EnergyProfile& profile,
                                                 std::span<const UserChannel> users,
                                                 const SystemParams& params,
                                                 const SolverOptions& opts) {
  PartialOptimumCertificate cert;
  const double u_star = utility(sched);

  const PowerSolution ps = solve_power(sched.time_alloc(), profile, users, params, opts);
  const Schedule power_opt(ps.powers, sched.time_alloc(), users, params);
  cert.power_gap = utility(power_opt) - u_star;

  const Schedule time_opt = full_time_pass(sched, profile, users, params, opts);
  cert.time_gap = utility(time_opt) - u_star;

  cert.cross_utility = utility(time_opt.time_alloc(), ps.powers, users, params);
  cert.partial_optimum_holds = u_star >= cert.cross_utility - opts.certificate_tol;
  return cert;
}

double energy_exhaustion_check(const Schedule& sched, const EnergyProfile& profile) {
  if (sched.slots() != profile.slots()) throw ShapeError("schedule and profile disagree on K");
  return profile.total_energy() - sched.powers().dot(profile.slot_lengths());
}

}  // namespace ehsched
