#pragma once

// Alternating (block coordinate) ascent over the power and time blocks,
// starting from SG+TDMA, with a partial-optimum certificate for the result.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched {

struct PartialOptimumCertificate {
  // Utility gained by re-solving the power block at the fixed tau.
  double power_gap = 0.0;
  // Utility gained by one more full time pass at the fixed p.
  double time_gap = 0.0;
  // U at (time-pass optimum, power optimum) taken across the two blocks.
  double cross_utility = 0.0;
  // U(tau*, p*) >= cross_utility - certificate_tol, a necessary condition
  // for (tau*, p*) to be a local optimum of the joint problem.
  bool partial_optimum_holds = false;
};

struct BcdReport {
  Schedule schedule;
  // utility_trace[0] is the start; entry i is the utility after outer iteration i.
  std::vector<double> utility_trace;
  // Utility after every block step (start, power, time, power, time, ...).
  std::vector<double> block_trace;
  int iterations = 0;
  bool converged = false;
  PartialOptimumCertificate certificate;
  double max_power_kkt_residual = 0.0;
  double final_waterfill_residual = 0.0;
  std::vector<std::string> warnings;
};

// SG+TDMA, or an equal time split with SG powers when K < N.
Schedule initial_schedule(const EnergyProfile& profile, std::span<const UserChannel> users,
                          const SystemParams& params);

// Random positive time shares (every user served in every slot) with SG powers.
Schedule random_feasible_schedule(const EnergyProfile& profile,
                                  std::span<const UserChannel> users,
                                  const SystemParams& params, std::mt19937_64& rng);

BcdReport run_bcd(const EnergyProfile& profile, std::span<const UserChannel> users,
                  const SystemParams& params, const SolverOptions& opts);
BcdReport run_bcd(const Schedule& start, const EnergyProfile& profile,
                  std::span<const UserChannel> users, const SystemParams& params,
                  const SolverOptions& opts);

// Run 0 starts from initial_schedule; runs 1..starts-1 from seeded random
// feasible schedules. Runs are independent and execute concurrently.
std::vector<BcdReport> run_bcd_multistart(const EnergyProfile& profile,
                                          std::span<const UserChannel> users,
                                          const SystemParams& params, const SolverOptions& opts,
                                          int starts, std::uint64_t seed);

PartialOptimumCertificate verify_partial_optimum(const Schedule& sched,
                                                 const EnergyProfile& profile,
                                                 std::span<const UserChannel> users,
                                                 const SystemParams& params,
                                                 const SolverOptions& opts);

// Sum E_t - sum p_t T_t: energy left in the battery at the end of the frame.
double energy_exhaustion_check(const Schedule& sched, const EnergyProfile& profile);

}  // namespace ehsched
