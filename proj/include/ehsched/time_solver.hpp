#pragma once

// Time block: with powers fixed, the utility is concave in tau and
// separates into one water-filling problem per slot once the other
// columns are held fixed.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched {

struct SlotUpdate {
  std::size_t slot_index = 0;
  Eigen::VectorXd shares;  // N time shares, summing to T_t
  // Lagrange multiplier of the slot budget; 0 when the slot carries no rate.
  double multiplier = 0.0;
};

// Exact maximizer of sum_n log2(c_n + tau_n R_n) s.t. sum_n tau_n = budget,
// tau >= 0, for given carried bits c (>= 0) and slot rates R (>= 0).
// Shares are max(0, w - c_n/R_n) with the water level w = 1/(mu ln2).
SlotUpdate water_fill(std::span<const double> carried_bits, std::span<const double> slot_rates,
                      double budget);

// Re-solves column t of the schedule with every other column held fixed.
SlotUpdate solve_time_slot(std::size_t t, const Schedule& sched, const EnergyProfile& profile,
                           std::span<const UserChannel> users, const SystemParams& params,
                           const SolverOptions& opts);

// One ascending sweep t = 1..K, committing each column before the next.
// If commit_utilities is given, the utility after every commit is appended.
Schedule full_time_pass(const Schedule& sched, const EnergyProfile& profile,
                        std::span<const UserChannel> users, const SystemParams& params,
                        const SolverOptions& opts,
                        std::vector<double>* commit_utilities = nullptr);

}  // namespace ehsched

namespace ehsched {

// KKT violation of column t: spread of the marginal utilities
// R_nt / ((sum_i tau_ni R_ni) ln2) among served users, and the excess of
// any unserved user's marginal over the served level. Zero at a
// water-filling optimum.
double waterfill_residual(std::size_t t, const Schedule& sched,
                          std::span<const UserChannel> users, const SystemParams& params);

}  // namespace ehsched
