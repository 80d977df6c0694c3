#include "ehsched/time_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ehsched {

SlotUpdate water_fill(std::span<const double> carried_bits, std::span<const double> slot_rates,
                      double budget) {
  if (!(budget > 0.0)) throw DomainError("slot length must be positive");
  if (carried_bits.size() != slot_rates.size()) {
    throw ShapeError("carried bits and slot rates differ in length");
  }
  const std::size_t n_users = slot_rates.size();
  if (n_users == 0) throw ShapeError("water filling needs at least one user");
  for (std::size_t n = 0; n < n_users; ++n) {
    if (carried_bits[n] < 0.0 || slot_rates[n] < 0.0) {
      throw DomainError("carried bits and slot rates must be nonnegative");
    }
  }

  SlotUpdate out;
  out.shares = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_users));

  std::vector<std::size_t> active;
  for (std::size_t n = 0; n < n_users; ++n) {
    if (slot_rates[n] > 0.0) active.push_back(n);
  }
  if (active.empty()) {
    // Column is irrelevant to the utility; hand it to the poorest user.
    const auto poorest = std::min_element(carried_bits.begin(), carried_bits.end());
    out.shares[std::distance(carried_bits.begin(), poorest)] = budget;
    return out;
  }

  // Thresholds c_n / R_n: a user starts receiving time once the water level
  // passes its threshold.
  std::vector<double> level(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    level[i] = carried_bits[active[i]] / slot_rates[active[i]];
  }
  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return level[a] < level[b]; });

  double prefix = 0.0;
  double water = 0.0;
  std::size_t filled = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    prefix += level[order[k]];
    water = (budget + prefix) / static_cast<double>(k + 1);
    filled = k + 1;
    if (k + 1 == order.size() || water <= level[order[k + 1]]) break;
  }

  double assigned = 0.0;
  std::size_t largest = active[order[0]];
  for (std::size_t k = 0; k < filled; ++k) {
    const std::size_t n = active[order[k]];
    const double share = std::max(0.0, water - level[order[k]]);
    out.shares[static_cast<Eigen::Index>(n)] = share;
    assigned += share;
    if (share > out.shares[static_cast<Eigen::Index>(largest)]) largest = n;
  }
  // Absorb rounding so the budget holds exactly.
  out.shares[static_cast<Eigen::Index>(largest)] += budget - assigned;
  out.multiplier = 1.0 / (water * kLn2);
  return out;
}

namespace {

SlotUpdate solve_column(std::size_t t, const Eigen::MatrixXd& tau, const Eigen::MatrixXd& rates,
                        double budget) {
  const auto col = static_cast<Eigen::Index>(t);
  const Eigen::VectorXd total = tau.cwiseProduct(rates).rowwise().sum();
  std::vector<double> carried(static_cast<std::size_t>(tau.rows()));
  std::vector<double> slot(static_cast<std::size_t>(tau.rows()));
  for (Eigen::Index n = 0; n < tau.rows(); ++n) {
    carried[static_cast<std::size_t>(n)] = std::max(0.0, total[n] - tau(n, col) * rates(n, col));
    slot[static_cast<std::size_t>(n)] = rates(n, col);
  }
  SlotUpdate up = water_fill(carried, slot, budget);
  up.slot_index = t;
  return up;
}

}  // namespace

SlotUpdate solve_time_slot(std::size_t t, const Schedule& sched, const EnergyProfile& profile,
                           std::span<const UserChannel> users, const SystemParams& params,
                           const SolverOptions& opts) {
  (void)opts;
  if (t >= profile.slots() || sched.slots() != profile.slots()) {
    throw ShapeError("slot index out of range for the schedule");
  }
  const Eigen::MatrixXd rates = rate_matrix(users, sched.powers(), params);
  if (rates.rows() != sched.time_alloc().rows()) throw ShapeError("user count mismatch");
  return solve_column(t, sched.time_alloc(), rates,
                      profile.slot_lengths()[static_cast<Eigen::Index>(t)]);
}

Schedule full_time_pass(const Schedule& sched, const EnergyProfile& profile,
                        std::span<const UserChannel> users, const SystemParams& params,
                        const SolverOptions& opts, std::vector<double>* commit_utilities) {
  (void)opts;
  if (sched.slots() != profile.slots()) throw ShapeError("schedule and profile disagree on K");
  const Eigen::MatrixXd rates = rate_matrix(users, sched.powers(), params);
  Eigen::MatrixXd tau = sched.time_alloc();
  if (rates.rows() != tau.rows()) throw ShapeError("user count mismatch");
  for (std::size_t t = 0; t < profile.slots(); ++t) {
    const SlotUpdate up =
        solve_column(t, tau, rates, profile.slot_lengths()[static_cast<Eigen::Index>(t)]);
    tau.col(static_cast<Eigen::Index>(t)) = up.shares;
    if (commit_utilities) {
      commit_utilities->push_back(utility(tau, sched.powers(), users, params));
    }
  }
  return Schedule(sched.powers(), std::move(tau), users, params);
}

}  // namespace ehsched

namespace ehsched {

double waterfill_residual(std::size_t t, const Schedule& sched,
                          std::span<const UserChannel> users, const SystemParams& params) {
  const auto col = static_cast<Eigen::Index>(t);
  const auto& tau = sched.time_alloc();
  const auto& bits = sched.user_bits();
  const Eigen::MatrixXd rates = rate_matrix(users, sched.powers(), params);
  double served_max = -std::numeric_limits<double>::infinity();
  double served_min = std::numeric_limits<double>::infinity();
  double unserved_max = -std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < tau.rows(); ++n) {
    if (rates(n, col) == 0.0) continue;
    const double marginal = rates(n, col) / (bits[n] * kLn2);
    if (tau(n, col) > 0.0) {
      served_max = std::max(served_max, marginal);
      served_min = std::min(served_min, marginal);
    } else {
      unserved_max = std::max(unserved_max, marginal);
    }
  }
  if (served_max == -std::numeric_limits<double>::infinity()) return 0.0;
  double res = served_max - served_min;
  if (unserved_max > served_max) res = std::max(res, unserved_max - served_max);
  return res;
}

}  // namespace ehsched
