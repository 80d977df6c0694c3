#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched {

// "Spend what you get" powers p_t = E_t / T_t with round-robin TDMA: slot t
// (0-based) goes entirely to user t mod N. Throws StarvedUserError if K < N.
Schedule sg_tdma_schedule(const EnergyProfile& profile, std::span<const UserChannel> users,
                          const SystemParams& params);

// (sum x)^2 / (N sum x^2). Throws DomainError on empty or nonpositive input.
double jain_index(std::span<const double> x);
double jain_index(const Eigen::VectorXd& x);

// When the baseline starves a user, baseline_utility is -inf and the
// utility improvement and baseline Jain index are NaN.
struct MetricsReport {
  double candidate_utility = 0.0;
  double baseline_utility = 0.0;
  double utility_improvement_pct = 0.0;
  // Empty entry where the baseline gives the user zero bits.
  std::vector<std::optional<double>> per_user_throughput_improvement_pct;
  double jain_index = 0.0;           // on the candidate's per-user bits
  double baseline_jain_index = 0.0;  // on the baseline's per-user bits
  double mean_path_loss_db = 0.0;
};

double mean_path_loss_db(std::span<const UserChannel> users);

// 100 (U_c - U_b) / |U_b|.
double utility_improvement_pct(double candidate_utility, double baseline_utility);

MetricsReport improvement_metrics(const Schedule& candidate, const Schedule& baseline,
                                  std::span<const UserChannel> users);

}  // namespace ehsched
