#include "ehsched/metrics.hpp"

#include <cmath>
#include <limits>

namespace ehsched {

Schedule sg_tdma_schedule(const EnergyProfile& profile, std::span<const UserChannel> users,
                          const SystemParams& params) {
  const std::size_t k = profile.slots();
  const std::size_t n = users.size();
  if (n == 0) throw SetupError("SG+TDMA needs at least one user");
  if (k < n) {
    throw StarvedUserError("round-robin TDMA over " + std::to_string(k) + " slots leaves " +
                           std::to_string(n - k) + " of " + std::to_string(n) +
                           " users without time");
  }
  const Eigen::VectorXd powers =
      profile.harvests().cwiseQuotient(profile.slot_lengths());
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < k; ++t) {
    tau(static_cast<Eigen::Index>(t % n), static_cast<Eigen::Index>(t)) =
        profile.slot_lengths()[static_cast<Eigen::Index>(t)];
  }
  return Schedule(powers, std::move(tau), users, params);
}

double jain_index(std::span<const double> x) {
  if (x.empty()) throw DomainError("Jain index of an empty allocation");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : x) {
    if (!(v > 0.0)) throw DomainError("Jain index needs strictly positive allocations");
    sum += v;
    sum_sq += v * v;
  }
  return sum * sum / (static_cast<double>(x.size()) * sum_sq);
}

double jain_index(const Eigen::VectorXd& x) {
  return jain_index(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double mean_path_loss_db(std::span<const UserChannel> users) {
  if (users.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& u : users) acc += u.path_loss_db();
  return acc / static_cast<double>(users.size());
}

double utility_improvement_pct(double candidate_utility, double baseline_utility) {
  if (baseline_utility == 0.0) throw DomainError("utility improvement over a zero baseline");
  return 100.0 * (candidate_utility - baseline_utility) / std::abs(baseline_utility);
}

MetricsReport improvement_metrics(const Schedule& candidate, const Schedule& baseline,
                                  std::span<const UserChannel> users) {
  if (candidate.users() != baseline.users() || candidate.slots() != baseline.slots() ||
      candidate.users() != users.size()) {
    throw ShapeError("candidate and baseline schedules describe different instances");
  }
  MetricsReport rep;
  const auto& rc = candidate.user_bits();
  const auto& rb = baseline.user_bits();
  rep.candidate_utility = utility(candidate);
  if ((rb.array() > 0.0).all()) {
    rep.baseline_utility = utility(baseline);
    rep.utility_improvement_pct =
        utility_improvement_pct(rep.candidate_utility, rep.baseline_utility);
    rep.baseline_jain_index = jain_index(rb);
  } else {
    rep.baseline_utility = -std::numeric_limits<double>::infinity();
    rep.utility_improvement_pct = std::numeric_limits<double>::quiet_NaN();
    rep.baseline_jain_index = std::numeric_limits<double>::quiet_NaN();
  }
  for (Eigen::Index n = 0; n < rc.size(); ++n) {
    if (rb[n] > 0.0) {
      rep.per_user_throughput_improvement_pct.emplace_back(100.0 * (rc[n] - rb[n]) / rb[n]);
    } else {
      rep.per_user_throughput_improvement_pct.emplace_back(std::nullopt);
    }
  }
  rep.jain_index = jain_index(rc);
  rep.mean_path_loss_db = mean_path_loss_db(users);
  return rep;
}

}  // namespace ehsched
