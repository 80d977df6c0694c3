#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched::testing {

struct Instance {
  SystemParams params{1000.0, 1e-6};
  std::vector<UserChannel> users;
  EnergyProfile profile{{1.0}, {1.0}};
};

inline Instance random_instance(std::mt19937_64& rng, int n_users, int n_slots) {
  std::uniform_real_distribution<double> loss(15.0, 40.0);
  std::uniform_real_distribution<double> len(1.0, 20.0);
  std::uniform_real_distribution<double> harvest(0.5, 100.0);
  Instance inst;
  std::vector<double> losses(static_cast<std::size_t>(n_users));
  for (auto& l : losses) l = loss(rng);
  inst.users = make_users(losses, inst.params);
  std::vector<double> T(static_cast<std::size_t>(n_slots));
  std::vector<double> E(static_cast<std::size_t>(n_slots));
  for (int t = 0; t < n_slots; ++t) {
    T[static_cast<std::size_t>(t)] = len(rng);
    E[static_cast<std::size_t>(t)] = harvest(rng);
  }
  inst.profile = EnergyProfile(std::move(T), std::move(E));
  return inst;
}

// Every share strictly positive, columns summing to T_t.
inline Eigen::MatrixXd random_time_alloc(std::mt19937_64& rng, const EnergyProfile& profile,
                                         int n_users) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  Eigen::MatrixXd tau(n_users, static_cast<Eigen::Index>(profile.slots()));
  for (Eigen::Index t = 0; t < tau.cols(); ++t) {
    for (Eigen::Index n = 0; n < n_users; ++n) tau(n, t) = w(rng);
    tau.col(t) *= profile.slot_lengths()[t] / tau.col(t).sum();
  }
  return tau;
}

// Strictly feasible powers: a random fraction of the largest constant power
// that meets every cumulative energy constraint, times a per-slot jitter.
inline Eigen::VectorXd random_interior_powers(std::mt19937_64& rng, const EnergyProfile& profile) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const auto k = static_cast<Eigen::Index>(profile.slots());
  const Eigen::VectorXd cum = profile.cumulative_energy();
  double q = cum[0] / profile.slot_lengths()[0];
  double cum_t = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cum_t += profile.slot_lengths()[j];
    q = std::min(q, cum[j] / cum_t);
  }
  Eigen::VectorXd p(k);
  for (Eigen::Index t = 0; t < k; ++t) p[t] = q * u(rng);
  return p;
}

// Standard five-user path losses, 25..37 dB.
inline std::vector<double> standard_losses() { return {25, 28, 31, 34, 37}; }
inline std::vector<double> standard_harvests() { return {20, 100, 1, 1, 1, 70, 100, 1, 10, 40}; }

// Tabulated equal-slot allocation with the column-9 entry read as 6.0394 so
// that the column sums to the slot length.
inline Eigen::MatrixXd tabulated_equal_slot_tau() {
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(5, 10);
  tau(0, 0) = 10;
  tau(0, 1) = 10;
  tau(0, 2) = 6.2337;
  tau(1, 2) = 3.7663;
  tau(1, 3) = 10;
  tau(1, 4) = 10;
  tau(2, 5) = 10;
  tau(2, 6) = 10;
  tau(3, 7) = 10;
  tau(3, 8) = 6.0394;
  tau(4, 8) = 3.9606;
  tau(4, 9) = 10;
  return tau;
}

inline Eigen::VectorXd tabulated_equal_slot_powers() {
  Eigen::VectorXd p(10);
  p << 2, 2.0182, 2.2189, 2.5923, 2.5923, 3.4327, 3.4327, 4.6482, 5.1876, 6.2772;
  return p;
}

}  // namespace ehsched::testing
