#pragma once

// Power block: for a fixed time allocation, maximize the log-sum utility
// over powers subject to nonnegativity and cumulative energy causality.
// The problem is strictly concave whenever every user is served, so the
// maximizer is unique. Solved by a log-barrier SUMT with damped Newton
// centering, followed by an active-set Newton polish.

#include <Eigen/Core>

#include <span>

#include "ehsched/model.hpp"

namespace ehsched {

struct PowerSolution {
  Eigen::VectorXd powers;
  double kkt_residual = 0.0;
  int inner_iterations = 0;
  int barrier_rounds = 0;
  bool polished = false;
  bool converged = false;
};

// Throws PreconditionError if tau breaks the slot budgets or some user has
// less than epsilon total time (or is only served in slots that can carry
// no energy).
PowerSolution solve_power(const Eigen::MatrixXd& time_alloc, const EnergyProfile& profile,
                          std::span<const UserChannel> users, const SystemParams& params,
                          const SolverOptions& opts);

// Norm of the KKT stationarity residual grad U - sum_j lambda_j a_j over
// the constraints active at p (slack <= active_tol), with lambda >= 0
// fitted by NNLS. Zero at the exact maximizer.
double kkt_residual_power(const Eigen::VectorXd& powers, const Eigen::MatrixXd& time_alloc,
                          const EnergyProfile& profile, std::span<const UserChannel> users,
                          const SystemParams& params, double active_tol = 1e-6);

// Multipliers of the fitted KKT system: energy multipliers (K) followed by
// nonnegativity multipliers (K); inactive constraints get 0.
Eigen::VectorXd kkt_multipliers_power(const Eigen::VectorXd& powers,
                                      const Eigen::MatrixXd& time_alloc,
                                      const EnergyProfile& profile,
                                      std::span<const UserChannel> users,
                                      const SystemParams& params, double active_tol = 1e-6);

}  // namespace ehsched
