#pragma once

// Domain model of the energy-harvesting broadcast downlink: system
// parameters, user channels, harvest profile, schedules, the per-slot rate
// law and the proportional-fair (log-sum) utility.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehsched/errors.hpp"

namespace ehsched {

inline constexpr double kLn2 = 0.693147180559945309417232121458176568;

class SystemParams {
 public:
  SystemParams(double bandwidth_hz, double noise_density);

  double bandwidth_hz() const { return bandwidth_hz_; }
  double noise_density() const { return noise_density_; }
  // N_o * W, the noise power over the channel.
  double noise_power() const { return bandwidth_hz_ * noise_density_; }

 private:
  double bandwidth_hz_;
  double noise_density_;
};

class UserChannel {
 public:
  // gain = 10^(-path_loss_db/10); norm_gain = gain / (N_o W).
  UserChannel(double path_loss_db, const SystemParams& params);

  double path_loss_db() const { return path_loss_db_; }
  double gain() const { return gain_; }
  double norm_gain() const { return norm_gain_; }

 private:
  double path_loss_db_;
  double gain_;
  double norm_gain_;
};

std::vector<UserChannel> make_users(std::span<const double> path_losses_db,
                                    const SystemParams& params);

// Slot lengths T_t and harvests E_t of one frame. Energy E_t arrives at the
// start of slot t.
class EnergyProfile {
 public:
  EnergyProfile(std::vector<double> slot_lengths, std::vector<double> harvests);

  std::size_t slots() const { return static_cast<std::size_t>(slot_lengths_.size()); }
  const Eigen::VectorXd& slot_lengths() const { return slot_lengths_; }
  const Eigen::VectorXd& harvests() const { return harvests_; }
  double frame_length() const { return slot_lengths_.sum(); }
  double total_energy() const { return harvests_.sum(); }
  // Prefix sums of E_t.
  Eigen::VectorXd cumulative_energy() const;

 private:
  Eigen::VectorXd slot_lengths_;
  Eigen::VectorXd harvests_;
};

// W log2(1 + L p). Throws DomainError on negative arguments.
double slot_rate(double norm_gain, double power, const SystemParams& params);

// d/dp and d2/dp2 of slot_rate.
double slot_rate_derivative(double norm_gain, double power, const SystemParams& params);
double slot_rate_second_derivative(double norm_gain, double power,
                                   const SystemParams& params);

// N x K matrix of R_nt = slot_rate(L_n, p_t).
Eigen::MatrixXd rate_matrix(std::span<const UserChannel> users, const Eigen::VectorXd& powers,
                            const SystemParams& params);

// Power vector p (K) and time allocation tau (N x K), with the per-user bit
// totals R_n = sum_t tau_nt R_nt cached at construction.
class Schedule {
 public:
  Schedule(Eigen::VectorXd powers, Eigen::MatrixXd time_alloc,
           std::span<const UserChannel> users, const SystemParams& params);

  const Eigen::VectorXd& powers() const { return powers_; }
  const Eigen::MatrixXd& time_alloc() const { return time_alloc_; }
  const Eigen::VectorXd& user_bits() const { return user_bits_; }
  std::size_t users() const { return static_cast<std::size_t>(time_alloc_.rows()); }
  std::size_t slots() const { return static_cast<std::size_t>(powers_.size()); }

 private:
  Eigen::VectorXd powers_;
  Eigen::MatrixXd time_alloc_;
  Eigen::VectorXd user_bits_;
};

Eigen::VectorXd user_bits(const Eigen::MatrixXd& time_alloc, const Eigen::VectorXd& powers,
                          std::span<const UserChannel> users, const SystemParams& params);

struct SolverOptions {
  // Minimum total time per user. Unset means 1e-6 x frame length.
  std::optional<double> epsilon_time;

  // Feasibility tolerances for check_feasible.
  double time_sum_tol = 1e-8;
  double energy_tol = 1e-6;

  // BCD outer loop.
  double utility_tol = 1e-9;  // relative utility change
  double var_tol = 1e-7;      // max abs change of any p_t or tau_nt
  int max_bcd_iters = 5000;

  // Log-barrier SUMT for the power block.
  double barrier_initial_weight = 1.0;
  double barrier_growth = 10.0;
  double barrier_stop = 1e-9;  // stop when 2K mu < barrier_stop * max(1,|U|)
  double inner_tol = 1e-12;    // Newton decrement
  int max_inner_iters = 200;
  int max_outer_rounds = 60;
  double kkt_tol = 1e-6;

  double waterfill_tol = 1e-10;
  double certificate_tol = 1e-6;

  double effective_epsilon(const EnergyProfile& profile) const;
  // Throws DomainError if any tolerance or iteration bound is non-positive.
  void validate() const;
};

// Sum_n log2(R_n). Throws DegenerateScheduleError if some R_n <= 0.
double utility(const Schedule& sched);
double utility(const Eigen::MatrixXd& time_alloc, const Eigen::VectorXd& powers,
               std::span<const UserChannel> users, const SystemParams& params);

// dU/dp_t = sum_n tau_nt R'_n(p_t) / (R_n ln2).
Eigen::VectorXd utility_gradient_power(const Eigen::MatrixXd& time_alloc,
                                       const Eigen::VectorXd& powers,
                                       std::span<const UserChannel> users,
                                       const SystemParams& params);
// dU/dtau_nt = R_nt / (R_n ln2).
Eigen::MatrixXd utility_gradient_time(const Eigen::MatrixXd& time_alloc,
                                      const Eigen::VectorXd& powers,
                                      std::span<const UserChannel> users,
                                      const SystemParams& params);
Eigen::MatrixXd utility_hessian_power(const Eigen::MatrixXd& time_alloc,
                                      const Eigen::VectorXd& powers,
                                      std::span<const UserChannel> users,
                                      const SystemParams& params);

enum class ConstraintKind {
  kNonnegativeTime,
  kNonnegativePower,
  kSlotBudget,
  kMinUserTime,
  kEnergyCausality,
};

std::string to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  std::size_t slot = 0;  // unused for kMinUserTime
  std::size_t user = 0;  // used for kNonnegativeTime and kMinUserTime
  double slack = 0.0;  // signed; negative means violated by |slack|
};

struct FeasibilityReport {
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
  std::string describe() const;
};

// Checks nonnegativity, slot budgets, minimum per-user time and energy
// causality. Throws ShapeError on
// dimension mismatch.
FeasibilityReport check_feasible(const Schedule& sched, const EnergyProfile& profile,
                                 const SolverOptions& opts);

}  // namespace ehsched
