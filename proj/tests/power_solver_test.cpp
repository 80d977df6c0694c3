#include <gtest/gtest.h>

#include <cmath>

#include "ehsched/errors.hpp"
#include "ehsched/power_solver.hpp"
#include "test_support.hpp"

namespace ehsched {
namespace {

double spent(const Eigen::VectorXd& p, const EnergyProfile& profile) {
  return p.dot(profile.slot_lengths());
}

TEST(PowerSolver, SingleUserSpendsEachHarvestWhenFutureIsNotRicher) {
  // K = 2, N = 1, E = (2, 2), T = 1: equalizing would need borrowing, so p = (2, 2).
  const SystemParams unit(1.0, 1.0);
  const auto users = make_users(std::vector<double>{0.0}, unit);
  const EnergyProfile profile({1, 1}, {2, 2});
  const auto sol = solve_power(Eigen::MatrixXd::Ones(1, 2), profile, users, unit, SolverOptions{});
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.powers[0], 2.0, 1e-7);
  EXPECT_NEAR(sol.powers[1], 2.0, 1e-7);
  EXPECT_NEAR(utility(Eigen::MatrixXd::Ones(1, 2), sol.powers, users, unit), std::log2(2.0 * std::log2(3.0)), 1e-9);
}

TEST(PowerSolver, SingleUserSavesEnergyForLaterSlot) {
  // All energy up front and equal slots: the optimum is a constant power.
  const SystemParams unit(1.0, 1.0);
  const auto users = make_users(std::vector<double>{0.0}, unit);
  const EnergyProfile profile({1, 1, 1}, {6, 0, 0});
  const auto sol = solve_power(Eigen::MatrixXd::Ones(1, 3), profile, users, unit, SolverOptions{});
  EXPECT_TRUE(sol.converged);
  for (int t = 0; t < 3; ++t) EXPECT_NEAR(sol.powers[t], 2.0, 1e-7);
}

TEST(PowerSolver, LeadingZeroHarvestSlotsArePinned) {
  const SystemParams unit(1.0, 1.0);
  const auto users = make_users(std::vector<double>{0.0}, unit);
  const EnergyProfile profile({1, 1, 1}, {0, 4, 0});
  const auto sol = solve_power(Eigen::MatrixXd::Ones(1, 3), profile, users, unit, SolverOptions{});
  EXPECT_TRUE(sol.converged);
  EXPECT_DOUBLE_EQ(sol.powers[0], 0.0);
  EXPECT_NEAR(sol.powers[1], 2.0, 1e-7);
  EXPECT_NEAR(sol.powers[2], 2.0, 1e-7);
}

TEST(PowerSolver, TabulatedEqualSlotRow) {
  const SystemParams params(1000.0, 1e-6);
  const auto users = make_users(testing::standard_losses(), params);
  const EnergyProfile profile(std::vector<double>(10, 10.0), testing::standard_harvests());
  const Eigen::MatrixXd tau = testing::tabulated_equal_slot_tau();
  const auto sol = solve_power(tau, profile, users, params, SolverOptions{});
  EXPECT_TRUE(sol.converged);
  EXPECT_LE(sol.kkt_residual, 1e-6);
  const Eigen::VectorXd want = testing::tabulated_equal_slot_powers();
  for (int t = 0; t < 10; ++t) EXPECT_NEAR(sol.powers[t], want[t], 1e-2) << "slot " << t + 1;
  EXPECT_NEAR(spent(sol.powers, profile), 344.0, 1e-6);
  EXPECT_NEAR(utility(tau, sol.powers, users, params), 75.7325, 1e-3);
}

TEST(PowerSolver, RandomInstancesReachKktPoint) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> zero_pick(0, 3);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + trial % 5;
    const int k = 1 + trial % 8;
    auto inst = testing::random_instance(rng, n, k);
    // Sprinkle zero harvests (keeping the first one positive) to exercise boundaries.
    if (k > 1 && trial % 3 == 0) {
      std::vector<double> T(inst.profile.slot_lengths().begin(), inst.profile.slot_lengths().end());
      std::vector<double> E(inst.profile.harvests().begin(), inst.profile.harvests().end());
      for (std::size_t t = 1; t < E.size(); ++t) {
        if (zero_pick(rng) == 0) E[t] = 0.0;
      }
      inst.profile = EnergyProfile(T, E);
    }
    Eigen::MatrixXd tau = testing::random_time_alloc(rng, inst.profile, n);
    const SolverOptions opts;
    const auto sol = solve_power(tau, inst.profile, inst.users, inst.params, opts);
    ASSERT_TRUE(sol.converged) << "trial " << trial << " kkt " << sol.kkt_residual;
    EXPECT_LE(sol.kkt_residual, 1e-6);
    const Schedule s(sol.powers, tau, inst.users, inst.params);
    EXPECT_TRUE(check_feasible(s, inst.profile, opts).feasible()) << "trial " << trial;
    // Utility is increasing in every p_t, so the whole budget is used.
    EXPECT_NEAR(spent(sol.powers, inst.profile), inst.profile.total_energy(),
                1e-6 * inst.profile.total_energy());

    // No random feasible point beats the solver.
    const double u = utility(s);
    for (int probe = 0; probe < 20; ++probe) {
      const Eigen::VectorXd q = testing::random_interior_powers(rng, inst.profile);
      EXPECT_LE(utility(tau, q, inst.users, inst.params), u + 1e-9);
    }
  }
}

TEST(PowerSolver, KktResidualDetectsSuboptimalPoint) {
  const SystemParams params(1000.0, 1e-6);
  const auto users = make_users(testing::standard_losses(), params);
  const EnergyProfile profile(std::vector<double>(10, 10.0), testing::standard_harvests());
  const Eigen::MatrixXd tau = testing::tabulated_equal_slot_tau();
  const Eigen::VectorXd sg = profile.harvests().cwiseQuotient(profile.slot_lengths());
  EXPECT_GT(kkt_residual_power(sg, tau, profile, users, params), 1e-3);
  const auto sol = solve_power(tau, profile, users, params, SolverOptions{});
  const Eigen::VectorXd mult = kkt_multipliers_power(sol.powers, tau, profile, users, params);
  ASSERT_EQ(mult.size(), 20);
  EXPECT_GE(mult.minCoeff(), 0.0);
  // The final constraint binds since all energy is used.
  EXPECT_GT(mult[9], 0.0);
}

TEST(PowerSolver, PreconditionsAreChecked) {
  const SystemParams params(1000.0, 1e-6);
  const auto users = make_users(std::vector<double>{30, 33}, params);
  const EnergyProfile profile({1, 1}, {1, 1});
  const SolverOptions opts;
  EXPECT_THROW(solve_power(Eigen::MatrixXd::Ones(3, 2), profile, users, params, opts), ShapeError);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.5, 0.5, -0.5, 0.5;
  EXPECT_THROW(solve_power(neg, profile, users, params, opts), PreconditionError);
  Eigen::MatrixXd over(2, 2);
  over << 1, 1, 1, 0;
  EXPECT_THROW(solve_power(over, profile, users, params, opts), PreconditionError);
  Eigen::MatrixXd starved(2, 2);
  starved << 1, 1, 0, 0;
  EXPECT_THROW(solve_power(starved, profile, users, params, opts), PreconditionError);
  // User 2 only served where no energy can ever be spent.
  const EnergyProfile late({1, 1}, {0, 1});
  Eigen::MatrixXd early(2, 2);
  early << 0, 1, 1, 0;
  EXPECT_THROW(solve_power(early, late, users, params, opts), PreconditionError);
}

}  // namespace
}  // namespace ehsched
