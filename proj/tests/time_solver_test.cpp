#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ehsched/errors.hpp"
#include "ehsched/oracle.hpp"
#include "ehsched/time_solver.hpp"
#include "test_support.hpp"

namespace ehsched {
namespace {

double slot_objective(const std::vector<double>& c, const std::vector<double>& r,
                      const Eigen::VectorXd& tau) {
  double f = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) f += std::log2(c[n] + tau[static_cast<Eigen::Index>(n)] * r[n]);
  return f;
}

TEST(WaterFill, RicherUserGetsNothing) {
  // Thresholds c/R = 1 and 4; level 4 is reached exactly with the whole budget on user 1.
  const auto up = water_fill(std::vector<double>{1, 4}, std::vector<double>{1, 1}, 3.0);
  EXPECT_NEAR(up.shares[0], 3.0, 1e-12);
  EXPECT_NEAR(up.shares[1], 0.0, 1e-12);
  EXPECT_NEAR(up.multiplier, 1.0 / (4.0 * kLn2), 1e-12);
}

TEST(WaterFill, EqualUsersSplitEvenly) {
  const auto up = water_fill(std::vector<double>{2, 2, 2}, std::vector<double>{5, 5, 5}, 6.0);
  for (int n = 0; n < 3; ++n) EXPECT_NEAR(up.shares[n], 2.0, 1e-12);
}

TEST(WaterFill, ZeroRateUsersGetNothing) {
  const auto up = water_fill(std::vector<double>{0, 3}, std::vector<double>{0, 2}, 1.0);
  EXPECT_DOUBLE_EQ(up.shares[0], 0.0);
  EXPECT_DOUBLE_EQ(up.shares[1], 1.0);
  const auto dead = water_fill(std::vector<double>{5, 3}, std::vector<double>{0, 0}, 1.0);
  EXPECT_DOUBLE_EQ(dead.shares[1], 1.0);
  EXPECT_DOUBLE_EQ(dead.multiplier, 0.0);
}

TEST(WaterFill, RejectsBadInput) {
  EXPECT_THROW(water_fill(std::vector<double>{1}, std::vector<double>{1, 1}, 1.0), ShapeError);
  EXPECT_THROW(water_fill(std::vector<double>{}, std::vector<double>{}, 1.0), ShapeError);
  EXPECT_THROW(water_fill(std::vector<double>{-1}, std::vector<double>{1}, 1.0), DomainError);
  EXPECT_THROW(water_fill(std::vector<double>{1}, std::vector<double>{1}, 0.0), DomainError);
}

// Random slots: budget holds, shares are nonnegative, the equal-marginal
// condition holds, and no point of a fine simplex grid does better.
TEST(WaterFill, MatchesGridSearchOnRandomSlots) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> carried(0.0, 50.0), rate(0.1, 20.0), budget(0.5, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    std::vector<double> c(static_cast<std::size_t>(n)), r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      c[static_cast<std::size_t>(i)] = 1.0 + carried(rng);
      r[static_cast<std::size_t>(i)] = rate(rng);
    }
    const double T = budget(rng);
    const auto up = water_fill(c, r, T);
    EXPECT_NEAR(up.shares.sum(), T, 1e-12 * T);
    EXPECT_GE(up.shares.minCoeff(), 0.0);

    double level = 0.0;
    for (int i = 0; i < n; ++i) {
      const double marginal = r[static_cast<std::size_t>(i)] /
                              ((c[static_cast<std::size_t>(i)] + up.shares[i] * r[static_cast<std::size_t>(i)]) * kLn2);
      if (up.shares[i] > 0.0) level = std::max(level, marginal);
    }
    for (int i = 0; i < n; ++i) {
      const double marginal = r[static_cast<std::size_t>(i)] /
                              ((c[static_cast<std::size_t>(i)] + up.shares[i] * r[static_cast<std::size_t>(i)]) * kLn2);
      if (up.shares[i] > 0.0) {
        EXPECT_NEAR(marginal, level, 1e-10 * level);
      } else {
        EXPECT_LE(marginal, level * (1 + 1e-10));
      }
    }

    const double best = slot_objective(c, r, up.shares);
    const int steps = n == 2 ? 2000 : 200;
    Eigen::VectorXd x(n);
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; b <= (n == 3 ? steps - a : 0); ++b) {
        x[0] = T * a / steps;
        if (n == 2) {
          x[1] = T - x[0];
        } else {
          x[1] = T * b / steps;
          x[2] = T - x[0] - x[1];
        }
        EXPECT_LE(slot_objective(c, r, x), best + 1e-12);
      }
    }
  }
}

TEST(TimeSolver, SolveSlotMatchesFullPassColumn) {
  std::mt19937_64 rng(42);
  const auto inst = testing::random_instance(rng, 3, 4);
  const Eigen::MatrixXd tau = testing::random_time_alloc(rng, inst.profile, 3);
  const Eigen::VectorXd p = testing::random_interior_powers(rng, inst.profile);
  const Schedule s(p, tau, inst.users, inst.params);
  const SolverOptions opts;
  const auto up = solve_time_slot(0, s, inst.profile, inst.users, inst.params, opts);
  const Schedule pass = full_time_pass(s, inst.profile, inst.users, inst.params, opts);
  EXPECT_LE((pass.time_alloc().col(0) - up.shares).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(up.slot_index, 0u);
  EXPECT_THROW(solve_time_slot(4, s, inst.profile, inst.users, inst.params, opts), ShapeError);
}

TEST(TimeSolver, FullPassIsMonotoneAtEveryCommit) {
  std::mt19937_64 rng(43);
  const SolverOptions opts;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const auto inst = testing::random_instance(rng, n, 1 + trial % 7);
    const Schedule s(testing::random_interior_powers(rng, inst.profile),
                     testing::random_time_alloc(rng, inst.profile, n), inst.users, inst.params);
    std::vector<double> commits;
    const Schedule out = full_time_pass(s, inst.profile, inst.users, inst.params, opts, &commits);
    ASSERT_EQ(commits.size(), inst.profile.slots());
    double prev = utility(s);
    for (double u : commits) {
      EXPECT_GE(u, prev - 1e-9);
      prev = u;
    }
    EXPECT_TRUE(check_feasible(out, inst.profile, opts).feasible());
    const std::size_t last = inst.profile.slots() - 1;
    EXPECT_LE(waterfill_residual(last, out, inst.users, inst.params), 1e-9);
  }
}

// Repeated passes at fixed powers reach the time-block optimum computed by
// the oracle's bisection routine.
TEST(TimeSolver, RepeatedPassesReachOracleOptimum) {
  std::mt19937_64 rng(44);
  const SolverOptions opts;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const auto inst = testing::random_instance(rng, n, 2 + trial % 4);
    const Eigen::VectorXd p = testing::random_interior_powers(rng, inst.profile);
    Schedule s(p, testing::random_time_alloc(rng, inst.profile, n), inst.users, inst.params);
    int passes = 0;
    for (; passes < 1000000; ++passes) {
      const Schedule next = full_time_pass(s, inst.profile, inst.users, inst.params, opts);
      const double moved = (next.time_alloc() - s.time_alloc()).cwiseAbs().maxCoeff();
      s = next;
      if (moved < 1e-12) break;
    }
    const auto ref = oracle::optimal_time_allocation(inst.profile, inst.users, inst.params, p);
    ASSERT_TRUE(ref.has_value());
    EXPECT_NEAR(utility(s), utility(*ref, p, inst.users, inst.params), 1e-7) << "trial " << trial << " passes " << passes;
    for (std::size_t t = 0; t < inst.profile.slots(); ++t) {
      EXPECT_LE(waterfill_residual(t, s, inst.users, inst.params), 1e-6);
    }
  }
}

TEST(TimeSolver, ResidualFlagsNonOptimalColumn) {
  const SystemParams params(1000.0, 1e-6);
  const auto users = make_users(std::vector<double>{30, 33}, params);
  Eigen::MatrixXd tau(2, 2);
  tau << 0.9, 0.5, 0.1, 0.5;
  const Schedule s(Eigen::Vector2d(1, 1), tau, users, params);
  EXPECT_GT(waterfill_residual(0, s, users, params), 1e-3);
}

}  // namespace
}  // namespace ehsched
