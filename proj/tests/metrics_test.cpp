#include <gtest/gtest.h>

#include <cmath>

#include "ehsched/errors.hpp"
#include "ehsched/metrics.hpp"
#include "test_support.hpp"

namespace ehsched {
namespace {

const SystemParams kParams(1000.0, 1e-6);

TEST(Jain, KnownValues) {
  EXPECT_DOUBLE_EQ(jain_index(std::vector<double>{3, 3, 3}), 1.0);
  // One user takes everything in the limit: 1/N.
  EXPECT_NEAR(jain_index(std::vector<double>{1, 1e-12, 1e-12, 1e-12}), 0.25, 1e-9);
  EXPECT_NEAR(jain_index(std::vector<double>{1, 2}), 9.0 / 10.0, 1e-15);
  EXPECT_THROW(jain_index(std::vector<double>{}), DomainError);
  EXPECT_THROW(jain_index(std::vector<double>{1, 0}), DomainError);
}

TEST(Jain, ScaleInvariantAndBounded) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd x(1 + trial % 9);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
    const double j = jain_index(x);
    EXPECT_GE(j, 1.0 / static_cast<double>(x.size()) - 1e-15);
    EXPECT_LE(j, 1.0 + 1e-15);
    EXPECT_NEAR(jain_index(Eigen::VectorXd(7.5 * x)), j, 1e-12);
  }
}

TEST(SgTdma, RoundRobinAndSpendWhatYouGet) {
  const auto users = make_users(std::vector<double>{25, 28, 31}, kParams);
  const EnergyProfile profile({1, 2, 3, 4}, {2, 2, 6, 8});
  const Schedule s = sg_tdma_schedule(profile, users, kParams);
  EXPECT_TRUE(s.powers().isApprox(Eigen::Vector4d(2, 1, 2, 2)));
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 4);
  want(0, 0) = 1;
  want(1, 1) = 2;
  want(2, 2) = 3;
  want(0, 3) = 4;
  EXPECT_EQ(s.time_alloc(), want);
  EXPECT_TRUE(check_feasible(s, profile, SolverOptions{}).feasible());
}

TEST(SgTdma, TooFewSlotsStarvesUsers) {
  const auto users = make_users(std::vector<double>{25, 28, 31}, kParams);
  EXPECT_THROW(sg_tdma_schedule(EnergyProfile({1, 1}, {1, 1}), users, kParams), StarvedUserError);
}

TEST(Metrics, ImprovementPercent) {
  EXPECT_DOUBLE_EQ(utility_improvement_pct(110.0, 100.0), 10.0);
  EXPECT_DOUBLE_EQ(utility_improvement_pct(-9.0, -10.0), 10.0);
  EXPECT_THROW(utility_improvement_pct(1.0, 0.0), DomainError);
}

TEST(Metrics, ReportAgainstBaseline) {
  const auto users = make_users(std::vector<double>{25, 31}, kParams);
  EXPECT_DOUBLE_EQ(mean_path_loss_db(users), 28.0);
  const EnergyProfile profile({1, 1}, {1, 1});
  const Schedule base = sg_tdma_schedule(profile, users, kParams);
  const Schedule cand(Eigen::Vector2d(1, 1), Eigen::MatrixXd::Constant(2, 2, 0.5), users, kParams);
  const MetricsReport rep = improvement_metrics(cand, base, users);
  EXPECT_DOUBLE_EQ(rep.candidate_utility, utility(cand));
  EXPECT_DOUBLE_EQ(rep.baseline_utility, utility(base));
  EXPECT_NEAR(rep.utility_improvement_pct,
              100.0 * (utility(cand) - utility(base)) / std::abs(utility(base)), 1e-12);
  ASSERT_EQ(rep.per_user_throughput_improvement_pct.size(), 2u);
  // Same total time per user, same power: no per-user change.
  EXPECT_NEAR(*rep.per_user_throughput_improvement_pct[0], 0.0, 1e-12);
  EXPECT_NEAR(rep.jain_index, jain_index(cand.user_bits()), 1e-15);
  EXPECT_NEAR(rep.baseline_jain_index, jain_index(base.user_bits()), 1e-15);
}

TEST(Metrics, StarvingBaselineIsReportedNotThrown) {
  const auto users = make_users(std::vector<double>{25, 31}, kParams);
  Eigen::MatrixXd tau(2, 2);
  tau << 1, 1, 0, 0;
  const Schedule base(Eigen::Vector2d(1, 1), tau, users, kParams);
  const Schedule cand(Eigen::Vector2d(1, 1), Eigen::MatrixXd::Constant(2, 2, 0.5), users, kParams);
  const MetricsReport rep = improvement_metrics(cand, base, users);
  EXPECT_TRUE(std::isinf(rep.baseline_utility));
  EXPECT_TRUE(std::isnan(rep.utility_improvement_pct));
  EXPECT_FALSE(rep.per_user_throughput_improvement_pct[1].has_value());
  EXPECT_TRUE(rep.per_user_throughput_improvement_pct[0].has_value());
}

TEST(Metrics, MismatchedSchedulesThrow) {
  const auto users = make_users(std::vector<double>{25, 31}, kParams);
  const Schedule a(Eigen::Vector2d(1, 1), Eigen::MatrixXd::Constant(2, 2, 0.5), users, kParams);
  const Schedule b(Eigen::Vector3d(1, 1, 1), Eigen::MatrixXd::Constant(2, 3, 0.5), users, kParams);
  EXPECT_THROW(improvement_metrics(a, b, users), ShapeError);
}

}  // namespace
}  // namespace ehsched
