#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rwmc/oracle.hpp"
#include "rwmc/stopping.hpp"

using namespace rwmc;

namespace {

const Graph& er500() {
  static const Graph g = largest_connected_component(generate_er(500, 0.02, 1)).graph;
  return g;
}

Eigen::MatrixXd scalar(double x) {
  Eigen::MatrixXd m(1, 1);
  m << x;
  return m;
}

}  // namespace

TEST(CheckStop, NeverBeforeMinimum) {
  RegionSpec r{0.05, 1, 100};
  auto c = check_stop(500, scalar(1.0), scalar(1e-6), r, 0.05, 1000);
  EXPECT_FALSE(c.stop);
  EXPECT_EQ(c.reason, StopReason::BeforeMinimum);
}

TEST(CheckStop, HandEvaluatedScalar) {
  // p = 1: Vol = 2 t_{q} sqrt(Sigma / m); stop iff Vol + 1/m <= eps sqrt(Lambda).
  RegionSpec r{0.05, 1, 100};
  const std::size_t m = 100000;
  auto ok = check_stop(m, scalar(1.0), scalar(1.0), r, 0.05, 10000);
  const double vol = 2.0 * std::sqrt(r.t2_quantile() / static_cast<double>(m));
  EXPECT_NEAR(ok.volume_root, vol, 1e-12);
  EXPECT_NEAR(ok.lambda_root, 1.0, 1e-12);
  EXPECT_TRUE(ok.stop);
  EXPECT_EQ(ok.reason, StopReason::Satisfied);
  EXPECT_NEAR(ok.ratio(), vol, 1e-12);

  auto no = check_stop(m, scalar(1.0), scalar(1e6), r, 0.05, 10000);
  EXPECT_FALSE(no.stop);
  EXPECT_EQ(no.reason, StopReason::NotYet);
}

TEST(CheckStop, SingularCovarianceIsIndeterminate) {
  RegionSpec r{0.05, 2, 100};
  auto c = check_stop(50000, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2), r, 0.05, 100);
  EXPECT_FALSE(c.stop);
  EXPECT_EQ(c.reason, StopReason::Indeterminate);
}

TEST(StoppingConfig, Validation) {
  StoppingConfig c;
  EXPECT_NO_THROW(c.validate());
  c.eps = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = StoppingConfig{};
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = StoppingConfig{};
  c.check_interval = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Sampler, RejectsIsolatedNodesAndMissingDegree) {
  auto g = Graph::from_edges(3, {{0, 1}});
  EXPECT_THROW(Sampler(g, parse_feature_spec("degree"), nullptr), InvalidArgument);
  Sampler s(er500(), parse_feature_spec("cc,degree"), nullptr);
  EXPECT_THROW(s.run(WalkKind::SRW, StoppingConfig{}, 1), InvalidArgument);
}

TEST(RunUntilStop, SrwCertifiesEssAndVolume) {
  auto spec = parse_feature_spec("degree,cc");
  StoppingConfig cfg;
  auto rep = run_until_stop(er500(), WalkKind::SRW, spec, nullptr, cfg, 1);
  EXPECT_FALSE(rep.budget_terminated);
  EXPECT_GE(rep.termination_step, cfg.m_star);
  ASSERT_TRUE(rep.ess.has_value());
  EXPECT_GE(*rep.ess, 7153.0);
  ASSERT_TRUE(rep.ratio_stat.has_value());
  EXPECT_LE(*rep.ratio_stat, cfg.eps);
  EXPECT_FALSE(rep.acceptance_rate.has_value());
  EXPECT_EQ(rep.estimates.size(), 2u);
  EXPECT_GT(rep.unique_nodes, 1u);
  EXPECT_LE(rep.unique_nodes, er500().num_nodes());
}

TEST(RunUntilStop, MhReportsAcceptance) {
  auto rep = run_until_stop(er500(), WalkKind::MH, parse_feature_spec("degree,cc"), nullptr, StoppingConfig{}, 2);
  ASSERT_TRUE(rep.acceptance_rate.has_value());
  EXPECT_GT(*rep.acceptance_rate, 0.0);
  EXPECT_LT(*rep.acceptance_rate, 1.0);
  EXPECT_LE(*rep.ratio_stat, 0.05);
}

TEST(RunUntilStop, Deterministic) {
  auto spec = parse_feature_spec("degree,cc");
  for (WalkKind kind : {WalkKind::SRW, WalkKind::MH}) {
    auto a = run_until_stop(er500(), kind, spec, nullptr, StoppingConfig{}, 42);
    auto b = run_until_stop(er500(), kind, spec, nullptr, StoppingConfig{}, 42);
    EXPECT_EQ(a.termination_step, b.termination_step);
    EXPECT_EQ(a.estimates, b.estimates);
    EXPECT_EQ(a.start, b.start);
    EXPECT_EQ(a.unique_nodes, b.unique_nodes);
  }
}

TEST(RunUntilStop, TighterToleranceRunsLonger) {
  auto spec = parse_feature_spec("degree,cc");
  Sampler sampler(er500(), spec, nullptr);
  StoppingConfig loose, tight;
  tight.eps = 0.025;
  double sum_loose = 0.0, sum_tight = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sum_loose += static_cast<double>(sampler.run(WalkKind::SRW, loose, seed).termination_step);
    sum_tight += static_cast<double>(sampler.run(WalkKind::SRW, tight, seed).termination_step);
  }
  EXPECT_GT(sum_tight, sum_loose);
}

TEST(RunUntilStop, BudgetTermination) {
  StoppingConfig cfg;
  cfg.max_steps = 5000;
  auto rep = run_until_stop(er500(), WalkKind::SRW, parse_feature_spec("degree,cc"), nullptr, cfg, 3);
  EXPECT_TRUE(rep.budget_terminated);
  EXPECT_EQ(rep.termination_step, 5000u);
  EXPECT_EQ(rep.estimates.size(), 2u);
}

TEST(RunUntilStop, CoverageFlagAndTrace) {
  auto spec = parse_feature_spec("degree,cc");
  auto truth = exact_means(er500(), spec, nullptr);
  Sampler sampler(er500(), spec, nullptr);
  WalkTrace trace;
  auto rep = sampler.run(WalkKind::MH, StoppingConfig{}, 9, truth, &trace);
  EXPECT_TRUE(rep.covered.has_value());
  EXPECT_EQ(trace.size(), rep.termination_step);
  EXPECT_EQ(trace.nodes.front(), rep.start);
  // The reported MH estimate is the mean of the recorded rows.
  auto mean = mh_mean(trace);
  for (std::size_t j = 0; j < mean.size(); ++j) EXPECT_NEAR(mean[j], rep.estimates[j], 1e-12);
}
