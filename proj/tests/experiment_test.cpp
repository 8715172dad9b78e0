#include <sstream>

#include <gtest/gtest.h>

#include "rwmc/experiment.hpp"
#include "rwmc/oracle.hpp"

using namespace rwmc;

namespace {

const Graph& er300() {
  static const Graph g = largest_connected_component(generate_er(300, 0.03, 4)).graph;
  return g;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.replications = 3;
  plan.base_seed = 10;
  plan.stopping.m_star = 2000;
  plan.stopping.check_interval = 500;
  return plan;
}

}  // namespace

TEST(RunExperiment, OrderingSeedsAndThreadIndependence) {
  Sampler sampler(er300(), parse_feature_spec("degree,cc"), nullptr);
  auto plan = small_plan();
  auto serial = run_experiment(sampler, plan);
  plan.threads = 4;
  auto threaded = run_experiment(sampler, plan);
  ASSERT_EQ(serial.size(), 6u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].kind, i < 3 ? WalkKind::SRW : WalkKind::MH);
    EXPECT_EQ(serial[i].replication, i % 3);
    EXPECT_EQ(serial[i].seed, 10 + i % 3);
    ASSERT_TRUE(serial[i].report && threaded[i].report);
    EXPECT_EQ(serial[i].report->estimates, threaded[i].report->estimates);
    EXPECT_EQ(serial[i].report->termination_step, threaded[i].report->termination_step);
  }
  // A replication equals a standalone run with the same seed.
  auto single = sampler.run(WalkKind::MH, plan.stopping, 11);
  EXPECT_EQ(single.estimates, serial[4].report->estimates);
}

TEST(RunExperiment, FailuresAreRecordedNotThrown) {
  Sampler sampler(er300(), parse_feature_spec("degree,cc"), nullptr);
  auto plan = small_plan();
  plan.truth = std::vector<double>{1.0};  // wrong dimension
  auto results = run_experiment(sampler, plan);
  for (const auto& r : results) {
    EXPECT_FALSE(r.report.has_value());
    EXPECT_FALSE(r.error.empty());
  }
  auto s = summarize(results, 2);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].failed, 3u);
  EXPECT_EQ(s[0].succeeded, 0u);
}

TEST(ReplicationsCsv, SchemaAndRows) {
  Sampler sampler(er300(), parse_feature_spec("degree,cc"), nullptr);
  auto plan = small_plan();
  plan.stopping.max_steps = 1000;
  auto results = run_experiment(sampler, plan);
  std::ostringstream out;
  write_replications_csv(out, results, 2, false);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "replication,kind,seed,termination_step,budget_flag,ess,ratio_stat,unique_nodes,acceptance_rate,covered,"
            "est_1,est_2,se_1,se_2,wallclock_s");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    auto cells = split_csv(line);
    ASSERT_EQ(cells.size(), 15u) << line;
    EXPECT_EQ(cells[3], "1000");
    EXPECT_EQ(cells[4], "1");
    EXPECT_EQ(cells[8] == "NA", cells[1] == "srw");
    EXPECT_EQ(cells[14], "0");
    ++rows;
  }
  EXPECT_EQ(rows, 6u);

  auto failed = split_csv(report_csv_row(0, WalkKind::MH, 5, std::nullopt, 2));
  ASSERT_EQ(failed.size(), 15u);
  EXPECT_EQ(failed[4], "error");
}

TEST(MeanSe, HandComputed) {
  auto v = MeanSe::of({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(v.mean, 2.5);
  EXPECT_NEAR(v.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(v.n, 4u);
  auto one = MeanSe::of({7.0});
  EXPECT_DOUBLE_EQ(one.mean, 7.0);
  EXPECT_FALSE(std::isfinite(one.se));
}

TEST(Summary, CountsAndCsv) {
  Sampler sampler(er300(), parse_feature_spec("degree,cc"), nullptr);
  auto plan = small_plan();
  plan.truth = exact_means(er300(), sampler.spec(), nullptr);
  auto results = run_experiment(sampler, plan);
  auto s = summarize(results, 2);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].replications, 3u);
  EXPECT_EQ(s[1].acceptance_rate.n, 3u);
  EXPECT_EQ(s[0].acceptance_rate.n, 0u);
  double sum = 0.0;
  for (std::size_t r = 0; r < 3; ++r) sum += results[r].report->estimates[0];
  EXPECT_NEAR(s[0].estimates[0].mean, sum / 3.0, 1e-12);

  std::ostringstream csv;
  write_summary_csv(csv, s, sampler.spec().names());
  EXPECT_NE(csv.str().find("srw,est:degree,"), std::string::npos);
  EXPECT_NE(csv.str().find("mh,budget_terminated,0,NA,3"), std::string::npos);

  std::ostringstream text;
  write_summary_text(text, s, sampler.spec().names(), plan.truth);
  EXPECT_NE(text.str().find("Truth"), std::string::npos);

  std::ostringstream hist;
  write_histogram_csv(hist, results, sampler.spec().names(), 5);
  EXPECT_EQ(hist.str().rfind("kind,feature,bin,lower,upper,count", 0), 0u);
}
