#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "rwmc/mcse.hpp"
#include "rwmc/oracle.hpp"

using namespace rwmc;

namespace {

std::vector<double> iid_normal(std::size_t m, std::size_t p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> out(m * p);
  for (auto& x : out) x = z(rng);
  return out;
}

Eigen::MatrixXd random_spd(std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd A(p, p);
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i / A.cols(), i % A.cols()) = z(rng);
  return A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST(SampleCovariance, SmallCases) {
  std::vector<double> constant(20, 3.5);
  EXPECT_TRUE(sample_covariance(ChainView(constant, 2)).isZero(0.0));
  std::vector<double> two{0.0, 2.0};
  EXPECT_DOUBLE_EQ(sample_covariance(ChainView(two, 1))(0, 0), 2.0);
  std::vector<double> one{1.0};
  EXPECT_THROW(sample_covariance(ChainView(one, 1)), InvalidArgument);
}

TEST(SampleCovariance, IidNormalNearIdentity) {
  auto x = iid_normal(1000000, 2, 9);
  auto S = sample_covariance(ChainView(x, 2));
  EXPECT_NEAR(S(0, 0), 1.0, 0.01);
  EXPECT_NEAR(S(1, 1), 1.0, 0.01);
  EXPECT_NEAR(S(0, 1), 0.0, 0.01);
  EXPECT_DOUBLE_EQ(S(0, 1), S(1, 0));
}

TEST(RunningCovariance, MatchesTwoPass) {
  auto x = iid_normal(5000, 3, 10);
  for (auto& v : x) v = 100.0 + 3.0 * v;
  RunningCovariance rc(3);
  for (std::size_t t = 0; t < 5000; ++t) rc.add(std::span<const double>(x).subspan(t * 3, 3));
  auto S = sample_covariance(ChainView(x, 3));
  EXPECT_TRUE(rc.covariance().isApprox(S, 1e-10));
}

TEST(BatchSize, IntegerRoots) {
  EXPECT_EQ(batch_size_for(16, BatchRule::Sqrt), 4u);
  EXPECT_EQ(batch_size_for(15, BatchRule::Sqrt), 3u);
  EXPECT_EQ(batch_size_for(1000000, BatchRule::Sqrt), 1000u);
  EXPECT_EQ(batch_size_for(999999, BatchRule::Sqrt), 999u);
  EXPECT_EQ(batch_size_for(27, BatchRule::CubeRoot), 3u);
  EXPECT_EQ(batch_size_for(26, BatchRule::CubeRoot), 2u);
  EXPECT_EQ(batch_size_for(1000000, BatchRule::CubeRoot), 100u);
}

TEST(BatchMeans, ConstantChainIsZeroAndFlagged) {
  std::vector<double> constant(400, 1.0);
  auto est = batch_means_covariance(ChainView(constant, 1));
  EXPECT_TRUE(est.sigma.isZero(0.0));
  EXPECT_TRUE(est.degenerate);
}

TEST(BatchMeans, HandComputedScalar) {
  // Four batches of four with means 0, 0, 4, 4: Sigma = 4/3 * 4 * 2^2 = 64/3.
  std::vector<double> x;
  for (double mean : {0.0, 0.0, 4.0, 4.0})
    for (double d : {-1.0, 1.0, -2.0, 2.0}) x.push_back(mean + d);
  auto est = batch_means_covariance(ChainView(x, 1));
  EXPECT_EQ(est.batch_size, 4u);
  EXPECT_EQ(est.batches, 4u);
  EXPECT_EQ(est.used, 16u);
  EXPECT_NEAR(est.sigma(0, 0), 64.0 / 3.0, 1e-12);
  EXPECT_FALSE(est.insufficient_batches);
}

TEST(BatchMeans, RemainderDropsTrailingRows) {
  // m = 18: b = 4, a = 4, the last two observations are ignored.
  std::vector<double> x;
  for (double mean : {0.0, 0.0, 4.0, 4.0})
    for (int i = 0; i < 4; ++i) x.push_back(mean);
  x.push_back(1000.0);
  x.push_back(-1000.0);
  auto est = batch_means_covariance(ChainView(x, 1));
  EXPECT_EQ(est.used, 16u);
  EXPECT_NEAR(est.sigma(0, 0), 64.0 / 3.0, 1e-12);
}

TEST(BatchMeans, InsufficientBatchesFlagged) {
  auto x = iid_normal(16, 5, 3);  // a = 4 <= p = 5
  auto est = batch_means_covariance(ChainView(x, 5));
  EXPECT_TRUE(est.insufficient_batches);
}

TEST(BatchMeans, SymmetricAndPsd) {
  auto x = iid_normal(20000, 4, 12);
  auto est = batch_means_covariance(ChainView(x, 4));
  EXPECT_TRUE(est.sigma.isApprox(est.sigma.transpose(), 1e-12));
  EXPECT_TRUE(est.lambda.isApprox(est.lambda.transpose(), 1e-12));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.lambda);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
}

TEST(BatchMeans, Ar1LongRunVariance) {
  // rho = 0.5: sigma^2_inf = 1 / (1 - rho)^2 = 4.
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto chain = ar1_chain(0.5, 1000000, seed);
    total += batch_means_sigma(ChainView(chain.values, 1), BatchRule::Sqrt).sigma(0, 0);
  }
  EXPECT_NEAR(total / 20.0, 4.0, 0.4);
}

TEST(MultivariateEss, NamedCases) {
  auto S = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  EXPECT_NEAR(*multivariate_ess(500, S, S), 500.0, 1e-9);
  Eigen::MatrixXd L1(1, 1), S1(1, 1);
  L1 << 1;
  S1 << 4;
  EXPECT_NEAR(*multivariate_ess(1000, L1, S1), 250.0, 1e-9);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_FALSE(multivariate_ess(100, Eigen::MatrixXd::Identity(2, 2), singular).has_value());
}

TEST(MultivariateEss, InvariantUnderLinearReparameterization) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 100; ++rep) {
    auto L = random_spd(4, rng);
    auto S = random_spd(4, rng);
    Eigen::MatrixXd G(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) G(i / 4, i % 4) = z(rng);
    const double base = *multivariate_ess(12345, L, S);
    const double moved = *multivariate_ess(12345, G.transpose() * L * G, G.transpose() * S * G);
    EXPECT_NEAR(moved, base, 1e-8 * base);
  }
}

TEST(MultivariateEss, IidChainNearM) {
  double ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto x = iid_normal(100000, 3, 500 + seed);
    auto est = batch_means_covariance(ChainView(x, 3));
    ratio += *multivariate_ess(100000, est.lambda, est.sigma) / 100000.0;
  }
  ratio /= 20.0;
  EXPECT_GT(ratio, 0.8);
  EXPECT_LT(ratio, 1.2);
}

TEST(MinEss, FormulaValues) {
  EXPECT_EQ(min_ess(2, 0.05, 0.05), 7530u);
  EXPECT_EQ(min_ess(1, 0.05, 0.05), 6147u);
  // Direct evaluation; differs from the 9992 and 10363 printed in some
  // published tables for p = 4 and p = 5.
  EXPECT_EQ(min_ess(4, 0.05, 0.05), 8431u);
  EXPECT_EQ(min_ess(5, 0.05, 0.05), 8605u);
  EXPECT_EQ(min_ess(2, 0.05, 0.025), 30117u);
  EXPECT_NEAR(min_ess_bound(2, 0.05, 0.05), std::numbers::pi * -2.0 * std::log(0.05) / 0.0025, 1e-8);
}

TEST(MinEss, EpsilonScaling) {
  for (std::size_t p = 1; p <= 6; ++p) {
    const double a = min_ess_bound(p, 0.05, 0.05);
    const double b = min_ess_bound(p, 0.05, 0.025);
    EXPECT_NEAR(b, 4.0 * a, 1e-9 * a);
  }
}

TEST(MinEss, Monotonicity) {
  for (std::size_t p = 1; p < 10; ++p) EXPECT_LE(min_ess(p, 0.05, 0.05), min_ess(p + 1, 0.05, 0.05));
  std::uint64_t prev = min_ess(3, 0.05, 0.01);
  for (double eps : {0.02, 0.03, 0.05, 0.1, 0.2}) {
    auto cur = min_ess(3, 0.05, eps);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  EXPECT_THROW(min_ess(0, 0.05, 0.05), InvalidArgument);
  EXPECT_THROW(min_ess(2, 0.05, 0.0), InvalidArgument);
}

TEST(ConfidenceVolume, UnivariateIsIntervalLength) {
  Eigen::MatrixXd S(1, 1);
  S << 2.5;
  RegionSpec r{0.05, 1, 50};
  boost::math::students_t t(50.0);
  const double tq = boost::math::quantile(t, 0.975);
  const double expected = 2.0 * tq * std::sqrt(2.5) / std::sqrt(400.0);
  EXPECT_NEAR(*confidence_volume(400, S, r), expected, 1e-9);
}

TEST(ConfidenceVolume, Scaling) {
  std::mt19937_64 rng(5);
  auto S = random_spd(3, rng);
  RegionSpec r{0.05, 3, 40};
  const double v = *confidence_volume(1000, S, r);
  EXPECT_NEAR(*confidence_volume(1000, 2.0 * S, r), v * std::pow(2.0, 1.5), 1e-10 * v);
  EXPECT_NEAR(*confidence_volume(4000, S, r), v * std::pow(2.0, -3.0), 1e-10 * v);
  EXPECT_FALSE(confidence_volume(1000, Eigen::MatrixXd::Zero(3, 3), r).has_value());
}

TEST(ConfidenceVolume, MatchesUnitBallFormula) {
  // p = 2: area pi * (T^2 / m) * sqrt(|Sigma|).
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.3, 0.3, 1.0;
  RegionSpec r{0.05, 2, 30};
  const double t2 = r.t2_quantile();
  EXPECT_NEAR(*confidence_volume(500, S, r), std::numbers::pi * t2 / 500.0 * std::sqrt(S.determinant()), 1e-12);
}

TEST(RegionContains, NamedCases) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2, 2);
  RegionSpec r{0.05, 2, 30};
  std::vector<double> mu{1.0, 2.0};
  EXPECT_TRUE(*region_contains(mu, S, 100, r, mu));
  Eigen::MatrixXd S1(1, 1);
  S1 << 1.0;
  RegionSpec r1{0.05, 1, 30};
  std::vector<double> a{1.0}, b{0.0};
  EXPECT_NEAR(*region_statistic(a, S1, 100, b), 100.0, 1e-12);
  EXPECT_FALSE(*region_contains(a, S1, 100, r1, b));
  EXPECT_FALSE(region_contains(mu, Eigen::MatrixXd::Zero(2, 2), 100, r, mu).has_value());
}

TEST(RegionContains, IidCoverageNearNominal) {
  const std::size_t m = 10000, p = 2;
  int covered = 0;
  const int reps = 1000;
  std::vector<double> zero(p, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    auto x = iid_normal(m, p, 9000 + rep);
    ChainView chain(x, p);
    auto bm = batch_means_sigma(chain, BatchRule::Sqrt);
    auto region = RegionSpec::from_batches(0.05, p, bm.batches);
    covered += *region_contains(chain_mean(chain), bm.sigma, m, region, zero);
  }
  const double rate = static_cast<double>(covered) / reps;
  EXPECT_GE(rate, 0.93);
  EXPECT_LE(rate, 0.97);
}
