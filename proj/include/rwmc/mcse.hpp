#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rwmc/chain.hpp"
#include "rwmc/error.hpp"
#include "rwmc/quantiles.hpp"

// Multivariate Monte Carlo standard errors: sample covariance, batch-means
// long-run covariance, effective sample size, the minimum-ESS bound and the
// confidence ellipsoid (volume and membership).
namespace rwmc {

enum class BatchRule { Sqrt, CubeRoot };

inline BatchRule parse_batch_rule(std::string_view s) {
  if (s == "sqrt") return BatchRule::Sqrt;
  if (s == "cuberoot" || s == "cbrt") return BatchRule::CubeRoot;
  throw InvalidArgument("unknown batch rule '" + std::string(s) + "'");
}

inline std::string to_string(BatchRule r) { return r == BatchRule::Sqrt ? "sqrt" : "cuberoot"; }

/// floor(m^(1/2)) or floor(m^(1/3)), exact in integer arithmetic.
inline std::size_t batch_size_for(std::size_t m, BatchRule rule) {
  if (m == 0) return 0;
  const double root = rule == BatchRule::Sqrt ? std::sqrt(static_cast<double>(m)) : std::cbrt(static_cast<double>(m));
  auto b = static_cast<std::size_t>(root);
  auto pow = [rule](std::size_t x) { return rule == BatchRule::Sqrt ? x * x : x * x * x; };
  while (b > 0 && pow(b) > m) --b;
  while (pow(b + 1) <= m) ++b;
  return std::max<std::size_t>(b, 1);
}

/// Unbiased (divisor m - 1) sample covariance of the chain rows.
inline Eigen::MatrixXd sample_covariance(const ChainView& chain) {
  const std::size_t m = chain.length();
  const std::size_t p = chain.dimension();
  if (m < 2) throw InvalidArgument("sample covariance needs at least two observations");
  auto mean = chain_mean(chain);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd d(static_cast<Eigen::Index>(p));
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t j = 0; j < p; ++j) d(static_cast<Eigen::Index>(j)) = chain(t, j) - mean[j];
    S.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  S = S.selfadjointView<Eigen::Lower>();
  return S / static_cast<double>(m - 1);
}

struct BatchMeans {
  Eigen::MatrixXd sigma;
  std::size_t batches = 0;     // a_m
  std::size_t batch_size = 0;  // b_m
  std::size_t used = 0;        // a_m * b_m
  bool insufficient_batches = false;  // a_m <= p
  bool degenerate = false;            // all batch means equal
};

/// Batch-means estimate of the long-run covariance. b_m follows the batch
/// rule, a_m = floor(m / b_m); the first a_m * b_m rows are used and the
/// remainder dropped.
inline BatchMeans batch_means_sigma(const ChainView& chain, BatchRule rule) {
  const std::size_t m = chain.length();
  const std::size_t p = chain.dimension();
  const auto pi = static_cast<Eigen::Index>(p);
  BatchMeans out;
  out.batch_size = batch_size_for(m, rule);
  out.batches = out.batch_size == 0 ? 0 : m / out.batch_size;
  out.used = out.batches * out.batch_size;
  out.insufficient_batches = out.batches <= p;
  out.sigma = Eigen::MatrixXd::Zero(pi, pi);
  if (out.batches < 2) {
    out.degenerate = true;
    return out;
  }

  Eigen::MatrixXd means(static_cast<Eigen::Index>(out.batches), pi);
  std::vector<CompensatedSum> acc(p);
  for (std::size_t k = 0; k < out.batches; ++k) {
    std::fill(acc.begin(), acc.end(), CompensatedSum{});
    for (std::size_t t = k * out.batch_size; t < (k + 1) * out.batch_size; ++t)
      for (std::size_t j = 0; j < p; ++j) acc[j].add(chain(t, j));
    for (std::size_t j = 0; j < p; ++j)
      means(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          acc[j].value() / static_cast<double>(out.batch_size);
  }
  // The overall mean of the used prefix is the mean of the batch means.
  Eigen::RowVectorXd mu = means.colwise().mean();
  Eigen::MatrixXd centered = means.rowwise() - mu;
  out.sigma = static_cast<double>(out.batch_size) / static_cast<double>(out.batches - 1) *
              (centered.transpose() * centered);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.degenerate = centered.isZero(0.0);
  return out;
}

struct CovarianceEstimates {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd sigma;
  std::size_t batches = 0;
  std::size_t batch_size = 0;
  std::size_t used = 0;
  bool insufficient_batches = false;
  bool degenerate = false;
};

inline CovarianceEstimates batch_means_covariance(const ChainView& chain, BatchRule rule = BatchRule::Sqrt) {
  auto bm = batch_means_sigma(chain, rule);
  return {sample_covariance(chain), std::move(bm.sigma), bm.batches, bm.batch_size, bm.used,
          bm.insufficient_batches, bm.degenerate};
}

/// log |M| for a symmetric positive-definite M; nullopt when the Cholesky
/// factorization fails or a pivot is not strictly positive.
inline std::optional<double> log_det_spd(const Eigen::MatrixXd& M) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return std::nullopt;
  double sum = 0.0;
  const auto& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double d = L(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    sum += std::log(d);
  }
  return 2.0 * sum;
}

/// m (|Lambda| / |Sigma|)^(1/p). nullopt when either determinant is not
/// positive, which callers treat as "keep sampling".
inline std::optional<double> multivariate_ess(std::size_t m, const Eigen::MatrixXd& lambda,
                                              const Eigen::MatrixXd& sigma) {
  if (lambda.rows() != sigma.rows() || lambda.rows() == 0) throw InvalidArgument("ESS dimension mismatch");
  auto ll = log_det_spd(lambda);
  auto ls = log_det_spd(sigma);
  if (!ll || !ls) return std::nullopt;
  const double p = static_cast<double>(lambda.rows());
  return static_cast<double>(m) * std::exp((*ll - *ls) / p);
}

/// Right-hand side of the minimum-ESS inequality before rounding:
/// 2^(2/p) pi / (p Gamma(p/2))^(2/p) * chi2_{1-alpha, p} / eps^2.
inline double min_ess_bound(std::size_t p, double alpha, double eps) {
  if (p == 0) throw InvalidArgument("dimension must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const double pd = static_cast<double>(p);
  const double log_pref =
      (2.0 / pd) * std::log(2.0) + std::log(std::numbers::pi) - (2.0 / pd) * (std::log(pd) + std::lgamma(pd / 2.0));
  return std::exp(log_pref) * chi2_quantile(1.0 - alpha, pd) / (eps * eps);
}

inline std::uint64_t min_ess(std::size_t p, double alpha, double eps) {
  return static_cast<std::uint64_t>(std::ceil(min_ess_bound(p, alpha, eps)));
}

/// Confidence level 1 - alpha for a p-dimensional region with q = a_m - p.
struct RegionSpec {
  double alpha = 0.05;
  std::size_t p = 1;
  std::size_t q = 1;

  static RegionSpec from_batches(double alpha, std::size_t p, std::size_t batches) {
    if (batches <= p) throw InvalidArgument("insufficient batches for region: need a_m > p");
    return {alpha, p, batches - p};
  }

  double t2_quantile() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    return hotelling_t2_quantile(1.0 - alpha, p, q);
  }
};

/// log volume of {mu : m (mu_hat - mu)' Sigma^-1 (mu_hat - mu) < T^2}:
/// 2 pi^(p/2) / (p Gamma(p/2)) (T^2 / m)^(p/2) |Sigma|^(1/2).
inline std::optional<double> log_confidence_volume(std::size_t m, const Eigen::MatrixXd& sigma,
                                                   const RegionSpec& region) {
  if (static_cast<std::size_t>(sigma.rows()) != region.p) throw InvalidArgument("region dimension mismatch");
  auto ld = log_det_spd(sigma);
  if (!ld) return std::nullopt;
  const double p = static_cast<double>(region.p);
  const double log_unit_ball = std::log(2.0) + 0.5 * p * std::log(std::numbers::pi) - std::log(p) - std::lgamma(p / 2.0);
  return log_unit_ball + 0.5 * p * (std::log(region.t2_quantile()) - std::log(static_cast<double>(m))) + 0.5 * *ld;
}

inline std::optional<double> confidence_volume(std::size_t m, const Eigen::MatrixXd& sigma, const RegionSpec& region) {
  auto lv = log_confidence_volume(m, sigma, region);
  if (!lv) return std::nullopt;
  return std::exp(*lv);
}

/// m (mu_hat - mu0)' Sigma^-1 (mu_hat - mu0) via a Cholesky solve.
inline std::optional<double> region_statistic(std::span<const double> mu_hat, const Eigen::MatrixXd& sigma,
                                              std::size_t m, std::span<const double> mu0) {
  const auto p = sigma.rows();
  if (static_cast<Eigen::Index>(mu_hat.size()) != p || static_cast<Eigen::Index>(mu0.size()) != p)
    throw InvalidArgument("region dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd d(p);
  for (Eigen::Index j = 0; j < p; ++j)
    d(j) = mu_hat[static_cast<std::size_t>(j)] - mu0[static_cast<std::size_t>(j)];
  Eigen::VectorXd y = llt.matrixL().solve(d);
  return static_cast<double>(m) * y.squaredNorm();
}

/// True iff mu0 lies strictly inside the region; nullopt for singular Sigma.
inline std::optional<bool> region_contains(std::span<const double> mu_hat, const Eigen::MatrixXd& sigma, std::size_t m,
                                           const RegionSpec& region, std::span<const double> mu0) {
  auto stat = region_statistic(mu_hat, sigma, m, mu0);
  if (!stat) return std::nullopt;
  return *stat < region.t2_quantile();
}

/// Streaming mean and covariance (Welford update of the centered
/// cross-product matrix). Matches sample_covariance of the same rows.
class RunningCovariance {
 public:
  explicit RunningCovariance(std::size_t p)
      : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p))),
        m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))),
        delta_(static_cast<Eigen::Index>(p)) {}

  void add(std::span<const double> x) {
    ++count_;
    const double n = static_cast<double>(count_);
    for (Eigen::Index j = 0; j < mean_.size(); ++j) delta_(j) = x[static_cast<std::size_t>(j)] - mean_(j);
    mean_ += delta_ / n;
    // (x - old_mean)(x - new_mean)' = (n - 1)/n * delta delta'
    m2_.selfadjointView<Eigen::Lower>().rankUpdate(delta_, (n - 1.0) / n);
  }

  std::size_t count() const noexcept { return count_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }

  Eigen::MatrixXd covariance() const {
    if (count_ < 2) throw InvalidArgument("sample covariance needs at least two observations");
    Eigen::MatrixXd S = m2_.selfadjointView<Eigen::Lower>();
    return S / static_cast<double>(count_ - 1);
  }

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  Eigen::VectorXd delta_;
};

}  // namespace rwmc
