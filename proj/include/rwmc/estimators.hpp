#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rwmc/chain.hpp"
#include "rwmc/error.hpp"
#include "rwmc/walkers.hpp"

namespace rwmc {

/// Plain Monte Carlo mean of h over t = 0..m-1 (the MH estimator).
inline std::vector<double> mh_mean(const ChainView& h_chain) { return chain_mean(h_chain); }

inline std::vector<double> mh_mean(const WalkTrace& trace) {
  if (trace.size() == 0) throw InvalidArgument("empty trace");
  return mh_mean(ChainView(trace.values, trace.p));
}

/// Importance-sampling ratio estimate from an SRW trace of h-values:
/// sum_t h(V_t)/d_t divided by sum_t 1/d_t.
inline std::vector<double> srw_ratio_mean(const WalkTrace& trace) {
  const std::size_t m = trace.size();
  if (m == 0) throw InvalidArgument("empty trace");
  if (trace.degrees.size() != m) throw InvalidArgument("trace is missing its degree history");
  std::vector<CompensatedSum> num(trace.p);
  CompensatedSum den;
  for (std::size_t t = 0; t < m; ++t) {
    if (trace.degrees[t] == 0) throw InvalidArgument("trace visits a node of degree 0");
    const double w = 1.0 / static_cast<double>(trace.degrees[t]);
    den.add(w);
    auto row = trace.row(t);
    for (std::size_t j = 0; j < trace.p; ++j) num[j].add(row[j] * w);
  }
  std::vector<double> out(trace.p);
  for (std::size_t j = 0; j < trace.p; ++j) out[j] = num[j].value() / den.value();
  return out;
}

/// g(a, b, c, ...) = (1/a, b/a, c/a, ...): maps the mean of h* back to the
/// uniform-law mean of h.
inline std::vector<double> ratio_transform(std::span<const double> mu_star) {
  if (mu_star.empty()) throw InvalidArgument("empty mean vector");
  const double a = mu_star[0];
  if (!(std::abs(a) > 0.0) || !std::isfinite(1.0 / a)) throw InvalidArgument("ratio transform pivot is zero");
  std::vector<double> out(mu_star.begin(), mu_star.end());
  out[0] = 1.0;
  for (auto& x : out) x /= a;
  return out;
}

/// Jacobian of ratio_transform laid out with entry (i, j) = d g_j / d mu*_i:
/// the first row is (-1/a^2, -b/a^2, -c/a^2, ...), below it 1/a on the
/// diagonal and zeros elsewhere.
inline Eigen::MatrixXd delta_jacobian(std::span<const double> mu_star) {
  if (mu_star.empty()) throw InvalidArgument("empty mean vector");
  const double a = mu_star[0];
  if (!(std::abs(a) > 0.0) || !std::isfinite(1.0 / (a * a))) throw InvalidArgument("delta-method pivot is singular");
  const auto p = static_cast<Eigen::Index>(mu_star.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, p);
  G(0, 0) = -1.0 / (a * a);
  for (Eigen::Index j = 1; j < p; ++j) {
    G(0, j) = -mu_star[static_cast<std::size_t>(j)] / (a * a);
    G(j, j) = 1.0 / a;
  }
  return G;
}

/// G^T S G, symmetrized.
inline Eigen::MatrixXd delta_covariance(const Eigen::MatrixXd& G, const Eigen::MatrixXd& S) {
  if (G.rows() != G.cols() || S.rows() != S.cols() || G.rows() != S.rows())
    throw InvalidArgument("delta_covariance dimension mismatch");
  Eigen::MatrixXd out = G.transpose() * S * G;
  return 0.5 * (out + out.transpose());
}

}  // namespace rwmc
