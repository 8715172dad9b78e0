#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rwmc/attributes.hpp"
#include "rwmc/chain.hpp"
#include "rwmc/features.hpp"
#include "rwmc/graph.hpp"
#include "rwmc/rng.hpp"

// Exact references computed by enumeration or in closed form. These back
// the `stats` command and every statistical test.
namespace rwmc {

/// (1/n) sum_v h(v) by literal enumeration over the node set.
inline std::vector<double> exact_means(const Graph& g, const FeatureSpec& spec, const AttributeTable* attrs) {
  spec.validate(attrs);
  std::vector<CompensatedSum> acc(spec.size());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto h = evaluate_h(spec, node_stats(g, v), attrs, v);
    for (std::size_t j = 0; j < h.size(); ++j) acc[j].add(h[j]);
  }
  std::vector<double> out(spec.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = acc[j].value() / static_cast<double>(g.num_nodes());
  return out;
}

/// SRW stationary law d_i / 2 n_e.
inline std::vector<double> srw_stationary(const Graph& g) {
  if (g.num_edges() == 0) throw InvalidArgument("stationary law undefined on an edgeless graph");
  std::vector<double> out(g.num_nodes());
  const double total = 2.0 * static_cast<double>(g.num_edges());
  for (NodeId v = 0; v < g.num_nodes(); ++v) out[v] = static_cast<double>(g.degree(v)) / total;
  return out;
}

struct Ar1Chain {
  std::vector<double> values;
  double long_run_variance = 0.0;  // 1 / (1 - rho)^2
};

/// x_t = rho x_{t-1} + e_t with standard-normal innovations, x_0 drawn from
/// the stationary N(0, 1 / (1 - rho^2)).
inline Ar1Chain ar1_chain(double rho, std::size_t m, std::uint64_t seed) {
  if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("AR(1) coefficient must lie in (-1, 1)");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Ar1Chain out;
  out.values.resize(m);
  double x = noise(rng) / std::sqrt(1.0 - rho * rho);
  for (std::size_t t = 0; t < m; ++t) {
    if (t > 0) x = rho * x + noise(rng);
    out.values[t] = x;
  }
  out.long_run_variance = 1.0 / ((1.0 - rho) * (1.0 - rho));
  return out;
}

}  // namespace rwmc
