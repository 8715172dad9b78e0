#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwmc/attributes.hpp"
#include "rwmc/chain.hpp"
#include "rwmc/estimators.hpp"
#include "rwmc/features.hpp"
#include "rwmc/graph.hpp"
#include "rwmc/mcse.hpp"
#include "rwmc/rng.hpp"
#include "rwmc/walkers.hpp"

namespace rwmc {

struct StoppingConfig {
  double eps = 0.05;
  double alpha = 0.05;
  std::size_t m_star = 10000;
  std::size_t check_interval = 1000;
  std::size_t max_steps = 10'000'000;
  BatchRule batch_rule = BatchRule::Sqrt;
  std::size_t burn_in = 0;

  void validate() const {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (check_interval == 0) throw InvalidArgument("check interval must be at least 1");
    if (max_steps < 2) throw InvalidArgument("max_steps must be at least 2");
  }
};

enum class StopReason { Satisfied, BeforeMinimum, NotYet, Indeterminate };

struct StopCheck {
  bool stop = false;
  StopReason reason = StopReason::Indeterminate;
  double volume_root = std::numeric_limits<double>::quiet_NaN();  // Vol^(1/p)
  double lambda_root = std::numeric_limits<double>::quiet_NaN();  // |Lambda|^(1/2p)

  double ratio() const { return volume_root / lambda_root; }
};

/// Relative fixed-volume rule at sample size m:
///   Vol^(1/p) + eps |Lambda|^(1/2p) I(m < m*) + 1/m <= eps |Lambda|^(1/2p).
/// Indeterminate covariances never stop the run.
inline StopCheck check_stop(std::size_t m, const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& sigma,
                            const RegionSpec& region, double eps, std::size_t m_star) {
  StopCheck out;
  const double p = static_cast<double>(region.p);
  auto log_vol = log_confidence_volume(m, sigma, region);
  auto log_lambda = log_det_spd(lambda);
  if (!log_vol || !log_lambda) {
    out.reason = StopReason::Indeterminate;
    return out;
  }
  out.volume_root = std::exp(*log_vol / p);
  out.lambda_root = std::exp(*log_lambda / (2.0 * p));
  const double below_min = m < m_star ? 1.0 : 0.0;
  const double lhs = out.volume_root + eps * out.lambda_root * below_min + 1.0 / static_cast<double>(m);
  out.stop = lhs <= eps * out.lambda_root;
  out.reason = out.stop ? StopReason::Satisfied : (m < m_star ? StopReason::BeforeMinimum : StopReason::NotYet);
  return out;
}

struct TerminationReport {
  WalkKind kind = WalkKind::SRW;
  std::uint64_t seed = 0;
  NodeId start = 0;
  std::size_t termination_step = 0;
  bool budget_terminated = false;
  std::vector<double> estimates;
  std::vector<double> std_errors;  // sqrt(diag(Sigma) / m)
  std::optional<double> ess;
  std::optional<double> ratio_stat;  // Vol^(1/p) / |Lambda|^(1/2p)
  std::size_t unique_nodes = 0;
  std::optional<double> acceptance_rate;  // MH only
  std::optional<bool> covered;
  std::size_t batches = 0;
  std::size_t batch_size = 0;
  std::size_t checkpoints = 0;
  double wallclock_seconds = 0.0;
};

/// Per-graph precomputation shared by every replication: feature rows for
/// both walk kinds.
class Sampler {
 public:
  Sampler(const Graph& g, const FeatureSpec& spec, const AttributeTable* attrs)
      : graph_(&g), spec_(spec), plain_(g, spec, attrs, FeatureTable::Form::Plain) {
    if (spec.degree_first()) star_.emplace(g, spec, attrs, FeatureTable::Form::Star);
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      if (g.degree(v) == 0 && g.num_nodes() > 1) throw InvalidArgument("graph has isolated nodes; extract the LCC first");
  }

  const Graph& graph() const noexcept { return *graph_; }
  const FeatureSpec& spec() const noexcept { return spec_; }
  std::size_t dimension() const noexcept { return spec_.size(); }

  const FeatureTable& table_for(WalkKind kind) const {
    if (kind == WalkKind::MH) return plain_;
    if (!star_) throw InvalidArgument("SRW estimation requires degree as the first feature");
    return *star_;
  }

  /// Runs one walk from a uniform random start until the stopping rule
  /// fires or max_steps samples are held. `truth`, when given, is the
  /// uniform-law mean of h used for the coverage flag. When `trace_out` is
  /// set, the visited nodes and acceptance flags are recorded.
  TerminationReport run(WalkKind kind, const StoppingConfig& cfg, std::uint64_t seed,
                        const std::optional<std::vector<double>>& truth = std::nullopt,
                        WalkTrace* trace_out = nullptr) const {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const FeatureTable& table = table_for(kind);
    const std::size_t p = dimension();
    if (truth && truth->size() != p) throw InvalidArgument("truth vector has the wrong dimension");

    Rng rng = make_rng(seed);
    TerminationReport rep;
    rep.kind = kind;
    rep.seed = seed;
    rep.start = random_start(*graph_, rng);

    WalkState state(*graph_, kind, rep.start);
    for (std::size_t b = 0; b < cfg.burn_in; ++b) state.advance(rng);
    if (cfg.burn_in > 0) state = WalkState(*graph_, kind, state.current());

    std::vector<double> chain;
    chain.reserve(std::min(cfg.max_steps, std::max<std::size_t>(cfg.m_star, 1) * 4) * p);
    RunningCovariance running(p);
    if (trace_out) {
      *trace_out = WalkTrace{};
      trace_out->kind = kind;
      trace_out->seed = seed;
      trace_out->start = state.current();
      trace_out->p = p;
    }
    auto record = [&](bool accepted) {
      auto row = table(state.current());
      chain.insert(chain.end(), row.begin(), row.end());
      running.add(row);
      if (trace_out) {
        trace_out->nodes.push_back(state.current());
        trace_out->accepted.push_back(accepted ? 1 : 0);
        trace_out->degrees.push_back(static_cast<std::uint32_t>(graph_->degree(state.current())));
      }
    };
    record(true);

    const std::size_t first_check = std::max<std::size_t>(cfg.m_star > 0 ? cfg.m_star : cfg.check_interval, 2);
    std::size_t next_check = first_check;
    while (true) {
      const std::size_t m = state.samples();
      const bool at_budget = m >= cfg.max_steps;
      if (m >= next_check || at_budget) {
        while (next_check <= m) next_check += cfg.check_interval;
        ++rep.checkpoints;
        Evaluation ev = evaluate(ChainView(chain, p), running, kind, cfg);
        if (ev.check.stop || at_budget) {
          finalize(rep, ev, state, truth, !ev.check.stop);
          break;
        }
      }
      record(state.advance(rng));
    }
    rep.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (trace_out) {
      trace_out->values = std::move(chain);
    }
    return rep;
  }

 private:
  struct Evaluation {
    std::size_t m = 0;
    std::vector<double> estimates;
    Eigen::MatrixXd lambda;
    Eigen::MatrixXd sigma;
    std::size_t batches = 0;
    std::size_t batch_size = 0;
    std::optional<RegionSpec> region;
    StopCheck check;
  };

  static Evaluation evaluate(const ChainView& chain, const RunningCovariance& running, WalkKind kind,
                             const StoppingConfig& cfg) {
    Evaluation ev;
    ev.m = chain.length();
    const std::size_t p = chain.dimension();
    auto mean = chain_mean(chain);
    auto bm = batch_means_sigma(chain, cfg.batch_rule);
    ev.batches = bm.batches;
    ev.batch_size = bm.batch_size;
    ev.lambda = running.covariance();
    ev.sigma = std::move(bm.sigma);
    if (kind == WalkKind::SRW) {
      // Certify the ratio-scale estimates: both covariances go through the
      // delta-method sandwich at the current mean of h*.
      const Eigen::MatrixXd G = delta_jacobian(mean);
      ev.sigma = delta_covariance(G, ev.sigma);
      ev.lambda = delta_covariance(G, ev.lambda);
      ev.estimates = ratio_transform(mean);
    } else {
      ev.estimates = std::move(mean);
    }
    if (bm.batches > p && bm.batches - p >= p && !bm.degenerate) {
      ev.region = RegionSpec::from_batches(cfg.alpha, p, bm.batches);
      ev.check = check_stop(ev.m, ev.lambda, ev.sigma, *ev.region, cfg.eps, cfg.m_star);
    }
    return ev;
  }

  static void finalize(TerminationReport& rep, const Evaluation& ev, const WalkState& state,
                       const std::optional<std::vector<double>>& truth, bool budget) {
    rep.termination_step = ev.m;
    rep.budget_terminated = budget;
    rep.estimates = ev.estimates;
    rep.batches = ev.batches;
    rep.batch_size = ev.batch_size;
    rep.unique_nodes = state.unique_nodes();
    if (state.kind() == WalkKind::MH) rep.acceptance_rate = state.acceptance_rate();
    rep.std_errors.resize(ev.estimates.size());
    for (std::size_t j = 0; j < rep.std_errors.size(); ++j) {
      const double v = ev.sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
      rep.std_errors[j] = v >= 0.0 ? std::sqrt(v / static_cast<double>(ev.m)) : std::numeric_limits<double>::quiet_NaN();
    }
    rep.ess = multivariate_ess(ev.m, ev.lambda, ev.sigma);
    if (ev.check.reason != StopReason::Indeterminate) rep.ratio_stat = ev.check.ratio();
    if (truth && ev.region) {
      rep.covered = region_contains(rep.estimates, ev.sigma, ev.m, *ev.region, *truth);
    }
  }

  const Graph* graph_;
  FeatureSpec spec_;
  FeatureTable plain_;
  std::optional<FeatureTable> star_;
};

/// Convenience wrapper building a Sampler for a single run.
inline TerminationReport run_until_stop(const Graph& g, WalkKind kind, const FeatureSpec& spec,
                                        const AttributeTable* attrs, const StoppingConfig& cfg, std::uint64_t seed,
                                        const std::optional<std::vector<double>>& truth = std::nullopt) {
  return Sampler(g, spec, attrs).run(kind, cfg, seed, truth);
}

}  // namespace rwmc
