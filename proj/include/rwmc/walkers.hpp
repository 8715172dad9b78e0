#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rwmc/error.hpp"
#include "rwmc/graph.hpp"
#include "rwmc/rng.hpp"

namespace rwmc {

enum class WalkKind { SRW, MH };

inline std::string to_string(WalkKind k) { return k == WalkKind::SRW ? "srw" : "mh"; }

inline WalkKind parse_walk_kind(std::string_view s) {
  if (s == "srw" || s == "SRW") return WalkKind::SRW;
  if (s == "mh" || s == "MH") return WalkKind::MH;
  throw InvalidArgument("unknown walk kind '" + std::string(s) + "'");
}

inline NodeId random_start(const Graph& g, Rng& rng) {
  return uniform_index<NodeId>(rng, static_cast<NodeId>(g.num_nodes()));
}

/// One simple-random-walk transition: a uniformly chosen neighbor.
inline NodeId srw_step(const Graph& g, NodeId i, Rng& rng) {
  auto nb = g.neighbors(i);
  if (nb.empty()) throw InvalidArgument("random walk reached isolated node " + std::to_string(i));
  return nb[uniform_index<std::size_t>(rng, nb.size())];
}

struct MhMove {
  NodeId node;
  bool accepted;
};

/// One Metropolis–Hastings transition targeting the uniform law: propose a
/// uniform neighbor j and accept with probability min(1, d_i / d_j).
inline MhMove mh_step(const Graph& g, NodeId i, Rng& rng) {
  auto nb = g.neighbors(i);
  if (nb.empty()) throw InvalidArgument("random walk reached isolated node " + std::to_string(i));
  NodeId j = nb[uniform_index<std::size_t>(rng, nb.size())];
  const std::size_t di = nb.size();
  const std::size_t dj = g.degree(j);
  // Always draw the uniform so the stream consumption does not depend on the
  // degree comparison.
  const double u = uniform01(rng);
  if (dj <= di || u * static_cast<double>(dj) < static_cast<double>(di)) return {j, true};
  return {i, false};
}

/// Walker position plus bookkeeping: step count, MH acceptances and the set
/// of distinct nodes visited (an exact bitset over the known node range).
class WalkState {
 public:
  WalkState(const Graph& g, WalkKind kind, NodeId start)
      : graph_(&g), kind_(kind), current_(start), visited_(g.num_nodes(), false) {
    if (start >= g.num_nodes()) throw InvalidArgument("start node out of range");
    visit(start);
  }

  /// Moves one transition; returns whether an MH proposal was accepted
  /// (always true for SRW).
  bool advance(Rng& rng) {
    bool accepted = true;
    if (kind_ == WalkKind::SRW) {
      current_ = srw_step(*graph_, current_, rng);
    } else {
      auto mv = mh_step(*graph_, current_, rng);
      current_ = mv.node;
      accepted = mv.accepted;
      if (accepted) ++accepted_;
    }
    ++transitions_;
    visit(current_);
    return accepted;
  }

  WalkKind kind() const noexcept { return kind_; }
  NodeId current() const noexcept { return current_; }
  /// Number of states held so far (start included), i.e. transitions + 1.
  std::size_t samples() const noexcept { return transitions_ + 1; }
  std::size_t transitions() const noexcept { return transitions_; }
  std::size_t accepted() const noexcept { return kind_ == WalkKind::SRW ? transitions_ : accepted_; }
  std::size_t unique_nodes() const noexcept { return unique_; }

  /// accepted / (m - 1); 1 before any transition.
  double acceptance_rate() const noexcept {
    return transitions_ == 0 ? 1.0 : static_cast<double>(accepted()) / static_cast<double>(transitions_);
  }

 private:
  void visit(NodeId v) {
    if (!visited_[v]) {
      visited_[v] = true;
      ++unique_;
    }
  }

  const Graph* graph_;
  WalkKind kind_;
  NodeId current_;
  std::size_t transitions_ = 0;
  std::size_t accepted_ = 0;
  std::size_t unique_ = 0;
  std::vector<bool> visited_;
};

/// Per-step feature history of a walk, stored row-major (m rows of p).
struct WalkTrace {
  WalkKind kind = WalkKind::SRW;
  std::uint64_t seed = 0;
  NodeId start = 0;
  std::size_t p = 0;
  std::vector<double> values;
  std::vector<std::uint32_t> degrees;
  std::vector<NodeId> nodes;
  std::vector<std::uint8_t> accepted;

  std::size_t size() const noexcept { return nodes.size(); }
  std::span<const double> row(std::size_t t) const { return {values.data() + t * p, p}; }
};

/// Runs `m` samples (the start node counts as sample 0). `features` maps a
/// node id to its p-dimensional feature row. The first `burn_in`
/// transitions are taken but not recorded.
template <typename FeatureMap>
std::pair<WalkTrace, WalkState> run_walk(const Graph& g, WalkKind kind, NodeId start, std::size_t m,
                                         const FeatureMap& features, Rng& rng, std::size_t burn_in = 0) {
  if (m == 0) throw InvalidArgument("walk length must be at least 1");
  WalkState state(g, kind, start);
  for (std::size_t b = 0; b < burn_in; ++b) state.advance(rng);
  WalkState recorded(g, kind, state.current());

  WalkTrace trace;
  trace.kind = kind;
  trace.start = state.current();
  trace.p = features(state.current()).size();
  trace.values.reserve(m * trace.p);
  trace.degrees.reserve(m);
  trace.nodes.reserve(m);
  trace.accepted.reserve(m);
  auto record = [&](bool acc) {
    auto row = features(recorded.current());
    trace.values.insert(trace.values.end(), row.begin(), row.end());
    trace.degrees.push_back(static_cast<std::uint32_t>(g.degree(recorded.current())));
    trace.nodes.push_back(recorded.current());
    trace.accepted.push_back(acc ? 1 : 0);
  };
  record(true);
  for (std::size_t t = 1; t < m; ++t) record(recorded.advance(rng));
  return {std::move(trace), std::move(recorded)};
}

/// Writes "t,node,accepted" rows for debugging.
inline void write_trace(std::ostream& out, const WalkTrace& trace, const Graph& g) {
  out << "t,node,label,accepted\n";
  for (std::size_t t = 0; t < trace.nodes.size(); ++t)
    out << t << ',' << trace.nodes[t] << ',' << g.label(trace.nodes[t]) << ',' << int(trace.accepted[t]) << '\n';
}

}  // namespace rwmc
