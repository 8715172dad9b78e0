#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rwmc/error.hpp"
#include "rwmc/rng.hpp"

namespace rwmc {

using NodeId = std::uint32_t;
using Label = std::int64_t;

struct IngestReport {
  std::size_t dropped_duplicates = 0;
  std::size_t dropped_self_loops = 0;
};

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Nodes carry dense ids 0..n-1; every node remembers the label it had in
/// the source data. Each neighbor slice is strictly increasing.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph on `n` nodes from an arbitrary edge list. Self loops and
  /// repeated edges (in either orientation) are dropped and counted in
  /// `report` when one is given. `labels` defaults to 0..n-1.
  static Graph from_edges(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges,
                          std::vector<Label> labels = {}, IngestReport* report = nullptr) {
    if (n == 0) throw InvalidArgument("graph must have at least one node");
    if (!labels.empty() && labels.size() != n) throw InvalidArgument("label count does not match node count");

    IngestReport local;
    std::vector<std::pair<NodeId, NodeId>> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw InvalidArgument("edge endpoint out of range");
      if (u == v) {
        ++local.dropped_self_loops;
        continue;
      }
      canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    auto last = std::unique(canon.begin(), canon.end());
    local.dropped_duplicates = static_cast<std::size_t>(canon.end() - last);
    canon.erase(last, canon.end());

    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : canon) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.neighbors_.resize(2 * canon.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : canon) {
      g.neighbors_[cursor[u]++] = v;
      g.neighbors_[cursor[v]++] = u;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
    }
    if (labels.empty()) {
      labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i);
    }
    g.labels_ = std::move(labels);
    g.index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.index_.emplace(g.labels_[i], static_cast<NodeId>(i));
    if (report) *report = local;
    return g;
  }

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }

  std::size_t degree(NodeId v) const {
    check(v);
    return offsets_[v + 1] - offsets_[v];
  }

  std::span<const NodeId> neighbors(NodeId v) const {
    check(v);
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  std::size_t max_degree() const noexcept {
    std::size_t best = 0;
    for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) best = std::max(best, offsets_[i + 1] - offsets_[i]);
    return best;
  }

  Label label(NodeId v) const {
    check(v);
    return labels_[v];
  }

  std::optional<NodeId> find(Label label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }

  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Edges as (u, v) with u < v, in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.neighbors_ == b.neighbors_ && a.labels_ == b.labels_;
  }

 private:
  void check(NodeId v) const {
    if (v >= labels_.size()) throw InvalidArgument("node id " + std::to_string(v) + " out of range");
  }

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<Label> labels_;
  std::unordered_map<Label, NodeId> index_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::optional<Label> parse_label(std::string_view tok) {
  Label value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return value;
}

}  // namespace detail

/// Reads a SNAP-style edge list: two integer labels per line, '#' comments,
/// blank lines ignored. Labels become dense ids in order of first appearance.
inline Graph load_edge_list(std::istream& in, IngestReport* report = nullptr) {
  std::unordered_map<Label, NodeId> ids;
  std::vector<Label> labels;
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto intern = [&](Label l) {
    auto [it, inserted] = ids.try_emplace(l, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(l);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    Label ends[2];
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < body.size()) {
      auto start = body.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto stop = body.find_first_of(" \t", start);
      if (stop == std::string_view::npos) stop = body.size();
      auto tok = body.substr(start, stop - start);
      if (count == 2) throw ParseError("expected two node labels, found more", lineno);
      auto value = detail::parse_label(tok);
      if (!value) throw ParseError("malformed node label '" + std::string(tok) + "'", lineno);
      ends[count++] = *value;
      pos = stop;
    }
    if (count != 2) throw ParseError("expected two node labels", lineno);
    NodeId u = intern(ends[0]);
    NodeId v = intern(ends[1]);
    edges.emplace_back(u, v);
  }
  if (labels.empty()) throw InvalidArgument("edge list is empty");
  const std::size_t n = labels.size();
  return Graph::from_edges(n, std::move(edges), std::move(labels), report);
}

/// Writes "u v" per edge with u < v using dense ids.
inline void write_edge_list(std::ostream& out, const Graph& g) {
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

struct Subgraph {
  Graph graph;
  std::vector<NodeId> old_ids;  // new id -> id in the source graph
};

/// Induced subgraph on the largest connected component. Ties go to the
/// component holding the smallest node id. New ids follow old-id order.
inline Subgraph largest_connected_component(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::uint32_t> comp(n, UINT32_MAX);
  std::vector<NodeId> queue;
  queue.reserve(n);
  std::uint32_t best = 0;
  std::size_t best_size = 0;
  std::uint32_t ncomp = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] != UINT32_MAX) continue;
    queue.clear();
    queue.push_back(s);
    comp[s] = ncomp;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (NodeId w : g.neighbors(queue[head])) {
        if (comp[w] == UINT32_MAX) {
          comp[w] = ncomp;
          queue.push_back(w);
        }
      }
    }
    // Components are discovered in order of their smallest id, so a strict
    // comparison keeps the earliest on ties.
    if (queue.size() > best_size) {
      best_size = queue.size();
      best = ncomp;
    }
    ++ncomp;
  }

  std::vector<NodeId> old_ids;
  std::vector<NodeId> new_id(n, UINT32_MAX);
  old_ids.reserve(best_size);
  for (NodeId v = 0; v < n; ++v) {
    if (comp[v] == best) {
      new_id[v] = static_cast<NodeId>(old_ids.size());
      old_ids.push_back(v);
    }
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<Label> labels;
  labels.reserve(old_ids.size());
  for (NodeId v : old_ids) {
    labels.push_back(g.label(v));
    for (NodeId w : g.neighbors(v))
      if (v < w) edges.emplace_back(new_id[v], new_id[w]);
  }
  return {Graph::from_edges(old_ids.size(), std::move(edges), std::move(labels)), std::move(old_ids)};
}

inline bool is_connected(const Graph& g) {
  return largest_connected_component(g).graph.num_nodes() == g.num_nodes();
}

struct NodeStats {
  std::size_t degree = 0;
  std::size_t triangles = 0;
  double clustering = 0.0;
};

/// Degree, triangle count and local clustering coefficient of `v`.
/// Triangles are counted by merging sorted neighbor slices.
inline NodeStats node_stats(const Graph& g, NodeId v) {
  auto nv = g.neighbors(v);
  std::size_t twice = 0;
  for (NodeId u : nv) {
    auto nu = g.neighbors(u);
    auto a = nv.begin();
    auto b = nu.begin();
    while (a != nv.end() && b != nu.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        ++twice;
        ++a;
        ++b;
      }
    }
  }
  NodeStats s;
  s.degree = nv.size();
  s.triangles = twice / 2;
  if (s.degree >= 2) {
    const double d = static_cast<double>(s.degree);
    s.clustering = 2.0 * static_cast<double>(s.triangles) / (d * (d - 1.0));
  }
  return s;
}

inline std::vector<NodeStats> all_node_stats(const Graph& g) {
  std::vector<NodeStats> out(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) out[v] = node_stats(g, v);
  return out;
}

/// Erdős–Rényi G(n, p) sample. Uses geometric skipping over the ordered
/// pair sequence, so cost is proportional to the number of edges produced.
inline Graph generate_er(std::size_t n, double edge_prob, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("generate_er requires n >= 2");
  if (!(edge_prob > 0.0 && edge_prob < 1.0)) throw InvalidArgument("edge probability must lie in (0, 1)");
  Rng rng = make_rng(seed);
  const double log_q = std::log1p(-edge_prob);
  std::vector<std::pair<NodeId, NodeId>> edges;
  // Batagelj–Brandes: walk (v, w) with w < v.
  long long v = 1;
  long long w = -1;
  const auto nn = static_cast<long long>(n);
  while (v < nn) {
    const double r = uniform01(rng);
    w += 1 + static_cast<long long>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) edges.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
  }
  return Graph::from_edges(n, std::move(edges));
}

}  // namespace rwmc
