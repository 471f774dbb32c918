#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "confsub/hypergraph.hpp"
#include "confsub/maxflow.hpp"
#include "confsub/rational.hpp"

namespace confsub {

struct FlowArc {
  std::size_t from;
  std::size_t to;
  std::int64_t capacity;  // integer-scaled; see FlowNetwork::capacity_scale
  bool infinite;
};

/// Bipartite s-t network whose minimum cut minimizes |K| - lambda * e(K).
///
/// Layout: node 0 is the source, node 1 the sink, then one node per
/// positive-weight hyperedge, then one node per vertex. Arcs are
/// s -> u_e (lambda * w_e), u_e -> n_v for v in e (infinite), n_v -> t (1).
/// All capacities are multiplied by capacity_scale so they are integers;
/// infinite arcs carry a sentinel larger than the sum of all finite ones.
struct FlowNetwork {
  Rational lambda;
  std::int64_t capacity_scale = 1;
  std::int64_t infinity = 0;
  std::size_t num_vertices = 0;
  std::vector<std::size_t> edge_index;  // edge-node position -> hyperedge index
  std::vector<FlowArc> arcs;

  static constexpr std::size_t source() { return 0; }
  static constexpr std::size_t sink() { return 1; }
  std::size_t edge_node(std::size_t pos) const { return 2 + pos; }
  std::size_t vertex_node(VertexId v) const { return 2 + edge_index.size() + v; }
  std::size_t num_nodes() const { return 2 + edge_index.size() + num_vertices; }

  /// Unscaled capacity of a finite arc.
  Rational capacity_of(const FlowArc& a) const { return Rational(a.capacity, capacity_scale); }
};

/// Zero-weight hyperedges are left out; they cannot change any cut.
inline FlowNetwork build_network(const WeightedHypergraph& h, const Rational& lambda) {
  if (lambda.is_negative()) throw std::invalid_argument("lambda must be non-negative");
  FlowNetwork net;
  net.lambda = lambda;
  net.num_vertices = h.num_vertices();
  for (std::size_t i = 0; i < h.num_edges(); ++i)
    if (h.scaled_weight(i) > 0) net.edge_index.push_back(i);

  // lambda = p/q and w_e = w'_e / D, so scaling by q*D makes every capacity integral.
  const std::int64_t p = lambda.num();
  const std::int64_t q = lambda.den();
  const std::int64_t sink_cap = detail::checked_mul(q, h.scale());
  net.capacity_scale = sink_cap;

  std::int64_t finite_sum = 0;
  for (std::size_t pos = 0; pos < net.edge_index.size(); ++pos) {
    std::int64_t c = detail::checked_mul(p, h.scaled_weight(net.edge_index[pos]));
    finite_sum = detail::checked_add(finite_sum, c);
    net.arcs.push_back({FlowNetwork::source(), net.edge_node(pos), c, false});
  }
  for (std::size_t v = 0; v < h.num_vertices(); ++v) {
    finite_sum = detail::checked_add(finite_sum, sink_cap);
    net.arcs.push_back({net.vertex_node(static_cast<VertexId>(v)), FlowNetwork::sink(), sink_cap, false});
  }
  net.infinity = detail::checked_add(finite_sum, 1);
  for (std::size_t pos = 0; pos < net.edge_index.size(); ++pos)
    for (VertexId v : h.edge(net.edge_index[pos]).vertices)
      net.arcs.push_back({net.edge_node(pos), net.vertex_node(v), net.infinity, true});
  return net;
}

struct MinCut {
  Rational value;
  VertexSet source_side;  // vertex nodes on the minimal source side
};

/// Exact minimum cut; the returned source side is the inclusion-minimal one
/// (residual reachability from s after a maximum flow).
inline MinCut min_cut(const FlowNetwork& net) {
  MaxFlow mf(net.num_nodes());
  for (const auto& a : net.arcs) mf.add_arc(a.from, a.to, a.capacity);
  std::int64_t flow = mf.solve(FlowNetwork::source(), FlowNetwork::sink());
  auto reach = mf.residual_reachable(FlowNetwork::source());
  MinCut cut{Rational(flow, net.capacity_scale), VertexSet(net.num_vertices)};
  for (std::size_t v = 0; v < net.num_vertices; ++v)
    if (reach[net.vertex_node(static_cast<VertexId>(v))]) cut.source_side.insert(static_cast<VertexId>(v));
  return cut;
}

/// |K|, e(K) and Phi(K, lambda) = |K| - lambda * e(K).
struct LagrangianValue {
  std::size_t set_size = 0;
  Rational induced;
  Rational phi;
};

inline LagrangianValue lagrangian(const WeightedHypergraph& h, const VertexSet& k, const Rational& lambda) {
  LagrangianValue v;
  v.set_size = k.size();
  v.induced = induced_weight(h, k);
  v.phi = Rational(static_cast<std::int64_t>(v.set_size)) - lambda * v.induced;
  return v;
}

struct ChainStats {
  std::size_t size = 0;
  Rational induced;
  Rational residual;

  friend bool operator==(const ChainStats&, const ChainStats&) = default;
};

/// Nested chain of minimal Lagrangian minimizers S_0 = {} c S_1 c ... c S_k.
/// breakpoints[j-1] is the lambda at which the minimal minimizer switches
/// from S_{j-1} to S_j: S_j is the minimal minimizer on
/// (breakpoints[j-1], breakpoints[j]].
struct NestedChain {
  std::size_t universe = 0;
  Rational total_weight;
  std::vector<VertexSet> sets;
  std::vector<Rational> breakpoints;
  std::vector<ChainStats> stats;

  std::size_t length() const { return sets.empty() ? 0 : sets.size() - 1; }

  /// Index j of the minimal minimizer of Phi(., lambda).
  std::size_t index_for_lambda(const Rational& lambda) const {
    return static_cast<std::size_t>(std::lower_bound(breakpoints.begin(), breakpoints.end(), lambda) -
                                    breakpoints.begin());
  }

  /// Smallest j with B inside S_j, if any.
  std::optional<std::size_t> first_containing(std::span<const VertexId> vs) const {
    for (std::size_t j = 0; j < sets.size(); ++j)
      if (sets[j].contains_all(vs)) return j;
    return std::nullopt;
  }

  friend bool operator==(const NestedChain&, const NestedChain&) = default;
};

/// Structural checks for a chain that was loaded rather than computed.
inline std::optional<std::string> check_chain(const NestedChain& c) {
  if (c.sets.empty()) return "chain has no sets";
  if (c.breakpoints.size() + 1 != c.sets.size()) return "breakpoint count must be one less than set count";
  if (c.stats.size() != c.sets.size()) return "stats count must match set count";
  if (!c.sets.front().empty()) return "S_0 must be empty";
  if (c.length() > c.universe) return "chain longer than vertex count";
  for (std::size_t j = 0; j < c.sets.size(); ++j) {
    if (c.sets[j].universe() != c.universe) return "set " + std::to_string(j) + " has wrong universe";
    if (c.stats[j].size != c.sets[j].size()) return "stats size mismatch at " + std::to_string(j);
    if (c.stats[j].induced + c.stats[j].residual != c.total_weight)
      return "induced + residual != W at " + std::to_string(j);
    if (j == 0) continue;
    if (!(c.sets[j - 1].is_subset_of(c.sets[j])) || c.sets[j - 1] == c.sets[j])
      return "sets not strictly nested at " + std::to_string(j);
    if (!(c.stats[j - 1].induced < c.stats[j].induced)) return "induced weight not increasing at " + std::to_string(j);
    if (j >= 2 && !(c.breakpoints[j - 2] < c.breakpoints[j - 1])) return "breakpoints not increasing";
  }
  return std::nullopt;
}

/// Every distinct minimal minimizer of Phi(K, lambda) over lambda >= 0, with
/// exact breakpoints, via discrete-Newton bisection over lambda: between two
/// known minimizers the probe is the lambda where their Phi lines cross; if
/// the minimal cut there is the lower set, that crossing is a breakpoint,
/// otherwise the interval splits at the new set.
inline NestedChain nested_chain(const WeightedHypergraph& h) {
  struct Point {
    Rational lambda;
    VertexSet set;
    std::int64_t scaled_induced;
  };
  auto cut_at = [&](const Rational& lambda) {
    MinCut c = min_cut(build_network(h, lambda));
    std::int64_t e = h.scaled_induced(c.source_side);
    return Point{lambda, std::move(c.source_side), e};
  };

  NestedChain chain;
  chain.universe = h.num_vertices();
  chain.total_weight = h.total_weight();

  std::vector<std::pair<Rational, Point>> found;  // (breakpoint, set entering there)
  Point lo{Rational{0}, VertexSet(h.num_vertices()), 0};
  if (auto wmin = h.min_positive_weight()) {
    // Beyond (n+1)/w_min dropping any positive edge costs more than n vertices.
    Rational lambda_max = Rational(static_cast<std::int64_t>(h.num_vertices()) + 1) / *wmin;
    Point hi = cut_at(lambda_max);
    std::vector<std::pair<Point, Point>> work;
    if (!(hi.set == lo.set)) work.emplace_back(lo, hi);
    while (!work.empty()) {
      auto [a, b] = std::move(work.back());
      work.pop_back();
      std::int64_t dsize = static_cast<std::int64_t>(b.set.size()) - static_cast<std::int64_t>(a.set.size());
      std::int64_t dw = b.scaled_induced - a.scaled_induced;
      if (dsize <= 0 || dw <= 0) throw std::logic_error("parametric cut produced non-nested minimizers");
      Rational probe = Rational(detail::checked_mul(dsize, h.scale()), dw);
      Point mid = cut_at(probe);
      if (mid.set == a.set) {
        found.emplace_back(probe, std::move(b));
        continue;
      }
      if (!a.set.is_subset_of(mid.set) || !mid.set.is_subset_of(b.set) || mid.set == b.set)
        throw std::logic_error("minimal cuts not nested across lambda");
      work.emplace_back(mid, b);
      work.emplace_back(a, std::move(mid));
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  auto push = [&](const VertexSet& s, std::int64_t scaled) {
    Rational induced(scaled, h.scale());
    chain.stats.push_back({s.size(), induced, h.total_weight() - induced});
    chain.sets.push_back(s);
  };
  push(lo.set, 0);
  for (auto& [lambda, p] : found) {
    chain.breakpoints.push_back(lambda);
    push(p.set, p.scaled_induced);
  }
  return chain;
}

}  // namespace confsub
