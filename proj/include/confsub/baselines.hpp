#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "confsub/hypergraph.hpp"
#include "confsub/rational.hpp"

namespace confsub {

/// Vertex decisions of a greedy run and the evaluation coverage after each.
struct GreedyTrace {
  std::vector<VertexId> order;
  std::vector<Rational> coverage;  // coverage[i] after i decisions; size order.size() + 1
};

struct GreedyChoice {
  VertexSet set;
  Rational coverage;
  bool reached = true;  // false: target unreachable, full vertex set returned
};

namespace detail {

/// Tracks e(S)/W on an evaluation hypergraph as vertices enter or leave S.
class CoverageTracker {
 public:
  CoverageTracker(const WeightedHypergraph& eval, bool start_full) : eval_(eval), missing_(eval.num_edges(), 0) {
    incident_.resize(eval.num_vertices());
    for (std::size_t i = 0; i < eval.num_edges(); ++i)
      for (VertexId v : eval.edge(i).vertices) incident_[v].push_back(i);
    if (start_full) {
      covered_ = eval.scaled_total();
    } else {
      for (std::size_t i = 0; i < eval.num_edges(); ++i) missing_[i] = eval.edge(i).vertices.size();
    }
  }
  void add(VertexId v) {
    for (std::size_t e : incident_[v])
      if (--missing_[e] == 0) covered_ += eval_.scaled_weight(e);
  }
  void remove(VertexId v) {
    for (std::size_t e : incident_[v])
      if (missing_[e]++ == 0) covered_ -= eval_.scaled_weight(e);
  }
  Rational fraction() const {
    if (eval_.scaled_total() == 0) return Rational{1};
    return Rational(covered_, eval_.scaled_total());
  }

 private:
  const WeightedHypergraph& eval_;
  std::vector<std::size_t> missing_;
  std::vector<std::vector<std::size_t>> incident_;
  std::int64_t covered_ = 0;
};

}  // namespace detail

/// Number of training hyperedges (with multiplicity) through each vertex.
inline std::vector<std::size_t> path_counts(const WeightedHypergraph& train) {
  std::vector<std::size_t> c(train.num_vertices(), 0);
  for (const auto& e : train.edges())
    for (VertexId v : e.vertices) ++c[v];
  return c;
}

/// Forward greedy: add vertices by descending training path count (ties by
/// ascending id) until the evaluation coverage reaches each target.
inline std::map<Rational, GreedyChoice> forward_greedy(const WeightedHypergraph& train, const WeightedHypergraph& eval,
                                                       std::span<const Rational> targets, GreedyTrace* trace = nullptr) {
  const std::size_t n = train.num_vertices();
  auto count = path_counts(train);
  std::vector<VertexId> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = static_cast<VertexId>(v);
  std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return count[a] > count[b]; });

  detail::CoverageTracker cov(eval, false);
  std::vector<Rational> after{cov.fraction()};
  for (VertexId v : order) {
    cov.add(v);
    after.push_back(cov.fraction());
  }
  if (trace) *trace = GreedyTrace{order, after};

  std::map<Rational, GreedyChoice> out;
  for (const auto& phi : targets) {
    std::size_t steps = 0;
    while (steps < n && after[steps] < phi) ++steps;
    GreedyChoice c{VertexSet(n), after[steps], after[steps] >= phi};
    for (std::size_t i = 0; i < steps; ++i) c.set.insert(order[i]);
    if (!c.reached) c.set = VertexSet::full(n);
    out.emplace(phi, std::move(c));
  }
  return out;
}

/// Reverse greedy peeling: repeatedly delete the vertex with the fewest
/// surviving training hyperedges (ties by descending id), dropping every
/// training hyperedge through it. For each target, returns the last set
/// whose evaluation coverage is still at least the target.
inline std::map<Rational, GreedyChoice> reverse_greedy(const WeightedHypergraph& train, const WeightedHypergraph& eval,
                                                       std::span<const Rational> targets, GreedyTrace* trace = nullptr) {
  const std::size_t n = train.num_vertices();
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t i = 0; i < train.num_edges(); ++i)
    for (VertexId v : train.edge(i).vertices) incident[v].push_back(i);
  std::vector<bool> edge_alive(train.num_edges(), true);
  std::vector<bool> present(n, true);
  std::vector<std::size_t> intensity = path_counts(train);

  detail::CoverageTracker cov(eval, true);
  GreedyTrace t;
  t.coverage.push_back(cov.fraction());
  for (std::size_t step = 0; step < n; ++step) {
    VertexId pick = 0;
    bool found = false;
    for (std::size_t v = n; v-- > 0;) {
      if (!present[v]) continue;
      if (!found || intensity[v] < intensity[pick]) {
        pick = static_cast<VertexId>(v);
        found = true;
      }
    }
    present[pick] = false;
    for (std::size_t e : incident[pick]) {
      if (!edge_alive[e]) continue;
      edge_alive[e] = false;
      for (VertexId u : train.edge(e).vertices) --intensity[u];
    }
    cov.remove(pick);
    t.order.push_back(pick);
    t.coverage.push_back(cov.fraction());
  }

  std::map<Rational, GreedyChoice> out;
  for (const auto& phi : targets) {
    std::size_t steps = 0;
    while (steps < n && t.coverage[steps + 1] >= phi) ++steps;
    GreedyChoice c{VertexSet::full(n), t.coverage[steps], t.coverage[0] >= phi};
    for (std::size_t i = 0; i < steps; ++i) c.set.erase(t.order[i]);
    out.emplace(phi, std::move(c));
  }
  if (trace) *trace = std::move(t);
  return out;
}

}  // namespace confsub
