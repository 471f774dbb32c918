#pragma once

// Brute-force references over bitmasks (n <= ~20).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "confsub/confsub.hpp"

namespace oracle {

using confsub::Hyperedge;
using confsub::Rational;
using confsub::VertexId;
using confsub::VertexSet;
using confsub::WeightedHypergraph;
using Mask = std::uint32_t;

inline Mask mask_of(const std::vector<VertexId>& vs) {
  Mask m = 0;
  for (VertexId v : vs) m |= Mask{1} << v;
  return m;
}

inline Mask mask_of(const VertexSet& s) { return mask_of(s.members()); }

inline VertexSet set_of(Mask m, std::size_t n) {
  VertexSet s(n);
  for (std::size_t v = 0; v < n; ++v)
    if (m >> v & 1U) s.insert(static_cast<VertexId>(v));
  return s;
}

inline int popcount(Mask m) { return __builtin_popcount(m); }

/// Induced weight by scanning every edge.
inline Rational induced(const WeightedHypergraph& h, Mask k) {
  Rational sum;
  for (const auto& e : h.edges())
    if ((mask_of(e.vertices) & ~k) == 0) sum += e.weight;
  return sum;
}

inline Rational phi(const WeightedHypergraph& h, Mask k, const Rational& lambda) {
  return Rational(popcount(k)) - lambda * induced(h, k);
}

struct Minimizer {
  Rational value;
  Mask minimal = 0;
};

/// min_K Phi(K, lambda) over all 2^n subsets; minimal = intersection of all minimizers.
inline Minimizer min_phi(const WeightedHypergraph& h, const Rational& lambda) {
  const std::size_t n = h.num_vertices();
  std::vector<Mask> edge_masks;
  std::vector<Rational> w;
  for (const auto& e : h.edges()) {
    edge_masks.push_back(mask_of(e.vertices));
    w.push_back(e.weight);
  }
  std::optional<Rational> best;
  Mask meet = ~Mask{0};
  for (Mask k = 0; k < (Mask{1} << n); ++k) {
    Rational ind;
    for (std::size_t i = 0; i < edge_masks.size(); ++i)
      if ((edge_masks[i] & ~k) == 0) ind += w[i];
    Rational val = Rational(popcount(k)) - lambda * ind;
    if (!best || val < *best) {
      best = val;
      meet = k;
    } else if (val == *best) {
      meet &= k;
    }
  }
  return {*best, meet};
}

/// min |O| subject to residual(O) <= eps * W.
inline std::size_t ilp_min_size(const WeightedHypergraph& h, const Rational& eps) {
  const std::size_t n = h.num_vertices();
  std::vector<Mask> edge_masks;
  std::vector<std::int64_t> w;
  for (std::size_t i = 0; i < h.num_edges(); ++i) {
    edge_masks.push_back(mask_of(h.edge(i).vertices));
    w.push_back(h.scaled_weight(i));
  }
  const Rational budget = eps * Rational(h.scaled_total());
  std::size_t best = n;
  for (Mask k = 0; k < (Mask{1} << n); ++k) {
    if (static_cast<std::size_t>(popcount(k)) >= best) continue;
    std::int64_t ind = 0;
    for (std::size_t i = 0; i < edge_masks.size(); ++i)
      if ((edge_masks[i] & ~k) == 0) ind += w[i];
    if (Rational(h.scaled_total() - ind) <= budget) best = static_cast<std::size_t>(popcount(k));
  }
  return best;
}

/// Minimum-size sets meeting coverage tau exactly (all optima).
inline std::vector<Mask> exact_optima(const WeightedHypergraph& h, const Rational& tau) {
  const std::size_t n = h.num_vertices();
  std::vector<Mask> out;
  int best = static_cast<int>(n) + 1;
  for (Mask k = 0; k < (Mask{1} << n); ++k) {
    if (induced(h, k) < tau * h.total_weight()) continue;
    int c = popcount(k);
    if (c < best) {
      best = c;
      out.clear();
    }
    if (c == best) out.push_back(k);
  }
  return out;
}

/// Random hypergraph with small positive integer weights over a denominator.
inline WeightedHypergraph random_hypergraph(confsub::CounterRng& rng, std::size_t n, std::size_t m,
                                            bool allow_zero = false) {
  std::vector<Hyperedge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t k = 1 + rng.below(std::min<std::size_t>(n, 4));
    std::vector<VertexId> vs;
    for (std::size_t j = 0; j < k; ++j) vs.push_back(static_cast<VertexId>(rng.below(n)));
    std::int64_t num = static_cast<std::int64_t>(rng.below(allow_zero ? 10 : 9)) + (allow_zero ? 0 : 1);
    edges.push_back(Hyperedge::canonical(std::move(vs), Rational(num, 7)));
  }
  return WeightedHypergraph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Sampler enumerations

/// Every walk (as its arc-edge sequence) from the table's source that stops
/// on first reaching the target, with cost <= d*.
inline std::vector<std::vector<std::size_t>> enumerate_walks(const confsub::WalkDPTable& t) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t, int)> dfs = [&](std::size_t u, int budget) {
    if (u == t.target()) {
      out.push_back(cur);
      return;
    }
    for (const auto& a : t.arcs(u)) {
      if (a.cost > budget) continue;
      cur.push_back(a.edge);
      dfs(a.to, budget - a.cost);
      cur.pop_back();
    }
  };
  dfs(t.source(), t.d_star());
  return out;
}

/// Walks with cost exactly k from u.
inline std::size_t count_walks(const confsub::WalkDPTable& t, std::size_t u, int k) {
  if (u == t.target()) return k == 0 ? 1 : 0;
  std::size_t total = 0;
  for (const auto& a : t.arcs(u))
    if (a.cost <= k) total += count_walks(t, a.to, k - a.cost);
  return total;
}

/// Itineraries (one per group) with at most d* picks off the reference.
inline std::vector<Mask> enumerate_itineraries(const std::vector<std::vector<VertexId>>& groups,
                                               const std::vector<VertexId>& ref, int d_star) {
  std::vector<Mask> out;
  std::function<void(std::size_t, Mask, int)> rec = [&](std::size_t r, Mask acc, int used) {
    if (used > d_star) return;
    if (r == groups.size()) {
      out.push_back(acc);
      return;
    }
    for (VertexId v : groups[r]) rec(r + 1, acc | Mask{1} << v, used + (v == ref[r] ? 0 : 1));
  };
  rec(0, 0, 0);
  return out;
}

/// Root-containing connected node sets (optionally restricted to downward
/// root paths) with at most d* nodes outside the reference.
inline std::vector<Mask> enumerate_subtrees(const std::vector<std::size_t>& parent, Mask ref, int d_star,
                                            bool root_path_only) {
  const std::size_t n = parent.size();
  std::size_t root = 0;
  for (std::size_t u = 0; u < n; ++u)
    if (parent[u] == confsub::SubtreeDPTable::kNoParent) root = u;
  std::vector<Mask> out;
  for (Mask s = 0; s < (Mask{1} << n); ++s) {
    if (!(s >> root & 1U)) continue;
    bool ok = true;
    std::vector<int> kids(n, 0);
    for (std::size_t u = 0; u < n && ok; ++u) {
      if (!(s >> u & 1U) || u == root) continue;
      if (!(s >> parent[u] & 1U)) ok = false;
      else ++kids[parent[u]];
    }
    if (!ok) continue;
    if (root_path_only)
      for (int k : kids)
        if (k > 1) ok = false;
    if (!ok) continue;
    if (popcount(s & ~ref) <= d_star) out.push_back(s);
  }
  return out;
}

}  // namespace oracle
