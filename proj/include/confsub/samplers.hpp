#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "confsub/hypergraph.hpp"
#include "confsub/rng.hpp"

namespace confsub {

using BigCount = boost::multiprecision::cpp_int;

/// Uniform integer in [0, bound) by rejection on random bit strings.
inline BigCount random_below(const BigCount& bound, CounterRng& rng) {
  if (bound <= 0) throw std::invalid_argument("random_below needs a positive bound");
  const std::size_t bits = boost::multiprecision::msb(bound) + 1;
  const std::size_t words = (bits + 63) / 64;
  const std::size_t excess = words * 64 - bits;
  for (;;) {
    BigCount x = 0;
    for (std::size_t i = 0; i < words; ++i) {
      std::uint64_t w = rng();
      if (i == 0 && excess > 0) w >>= excess;
      x <<= 64;
      x += w;
    }
    if (x < bound) return x;
  }
}

/// Picks index i with probability weights[i] / sum(weights).
inline std::size_t pick_weighted(std::span<const BigCount> weights, CounterRng& rng) {
  BigCount total = 0;
  for (const auto& w : weights) total += w;
  BigCount r = random_below(total, rng);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  throw std::logic_error("pick_weighted fell through");
}

/// ceil(C (n + ln(1/delta)) / alpha^2): hyperedge samples sufficient for every
/// vertex subset's induced mass to be within alpha with probability 1 - delta.
inline std::size_t sample_size(std::size_t n_vertices, double alpha, double delta, double constant = 1.0) {
  if (!(alpha > 0 && alpha < 1) || !(delta > 0 && delta < 1))
    throw std::invalid_argument("alpha and delta must lie in (0,1)");
  return static_cast<std::size_t>(
      std::ceil(constant * (static_cast<double>(n_vertices) + std::log(1.0 / delta)) / (alpha * alpha)));
}

// ---------------------------------------------------------------------------
// Walks within distance d* of a reference s-t path.

/// Undirected multigraph; edge ids are positions in `edges`.
struct WalkGraph {
  std::size_t num_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

struct Walk {
  std::vector<std::size_t> edges;  // traversal order, repeats kept
  std::size_t cost = 0;            // traversals of edges off the reference path

  /// Distinct traversed edge ids, the view used for containment queries.
  Hyperedge as_hyperedge() const {
    std::vector<VertexId> vs(edges.begin(), edges.end());
    return Hyperedge::canonical(std::move(vs));
  }
};

/// N(u, k): number of walks from u that stop on first reaching t and cross
/// exactly k edges off the reference path. Reference edges are traversable
/// only forward (s to t) at cost 0; all other edges either way at cost 1.
class WalkDPTable {
 public:
  struct Arc {
    std::size_t to;
    std::size_t edge;
    int cost;
  };

  /// `reference` lists the edge ids of A* in order from `source`.
  /// `off_path_order` optionally fixes the within-k fill order of nodes that
  /// are not on A*; any order yields the same table.
  WalkDPTable(const WalkGraph& g, std::size_t source, std::span<const std::size_t> reference, int d_star,
              std::span<const std::size_t> off_path_order = {})
      : n_(g.num_nodes), d_star_(d_star), arcs_(g.num_nodes) {
    if (d_star < 0) throw std::invalid_argument("d* must be non-negative");
    if (reference.empty()) throw std::invalid_argument("reference path is empty");
    if (source >= n_) throw std::out_of_range("source outside graph");

    path_nodes_.push_back(source);
    std::vector<bool> on_path_edge(g.edges.size(), false);
    std::vector<std::size_t> head_of(g.edges.size(), 0);
    for (std::size_t e : reference) {
      if (e >= g.edges.size()) throw std::out_of_range("reference edge id outside graph");
      auto [a, b] = g.edges[e];
      std::size_t at = path_nodes_.back();
      std::size_t next;
      if (a == at) next = b;
      else if (b == at) next = a;
      else throw std::invalid_argument("reference edges do not form a walk from the source");
      if (on_path_edge[e]) throw std::invalid_argument("reference path repeats an edge");
      on_path_edge[e] = true;
      head_of[e] = next;
      path_nodes_.push_back(next);
    }
    std::vector<bool> seen(n_, false);
    for (std::size_t u : path_nodes_) {
      if (seen[u]) throw std::invalid_argument("reference path is not simple");
      seen[u] = true;
    }
    on_path_ = std::move(seen);

    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      auto [a, b] = g.edges[e];
      if (a >= n_ || b >= n_) throw std::out_of_range("edge endpoint outside graph");
      if (on_path_edge[e]) {
        std::size_t tail = head_of[e] == b ? a : b;
        arcs_[tail].push_back({head_of[e], e, 0});
      } else {
        arcs_[a].push_back({b, e, 1});
        if (a != b) arcs_[b].push_back({a, e, 1});
      }
    }

    std::vector<std::size_t> others;
    if (off_path_order.empty()) {
      for (std::size_t u = 0; u < n_; ++u)
        if (!on_path_[u]) others.push_back(u);
    } else {
      others.assign(off_path_order.begin(), off_path_order.end());
      std::vector<std::size_t> check = others;
      std::sort(check.begin(), check.end());
      std::vector<std::size_t> expect;
      for (std::size_t u = 0; u < n_; ++u)
        if (!on_path_[u]) expect.push_back(u);
      if (check != expect) throw std::invalid_argument("off_path_order must permute the off-path nodes");
    }

    table_.assign(n_, std::vector<BigCount>(static_cast<std::size_t>(d_star) + 1, 0));
    const std::size_t t = target();
    table_[t][0] = 1;
    for (int k = 0; k <= d_star; ++k) {
      // on-path nodes from the target end first
      for (std::size_t i = path_nodes_.size() - 1; i-- > 0;) fill(path_nodes_[i], k);
      for (std::size_t u : others) fill(u, k);
    }
  }

  std::size_t source() const { return path_nodes_.front(); }
  std::size_t target() const { return path_nodes_.back(); }
  int d_star() const { return d_star_; }
  const BigCount& count(std::size_t u, int k) const { return table_[u][static_cast<std::size_t>(k)]; }
  const std::vector<Arc>& arcs(std::size_t u) const { return arcs_[u]; }

  /// Z = sum_{j <= d*} N(s, j).
  BigCount partition() const {
    BigCount z = 0;
    for (const auto& c : table_[source()]) z += c;
    return z;
  }

  /// Re-evaluates the defining sum for every cell.
  bool check_recurrence() const {
    for (std::size_t u = 0; u < n_; ++u)
      for (int k = 0; k <= d_star_; ++k) {
        BigCount expect = u == target() ? BigCount(k == 0 ? 1 : 0) : cell_sum(u, k);
        if (expect != count(u, k)) return false;
      }
    return true;
  }

  /// Uniform draw from the walks of total cost <= d*.
  Walk sample(CounterRng& rng) const {
    BigCount z = partition();
    if (z == 0) throw std::domain_error("no walk within the distance budget");
    std::vector<BigCount> w(table_[source()].begin(), table_[source()].end());
    int k = static_cast<int>(pick_weighted(w, rng));
    Walk walk;
    std::size_t u = source();
    while (u != target()) {
      std::vector<BigCount> weights;
      weights.reserve(arcs_[u].size());
      for (const auto& a : arcs_[u]) weights.push_back(k - a.cost >= 0 ? count(a.to, k - a.cost) : BigCount(0));
      const Arc& a = arcs_[u][pick_weighted(weights, rng)];
      walk.edges.push_back(a.edge);
      walk.cost += static_cast<std::size_t>(a.cost);
      k -= a.cost;
      u = a.to;
    }
    return walk;
  }

 private:
  BigCount cell_sum(std::size_t u, int k) const {
    BigCount sum = 0;
    for (const auto& a : arcs_[u])
      if (k - a.cost >= 0) sum += table_[a.to][static_cast<std::size_t>(k - a.cost)];
    return sum;
  }
  void fill(std::size_t u, int k) {
    if (u == target()) return;
    table_[u][static_cast<std::size_t>(k)] = cell_sum(u, k);
  }

  std::size_t n_;
  int d_star_;
  std::vector<std::vector<Arc>> arcs_;
  std::vector<std::size_t> path_nodes_;
  std::vector<bool> on_path_;
  std::vector<std::vector<BigCount>> table_;
};

// ---------------------------------------------------------------------------
// Itineraries: one activity per group, at most d* activities off A*.

class ItineraryDPTable {
 public:
  ItineraryDPTable(std::vector<std::vector<VertexId>> groups, std::span<const VertexId> reference, int d_star)
      : groups_(std::move(groups)), d_star_(d_star) {
    if (d_star < 0) throw std::invalid_argument("d* must be non-negative");
    if (reference.size() != groups_.size()) throw std::invalid_argument("reference needs one activity per group");
    for (std::size_t r = 0; r < groups_.size(); ++r) {
      if (std::find(groups_[r].begin(), groups_[r].end(), reference[r]) == groups_[r].end())
        throw std::invalid_argument("reference activity not in its group");
      reference_.push_back(reference[r]);
    }
    const std::size_t R = groups_.size();
    table_.assign(R + 1, std::vector<BigCount>(static_cast<std::size_t>(d_star) + 1, 0));
    table_[R][0] = 1;
    for (std::size_t r = R; r-- > 0;)
      for (int k = 0; k <= d_star; ++k) table_[r][static_cast<std::size_t>(k)] = cell_sum(r, k);
  }

  std::size_t num_groups() const { return groups_.size(); }
  int cost(std::size_t r, VertexId v) const { return v == reference_[r] ? 0 : 1; }
  /// N(r, k) over groups r..R-1 (0-based); row R is the empty suffix.
  const BigCount& count(std::size_t r, int k) const { return table_[r][static_cast<std::size_t>(k)]; }

  BigCount partition() const {
    BigCount z = 0;
    for (const auto& c : table_[0]) z += c;
    return z;
  }

  bool check_recurrence() const {
    for (std::size_t r = 0; r < groups_.size(); ++r)
      for (int k = 0; k <= d_star_; ++k)
        if (cell_sum(r, k) != count(r, k)) return false;
    for (int k = 0; k <= d_star_; ++k)
      if (count(groups_.size(), k) != (k == 0 ? 1 : 0)) return false;
    return true;
  }

  Hyperedge sample(CounterRng& rng) const {
    if (partition() == 0) throw std::domain_error("no itinerary within the distance budget");
    std::vector<BigCount> w(table_[0].begin(), table_[0].end());
    int k = static_cast<int>(pick_weighted(w, rng));
    std::vector<VertexId> chosen;
    for (std::size_t r = 0; r < groups_.size(); ++r) {
      std::vector<BigCount> weights;
      for (VertexId v : groups_[r]) {
        int rest = k - cost(r, v);
        weights.push_back(rest >= 0 ? count(r + 1, rest) : BigCount(0));
      }
      VertexId v = groups_[r][pick_weighted(weights, rng)];
      k -= cost(r, v);
      chosen.push_back(v);
    }
    return Hyperedge::canonical(std::move(chosen));
  }

 private:
  BigCount cell_sum(std::size_t r, int k) const {
    BigCount sum = 0;
    for (VertexId v : groups_[r]) {
      int rest = k - cost(r, v);
      if (rest >= 0) sum += table_[r + 1][static_cast<std::size_t>(rest)];
    }
    return sum;
  }

  std::vector<std::vector<VertexId>> groups_;
  std::vector<VertexId> reference_;
  int d_star_;
  std::vector<std::vector<BigCount>> table_;
};

// ---------------------------------------------------------------------------
// Root-containing subtrees of a rooted tree, at most d* nodes off A*.

enum class SubtreeFamily {
  kConnected,  // any connected subtree containing the root
  kRootPath,   // a path from the root downward (at most one child kept per node)
};

class SubtreeDPTable {
 public:
  static constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

  /// `parent[root] == kNoParent`; `reference` is A*, which must itself be a
  /// member of the family.
  SubtreeDPTable(std::span<const std::size_t> parent, std::span<const std::size_t> reference, int d_star,
                 SubtreeFamily family = SubtreeFamily::kConnected)
      : n_(parent.size()), d_star_(d_star), family_(family), children_(parent.size()), in_ref_(parent.size(), false) {
    if (d_star < 0) throw std::invalid_argument("d* must be non-negative");
    std::size_t roots = 0;
    for (std::size_t u = 0; u < n_; ++u) {
      if (parent[u] == kNoParent) {
        root_ = u;
        ++roots;
      } else if (parent[u] >= n_) {
        throw std::out_of_range("parent outside tree");
      } else {
        children_[parent[u]].push_back(u);
      }
    }
    if (roots != 1) throw std::invalid_argument("tree must have exactly one root");
    for (std::size_t u : reference) {
      if (u >= n_) throw std::out_of_range("reference node outside tree");
      in_ref_[u] = true;
    }
    if (!in_ref_[root_]) throw std::invalid_argument("reference subtree must contain the root");
    for (std::size_t u : reference)
      if (u != root_ && !in_ref_[parent[u]]) throw std::invalid_argument("reference subtree is not connected");
    if (family_ == SubtreeFamily::kRootPath)
      for (std::size_t u = 0; u < n_; ++u) {
        std::size_t kept = 0;
        for (std::size_t c : children_[u]) kept += in_ref_[c] ? 1 : 0;
        if (kept > 1) throw std::invalid_argument("reference is not a root path");
      }

    // Post-order so children are filled before parents.
    std::vector<std::size_t> order, stack{root_};
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (std::size_t c : children_[u]) stack.push_back(c);
    }
    if (order.size() != n_) throw std::invalid_argument("parent array does not describe a tree");
    const std::size_t width = static_cast<std::size_t>(d_star) + 1;
    table_.assign(n_, std::vector<BigCount>(width, 0));
    suffix_.resize(n_);
    for (std::size_t i = order.size(); i-- > 0;) fill(order[i]);
  }

  std::size_t root() const { return root_; }
  int weight(std::size_t u) const { return in_ref_[u] ? 0 : 1; }
  const std::vector<std::size_t>& children(std::size_t u) const { return children_[u]; }
  const BigCount& count(std::size_t u, int k) const { return table_[u][static_cast<std::size_t>(k)]; }

  BigCount partition() const {
    BigCount z = 0;
    for (const auto& c : table_[root_]) z += c;
    return z;
  }

  /// Recomputes every N(u, k) by explicit expansion over child budgets.
  bool check_recurrence() const {
    for (std::size_t u = 0; u < n_; ++u)
      for (int k = 0; k <= d_star_; ++k)
        if (expand(u, k) != count(u, k)) return false;
    return true;
  }

  Hyperedge sample(CounterRng& rng) const {
    if (partition() == 0) throw std::domain_error("no subtree within the distance budget");
    std::vector<BigCount> w(table_[root_].begin(), table_[root_].end());
    int k = static_cast<int>(pick_weighted(w, rng));
    std::vector<VertexId> nodes;
    std::vector<std::pair<std::size_t, int>> work{{root_, k}};
    while (!work.empty()) {
      auto [u, budget] = work.back();
      work.pop_back();
      nodes.push_back(static_cast<VertexId>(u));
      int rest = budget - weight(u);
      const auto& kids = children_[u];
      if (family_ == SubtreeFamily::kRootPath) {
        std::vector<BigCount> weights{BigCount(rest == 0 ? 1 : 0)};
        for (std::size_t c : kids) weights.push_back(count(c, rest));
        std::size_t pick = pick_weighted(weights, rng);
        if (pick > 0) work.push_back({kids[pick - 1], rest});
        continue;
      }
      for (std::size_t i = 0; i < kids.size(); ++i) {
        const auto& tail = suffix_[u][i + 1];
        // option 0: child absent; option j+1: child present with budget j.
        std::vector<BigCount> weights{tail[static_cast<std::size_t>(rest)]};
        for (int j = 0; j <= rest; ++j)
          weights.push_back(count(kids[i], j) * tail[static_cast<std::size_t>(rest - j)]);
        std::size_t pick = pick_weighted(weights, rng);
        if (pick > 0) {
          int j = static_cast<int>(pick) - 1;
          work.push_back({kids[i], j});
          rest -= j;
        }
      }
    }
    return Hyperedge::canonical(std::move(nodes));
  }

 private:
  void fill(std::size_t u) {
    const std::size_t width = static_cast<std::size_t>(d_star_) + 1;
    const auto& kids = children_[u];
    std::vector<BigCount> acc(width, 0);
    if (family_ == SubtreeFamily::kConnected) {
      // suffix_[u][i] = prod_{l >= i} (1 + sum_j N(kid_l, j) x^j), truncated.
      suffix_[u].assign(kids.size() + 1, std::vector<BigCount>(width, 0));
      suffix_[u][kids.size()][0] = 1;
      for (std::size_t i = kids.size(); i-- > 0;) {
        const auto& next = suffix_[u][i + 1];
        auto& cur = suffix_[u][i];
        for (std::size_t a = 0; a < width; ++a) {
          if (next[a] == 0) continue;
          cur[a] += next[a];
          for (std::size_t j = 0; a + j < width; ++j) cur[a + j] += next[a] * table_[kids[i]][j];
        }
      }
      acc = suffix_[u][0];
    } else {
      acc[0] = 1;
      for (std::size_t c : kids)
        for (std::size_t j = 0; j < width; ++j) acc[j] += table_[c][j];
    }
    const std::size_t shift = static_cast<std::size_t>(weight(u));
    for (std::size_t k = 0; k < width; ++k) table_[u][k] = k >= shift ? acc[k - shift] : BigCount(0);
  }

  // Naive sum over all child budget assignments (child absent counts as one way at cost 0).
  BigCount expand(std::size_t u, int k) const {
    int rest = k - weight(u);
    if (rest < 0) return 0;
    const auto& kids = children_[u];
    if (family_ == SubtreeFamily::kRootPath) {
      BigCount sum = rest == 0 ? 1 : 0;
      for (std::size_t c : kids) sum += count(c, rest);
      return sum;
    }
    BigCount total = 0;
    std::vector<int> choice(kids.size(), -1);  // -1 absent, else budget
    for (;;) {
      int used = 0;
      BigCount prod = 1;
      for (std::size_t i = 0; i < kids.size(); ++i)
        if (choice[i] >= 0) {
          used += choice[i];
          prod *= count(kids[i], choice[i]);
        }
      if (used == rest) total += prod;
      std::size_t i = 0;
      while (i < kids.size() && choice[i] == rest) choice[i++] = -1;
      if (i == kids.size()) break;
      ++choice[i];
    }
    return total;
  }

  std::size_t n_;
  int d_star_;
  SubtreeFamily family_;
  std::size_t root_ = 0;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<bool> in_ref_;
  std::vector<std::vector<BigCount>> table_;
  std::vector<std::vector<std::vector<BigCount>>> suffix_;
};

/// i.i.d. draws from any of the oracles above as a uniform-mass family
/// (each of the m draws gets weight 1/m).
template <class Sampler, class ToEdge>
WeightedHypergraph sampled_family(const Sampler& sampler, std::size_t num_vertices, std::size_t m, CounterRng& rng,
                                  ToEdge to_edge) {
  std::vector<Hyperedge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Hyperedge e = to_edge(sampler.sample(rng));
    e.weight = Rational(1, static_cast<std::int64_t>(m));
    edges.push_back(std::move(e));
  }
  return WeightedHypergraph(num_vertices, std::move(edges));
}

}  // namespace confsub
