#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "confsub/rational.hpp"

namespace confsub {

using VertexId = std::uint32_t;

/// Fixed-universe bitset over vertices 0..n-1.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

  static VertexSet of(std::size_t universe, std::span<const VertexId> members) {
    VertexSet s(universe);
    for (VertexId v : members) s.insert(v);
    return s;
  }
  static VertexSet full(std::size_t universe) {
    VertexSet s(universe);
    for (std::size_t v = 0; v < universe; ++v) s.insert(static_cast<VertexId>(v));
    return s;
  }

  std::size_t universe() const { return universe_; }

  bool contains(VertexId v) const { return v < universe_ && ((words_[v >> 6] >> (v & 63)) & 1U); }
  void insert(VertexId v) {
    if (v >= universe_) throw std::out_of_range("vertex " + std::to_string(v) + " outside universe");
    words_[v >> 6] |= std::uint64_t{1} << (v & 63);
  }
  void erase(VertexId v) {
    if (v < universe_) words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
  }

  std::size_t size() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }

  bool is_subset_of(const VertexSet& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t o = i < other.words_.size() ? other.words_[i] : 0;
      if (words_[i] & ~o) return false;
    }
    return true;
  }
  bool contains_all(std::span<const VertexId> vs) const {
    return std::all_of(vs.begin(), vs.end(), [&](VertexId v) { return contains(v); });
  }

  std::vector<VertexId> members() const {
    std::vector<VertexId> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        out.push_back(static_cast<VertexId>(i * 64 + std::countr_zero(w)));
        w &= w - 1;
      }
    }
    return out;
  }

  VertexSet& operator|=(const VertexSet& o) {
    for (std::size_t i = 0; i < words_.size() && i < o.words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  friend bool operator==(const VertexSet& a, const VertexSet& b) {
    return a.universe_ == b.universe_ && a.words_ == b.words_;
  }

 private:
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

/// A candidate output (route, itinerary, subtree) seen as a vertex subset
/// carrying non-negative mass.
struct Hyperedge {
  std::vector<VertexId> vertices;
  Rational weight{1};

  /// Sorts and deduplicates the vertex list.
  static Hyperedge canonical(std::vector<VertexId> vs, Rational w = Rational{1}) {
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return Hyperedge{std::move(vs), w};
  }

  bool subset_of(const VertexSet& s) const { return s.contains_all(vertices); }

  friend bool operator==(const Hyperedge&, const Hyperedge&) = default;
};

enum class ViolationKind {
  kEmptyEdge,
  kOutOfRangeVertex,
  kNegativeWeight,
  kUnsortedOrDuplicate,
  kTotalWeightMismatch,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kEmptyEdge: return "empty-edge";
    case ViolationKind::kOutOfRangeVertex: return "out-of-range";
    case ViolationKind::kNegativeWeight: return "negative-weight";
    case ViolationKind::kUnsortedOrDuplicate: return "unsorted-or-duplicate";
    case ViolationKind::kTotalWeightMismatch: return "total-weight-mismatch";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> edge_index;
  std::string message;
};

/// Unchecked hypergraph fields, e.g. straight from a file. Use validate()
/// before trusting them.
struct RawHypergraph {
  std::size_t n = 0;
  std::vector<Hyperedge> edges;
  Rational total_weight;
};

/// Returns the first invariant violation, or nullopt when well formed.
inline std::optional<Violation> validate(const RawHypergraph& raw) {
  Rational sum;
  for (std::size_t i = 0; i < raw.edges.size(); ++i) {
    const auto& e = raw.edges[i];
    auto at = " (edge " + std::to_string(i) + ")";
    if (e.vertices.empty()) return Violation{ViolationKind::kEmptyEdge, i, "hyperedge has no vertices" + at};
    for (std::size_t j = 0; j < e.vertices.size(); ++j) {
      if (e.vertices[j] >= raw.n)
        return Violation{ViolationKind::kOutOfRangeVertex, i,
                         "vertex " + std::to_string(e.vertices[j]) + " >= n=" + std::to_string(raw.n) + at};
      if (j > 0 && e.vertices[j] <= e.vertices[j - 1])
        return Violation{ViolationKind::kUnsortedOrDuplicate, i, "vertices not strictly ascending" + at};
    }
    if (e.weight.is_negative())
      return Violation{ViolationKind::kNegativeWeight, i, "negative weight " + e.weight.to_string() + at};
    sum += e.weight;
  }
  if (sum != raw.total_weight)
    return Violation{ViolationKind::kTotalWeightMismatch, std::nullopt,
                     "total weight " + raw.total_weight.to_string() + " != sum " + sum.to_string()};
  return std::nullopt;
}

class InvalidHypergraph : public std::invalid_argument {
 public:
  explicit InvalidHypergraph(Violation v) : std::invalid_argument(v.message), violation_(std::move(v)) {}
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

/// Immutable weighted hypergraph. Weights are exact rationals; internally
/// every weight is also held as an integer over one common denominator so
/// that induced weights can be summed without reduction.
class WeightedHypergraph {
 public:
  WeightedHypergraph() = default;

  /// Computes W from the edges; throws InvalidHypergraph on malformed input.
  WeightedHypergraph(std::size_t n, std::vector<Hyperedge> edges) {
    RawHypergraph raw{n, std::move(edges), {}};
    for (const auto& e : raw.edges) raw.total_weight += e.weight;
    init(std::move(raw));
  }

  static WeightedHypergraph from_raw(RawHypergraph raw) {
    WeightedHypergraph h;
    h.init(std::move(raw));
    return h;
  }

  /// Unit-mass hypergraph over a sample multiset; duplicates are kept.
  static WeightedHypergraph from_samples(std::size_t n, std::span<const Hyperedge> samples) {
    std::vector<Hyperedge> edges;
    edges.reserve(samples.size());
    for (const auto& s : samples) edges.push_back(Hyperedge{s.vertices, Rational{1}});
    return WeightedHypergraph(n, std::move(edges));
  }

  std::size_t num_vertices() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Hyperedge>& edges() const { return edges_; }
  const Hyperedge& edge(std::size_t i) const { return edges_[i]; }
  const Rational& total_weight() const { return total_; }

  /// Common denominator D: weight(e) == scaled_weight(e) / D.
  std::int64_t scale() const { return scale_; }
  std::int64_t scaled_weight(std::size_t e) const { return scaled_[e]; }
  std::int64_t scaled_total() const { return scaled_total_; }

  /// Smallest positive edge weight, or nullopt when every weight is zero.
  std::optional<Rational> min_positive_weight() const {
    std::optional<Rational> best;
    for (const auto& e : edges_)
      if (e.weight.is_positive() && (!best || e.weight < *best)) best = e.weight;
    return best;
  }

  /// Integer-scaled induced weight (multiply by 1/scale() for the mass).
  std::int64_t scaled_induced(const VertexSet& s) const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < edges_.size(); ++i)
      if (scaled_[i] != 0 && edges_[i].subset_of(s)) sum += scaled_[i];
    return sum;
  }

  RawHypergraph raw() const { return RawHypergraph{n_, edges_, total_}; }

 private:
  void init(RawHypergraph raw) {
    if (auto v = validate(raw)) throw InvalidHypergraph(*v);
    n_ = raw.n;
    edges_ = std::move(raw.edges);
    total_ = raw.total_weight;
    scale_ = 1;
    for (const auto& e : edges_) {
      std::int64_t g = std::gcd(scale_, e.weight.den());
      scale_ = detail::checked_mul(scale_ / g, e.weight.den());
    }
    scaled_.resize(edges_.size());
    scaled_total_ = 0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& w = edges_[i].weight;
      scaled_[i] = detail::checked_mul(w.num(), scale_ / w.den());
      scaled_total_ = detail::checked_add(scaled_total_, scaled_[i]);
    }
  }

  std::size_t n_ = 0;
  std::vector<Hyperedge> edges_;
  Rational total_;
  std::int64_t scale_ = 1;
  std::vector<std::int64_t> scaled_;
  std::int64_t scaled_total_ = 0;
};

/// e(S): total mass of hyperedges entirely inside S.
inline Rational induced_weight(const WeightedHypergraph& h, const VertexSet& s) {
  return Rational(h.scaled_induced(s), h.scale());
}

/// W - e(S).
inline Rational residual_weight(const WeightedHypergraph& h, const VertexSet& s) {
  return Rational(h.scaled_total() - h.scaled_induced(s), h.scale());
}

/// Union of the supports of all positive-weight hyperedges.
inline VertexSet positive_support(const WeightedHypergraph& h) {
  VertexSet s(h.num_vertices());
  for (const auto& e : h.edges())
    if (e.weight.is_positive())
      for (VertexId v : e.vertices) s.insert(v);
  return s;
}

/// Slack/coverage pair for the bicriteria rounding: epsilon = 1 - tau,
/// rho = kappa / (1 + kappa).
class BicriteriaParams {
 public:
  BicriteriaParams(Rational tau, Rational kappa) : tau_(tau), kappa_(kappa) {
    if (tau < Rational{0} || tau > Rational{1}) throw std::invalid_argument("tau must lie in [0,1]");
    if (!kappa.is_positive()) throw std::invalid_argument("kappa must be positive");
  }
  const Rational& tau() const { return tau_; }
  const Rational& kappa() const { return kappa_; }
  Rational epsilon() const { return Rational{1} - tau_; }
  Rational rho() const { return kappa_ / (Rational{1} + kappa_); }

  friend bool operator==(const BicriteriaParams&, const BicriteriaParams&) = default;

 private:
  Rational tau_;
  Rational kappa_;
};

}  // namespace confsub
