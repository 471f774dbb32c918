#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "confsub/compressor.hpp"
#include "confsub/hypergraph.hpp"
#include "confsub/parametric_cut.hpp"
#include "confsub/rational.hpp"
#include "confsub/rng.hpp"

namespace confsub {

/// One calibration example: model output A and ground truth B for a context.
struct LabeledPair {
  std::size_t context = 0;
  Hyperedge prediction;
  Hyperedge truth;
};

/// |A xor B| for sorted vertex lists.
inline double distance_edge_symdiff(const Hyperedge& a, const Hyperedge& b) {
  std::size_t i = 0, j = 0, diff = 0;
  const auto& x = a.vertices;
  const auto& y = b.vertices;
  while (i < x.size() && j < y.size()) {
    if (x[i] == y[j]) {
      ++i;
      ++j;
    } else if (x[i] < y[j]) {
      ++i;
      ++diff;
    } else {
      ++j;
      ++diff;
    }
  }
  return static_cast<double>(diff + (x.size() - i) + (y.size() - j));
}

struct EdgeSymdiff {
  double operator()(const Hyperedge& a, const Hyperedge& b) const { return distance_edge_symdiff(a, b); }
};

/// ceil(level * (n + 1)), the split-conformal order-statistic rank.
inline std::size_t conformal_rank(const Rational& level, std::size_t n) {
  auto r = (level * Rational(static_cast<std::int64_t>(n) + 1)).ceil();
  return r < 0 ? 0 : static_cast<std::size_t>(r);
}

/// rank-th smallest value (1-based); nullopt when rank exceeds the count.
/// Rank 0 yields `floor_value`.
template <class T>
std::optional<T> order_statistic(std::vector<T> values, std::size_t rank, T floor_value) {
  if (rank == 0) return floor_value;
  if (rank > values.size()) return std::nullopt;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

struct Stage1Result {
  double d_star = 0;  // +inf when the rank overflows
  std::size_t rank = 0;
  bool overflow = false;
  std::vector<double> scores;
};

/// d* = ceil((1 - delta)(|D1| + 1))-th smallest distance score.
template <class Distance = EdgeSymdiff>
Stage1Result calibrate_stage1(std::span<const LabeledPair> d1, const Rational& delta, Distance f = {}) {
  if (d1.empty()) throw std::invalid_argument("stage 1 needs at least one calibration pair");
  if (!(delta.is_positive() && delta < Rational{1})) throw std::invalid_argument("delta must lie in (0,1)");
  Stage1Result r;
  r.scores.reserve(d1.size());
  for (const auto& p : d1) r.scores.push_back(f(p.prediction, p.truth));
  r.rank = conformal_rank(Rational{1} - delta, d1.size());
  auto q = order_statistic(r.scores, r.rank, 0.0);
  r.overflow = !q.has_value();
  r.d_star = q.value_or(std::numeric_limits<double>::infinity());
  return r;
}

struct EtaScore {
  Rational value;
  bool censored = false;  // B outside S_{d*}(A); value is then 1
};

/// FNV-1a over the chain's sets and breakpoints; identifies a chain in
/// serialized calibration state without storing it.
inline std::uint64_t chain_digest(const NestedChain& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(c.universe);
  for (const auto& s : c.sets) {
    mix(0xFFFFFFFFULL);
    for (VertexId v : s.members()) mix(v);
  }
  for (const auto& b : c.breakpoints) {
    mix(static_cast<std::uint64_t>(b.num()));
    mix(static_cast<std::uint64_t>(b.den()));
  }
  return h;
}

struct Stage2Result {
  Rational tau_star{1};
  std::size_t rank = 0;
  bool overflow = false;
  std::vector<EtaScore> eta;
  std::map<std::size_t, std::uint64_t> chain_digests;
};

/// Compression calibration. `source(pair, d_star)` returns the weighted
/// hyperedge family standing for S_{d*}(A) in that pair's context.
template <class EdgeSource, class Distance = EdgeSymdiff>
Stage2Result calibrate_stage2(std::span<const LabeledPair> d2, double d_star, const Rational& phi,
                              const Rational& kappa, EdgeSource&& source, Distance f = {}) {
  if (!kappa.is_positive()) throw std::invalid_argument("kappa must be positive");
  Stage2Result r;
  r.eta.reserve(d2.size());
  for (const auto& p : d2) {
    if (!(f(p.prediction, p.truth) <= d_star)) {
      r.eta.push_back({Rational{1}, true});
      continue;
    }
    WeightedHypergraph family = source(p, d_star);
    NestedChain chain = nested_chain(family);
    r.chain_digests[p.context] = chain_digest(chain);
    r.eta.push_back({tau_threshold(chain, kappa, p.truth.vertices), false});
  }
  if (d2.empty()) return r;
  std::vector<Rational> values;
  values.reserve(r.eta.size());
  for (const auto& e : r.eta) values.push_back(e.value);
  r.rank = conformal_rank(phi, d2.size());
  auto q = order_statistic(values, r.rank, Rational{0});
  r.overflow = !q.has_value();
  r.tau_star = q.value_or(Rational{1});
  return r;
}

struct CalibrationState {
  double d_star = std::numeric_limits<double>::infinity();
  Rational tau_star{1};
  Rational phi;
  Rational delta;
  Rational kappa{1};
  std::size_t d1_size = 0;
  std::size_t d2_size = 0;
  bool stage1_overflow = false;
  bool stage2_overflow = false;
  std::vector<EtaScore> eta;
  std::map<std::size_t, std::uint64_t> chain_digests;
};

/// Default miscoverage budget for stage 1 when the caller has no preference.
inline Rational default_delta(const Rational& phi) { return phi * Rational(1, 20); }

template <class EdgeSource, class Distance = EdgeSymdiff>
CalibrationState calibrate(std::span<const LabeledPair> d1, std::span<const LabeledPair> d2, const Rational& phi,
                           const Rational& delta, const Rational& kappa, EdgeSource&& source, Distance f = {}) {
  CalibrationState st;
  st.phi = phi;
  st.delta = delta;
  st.kappa = kappa;
  st.d1_size = d1.size();
  st.d2_size = d2.size();
  auto s1 = calibrate_stage1(d1, delta, f);
  st.d_star = s1.d_star;
  st.stage1_overflow = s1.overflow;
  auto s2 = calibrate_stage2(d2, st.d_star, phi, kappa, source, f);
  st.tau_star = s2.tau_star;
  st.stage2_overflow = s2.overflow;
  st.eta = std::move(s2.eta);
  st.chain_digests = std::move(s2.chain_digests);
  return st;
}

/// K_{tau*}(A*) for the family standing for S_{d*}(A*).
inline VertexSet predict(const WeightedHypergraph& family, const CalibrationState& st) {
  return select(nested_chain(family), st.tau_star, st.kappa).set;
}

/// Edge source over explicitly enumerated candidates per context: keeps the
/// candidates within distance d* of the prediction, each with mass 1/M. When
/// more than `max_edges` survive (0 = no cap), an i.i.d. uniform sample of
/// `max_edges` of them is used instead, drawn from stream `context` of `seed`.
template <class Distance = EdgeSymdiff>
class EnumeratedEdgeSource {
 public:
  struct Context {
    std::size_t num_vertices = 0;
    std::vector<Hyperedge> candidates;
  };

  EnumeratedEdgeSource(std::map<std::size_t, Context> contexts, std::size_t max_edges = 0, std::uint64_t seed = 0,
                       Distance f = {})
      : contexts_(std::move(contexts)), max_edges_(max_edges), seed_(seed), f_(f) {}

  WeightedHypergraph operator()(const LabeledPair& p, double d_star) const {
    auto it = contexts_.find(p.context);
    if (it == contexts_.end()) throw std::out_of_range("unknown context " + std::to_string(p.context));
    std::vector<const Hyperedge*> kept;
    for (const auto& c : it->second.candidates)
      if (f_(p.prediction, c) <= d_star) kept.push_back(&c);
    if (max_edges_ > 0 && kept.size() > max_edges_) {
      CounterRng rng(seed_, p.context);
      std::vector<const Hyperedge*> drawn;
      drawn.reserve(max_edges_);
      for (std::size_t i = 0; i < max_edges_; ++i) drawn.push_back(kept[rng.below(kept.size())]);
      kept = std::move(drawn);
    }
    std::vector<Hyperedge> edges;
    edges.reserve(kept.size());
    Rational w(1, static_cast<std::int64_t>(std::max<std::size_t>(kept.size(), 1)));
    for (const auto* c : kept) edges.push_back(Hyperedge{c->vertices, w});
    return WeightedHypergraph(it->second.num_vertices, std::move(edges));
  }

  const std::map<std::size_t, Context>& contexts() const { return contexts_; }

 private:
  std::map<std::size_t, Context> contexts_;
  std::size_t max_edges_;
  std::uint64_t seed_;
  Distance f_;
};

// ---------------------------------------------------------------------------
// Fixed-context split procedure.

enum class CoverageRule {
  kConformal,  // need ceil(phi (n + 1)) of n held-out samples covered
  kEmpirical,  // need ceil(phi n), i.e. held-out coverage >= phi
};

inline std::size_t required_count(const Rational& phi, std::size_t n, CoverageRule rule) {
  std::int64_t base = static_cast<std::int64_t>(n) + (rule == CoverageRule::kConformal ? 1 : 0);
  auto r = (phi * Rational(base)).ceil();
  return r < 0 ? 0 : static_cast<std::size_t>(r);
}

struct FixedContextOptions {
  CoverageRule rule = CoverageRule::kConformal;
  /// Delete vertices from the last chain layer while coverage allows.
  bool refine_last_layer = true;
};

struct FixedContextFit {
  VertexSet set;
  std::size_t chain_index = 0;  // chain set the selection was taken from
  std::size_t required = 0;     // held-out samples that must be covered
  std::size_t covered = 0;      // held-out samples actually covered
  std::size_t held_out = 0;
  bool overflow = false;   // required > held_out; whole universe returned
  bool augmented = false;  // last chain set under-covered; vertices appended
};

/// Split-conformal compression in a fixed context. The first half of the
/// samples builds the chain and a fixed vertex order (chain layers in
/// sequence; inside a layer by descending count of first-half samples the
/// vertex completes, ties by ascending id; then every vertex outside the
/// chain in the same order). The second half picks the smallest chain set
/// reaching the required coverage and then trims that set's last layer from
/// the end of the order while coverage holds. Every candidate output is a
/// prefix of the fixed order, so the family searched is nested and depends
/// on the first half only.
class FixedContextModel {
 public:
  FixedContextModel(std::span<const Hyperedge> samples, std::size_t num_vertices)
      : FixedContextModel(checked_first_half(samples), samples.subspan(samples.size() / 2), num_vertices) {}

  /// Explicit split: `first` builds the chain and order, `second` is held out.
  FixedContextModel(std::span<const Hyperedge> first, std::span<const Hyperedge> second, std::size_t num_vertices)
      : n_(num_vertices) {
    if (first.empty() || second.empty()) throw std::invalid_argument("fixed-context fit needs both halves non-empty");
    for (auto part : {first, second})
      for (const auto& s : part)
        for (VertexId v : s.vertices)
          if (v >= n_) throw std::out_of_range("sample vertex outside universe");

    chain_ = nested_chain(WeightedHypergraph::from_samples(n_, first));

    std::vector<std::size_t> contribution(n_, 0);
    std::vector<std::size_t> layer_of(n_, chain_.sets.size());
    for (std::size_t j = chain_.sets.size(); j-- > 0;)
      for (VertexId v : chain_.sets[j].members()) layer_of[v] = j;
    for (const auto& y : first) {
      std::size_t completes = 0;  // first chain layer containing all of y
      for (VertexId v : y.vertices) completes = std::max(completes, layer_of[v]);
      for (VertexId v : y.vertices)
        if (layer_of[v] == completes || completes == chain_.sets.size()) ++contribution[v];
    }
    order_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) order_[v] = static_cast<VertexId>(v);
    std::sort(order_.begin(), order_.end(), [&](VertexId a, VertexId b) {
      if (layer_of[a] != layer_of[b]) return layer_of[a] < layer_of[b];
      if (contribution[a] != contribution[b]) return contribution[a] > contribution[b];
      return a < b;
    });
    std::vector<std::size_t> pos(n_);
    for (std::size_t i = 0; i < n_; ++i) pos[order_[i]] = i;

    // A held-out sample is covered by the prefix of length L iff L >= need.
    needs_.reserve(second.size());
    for (const auto& y : second) {
      std::size_t need = 0;
      for (VertexId v : y.vertices) need = std::max(need, pos[v] + 1);
      needs_.push_back(need);
    }
    std::sort(needs_.begin(), needs_.end());
  }

  const NestedChain& chain() const { return chain_; }
  const std::vector<VertexId>& order() const { return order_; }
  std::size_t held_out() const { return needs_.size(); }

  /// Held-out samples covered by the first `length` vertices of the order.
  std::size_t coverage_of_prefix(std::size_t length) const {
    return static_cast<std::size_t>(std::upper_bound(needs_.begin(), needs_.end(), length) - needs_.begin());
  }

  FixedContextFit fit(const Rational& phi, const FixedContextOptions& opt = {}) const {
    if (phi < Rational{0} || phi > Rational{1}) throw std::invalid_argument("phi must lie in [0,1]");
    FixedContextFit out;
    out.held_out = needs_.size();
    out.required = required_count(phi, needs_.size(), opt.rule);
    std::size_t length;
    if (out.required > needs_.size()) {
      out.overflow = true;
      out.chain_index = chain_.length();
      length = n_;
    } else {
      std::size_t i = 0;
      while (i < chain_.sets.size() && coverage_of_prefix(chain_.stats[i].size) < out.required) ++i;
      if (i == chain_.sets.size()) {
        out.augmented = true;
        out.chain_index = chain_.length();
        length = chain_.stats.back().size;
        while (coverage_of_prefix(length) < out.required) ++length;
      } else {
        out.chain_index = i;
        length = chain_.stats[i].size;
        if (opt.refine_last_layer && i > 0) {
          const std::size_t floor_len = chain_.stats[i - 1].size;
          while (length > floor_len && coverage_of_prefix(length - 1) >= out.required) --length;
        }
      }
    }
    out.set = VertexSet(n_);
    for (std::size_t k = 0; k < length; ++k) out.set.insert(order_[k]);
    out.covered = coverage_of_prefix(length);
    return out;
  }

 private:
  static std::span<const Hyperedge> checked_first_half(std::span<const Hyperedge> samples) {
    if (samples.size() < 2) throw std::invalid_argument("fixed-context fit needs at least two samples");
    return samples.first(samples.size() / 2);
  }

  std::size_t n_;
  NestedChain chain_;
  std::vector<VertexId> order_;
  std::vector<std::size_t> needs_;
};

inline FixedContextFit fixed_context_fit(std::span<const Hyperedge> samples, const Rational& phi,
                                         std::size_t num_vertices, const FixedContextOptions& opt = {}) {
  return FixedContextModel(samples, num_vertices).fit(phi, opt);
}

}  // namespace confsub
