#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "confsub/baselines.hpp"
#include "confsub/compressor.hpp"
#include "confsub/conformal.hpp"
#include "confsub/hypergraph.hpp"
#include "confsub/rational.hpp"
#include "confsub/rng.hpp"

namespace confsub {

/// Train/test hyperedge samples over one vertex universe.
struct SampleSet {
  std::size_t num_vertices = 0;
  std::vector<Hyperedge> train;
  std::vector<Hyperedge> test;
};

// ---------------------------------------------------------------------------
// Grid routing

struct GridRoutingConfig {
  std::size_t side = 6;
  std::size_t bypass_length = 20;
  double bypass_share = 0.15;
  double weight_lo = 0.1;
  double weight_hi = 2.0;
  std::size_t train = 50;
  std::size_t test = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (side < 2) throw std::invalid_argument("grid side must be at least 2");
    if (bypass_length < 1) throw std::invalid_argument("bypass needs at least one edge");
    if (!(bypass_share >= 0 && bypass_share <= 1)) throw std::invalid_argument("bypass share must lie in [0,1]");
    if (!(weight_lo > 0 && weight_lo <= weight_hi)) throw std::invalid_argument("bad edge weight range");
  }
};

/// Directed grid (moves right or down only) from the top-left node to the
/// bottom-right node. Horizontal edge (r,c)->(r,c+1) has id r*(side-1)+c;
/// vertical edge (r,c)->(r+1,c) has id side*(side-1) + r*side + c. The bypass
/// edges take the next `bypass_length` ids.
class RoutingGrid {
 public:
  explicit RoutingGrid(const GridRoutingConfig& cfg) : side_(cfg.side), bypass_(cfg.bypass_length) {}

  std::size_t side() const { return side_; }
  std::size_t grid_edges() const { return 2 * side_ * (side_ - 1); }
  std::size_t num_vertices() const { return grid_edges() + bypass_; }
  std::size_t right_edge(std::size_t r, std::size_t c) const { return r * (side_ - 1) + c; }
  std::size_t down_edge(std::size_t r, std::size_t c) const { return side_ * (side_ - 1) + r * side_ + c; }

  Hyperedge bypass_route() const {
    std::vector<VertexId> vs;
    for (std::size_t i = 0; i < bypass_; ++i) vs.push_back(static_cast<VertexId>(grid_edges() + i));
    return Hyperedge::canonical(std::move(vs));
  }

  /// Shortest source-target route under `weights` (indexed by grid edge id).
  /// On equal cost the smaller next edge id wins, which makes the chosen
  /// edge sequence the lexicographically smallest shortest one.
  std::vector<std::size_t> shortest_route(const std::vector<double>& weights) const {
    const std::size_t s = side_;
    std::vector<double> togo(s * s, 0.0);
    for (std::size_t r = s; r-- > 0;)
      for (std::size_t c = s; c-- > 0;) {
        if (r == s - 1 && c == s - 1) continue;
        double best = std::numeric_limits<double>::infinity();
        if (c + 1 < s) best = std::min(best, weights[right_edge(r, c)] + togo[r * s + c + 1]);
        if (r + 1 < s) best = std::min(best, weights[down_edge(r, c)] + togo[(r + 1) * s + c]);
        togo[r * s + c] = best;
      }
    std::vector<std::size_t> route;
    std::size_t r = 0, c = 0;
    while (r != s - 1 || c != s - 1) {
      std::optional<std::pair<double, std::size_t>> right, down;
      if (c + 1 < s) right = std::pair{weights[right_edge(r, c)] + togo[r * s + c + 1], right_edge(r, c)};
      if (r + 1 < s) down = std::pair{weights[down_edge(r, c)] + togo[(r + 1) * s + c], down_edge(r, c)};
      bool go_right = right && (!down || *right < *down);
      if (go_right) {
        route.push_back(right->second);
        ++c;
      } else {
        route.push_back(down->second);
        ++r;
      }
    }
    return route;
  }

 private:
  std::size_t side_;
  std::size_t bypass_;
};

struct GridRoutes : SampleSet {
  std::size_t bypass_train = 0;
  std::size_t bypass_test = 0;
};

/// Sample i (train first, then test) uses stream i of the seed: one Bernoulli
/// draw for the bypass, then fresh weights in edge-id order.
inline GridRoutes gen_grid_routes(const GridRoutingConfig& cfg) {
  cfg.validate();
  RoutingGrid grid(cfg);
  GridRoutes out;
  out.num_vertices = grid.num_vertices();
  const CounterRng base(cfg.seed);
  auto draw = [&](std::uint64_t stream, bool& bypass) {
    CounterRng rng = base.split(stream);
    bypass = rng.bernoulli(cfg.bypass_share);
    if (bypass) return grid.bypass_route();
    std::vector<double> w(grid.grid_edges());
    for (auto& x : w) x = rng.uniform(cfg.weight_lo, cfg.weight_hi);
    auto route = grid.shortest_route(w);
    return Hyperedge::canonical(std::vector<VertexId>(route.begin(), route.end()));
  };
  for (std::size_t i = 0; i < cfg.train + cfg.test; ++i) {
    bool bypass = false;
    Hyperedge e = draw(i, bypass);
    if (i < cfg.train) {
      out.bypass_train += bypass;
      out.train.push_back(std::move(e));
    } else {
      out.bypass_test += bypass;
      out.test.push_back(std::move(e));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trip planning with a planted core

struct TripPlanConfig {
  std::size_t types = 5;
  std::size_t per_type = 10;
  Rational alpha{2, 10};
  double tau = 0.8;
  std::size_t train = 100;
  std::size_t test = 100;
  std::uint64_t seed = 0;

  double core_probability() const { return std::pow(tau, 1.0 / static_cast<double>(types)); }
  std::size_t core_per_type() const {
    return static_cast<std::size_t>((alpha * Rational(static_cast<std::int64_t>(per_type))).ceil());
  }
  void validate() const {
    if (types < 1 || per_type < 1) throw std::invalid_argument("need at least one type and one activity");
    if (!(alpha.is_positive() && alpha <= Rational{1})) throw std::invalid_argument("alpha must lie in (0,1]");
    if (!(tau > 0 && tau <= 1)) throw std::invalid_argument("tau must lie in (0,1]");
  }
};

struct TripSamples : SampleSet {
  std::size_t core_per_type = 0;
  std::size_t planted_core_size = 0;
  std::size_t pure_core_train = 0;
  std::size_t pure_core_test = 0;
  bool degenerate_complement = false;  // core fills a type; complement draws fell back to the core
};

/// Activity i of type r is vertex r*per_type + i; the core of each type is
/// its first core_per_type activities.
inline TripSamples gen_trip_samples(const TripPlanConfig& cfg) {
  cfg.validate();
  TripSamples out;
  out.num_vertices = cfg.types * cfg.per_type;
  out.core_per_type = std::min(cfg.core_per_type(), cfg.per_type);
  out.planted_core_size = out.core_per_type * cfg.types;
  const double p = cfg.core_probability();
  const CounterRng base(cfg.seed);
  for (std::size_t i = 0; i < cfg.train + cfg.test; ++i) {
    CounterRng rng = base.split(i);
    std::vector<VertexId> chosen;
    bool pure = true;
    for (std::size_t r = 0; r < cfg.types; ++r) {
      bool core = rng.bernoulli(p);
      if (!core && out.core_per_type == cfg.per_type) {
        core = true;
        out.degenerate_complement = true;
      }
      std::size_t pick = core ? rng.below(out.core_per_type)
                              : out.core_per_type + rng.below(cfg.per_type - out.core_per_type);
      pure = pure && core;
      chosen.push_back(static_cast<VertexId>(r * cfg.per_type + pick));
    }
    Hyperedge e = Hyperedge::canonical(std::move(chosen));
    if (i < cfg.train) {
      out.pure_core_train += pure;
      out.train.push_back(std::move(e));
    } else {
      out.pure_core_test += pure;
      out.test.push_back(std::move(e));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adversarial family: one long path against a few heavy parallel edges

/// Vertices 0..a-1 form one hyperedge of mass eps; vertices a..a+b-1 are
/// singleton hyperedges of mass (1-eps)/b each.
inline WeightedHypergraph gen_adversarial(std::size_t a, std::size_t b, const Rational& eps) {
  if (!(a > b && b >= 1)) throw std::invalid_argument("need a > b >= 1");
  if (!(eps.is_positive() && eps < Rational{1})) throw std::invalid_argument("eps must lie in (0,1)");
  std::vector<Hyperedge> edges;
  std::vector<VertexId> path;
  for (std::size_t v = 0; v < a; ++v) path.push_back(static_cast<VertexId>(v));
  edges.push_back(Hyperedge::canonical(std::move(path), eps));
  const Rational each = (Rational{1} - eps) / Rational(static_cast<std::int64_t>(b));
  for (std::size_t i = 0; i < b; ++i) edges.push_back(Hyperedge::canonical({static_cast<VertexId>(a + i)}, each));
  return WeightedHypergraph(a + b, std::move(edges));
}

// ---------------------------------------------------------------------------
// Comparison harness and result rows

struct ResultRow {
  std::string method;
  Rational phi;
  std::size_t size = 0;
  double coverage = 0;
  std::uint64_t seed = 0;
};

inline const char* kChain = "chain";
inline const char* kForwardGreedy = "forward_greedy";
inline const char* kReverseGreedy = "reverse_greedy";

/// phi = k / steps for k = 0..steps.
inline std::vector<Rational> phi_grid(std::int64_t steps = 20) {
  if (steps < 1) throw std::invalid_argument("phi grid needs at least one step");
  std::vector<Rational> g;
  for (std::int64_t k = 0; k <= steps; ++k) g.emplace_back(k, steps);
  return g;
}

struct ComparisonOptions {
  std::vector<Rational> phis = phi_grid();
  bool chain = true;
  bool forward_greedy = true;
  bool reverse_greedy = true;
  FixedContextOptions chain_options{CoverageRule::kEmpirical, true};
};

/// Chain: nested chain on train, selection by test coverage. Greedy: vertex
/// order from train, stopping on test coverage.
inline std::vector<ResultRow> run_comparison(const SampleSet& s, const ComparisonOptions& opt, std::uint64_t seed) {
  std::vector<ResultRow> rows;
  if (opt.chain) {
    FixedContextModel model(s.train, s.test, s.num_vertices);
    for (const auto& phi : opt.phis) {
      auto fit = model.fit(phi, opt.chain_options);
      rows.push_back({kChain, phi, fit.set.size(),
                      static_cast<double>(fit.covered) / static_cast<double>(fit.held_out), seed});
    }
  }
  if (opt.forward_greedy || opt.reverse_greedy) {
    auto train = WeightedHypergraph::from_samples(s.num_vertices, s.train);
    auto eval = WeightedHypergraph::from_samples(s.num_vertices, s.test);
    auto emit = [&](const char* name, const std::map<Rational, GreedyChoice>& out) {
      for (const auto& [phi, c] : out) rows.push_back({name, phi, c.set.size(), c.coverage.to_double(), seed});
    };
    if (opt.forward_greedy) emit(kForwardGreedy, forward_greedy(train, eval, opt.phis));
    if (opt.reverse_greedy) emit(kReverseGreedy, reverse_greedy(train, eval, opt.phis));
  }
  return rows;
}

/// Chain selector and both greedy baselines on the weighted adversarial
/// instance at target 1 - eps; coverage is measured on the instance itself.
inline std::vector<ResultRow> run_adversarial(std::size_t a, std::size_t b, const Rational& eps,
                                              const Rational& kappa = Rational{1}) {
  auto h = gen_adversarial(a, b, eps);
  const Rational target = Rational{1} - eps;
  std::vector<ResultRow> rows;
  auto sel = select(nested_chain(h), target, kappa);
  rows.push_back({kChain, target, sel.set.size(), (induced_weight(h, sel.set) / h.total_weight()).to_double(), 0});
  std::vector<Rational> phis{target};
  auto f = forward_greedy(h, h, phis).at(target);
  rows.push_back({kForwardGreedy, target, f.set.size(), f.coverage.to_double(), 0});
  auto r = reverse_greedy(h, h, phis).at(target);
  rows.push_back({kReverseGreedy, target, r.set.size(), r.coverage.to_double(), 0});
  return rows;
}

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& x, const ResultRow& y) {
    return std::tie(x.method, x.phi, x.seed) < std::tie(y.method, y.phi, y.seed);
  });
}

/// Per (method, seed): sizes non-decreasing in phi and coverage in [0,1].
/// Returns a description of the first violation.
inline std::optional<std::string> check_rows(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, std::uint64_t>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    if (!(r.coverage >= 0 && r.coverage <= 1))
      return "coverage outside [0,1] for " + r.method + " at phi " + r.phi.to_string();
    groups[{r.method, r.seed}].push_back(&r);
  }
  for (auto& [key, g] : groups) {
    std::sort(g.begin(), g.end(), [](auto* x, auto* y) { return x->phi < y->phi; });
    for (std::size_t i = 1; i < g.size(); ++i)
      if (g[i]->size < g[i - 1]->size)
        return "size not monotone in phi for " + key.first + " seed " + std::to_string(key.second) + " at phi " +
               g[i]->phi.to_string();
  }
  return std::nullopt;
}

/// Median size over seeds for each (method, phi).
inline std::map<std::pair<std::string, Rational>, double> median_sizes(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, Rational>, std::vector<double>> by;
  for (const auto& r : rows) by[{r.method, r.phi}].push_back(static_cast<double>(r.size));
  std::map<std::pair<std::string, Rational>, double> out;
  for (auto& [k, v] : by) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size();
    out[k] = m % 2 ? v[m / 2] : (v[m / 2 - 1] + v[m / 2]) / 2;
  }
  return out;
}

inline std::string format_decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// CSV with header method,phi,size,coverage,seed, rows ordered by (method, phi, seed).
inline void write_csv(std::ostream& os, std::vector<ResultRow> rows) {
  sort_rows(rows);
  os << "method,phi,size,coverage,seed\n";
  for (const auto& r : rows)
    os << r.method << ',' << format_decimal(r.phi.to_double()) << ',' << r.size << ',' << format_decimal(r.coverage)
       << ',' << r.seed << '\n';
}

}  // namespace confsub
