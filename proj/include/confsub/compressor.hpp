#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "confsub/hypergraph.hpp"
#include "confsub/parametric_cut.hpp"
#include "confsub/rational.hpp"

namespace confsub {

class InfeasibleCoverage : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Optimal solution of the covering LP, supported on two consecutive chain
/// sets: x_v = 1 on S-, alpha on S+ \ S-, 0 elsewhere, z_e = min_{v in e} x_v.
struct FractionalSolution {
  std::size_t lower = 0;
  std::size_t upper = 0;
  Rational alpha;
  Rational tau;
  Rational lambda_star;   // multiplier certifying optimality
  Rational lagrangian;    // L(lambda*) = Phi(S-, lambda*)
  Rational objective;     // sum_v x_v

  Rational vertex_value(const NestedChain& c, VertexId v) const {
    if (c.sets[lower].contains(v)) return Rational{1};
    if (c.sets[upper].contains(v)) return alpha;
    return Rational{0};
  }

  Rational edge_value(const NestedChain& c, const Hyperedge& e) const {
    Rational z{1};
    for (VertexId v : e.vertices) z = std::min(z, vertex_value(c, v));
    return z;
  }

  /// sum_e w_e z_e.
  Rational covered_weight(const NestedChain& c, const WeightedHypergraph& h) const {
    Rational sum;
    for (const auto& e : h.edges()) sum += e.weight * edge_value(c, e);
    return sum;
  }

  /// L(lambda*) + lambda* * tau * W; equals objective exactly at the optimum.
  Rational dual_bound(const NestedChain& c) const { return lagrangian + lambda_star * tau * c.total_weight; }
};

/// Throws InfeasibleCoverage if tau is outside [0,1].
inline FractionalSolution fractional_solution(const NestedChain& chain, const Rational& tau) {
  if (tau < Rational{0} || tau > Rational{1}) throw InfeasibleCoverage("tau must lie in [0,1]");
  const Rational target = tau * chain.total_weight;
  if (target > chain.stats.back().induced) throw InfeasibleCoverage("coverage target exceeds the full support");

  std::size_t i = 0;
  while (i + 1 < chain.sets.size() && chain.stats[i + 1].induced <= target) ++i;

  FractionalSolution f;
  f.tau = tau;
  f.lower = i;
  if (chain.stats[i].induced == target) {
    f.upper = i;
    f.alpha = Rational{0};
    f.lambda_star = i == 0 ? Rational{0} : chain.breakpoints[i - 1];
  } else {
    f.upper = i + 1;
    f.alpha = (target - chain.stats[i].induced) / (chain.stats[i + 1].induced - chain.stats[i].induced);
    f.lambda_star = chain.breakpoints[i];
  }
  const auto lo_size = static_cast<std::int64_t>(chain.stats[f.lower].size);
  const auto hi_size = static_cast<std::int64_t>(chain.stats[f.upper].size);
  f.lagrangian = Rational(lo_size) - f.lambda_star * chain.stats[f.lower].induced;
  f.objective = Rational(lo_size) + f.alpha * Rational(hi_size - lo_size);
  return f;
}

/// Threshold rounding {v : x_v >= rho}; returns the chain index it lands on.
inline std::size_t round_fractional(const FractionalSolution& f, const Rational& kappa) {
  Rational rho = kappa / (Rational{1} + kappa);
  return f.alpha >= rho ? f.upper : f.lower;
}

struct Selection {
  VertexSet set;
  std::size_t index = 0;
  Rational residual;
  BicriteriaParams params;
  /// residual <= (1 + kappa) * epsilon * W.
  bool certified = false;
};

namespace detail {

/// Chain set j is admissible at (tau, kappa) when it loses nothing, or strictly
/// less than (1 + kappa) * epsilon * W.
inline bool admissible(const ChainStats& s, const Rational& budget) {
  return s.residual.is_zero() || s.residual < budget;
}

}  // namespace detail

/// K_tau: the smallest chain set whose residual is under the relaxed budget
/// (1 + kappa)(1 - tau) W.
inline Selection select(const NestedChain& chain, const Rational& tau, const Rational& kappa) {
  BicriteriaParams params(tau, kappa);
  const Rational budget = (Rational{1} + kappa) * params.epsilon() * chain.total_weight;
  std::size_t j = 0;
  while (j + 1 < chain.sets.size() && !detail::admissible(chain.stats[j], budget)) ++j;
  Selection s{chain.sets[j], j, chain.stats[j].residual, params, false};
  s.certified = s.residual <= budget;
  return s;
}

/// Compression levels at which select() moves past each chain set:
/// select(tau) has index #{j : step_points[j] <= tau}.
inline std::vector<Rational> step_points(const NestedChain& chain, const Rational& kappa) {
  std::vector<Rational> pts;
  if (chain.sets.size() < 2) return pts;
  const Rational scale = (Rational{1} + kappa) * chain.total_weight;
  for (std::size_t j = 0; j + 1 < chain.sets.size(); ++j)
    pts.push_back(Rational{1} - chain.stats[j].residual / scale);
  return pts;
}

/// min { tau in [0,1] : B inside select(tau).set }, or 1 when even the last
/// chain set misses B.
inline Rational tau_threshold(const NestedChain& chain, const Rational& kappa, std::span<const VertexId> b) {
  auto j = chain.first_containing(b);
  if (!j) return Rational{1};
  if (*j == 0) return Rational{0};
  return step_points(chain, kappa)[*j - 1];
}

}  // namespace confsub
