#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "confsub/confsub.hpp"
#include "confsub/io.hpp"

using namespace confsub;
using io::Json;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kInvariantFailure = 2;

struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rational parse_arg(const std::string& text, const char* name) {
  try {
    return Rational::parse(text);
  } catch (const std::exception& e) {
    throw io::ParseError(std::string("--") + name, e.what());
  }
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") std::cout << text;
  else io::write_file(out, text);
}

std::uint64_t default_seed() {
  if (const char* s = std::getenv("CONFSUB_SEED")) return std::strtoull(s, nullptr, 10);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_chain(const std::string& in, const std::string& out) {
  auto inst = io::instance_from_json(io::load_json(in));
  auto chain = nested_chain(inst.graph);
  if (auto bad = check_chain(chain)) throw InvariantFailure("chain: " + *bad);
  emit(out, io::dump(io::chain_to_json(chain)));
  return kOk;
}

int cmd_compress(const std::string& in, const std::string& tau_s, const std::string& kappa_s, const std::string& out) {
  Rational tau = parse_arg(tau_s, "tau");
  Rational kappa = parse_arg(kappa_s, "kappa");
  if (tau < Rational{0} || tau > Rational{1}) throw io::ParseError("--tau", "must lie in [0,1]");
  if (!kappa.is_positive()) throw io::ParseError("--kappa", "must be positive");
  Json doc = io::load_json(in);
  NestedChain chain = doc.contains("sets") ? io::chain_from_json(doc)
                                           : nested_chain(io::instance_from_json(doc).graph);
  auto sel = select(chain, tau, kappa);
  const Rational budget = (Rational{1} + kappa) * sel.params.epsilon() * chain.total_weight;
  Json j;
  j["tau"] = tau.to_string();
  j["kappa"] = kappa.to_string();
  j["set"] = io::ids_json(sel.set.members());
  j["size"] = sel.set.size();
  j["chain_index"] = sel.index;
  j["residual"] = sel.residual.to_string();
  j["residual_budget"] = budget.to_string();
  j["certified"] = sel.certified;
  auto f = fractional_solution(chain, tau);
  j["fractional"] = {{"lower", f.lower},
                     {"upper", f.upper},
                     {"alpha", f.alpha.to_string()},
                     {"lambda_star", f.lambda_star.to_string()},
                     {"objective", f.objective.to_string()},
                     {"dual_bound", f.dual_bound(chain).to_string()}};
  emit(out, io::dump(j));
  if (!sel.certified) {
    std::cerr << "note: no chain set meets the residual budget; returned the last chain set\n";
  }
  if (f.objective != f.dual_bound(chain)) throw InvariantFailure("fractional objective differs from dual bound");
  return kOk;
}

int cmd_calibrate(const std::string& in, const std::string& phi_s, const std::string& delta_s,
                  const std::string& kappa_s, const std::string& distance, std::size_t max_candidates,
                  std::uint64_t seed, const std::string& out) {
  if (distance != "symdiff") throw io::ParseError("--distance", "unknown distance '" + distance + "'");
  Rational phi = parse_arg(phi_s, "phi");
  if (phi < Rational{0} || phi > Rational{1}) throw io::ParseError("--phi", "must lie in [0,1]");
  Rational delta = delta_s.empty() ? default_delta(phi) : parse_arg(delta_s, "delta");
  Rational kappa = parse_arg(kappa_s, "kappa");
  if (!kappa.is_positive()) throw io::ParseError("--kappa", "must be positive");
  auto pairs = io::pairs_from_json(io::load_json(in));
  if (pairs.d1.empty()) throw io::ParseError("/d1", "needs at least one pair");

  using Source = EnumeratedEdgeSource<EdgeSymdiff>;
  std::map<std::size_t, Source::Context> contexts;
  for (const auto& [id, ctx] : pairs.contexts) contexts[id] = Source::Context{ctx.first, ctx.second};
  Source source(std::move(contexts), max_candidates, seed);
  auto st = calibrate(pairs.d1, pairs.d2, phi, delta, kappa, source);

  Json j = io::calibration_to_json(st);
  if (!pairs.test.empty()) {
    std::size_t covered = 0;
    for (const auto& p : pairs.test) {
      auto family = source(p, st.d_star);
      if (family.num_edges() == 0) continue;
      if (p.truth.subset_of(predict(family, st))) ++covered;
    }
    j["test"] = {{"count", pairs.test.size()},
                 {"covered", covered},
                 {"coverage", static_cast<double>(covered) / pairs.test.size()}};
  }
  emit(out, io::dump(j));
  if (st.stage1_overflow) std::cerr << "note: stage 1 rank exceeds |D1|; d* = inf\n";
  if (st.stage2_overflow) std::cerr << "note: stage 2 rank exceeds |D2|; tau* = 1\n";
  return kOk;
}

int cmd_fixed(const std::string& in, const std::string& phi_s, const std::string& rule, bool no_refine,
              const std::string& out) {
  Rational phi = parse_arg(phi_s, "phi");
  if (phi < Rational{0} || phi > Rational{1}) throw io::ParseError("--phi", "must lie in [0,1]");
  FixedContextOptions opt;
  if (rule == "conformal") opt.rule = CoverageRule::kConformal;
  else if (rule == "empirical") opt.rule = CoverageRule::kEmpirical;
  else throw io::ParseError("--rule", "expected conformal or empirical");
  opt.refine_last_layer = !no_refine;
  auto f = io::samples_from_json(io::load_json(in));
  if (f.samples.size() < 2) throw io::ParseError("/samples", "needs at least two samples");
  auto fit = fixed_context_fit(f.samples, phi, f.n, opt);
  Json j;
  j["phi"] = phi.to_string();
  j["set"] = io::ids_json(fit.set.members());
  j["size"] = fit.set.size();
  j["chain_index"] = fit.chain_index;
  j["required"] = fit.required;
  j["covered"] = fit.covered;
  j["held_out"] = fit.held_out;
  j["overflow"] = fit.overflow;
  j["augmented"] = fit.augmented;
  if (!f.test.empty()) {
    std::size_t covered = 0;
    for (const auto& y : f.test) covered += y.subset_of(fit.set);
    j["test"] = {{"count", f.test.size()}, {"covered", covered}};
  }
  emit(out, io::dump(j));
  if (fit.overflow) std::cerr << "note: required count exceeds held-out size; returned the whole universe\n";
  if (fit.covered < fit.required && !fit.overflow) throw InvariantFailure("fixed-context fit under-covers");
  return kOk;
}

struct ExperimentArgs {
  std::string kind;
  std::size_t seeds = 10;
  std::uint64_t seed_base = 0;
  std::int64_t phi_steps = 20;
  std::string out;
  GridRoutingConfig grid;
  TripPlanConfig trip;
  std::string alpha = "1/5";
  bool trip_refine = false;
  std::size_t a = 30, b = 3;
  std::string eps = "1/5";
  std::string kappa = "1";
};

int cmd_experiment(ExperimentArgs& args) {
  std::vector<ResultRow> rows;
  std::optional<std::string> failure;
  if (args.kind == "adversarial") {
    Rational eps = parse_arg(args.eps, "eps");
    Rational kappa = parse_arg(args.kappa, "kappa");
    if (!kappa.is_positive()) throw io::ParseError("--kappa", "must be positive");
    rows = run_adversarial(args.a, args.b, eps, kappa);
    if (Rational{1} + kappa <= (Rational{1} - eps) / eps) {
      for (const auto& r : rows) {
        if (r.method == kChain && r.size != args.b) failure = "chain size " + std::to_string(r.size) + " != b";
        if (r.method == kReverseGreedy && r.size < args.a) failure = "reverse greedy size below a";
      }
    }
  } else if (args.kind == "grid" || args.kind == "trip") {
    ComparisonOptions opt;
    opt.phis = phi_grid(args.phi_steps);
    if (args.kind == "trip") {
      args.trip.alpha = parse_arg(args.alpha, "alpha");
      opt.forward_greedy = opt.reverse_greedy = false;
      opt.chain_options.refine_last_layer = args.trip_refine;
    }
    for (std::size_t i = 0; i < args.seeds; ++i) {
      const std::uint64_t seed = args.seed_base + i;
      if (args.kind == "grid") {
        args.grid.seed = seed;
        auto s = gen_grid_routes(args.grid);
        std::cerr << "seed " << seed << ": bypass routes " << s.bypass_train << " train, " << s.bypass_test
                  << " test\n";
        auto r = run_comparison(s, opt, seed);
        rows.insert(rows.end(), r.begin(), r.end());
      } else {
        args.trip.seed = seed;
        auto s = gen_trip_samples(args.trip);
        if (s.planted_core_size != s.core_per_type * args.trip.types) failure = "planted core bookkeeping";
        std::cerr << "seed " << seed << ": planted core size " << s.planted_core_size << ", pure-core samples "
                  << s.pure_core_train << " train, " << s.pure_core_test << " test"
                  << (s.degenerate_complement ? " (complement draws fell back to core)" : "") << "\n";
        auto r = run_comparison(s, opt, seed);
        rows.insert(rows.end(), r.begin(), r.end());
      }
    }
  } else {
    throw io::ParseError("kind", "expected grid, trip or adversarial");
  }
  if (!failure) failure = check_rows(rows);
  std::ostringstream csv;
  write_csv(csv, rows);
  emit(args.out, csv.str());
  if (failure) throw InvariantFailure(*failure);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested-chain conformal subgraph compression"};
  app.require_subcommand(1);

  std::string in, out, tau = "1", kappa = "1", phi, delta, distance = "symdiff", rule = "conformal";
  std::size_t max_candidates = 0;
  std::uint64_t seed = default_seed();
  bool no_refine = false;

  auto* chain = app.add_subcommand("chain", "Compute the nested chain of an instance");
  chain->add_option("instance", in, "Instance JSON")->required();
  chain->add_option("-o,--out", out, "Output path (default stdout)");

  auto* compress = app.add_subcommand("compress", "Select the compressed set for a coverage level");
  compress->add_option("input", in, "Chain or instance JSON")->required();
  compress->add_option("--tau", tau, "Coverage level in [0,1]")->required();
  compress->add_option("--kappa", kappa, "Slack (default 1)");
  compress->add_option("-o,--out", out, "Output path (default stdout)");

  auto* calib = app.add_subcommand("calibrate", "Two-stage split-conformal calibration");
  calib->add_option("pairs", in, "Pairs JSON")->required();
  calib->add_option("--phi", phi, "Target coverage")->required();
  calib->add_option("--delta", delta, "Stage-1 miscoverage (default phi/20)");
  calib->add_option("--kappa", kappa, "Slack (default 1)");
  calib->add_option("--distance", distance, "Distance function (symdiff)");
  calib->add_option("--max-candidates", max_candidates, "Subsample cap per context (0 = none)");
  calib->add_option("--seed", seed, "Seed (default $CONFSUB_SEED or 0)");
  calib->add_option("-o,--out", out, "Output path (default stdout)");

  auto* fixed = app.add_subcommand("fixed", "Fixed-context split procedure");
  fixed->add_option("samples", in, "Samples JSON")->required();
  fixed->add_option("--phi", phi, "Target coverage")->required();
  fixed->add_option("--rule", rule, "conformal or empirical");
  fixed->add_flag("--no-refine", no_refine, "Skip trimming the last chain layer");
  fixed->add_option("-o,--out", out, "Output path (default stdout)");

  ExperimentArgs ex;
  ex.seed_base = default_seed();
  auto* exp = app.add_subcommand("experiment", "Synthetic experiments, CSV output");
  exp->add_option("kind", ex.kind, "grid, trip or adversarial")->required();
  exp->add_option("--seeds", ex.seeds, "Number of seeds");
  exp->add_option("--seed", ex.seed_base, "First seed (default $CONFSUB_SEED or 0)");
  exp->add_option("--phi-grid", ex.phi_steps, "Phi grid steps (phi = k/steps)");
  exp->add_option("--side", ex.grid.side, "Grid side");
  exp->add_option("--bypass-length", ex.grid.bypass_length, "Bypass edges");
  exp->add_option("--bypass-share", ex.grid.bypass_share, "Bypass traffic share");
  exp->add_option("--alpha", ex.alpha, "Trip core density");
  exp->add_option("--tau", ex.trip.tau, "Trip planted core mass");
  exp->add_option("--types", ex.trip.types, "Trip activity types");
  exp->add_option("--per-type", ex.trip.per_type, "Trip activities per type");
  exp->add_flag("--trip-refine", ex.trip_refine, "Trim the last chain layer in the trip experiment");
  exp->add_option("--train", ex.grid.train, "Train samples")->each([&](const std::string& s) {
    ex.trip.train = std::stoul(s);
  });
  exp->add_option("--test", ex.grid.test, "Test samples")->each([&](const std::string& s) {
    ex.trip.test = std::stoul(s);
  });
  exp->add_option("--a", ex.a, "Adversarial path length");
  exp->add_option("--b", ex.b, "Adversarial parallel edges");
  exp->add_option("--eps", ex.eps, "Adversarial path mass");
  exp->add_option("--kappa", ex.kappa, "Adversarial slack");
  exp->add_option("-o,--out", ex.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*chain) return cmd_chain(in, out);
    if (*compress) return cmd_compress(in, tau, kappa, out);
    if (*calib) return cmd_calibrate(in, phi, delta, kappa, distance, max_candidates, seed, out);
    if (*fixed) return cmd_fixed(in, phi, rule, no_refine, out);
    if (*exp) return cmd_experiment(ex);
  } catch (const InvariantFailure& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const std::logic_error& e) {
    // Internal consistency checks inside the library throw logic_error.
    if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e) ||
        dynamic_cast<const std::out_of_range*>(&e)) {
      std::cerr << "error: " << e.what() << "\n";
      return kInputError;
    }
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
