#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "confsub/conformal.hpp"
#include "confsub/hypergraph.hpp"
#include "confsub/parametric_cut.hpp"
#include "confsub/rational.hpp"

namespace confsub::io {

using Json = nlohmann::json;

/// Malformed input; `field` is a JSON-pointer-like path to the offending value.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline Json parse_text(const std::string& text, const std::string& origin = "") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(origin, "invalid JSON at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json load_json(const std::string& path) { return parse_text(read_file(path), path); }

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// field helpers

inline const Json& require(const Json& j, const char* key, const std::string& at) {
  if (!j.is_object()) throw ParseError(at, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(at + "/" + key, "missing field");
  return *it;
}

inline std::uint64_t as_count(const Json& j, const std::string& at) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ParseError(at, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline Rational as_rational(const Json& j, const std::string& at) {
  try {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  } catch (const std::exception& e) {
    throw ParseError(at, e.what());
  }
  throw ParseError(at, "expected an exact rational string like \"3/10\" or an integer");
}

inline std::vector<VertexId> as_ids(const Json& j, const std::string& at) {
  if (!j.is_array()) throw ParseError(at, "expected an array of vertex ids");
  std::vector<VertexId> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto v = as_count(j[i], at + "/" + std::to_string(i));
    if (v > std::numeric_limits<VertexId>::max()) throw ParseError(at + "/" + std::to_string(i), "vertex id too large");
    out.push_back(static_cast<VertexId>(v));
  }
  return out;
}

inline Json ids_json(std::span<const VertexId> ids) { return Json(std::vector<VertexId>(ids.begin(), ids.end())); }

// ---------------------------------------------------------------------------
// Instance files: {n, vertices?, edges: [{v, w}], total_weight?}

struct Instance {
  WeightedHypergraph graph;
  std::vector<std::string> labels;
};

inline Instance instance_from_json(const Json& j) {
  const std::size_t n = as_count(require(j, "n", ""), "/n");
  const Json& edges = require(j, "edges", "");
  if (!edges.is_array()) throw ParseError("/edges", "expected an array");
  RawHypergraph raw;
  raw.n = n;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string at = "/edges/" + std::to_string(i);
    Hyperedge e;
    e.vertices = as_ids(require(edges[i], "v", at), at + "/v");
    e.weight = edges[i].contains("w") ? as_rational(edges[i]["w"], at + "/w") : Rational{1};
    raw.total_weight += e.weight;
    raw.edges.push_back(std::move(e));
  }
  if (j.contains("total_weight")) raw.total_weight = as_rational(j["total_weight"], "/total_weight");
  if (auto bad = validate(raw)) {
    std::string at = bad->kind == ViolationKind::kTotalWeightMismatch ? "/total_weight"
                                                                      : "/edges/" + std::to_string(bad->edge_index.value_or(0));
    throw ParseError(at, std::string(to_string(bad->kind)) + ": " + bad->message);
  }
  Instance inst{WeightedHypergraph::from_raw(std::move(raw)), {}};
  if (j.contains("vertices")) {
    const Json& labels = j["vertices"];
    if (!labels.is_array() || labels.size() != n) throw ParseError("/vertices", "expected n labels");
    for (std::size_t i = 0; i < n; ++i) {
      if (!labels[i].is_string()) throw ParseError("/vertices/" + std::to_string(i), "expected a string");
      inst.labels.push_back(labels[i].get<std::string>());
    }
  }
  return inst;
}

inline Json instance_to_json(const Instance& inst) {
  Json j;
  j["n"] = inst.graph.num_vertices();
  if (!inst.labels.empty()) j["vertices"] = inst.labels;
  Json edges = Json::array();
  for (const auto& e : inst.graph.edges()) edges.push_back({{"v", ids_json(e.vertices)}, {"w", e.weight.to_string()}});
  j["edges"] = std::move(edges);
  j["total_weight"] = inst.graph.total_weight().to_string();
  return j;
}

// ---------------------------------------------------------------------------
// Chain files: {universe, total_weight, sets, breakpoints, stats}

inline Json chain_to_json(const NestedChain& c) {
  Json j;
  j["universe"] = c.universe;
  j["total_weight"] = c.total_weight.to_string();
  Json sets = Json::array();
  for (const auto& s : c.sets) sets.push_back(ids_json(s.members()));
  j["sets"] = std::move(sets);
  Json bps = Json::array();
  for (const auto& b : c.breakpoints) bps.push_back(b.to_string());
  j["breakpoints"] = std::move(bps);
  Json stats = Json::array();
  for (const auto& s : c.stats)
    stats.push_back({{"size", s.size}, {"induced", s.induced.to_string()}, {"residual", s.residual.to_string()}});
  j["stats"] = std::move(stats);
  return j;
}

inline NestedChain chain_from_json(const Json& j) {
  NestedChain c;
  c.universe = as_count(require(j, "universe", ""), "/universe");
  c.total_weight = as_rational(require(j, "total_weight", ""), "/total_weight");
  const Json& sets = require(j, "sets", "");
  const Json& bps = require(j, "breakpoints", "");
  const Json& stats = require(j, "stats", "");
  if (!sets.is_array() || !bps.is_array() || !stats.is_array()) throw ParseError("", "sets, breakpoints and stats must be arrays");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const std::string at = "/sets/" + std::to_string(i);
    auto ids = as_ids(sets[i], at);
    VertexSet s(c.universe);
    for (VertexId v : ids) {
      if (v >= c.universe) throw ParseError(at, "vertex id outside universe");
      s.insert(v);
    }
    c.sets.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < bps.size(); ++i) c.breakpoints.push_back(as_rational(bps[i], "/breakpoints/" + std::to_string(i)));
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const std::string at = "/stats/" + std::to_string(i);
    ChainStats s;
    s.size = as_count(require(stats[i], "size", at), at + "/size");
    s.induced = as_rational(require(stats[i], "induced", at), at + "/induced");
    s.residual = as_rational(require(stats[i], "residual", at), at + "/residual");
    c.stats.push_back(s);
  }
  if (auto bad = check_chain(c)) throw ParseError("", "inconsistent chain: " + *bad);
  return c;
}

// ---------------------------------------------------------------------------
// Calibration state

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline Json calibration_to_json(const CalibrationState& st) {
  Json j;
  if (std::isinf(st.d_star)) j["d_star"] = "inf";
  else j["d_star"] = st.d_star;
  j["tau_star"] = st.tau_star.to_string();
  j["phi"] = st.phi.to_string();
  j["delta"] = st.delta.to_string();
  j["kappa"] = st.kappa.to_string();
  j["d1_size"] = st.d1_size;
  j["d2_size"] = st.d2_size;
  j["stage1_overflow"] = st.stage1_overflow;
  j["stage2_overflow"] = st.stage2_overflow;
  Json eta = Json::array();
  for (const auto& e : st.eta) eta.push_back({{"value", e.value.to_string()}, {"censored", e.censored}});
  j["eta"] = std::move(eta);
  Json digests = Json::object();
  for (const auto& [ctx, d] : st.chain_digests) digests[std::to_string(ctx)] = hex64(d);
  j["chain_digests"] = std::move(digests);
  return j;
}

inline CalibrationState calibration_from_json(const Json& j) {
  CalibrationState st;
  const Json& d = require(j, "d_star", "");
  if (d.is_string() && d.get<std::string>() == "inf") st.d_star = std::numeric_limits<double>::infinity();
  else if (d.is_number()) st.d_star = d.get<double>();
  else throw ParseError("/d_star", "expected a number or \"inf\"");
  st.tau_star = as_rational(require(j, "tau_star", ""), "/tau_star");
  st.phi = as_rational(require(j, "phi", ""), "/phi");
  st.delta = as_rational(require(j, "delta", ""), "/delta");
  st.kappa = as_rational(require(j, "kappa", ""), "/kappa");
  st.d1_size = as_count(require(j, "d1_size", ""), "/d1_size");
  st.d2_size = as_count(require(j, "d2_size", ""), "/d2_size");
  st.stage1_overflow = require(j, "stage1_overflow", "").get<bool>();
  st.stage2_overflow = require(j, "stage2_overflow", "").get<bool>();
  const Json& eta = require(j, "eta", "");
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const std::string at = "/eta/" + std::to_string(i);
    st.eta.push_back({as_rational(require(eta[i], "value", at), at + "/value"), require(eta[i], "censored", at).get<bool>()});
  }
  for (const auto& [k, v] : require(j, "chain_digests", "").items())
    st.chain_digests[std::stoull(k)] = std::stoull(v.get<std::string>(), nullptr, 16);
  return st;
}

// ---------------------------------------------------------------------------
// Calibration pairs: {contexts: [{id, n, candidates}], d1: [...], d2: [...], test?: [...]}
// where each pair is {context, prediction, truth}.

struct PairsFile {
  std::map<std::size_t, std::pair<std::size_t, std::vector<Hyperedge>>> contexts;  // id -> (n, candidates)
  std::vector<LabeledPair> d1, d2, test;
};

inline PairsFile pairs_from_json(const Json& j) {
  PairsFile f;
  const Json& ctxs = require(j, "contexts", "");
  if (!ctxs.is_array()) throw ParseError("/contexts", "expected an array");
  for (std::size_t i = 0; i < ctxs.size(); ++i) {
    const std::string at = "/contexts/" + std::to_string(i);
    std::size_t id = as_count(require(ctxs[i], "id", at), at + "/id");
    std::size_t n = as_count(require(ctxs[i], "n", at), at + "/n");
    const Json& cands = require(ctxs[i], "candidates", at);
    if (!cands.is_array()) throw ParseError(at + "/candidates", "expected an array");
    std::vector<Hyperedge> list;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const std::string cat = at + "/candidates/" + std::to_string(c);
      auto ids = as_ids(cands[c], cat);
      for (VertexId v : ids)
        if (v >= n) throw ParseError(cat, "vertex id outside context universe");
      list.push_back(Hyperedge::canonical(std::move(ids)));
    }
    if (!f.contexts.emplace(id, std::pair{n, std::move(list)}).second) throw ParseError(at + "/id", "duplicate context id");
  }
  auto read_pairs = [&](const char* key, std::vector<LabeledPair>& out, bool required) {
    if (!j.contains(key)) {
      if (required) throw ParseError(std::string("/") + key, "missing field");
      return;
    }
    const Json& arr = j[key];
    if (!arr.is_array()) throw ParseError(std::string("/") + key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = std::string("/") + key + "/" + std::to_string(i);
      LabeledPair p;
      p.context = as_count(require(arr[i], "context", at), at + "/context");
      auto ctx = f.contexts.find(p.context);
      if (ctx == f.contexts.end()) throw ParseError(at + "/context", "unknown context");
      p.prediction = Hyperedge::canonical(as_ids(require(arr[i], "prediction", at), at + "/prediction"));
      p.truth = Hyperedge::canonical(as_ids(require(arr[i], "truth", at), at + "/truth"));
      for (const auto* e : {&p.prediction, &p.truth})
        for (VertexId v : e->vertices)
          if (v >= ctx->second.first) throw ParseError(at, "vertex id outside context universe");
      out.push_back(std::move(p));
    }
  };
  read_pairs("d1", f.d1, true);
  read_pairs("d2", f.d2, true);
  read_pairs("test", f.test, false);
  return f;
}

// ---------------------------------------------------------------------------
// Sample files: {n, samples: [[ids]], test?: [[ids]]}

struct SamplesFile {
  std::size_t n = 0;
  std::vector<Hyperedge> samples;
  std::vector<Hyperedge> test;
};

inline SamplesFile samples_from_json(const Json& j) {
  SamplesFile f;
  f.n = as_count(require(j, "n", ""), "/n");
  auto read = [&](const char* key, std::vector<Hyperedge>& out) {
    const Json& arr = j[key];
    if (!arr.is_array()) throw ParseError(std::string("/") + key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = std::string("/") + key + "/" + std::to_string(i);
      auto ids = as_ids(arr[i], at);
      if (ids.empty()) throw ParseError(at, "empty sample");
      for (VertexId v : ids)
        if (v >= f.n) throw ParseError(at, "vertex id outside universe");
      out.push_back(Hyperedge::canonical(std::move(ids)));
    }
  };
  require(j, "samples", "");
  read("samples", f.samples);
  if (j.contains("test")) read("test", f.test);
  return f;
}

inline Json samples_to_json(const SamplesFile& f) {
  Json j;
  j["n"] = f.n;
  Json s = Json::array();
  for (const auto& e : f.samples) s.push_back(ids_json(e.vertices));
  j["samples"] = std::move(s);
  if (!f.test.empty()) {
    Json t = Json::array();
    for (const auto& e : f.test) t.push_back(ids_json(e.vertices));
    j["test"] = std::move(t);
  }
  return j;
}

}  // namespace confsub::io
