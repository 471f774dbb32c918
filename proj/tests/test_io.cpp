#include <gtest/gtest.h>

#include <cmath>

#include "confsub/confsub.hpp"
#include "confsub/io.hpp"
#include "oracles.hpp"

using namespace confsub;
using confsub::io::Json;

namespace {

const char* kThreePaths = R"({
  "n": 7,
  "vertices": ["a", "b", "c", "d", "e", "f", "g"],
  "edges": [
    {"v": [0, 1], "w": "3/10"},
    {"v": [2, 3], "w": "3/10"},
    {"v": [4, 5, 6], "w": "2/5"}
  ]
})";

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const io::ParseError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Io, InstanceRoundTrip) {
  auto inst = io::instance_from_json(io::parse_text(kThreePaths));
  EXPECT_EQ(inst.graph.num_vertices(), 7u);
  EXPECT_EQ(inst.graph.edge(1).vertices, (std::vector<VertexId>{2, 3}));
  EXPECT_EQ(inst.graph.total_weight(), Rational(1));
  EXPECT_EQ(inst.labels[6], "g");
  auto text = io::dump(io::instance_to_json(inst));
  auto again = io::instance_from_json(io::parse_text(text));
  EXPECT_EQ(again.graph.edges(), inst.graph.edges());
  EXPECT_EQ(again.labels, inst.labels);
  EXPECT_EQ(io::dump(io::instance_to_json(again)), text);
}

TEST(Io, RandomInstancesRoundTrip) {
  CounterRng rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    auto h = oracle::random_hypergraph(rng, 1 + rng.below(9), rng.below(10), true);
    io::Instance inst{h, {}};
    auto text = io::dump(io::instance_to_json(inst));
    auto back = io::instance_from_json(io::parse_text(text));
    EXPECT_EQ(back.graph.edges(), h.edges());
    EXPECT_EQ(back.graph.total_weight(), h.total_weight());
    EXPECT_EQ(io::dump(io::instance_to_json(back)), text);

    auto chain = nested_chain(h);
    auto ctext = io::dump(io::chain_to_json(chain));
    auto cback = io::chain_from_json(io::parse_text(ctext));
    EXPECT_EQ(cback, chain);
    EXPECT_EQ(io::dump(io::chain_to_json(cback)), ctext);
  }
}

TEST(Io, InstanceErrorsNameTheField) {
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"edges": []})")); }), "/n");
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"n": 2, "edges": [{"v": [0, 2]}]})")); }),
            "/edges/0");
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"n": 2, "edges": [{"v": [0], "w": 0.3}]})")); }),
            "/edges/0/w");
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"n": 2, "edges": [{"v": [0], "w": "-1/2"}]})")); }),
            "/edges/0");
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"n": 3, "edges": [{"v": [0]}, {"v": [2, 1]}]})")); }),
            "/edges/1");
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"n": 2, "edges": [{"w": "1"}]})")); }),
            "/edges/0/v");
  EXPECT_EQ(field_of([] {
              io::instance_from_json(io::parse_text(R"({"n": 2, "edges": [{"v": [0]}], "total_weight": "2"})"));
            }),
            "/total_weight");
  EXPECT_EQ(field_of([] { io::instance_from_json(io::parse_text(R"({"n": 2, "edges": [], "vertices": ["x"]})")); }),
            "/vertices");
}

TEST(Io, SyntaxErrorReportsLineAndColumn) {
  try {
    io::parse_text("{\n  \"n\": 2,\n  oops\n}", "file.json");
    FAIL();
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.field(), "file.json");
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Io, ChainRejectsInconsistency) {
  auto h = io::instance_from_json(io::parse_text(kThreePaths)).graph;
  auto j = io::chain_to_json(nested_chain(h));
  j["stats"][1]["induced"] = "1/2";
  EXPECT_THROW(io::chain_from_json(j), io::ParseError);
  auto k = io::chain_to_json(nested_chain(h));
  k["sets"][1] = Json::array({0, 99});
  EXPECT_THROW(io::chain_from_json(k), io::ParseError);
}

TEST(Io, CalibrationRoundTrip) {
  CalibrationState st;
  st.d_star = std::numeric_limits<double>::infinity();
  st.tau_star = Rational(3, 7);
  st.phi = Rational(9, 10);
  st.delta = Rational(9, 200);
  st.kappa = Rational(1, 2);
  st.d1_size = 10;
  st.d2_size = 11;
  st.stage1_overflow = true;
  st.eta = {{Rational(1, 3), false}, {Rational(1), true}};
  st.chain_digests = {{4, 0xdeadbeefcafef00dULL}, {17, 1}};
  auto text = io::dump(io::calibration_to_json(st));
  auto back = io::calibration_from_json(io::parse_text(text));
  EXPECT_TRUE(std::isinf(back.d_star));
  EXPECT_EQ(back.tau_star, st.tau_star);
  EXPECT_EQ(back.kappa, st.kappa);
  EXPECT_EQ(back.d2_size, 11u);
  EXPECT_TRUE(back.stage1_overflow);
  ASSERT_EQ(back.eta.size(), 2u);
  EXPECT_TRUE(back.eta[1].censored);
  EXPECT_EQ(back.chain_digests, st.chain_digests);
  EXPECT_EQ(io::dump(io::calibration_to_json(back)), text);
  st.d_star = 3;
  EXPECT_EQ(io::calibration_from_json(io::calibration_to_json(st)).d_star, 3.0);
}

TEST(Io, PairsFile) {
  auto f = io::pairs_from_json(io::parse_text(R"({
    "contexts": [{"id": 3, "n": 4, "candidates": [[0, 1], [1, 2]]}],
    "d1": [{"context": 3, "prediction": [1, 0], "truth": [0]}],
    "d2": [{"context": 3, "prediction": [2], "truth": [1, 2]}]
  })"));
  EXPECT_EQ(f.contexts.at(3).first, 4u);
  EXPECT_EQ(f.contexts.at(3).second.size(), 2u);
  EXPECT_EQ(f.d1[0].prediction.vertices, (std::vector<VertexId>{0, 1}));
  EXPECT_TRUE(f.test.empty());
  EXPECT_EQ(field_of([] {
              io::pairs_from_json(io::parse_text(R"({"contexts": [{"id": 0, "n": 2, "candidates": []}],
                "d1": [{"context": 5, "prediction": [], "truth": []}], "d2": []})"));
            }),
            "/d1/0/context");
  EXPECT_EQ(field_of([] {
              io::pairs_from_json(io::parse_text(R"({"contexts": [{"id": 0, "n": 2, "candidates": [[4]]}],
                "d1": [], "d2": []})"));
            }),
            "/contexts/0/candidates/0");
  EXPECT_EQ(field_of([] { io::pairs_from_json(io::parse_text(R"({"contexts": [], "d1": []})")); }), "/d2");
}

TEST(Io, SamplesFile) {
  io::SamplesFile f{5, {Hyperedge::canonical({0, 1}), Hyperedge::canonical({4})}, {Hyperedge::canonical({2})}};
  auto text = io::dump(io::samples_to_json(f));
  auto back = io::samples_from_json(io::parse_text(text));
  EXPECT_EQ(back.n, 5u);
  EXPECT_EQ(back.samples, f.samples);
  EXPECT_EQ(back.test, f.test);
  EXPECT_EQ(field_of([] { io::samples_from_json(io::parse_text(R"({"n": 2, "samples": [[0], []]})")); }),
            "/samples/1");
  EXPECT_EQ(field_of([] { io::samples_from_json(io::parse_text(R"({"n": 2, "samples": [[0, 2]]})")); }),
            "/samples/0");
}
