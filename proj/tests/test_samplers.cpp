#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "confsub/samplers.hpp"
#include "oracles.hpp"

using namespace confsub;

namespace {

// Pearson statistic for `draws` against a uniform law on `cells` outcomes;
// accepted when under mean + 6 standard deviations.
template <class Key>
void expect_uniform(const std::map<Key, std::size_t>& hist, std::size_t cells, std::size_t draws) {
  ASSERT_EQ(hist.size(), cells) << "some outcome never drawn or unknown outcome drawn";
  double expected = static_cast<double>(draws) / static_cast<double>(cells);
  double chi2 = 0;
  for (const auto& [k, c] : hist) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  double df = static_cast<double>(cells) - 1;
  EXPECT_LT(chi2, df + 6 * std::sqrt(2 * df) + 1) << "chi2=" << chi2 << " df=" << df;
}

WalkGraph grid3() {
  // 3x3 grid, node r*3+c.
  WalkGraph g{9, {}};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      if (c + 1 < 3) g.edges.push_back({r * 3 + c, r * 3 + c + 1});
      if (r + 1 < 3) g.edges.push_back({r * 3 + c, (r + 1) * 3 + c});
    }
  return g;
}

std::vector<std::size_t> edges_between(const WalkGraph& g, std::vector<std::size_t> nodes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      auto [a, b] = g.edges[e];
      if ((a == nodes[i] && b == nodes[i + 1]) || (b == nodes[i] && a == nodes[i + 1])) out.push_back(e);
    }
  return out;
}

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::size_t> random_tree(CounterRng& rng, std::size_t n) {
  std::vector<std::size_t> parent(n, SubtreeDPTable::kNoParent);
  for (std::size_t u = 1; u < n; ++u) parent[u] = rng.below(u);
  return parent;
}

}  // namespace

TEST(Utilities, SampleSize) {
  EXPECT_EQ(sample_size(100, 0.1, 0.05), 10300u);
  EXPECT_GT(sample_size(200, 0.1, 0.05), sample_size(100, 0.1, 0.05));
  EXPECT_EQ(sample_size(100, 0.1, 0.05, 2.0), static_cast<std::size_t>(std::ceil(2 * (100 + std::log(20.0)) / 0.01)));
  EXPECT_THROW(sample_size(10, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(sample_size(10, 0.1, 1), std::invalid_argument);
}

TEST(Utilities, RandomBelowAndPickWeighted) {
  CounterRng rng(61);
  std::map<int, std::size_t> hist;
  for (int i = 0; i < 7000; ++i) hist[static_cast<int>(random_below(BigCount(7), rng))]++;
  expect_uniform(hist, 7, 7000);

  BigCount big = (BigCount(1) << 100) + 1;
  for (int i = 0; i < 50; ++i) EXPECT_LT(random_below(big, rng), big);
  EXPECT_THROW(random_below(BigCount(0), rng), std::invalid_argument);

  std::vector<BigCount> w{0, 3, 0, 1};
  std::map<std::size_t, std::size_t> picks;
  for (int i = 0; i < 4000; ++i) picks[pick_weighted(w, rng)]++;
  EXPECT_EQ(picks.count(0), 0u);
  EXPECT_EQ(picks.count(2), 0u);
  EXPECT_NEAR(static_cast<double>(picks[1]) / 4000.0, 0.75, 0.03);
}

TEST(WalkDP, PathOnly) {
  WalkGraph g{3, {{0, 1}, {1, 2}}};
  std::vector<std::size_t> ref{0, 1};
  for (int d : {0, 1, 3}) {
    WalkDPTable t(g, 0, ref, d);
    EXPECT_EQ(t.partition(), 1);
    EXPECT_EQ(t.target(), 2u);
    CounterRng rng(1);
    EXPECT_EQ(t.sample(rng).edges, ref);
  }
}

// Square 0-1-2 (reference) with detour 0-3-2. Within budget 2: the reference,
// 0-3-2, and 0-3-0-1-2.
TEST(WalkDP, DetourSquare) {
  WalkGraph g{4, {{0, 1}, {1, 2}, {0, 3}, {3, 2}}};
  std::vector<std::size_t> ref{0, 1};
  EXPECT_EQ(WalkDPTable(g, 0, ref, 1).partition(), 1);
  WalkDPTable t(g, 0, ref, 2);
  EXPECT_EQ(t.partition(), 3);
  EXPECT_EQ(t.count(0, 2), 2);
  EXPECT_EQ(oracle::enumerate_walks(t).size(), 3u);
}

TEST(WalkDP, GridMatchesEnumeration) {
  auto g = grid3();
  auto ref = edges_between(g, {0, 1, 2, 5, 8});
  for (int d = 0; d <= 4; ++d) {
    WalkDPTable t(g, 0, ref, d);
    EXPECT_TRUE(t.check_recurrence());
    for (std::size_t u = 0; u < 9; ++u)
      for (int k = 0; k <= d; ++k) EXPECT_EQ(t.count(u, k), oracle::count_walks(t, u, k)) << u << " " << k;
    EXPECT_EQ(t.partition(), oracle::enumerate_walks(t).size());
  }
}

TEST(WalkDP, FillOrderDoesNotMatter) {
  auto g = grid3();
  auto ref = edges_between(g, {0, 3, 4, 5, 8});
  WalkDPTable a(g, 0, ref, 4);
  std::vector<std::size_t> rev{7, 6, 2, 1};
  WalkDPTable b(g, 0, ref, 4, rev);
  for (std::size_t u = 0; u < 9; ++u)
    for (int k = 0; k <= 4; ++k) EXPECT_EQ(a.count(u, k), b.count(u, k));
  std::vector<std::size_t> bad{7, 6, 2};
  EXPECT_THROW(WalkDPTable(g, 0, ref, 4, bad), std::invalid_argument);
}

TEST(WalkDP, SamplesUniformly) {
  auto g = grid3();
  auto ref = edges_between(g, {0, 1, 2, 5, 8});
  WalkDPTable t(g, 0, ref, 2);
  auto all = oracle::enumerate_walks(t);
  CounterRng rng(62);
  std::map<std::vector<std::size_t>, std::size_t> hist;
  const std::size_t draws = all.size() * 300;
  for (std::size_t i = 0; i < draws; ++i) {
    auto w = t.sample(rng);
    EXPECT_LE(w.cost, 2u);
    hist[w.edges]++;
  }
  for (const auto& [k, c] : hist) EXPECT_NE(std::find(all.begin(), all.end(), k), all.end());
  expect_uniform(hist, all.size(), draws);
}

TEST(WalkDP, RejectsBadReference) {
  WalkGraph g{4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}}};
  std::vector<std::size_t> empty;
  EXPECT_THROW(WalkDPTable(g, 0, empty, 1), std::invalid_argument);
  std::vector<std::size_t> broken{0, 3};
  EXPECT_THROW(WalkDPTable(g, 0, broken, 1), std::invalid_argument);
  std::vector<std::size_t> loop{0, 1, 2};
  EXPECT_THROW(WalkDPTable(g, 0, loop, 1), std::invalid_argument);
  std::vector<std::size_t> ok{0, 1};
  EXPECT_THROW(WalkDPTable(g, 0, ok, -1), std::invalid_argument);
  std::vector<std::size_t> outside{9};
  EXPECT_THROW(WalkDPTable(g, 0, outside, 1), std::out_of_range);
}

TEST(WalkDP, HyperedgeViewDeduplicates) {
  Walk w{{2, 0, 2, 1}, 2};
  EXPECT_EQ(w.as_hyperedge().vertices, (std::vector<VertexId>{0, 1, 2}));
}

TEST(ItineraryDP, SmallCases) {
  std::vector<std::vector<VertexId>> groups{{0, 1}, {2, 3}};
  std::vector<VertexId> ref{0, 2};
  EXPECT_EQ(ItineraryDPTable(groups, ref, 0).partition(), 1);
  ItineraryDPTable t(groups, ref, 1);
  EXPECT_EQ(t.partition(), 3);
  EXPECT_TRUE(t.check_recurrence());
  EXPECT_EQ(ItineraryDPTable(groups, ref, 2).partition(), 4);
  std::vector<VertexId> bad{0, 0};
  EXPECT_THROW(ItineraryDPTable(groups, bad, 1), std::invalid_argument);
}

TEST(ItineraryDP, ClosedFormAndEnumeration) {
  for (std::size_t R = 1; R <= 5; ++R)
    for (std::size_t s = 1; s <= 4; ++s) {
      std::vector<std::vector<VertexId>> groups(R);
      std::vector<VertexId> ref;
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t i = 0; i < s; ++i) groups[r].push_back(static_cast<VertexId>(r * s + i));
        ref.push_back(groups[r][r % s]);
      }
      for (int d = 0; d <= static_cast<int>(R); ++d) {
        ItineraryDPTable t(groups, ref, d);
        std::uint64_t closed = 0;
        for (int j = 0; j <= d; ++j) {
          std::uint64_t p = 1;
          for (int i = 0; i < j; ++i) p *= s - 1;
          closed += binom(R, static_cast<std::uint64_t>(j)) * p;
        }
        EXPECT_EQ(t.partition(), closed);
        EXPECT_EQ(t.partition(), oracle::enumerate_itineraries(groups, ref, d).size());
      }
    }
}

TEST(ItineraryDP, SamplesUniformly) {
  std::vector<std::vector<VertexId>> groups{{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11}};
  std::vector<VertexId> ref{0, 3, 6, 9};
  ItineraryDPTable t(groups, ref, 2);
  auto all = oracle::enumerate_itineraries(groups, ref, 2);
  CounterRng rng(63);
  std::map<oracle::Mask, std::size_t> hist;
  const std::size_t draws = all.size() * 300;
  for (std::size_t i = 0; i < draws; ++i) hist[oracle::mask_of(t.sample(rng).vertices)]++;
  expect_uniform(hist, all.size(), draws);
}

TEST(SubtreeDP, StarWithThreeLeaves) {
  std::vector<std::size_t> parent{SubtreeDPTable::kNoParent, 0, 0, 0};
  std::vector<std::size_t> ref{0};
  SubtreeDPTable t(parent, ref, 1);
  EXPECT_EQ(t.partition(), 4);
  EXPECT_EQ(SubtreeDPTable(parent, ref, 0).partition(), 1);
  EXPECT_EQ(SubtreeDPTable(parent, ref, 3).partition(), 8);
  EXPECT_EQ(SubtreeDPTable(parent, ref, 3, SubtreeFamily::kRootPath).partition(), 4);
}

TEST(SubtreeDP, RandomTreesMatchEnumeration) {
  CounterRng rng(64);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    auto parent = random_tree(rng, n);
    std::vector<std::size_t> ref{0};
    // grow a root path for the reference
    for (std::size_t u = 1; u < n; ++u)
      if (parent[u] == ref.back() && rng.bernoulli(0.6)) ref.push_back(u);
    for (auto fam : {SubtreeFamily::kConnected, SubtreeFamily::kRootPath})
      for (int d = 0; d <= 3; ++d) {
        SubtreeDPTable t(parent, ref, d, fam);
        EXPECT_TRUE(t.check_recurrence());
        std::vector<VertexId> refv(ref.begin(), ref.end());
        auto all = oracle::enumerate_subtrees(parent, oracle::mask_of(refv), d, fam == SubtreeFamily::kRootPath);
        EXPECT_EQ(t.partition(), all.size());
      }
  }
}

TEST(SubtreeDP, SamplesUniformly) {
  std::vector<std::size_t> parent{SubtreeDPTable::kNoParent, 0, 0, 1, 1, 2, 5};
  std::vector<std::size_t> ref{0, 2, 5};
  std::vector<VertexId> refv(ref.begin(), ref.end());
  for (auto fam : {SubtreeFamily::kConnected, SubtreeFamily::kRootPath}) {
    SubtreeDPTable t(parent, ref, 2, fam);
    auto all = oracle::enumerate_subtrees(parent, oracle::mask_of(refv), 2, fam == SubtreeFamily::kRootPath);
    CounterRng rng(65);
    std::map<oracle::Mask, std::size_t> hist;
    const std::size_t draws = all.size() * 300;
    for (std::size_t i = 0; i < draws; ++i) {
      auto m = oracle::mask_of(t.sample(rng).vertices);
      EXPECT_NE(std::find(all.begin(), all.end(), m), all.end());
      hist[m]++;
    }
    expect_uniform(hist, all.size(), draws);
  }
}

TEST(SubtreeDP, RejectsBadInput) {
  std::vector<std::size_t> parent{SubtreeDPTable::kNoParent, 0, 0, 1};
  std::vector<std::size_t> no_root{1};
  EXPECT_THROW(SubtreeDPTable(parent, no_root, 1), std::invalid_argument);
  std::vector<std::size_t> gap{0, 3};
  EXPECT_THROW(SubtreeDPTable(parent, gap, 1), std::invalid_argument);
  std::vector<std::size_t> branch{0, 1, 2};
  EXPECT_THROW(SubtreeDPTable(parent, branch, 1, SubtreeFamily::kRootPath), std::invalid_argument);
  EXPECT_NO_THROW(SubtreeDPTable(parent, branch, 1));
  std::vector<std::size_t> two_roots{SubtreeDPTable::kNoParent, SubtreeDPTable::kNoParent};
  std::vector<std::size_t> r0{0};
  EXPECT_THROW(SubtreeDPTable(two_roots, r0, 1), std::invalid_argument);
}

TEST(SampledFamily, UniformMass) {
  std::vector<std::vector<VertexId>> groups{{0, 1}, {2, 3}};
  std::vector<VertexId> ref{0, 2};
  ItineraryDPTable t(groups, ref, 1);
  CounterRng rng(66);
  auto fam = sampled_family(t, 4, 8, rng, [](Hyperedge e) { return e; });
  EXPECT_EQ(fam.num_edges(), 8u);
  EXPECT_EQ(fam.total_weight(), Rational(1));
  for (const auto& e : fam.edges()) EXPECT_EQ(e.weight, Rational(1, 8));
}
