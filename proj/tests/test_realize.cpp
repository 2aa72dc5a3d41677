#include <catch2/catch_amalgamated.hpp>

#include "scw/scw.hpp"
#include "support/generators.hpp"

using namespace scw;
using namespace scw::testing;

namespace {
const MarkingGraph& rose2() {
  static MarkingGraph g = MarkingGraph::rose(2);
  return g;
}
const MarkingGraph& theta3() {
  static MarkingGraph g = MarkingGraph::theta(3);
  return g;
}

GammaGraph rose_cover() {
  GammaGraphBuilder b(rose2());
  Vertex v = b.add_vertex(0);
  b.add_edge(v, v, *rose2().find_edge("a"));
  b.add_edge(v, v, *rose2().find_edge("b"));
  return b.build();
}
}  // namespace

TEST_CASE("realize basic examples") {
  const auto& g = rose2();
  GammaGraph circle = circle_graph(g, "a");

  // weights(circle-a) realizes back to the circle itself.
  GammaGraph d1 = realize(weights_of(circle, 2));
  CHECK(d1.num_vertices() == 1);
  CHECK(isomorphic(d1, circle));

  // weights(rose cover) realizes to a one-vertex full cover.
  GammaGraph d2 = realize(weights_of(rose_cover(), 2));
  CHECK(d2.num_vertices() == 1);
  CHECK(isomorphic(d2, rose_cover()));

  // Doubled circle weights: either two disjoint a-circles or one a^2
  // circle, depending on the matching; both carry the doubled table.
  WeightSystem doubled = weights_of(circle, 2).scaled(2);
  GammaGraph two_circles = disjoint_union(circle, circle);
  GammaGraph big_circle = circle_graph(g, "a a");
  for (uint64_t seed = 0; seed < 6; ++seed) {
    RealizeOptions options;
    if (seed > 0) options.seed = seed;
    GammaGraph d = realize(doubled, options);
    CHECK(d.num_vertices() == 2);
    CHECK(verify_realization(doubled, d));
    CHECK((isomorphic(d, two_circles) || isomorphic(d, big_circle)));
  }
  CHECK(verify_realization(doubled, two_circles));
  CHECK(verify_realization(doubled, big_circle));
}

TEST_CASE("realize errors") {
  const auto& g = rose2();
  WeightSystem zero(g, 2);
  CHECK_THROWS_AS(realize(zero), precondition_error);

  WeightSystem frac = weights_of(circle_graph(g, "a"), 2).scaled(Rational(1, 2));
  CHECK_THROWS_AS(realize(frac), precondition_error);

  // Switch violation reported with the offending class and both sums.
  GammaGraph asym = tree_of(g, {"a a", "~a b"});
  WeightSystem bad(g, 2);
  bad.set(canonical_key(asym, 0), 1);
  try {
    realize(bad);
    FAIL("expected switch_violation_error");
  } catch (const switch_violation_error& e) {
    REQUIRE_FALSE(e.report().ok());
    for (const auto& v : e.report().violations) {
      CHECK(v.origin_sum != v.terminus_sum);
      CHECK_NOTHROW(decode_semi_round_key(g, v.semi_round_key, 2));
    }
  }
}

TEST_CASE("realize round-trip on random graphs") {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 40; ++i) {
    const MarkingGraph& m = (i % 2) ? theta3() : rose2();
    GammaGraph d = random_cyclically_reduced(m, rng, 1, 9);
    for (int r : {2, 3}) {
      WeightSystem t = weights_of(d, r);
      GammaGraph realized = realize(t);
      CHECK(is_folded(realized));
      CHECK(is_cyclically_reduced(realized));
      CHECK(Rational(realized.num_vertices()) == t.total());
      CHECK(verify_realization(t, realized));
    }
  }
}

TEST_CASE("realize link transfer and matching invariance") {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 10; ++i) {
    GammaGraph d = random_cyclically_reduced(rose2(), rng, 2, 8);
    WeightSystem t = weights_of(d, 2);

    // The multiset of links of the output equals the weighted multiset of
    // support-center links.
    auto link_multiset = [](const GammaGraph& graph) {
      std::map<std::vector<EdgeRef>, int> out;
      for (Vertex v = 0; v < graph.num_vertices(); ++v) out[link_of(graph, v).as_set()] += 1;
      return out;
    };
    std::map<std::vector<EdgeRef>, int> expected;
    for (const auto& [key, value] : t.entries()) {
      RoundGraph k = decode_round_key(rose2(), key, 2);
      expected[link_of(k.tree, k.center).as_set()] +=
          static_cast<int>(BigInt(rat_num(value)));
    }
    GammaGraph realized = realize(t);
    CHECK(link_multiset(realized) == expected);

    // Different seeds give the same weight table, isomorphic or not.
    RealizeOptions s1, s2;
    s1.seed = 1;
    s2.seed = 99;
    CHECK(weights_of(realize(t, s1), 2) == weights_of(realize(t, s2), 2));
  }
}

TEST_CASE("verify_realization") {
  const auto& g = rose2();
  GammaGraph circle = circle_graph(g, "a");
  WeightSystem t = weights_of(circle, 2);
  CHECK(verify_realization(t, circle));
  CHECK_FALSE(verify_realization(t, circle_graph(g, "b")));
  CHECK_FALSE(verify_realization(t, circle_graph(g, "a a")));

  // Empty support vs empty graph: vacuously true.
  CHECK(verify_realization(WeightSystem(g, 2), GammaGraphBuilder(g).build()));
  CHECK_FALSE(verify_realization(t, GammaGraphBuilder(g).build()));
}

TEST_CASE("reconstruct hidden graphs") {
  const auto& g = rose2();

  // Hidden circle: isomorphic recovery at every grade.
  GammaGraph circle = circle_graph(g, "a");
  WeightOracle circle_oracle = [&](const GammaGraph& tree) {
    return BigInt(occurrences(tree, circle));
  };
  ReconstructReport rep = reconstruct(g, circle_oracle, 3);
  CHECK(rep.star_total == 1);
  REQUIRE(rep.vertex_counts.size() == 2);
  for (const auto& c : rep.vertex_counts) CHECK(c == 1);
  for (bool b : rep.grade_weights_match) CHECK(b);
  CHECK(rep.final_matches_all);
  for (const auto& delta : rep.graphs) CHECK(isomorphic(delta, circle));
  CHECK(rep.iso_class == std::vector<int>{0, 0});

  // Hidden index-2 core of <a^2, b, a b ~a>: two vertices at all grades,
  // weights match exactly.
  GammaGraph h = subgroup_graph(g, {word(g, "a a"), word(g, "b"), word(g, "a b ~a")});
  WeightOracle h_oracle = [&](const GammaGraph& tree) { return BigInt(occurrences(tree, h)); };
  ReconstructReport rep2 = reconstruct(g, h_oracle, 3);
  CHECK(rep2.star_total == 2);
  for (const auto& c : rep2.vertex_counts) CHECK(c == 2);
  for (size_t i = 0; i < rep2.tables.size(); ++i)
    CHECK(weights_of(rep2.graphs[i], 2 + static_cast<int>(i)) == rep2.tables[i]);
  CHECK(rep2.final_matches_all);

  // Random hidden graphs: weights of every realized grade match the
  // hidden graph's tables.
  std::mt19937_64 rng(59);
  for (int i = 0; i < 8; ++i) {
    const MarkingGraph& m = (i % 2) ? theta3() : rose2();
    GammaGraph hidden = random_cyclically_reduced(m, rng, 1, 8);
    WeightOracle oracle = [&](const GammaGraph& tree) {
      return BigInt(occurrences(tree, hidden));
    };
    ReconstructReport r = reconstruct(m, oracle, 3);
    CHECK(r.star_total == hidden.num_vertices());
    for (const auto& c : r.vertex_counts) CHECK(c == hidden.num_vertices());
    for (size_t idx = 0; idx < r.tables.size(); ++idx) {
      int grade = 2 + static_cast<int>(idx);
      CHECK(r.tables[idx] == weights_of(hidden, grade));
      CHECK(r.grade_weights_match[idx]);
    }
    CHECK(r.final_matches_all);
  }

  // A broken oracle (violates Kirchhoff at some extension step) is
  // rejected.
  WeightOracle broken = [&](const GammaGraph& tree) {
    return BigInt(occurrences(tree, circle) + (tree.num_pairs() == 3 ? 1 : 0));
  };
  CHECK_THROWS_AS(reconstruct(g, broken, 2), precondition_error);
}
