#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scw/graph.hpp"
#include "scw/rational.hpp"
#include "scw/tree.hpp"
#include "scw/weights.hpp"

namespace scw {

class switch_violation_error : public precondition_error {
 public:
  explicit switch_violation_error(SwitchReport report)
      : precondition_error("switch conditions violated: the one-level completion sums toward the "
                           "two axis endpoints differ at " +
                           std::to_string(report.violations.size()) + " semi-round class(es)"),
        report_(std::move(report)) {}
  const SwitchReport& report() const { return report_; }

 private:
  SwitchReport report_;
};

struct RealizeOptions {
  std::optional<uint64_t> seed;          // shuffles the matching; absent = deterministic
  uint64_t max_vertices = 10'000'000;    // guard on the emitted copy count
};

// Builds a finite cyclically reduced graph whose grade-r weight table is
// exactly t (t integral, nonzero, switch conditions satisfied).
//
// Construction: emit t(K) copies of the center of each support class K
// together with its half-link of sub-edges; decorate every sub-vertex
// with the child of K along its spoke (unoriented key + orientation
// flag); the switch conditions make the two orientation buckets of every
// child class equinumerous; match them (sorted order, or shuffled by
// seed) and glue each matched pair of sub-edges into one edge. A pair is
// matchable exactly when the unoriented keys agree and the flags differ,
// which forces the glued labels to be mutually inverse.
inline GammaGraph realize(const WeightSystem& t, const RealizeOptions& options = {}) {
  if (t.is_zero()) throw precondition_error("realize: weight system is zero");
  if (!t.is_integral()) throw precondition_error("realize: weight system is not integral");
  {
    SwitchReport report = check_switch(t);
    if (!report.ok()) throw switch_violation_error(std::move(report));
  }
  if (BigInt(t.total()) > options.max_vertices)
    throw budget_error("realize: vertex budget exceeded");

  struct Spoke {
    EdgeRef edge;  // center edge in the decoded tree
    EdgeRef label;
    CanonicalKey child_key;  // unoriented
    bool forward;            // instance orientation is the canonical one
  };
  struct Owner {
    RoundGraph instance;
    long long copies;
    std::vector<Spoke> spokes;
  };

  std::vector<Owner> owners;
  for (const auto& [key, val] : t.entries()) {
    Owner o{decode_round_key(t.marking(), key, t.grade()),
            static_cast<long long>(BigInt(rat_num(val))), {}};
    for (EdgeRef e : o.instance.tree.star(o.instance.center)) {
      SemiRoundGraph j = child(o.instance, e);
      OrientedSemiRoundKey jk = semi_round_keys(j.tree, j.axis);
      o.spokes.push_back({e, o.instance.tree.label(e), jk.unoriented, jk.forward_is_canonical});
    }
    owners.push_back(std::move(o));
  }

  // One output vertex per (owner, copy); sub-vertices bucketed by child
  // class and split by orientation.
  struct SubVertex {
    int vertex;  // output vertex id
    int owner;
    int spoke;
  };
  GammaGraphBuilder b(t.marking());
  std::map<CanonicalKey, std::pair<std::vector<SubVertex>, std::vector<SubVertex>>> buckets;
  for (int oi = 0; oi < static_cast<int>(owners.size()); ++oi) {
    const Owner& o = owners[oi];
    int center_type = o.instance.tree.vertex_type(o.instance.center);
    for (long long c = 0; c < o.copies; ++c) {
      Vertex v = b.add_vertex(center_type);
      for (int si = 0; si < static_cast<int>(o.spokes.size()); ++si) {
        auto& bucket = buckets[o.spokes[si].child_key];
        (o.spokes[si].forward ? bucket.first : bucket.second).push_back({v, oi, si});
      }
    }
  }

  std::optional<std::mt19937_64> rng;
  if (options.seed) rng.emplace(*options.seed);
  for (auto& [jkey, bucket] : buckets) {
    auto& [left, right] = bucket;
    if (left.size() != right.size())
      throw precondition_error("realize: internal bucket imbalance after switch check");
    if (rng) std::shuffle(right.begin(), right.end(), *rng);
    for (size_t i = 0; i < left.size(); ++i) {
      const Spoke& sl = owners[left[i].owner].spokes[left[i].spoke];
      const Spoke& sr = owners[right[i].owner].spokes[right[i].spoke];
      if (sr.label != inverse(sl.label))
        throw precondition_error("realize: internal decoration labels not mutually inverse");
      b.add_edge(left[i].vertex, right[i].vertex, sl.label);
    }
  }
  return b.build();
}

// Closes the loop of the realization theorem: does d carry exactly the
// weights t at t's grade?
inline bool verify_realization(const WeightSystem& t, const GammaGraph& d) {
  if (d.empty()) return t.is_zero();
  if (!is_cyclically_reduced(d)) return false;
  if (!(d.marking() == t.marking())) return false;
  return weights_of(d, t.grade()) == t;
}

// Translation-invariant integer weight oracle: the weight of the class of
// a finite nondegenerate tree.
using WeightOracle = std::function<BigInt(const GammaGraph& tree)>;

struct ReconstructOptions {
  uint64_t max_queries = 50'000'000;
  uint64_t enumeration_budget = 1'000'000;
};

struct ReconstructReport {
  int r_max = 0;
  BigInt star_total = 0;                    // grade-1 weight total
  std::vector<BigInt> vertex_counts;        // realized #V for r = 2..r_max
  std::vector<int> iso_class;               // per grade: smallest grade index with isomorphic graph
  std::vector<WeightSystem> tables;         // theta_r for r = 2..r_max
  std::vector<bool> grade_weights_match;    // weights_of(delta_r, r) == theta_r
  bool final_matches_all = false;           // weights_of(delta_{r_max}, r) == theta_r for all r
  std::vector<GammaGraph> graphs;           // delta_r for r = 2..r_max
  GammaGraph result;                        // delta_{r_max}
};

// Realize-and-stabilize pipeline for an integer-weight oracle: assemble
// theta_r for r = 2..r_max by iterative deepening from the grade-1
// support, realize each, and report vertex counts and isomorphism
// classes. Oracle integrality, Kirchhoff consistency of every extension
// step, and the switch conditions of every assembled table are checked,
// not assumed.
inline ReconstructReport reconstruct(const MarkingGraph& marking, const WeightOracle& oracle,
                                     int r_max, const ReconstructOptions& options = {}) {
  if (r_max < 2) throw precondition_error("reconstruct: r_max must be >= 2");
  uint64_t queries = 0;
  auto ask = [&](const GammaGraph& tree) {
    if (++queries > options.max_queries) throw budget_error("reconstruct: oracle query budget");
    BigInt w = oracle(tree);
    if (w < 0) throw precondition_error("reconstruct: oracle returned a negative weight");
    return w;
  };

  struct Partial {
    GammaGraph tree;
    Vertex center;
    BigInt weight;
  };

  // Grade-1 support: every star class with positive weight.
  std::vector<Partial> frontier;
  BigInt star_total = 0;
  enumerate_round(
      marking, 1,
      [&](const CanonicalKey&, const RoundGraph& k) {
        BigInt w = ask(k.tree);
        star_total += w;
        if (w > 0) frontier.push_back({k.tree, k.center, w});
      },
      options.enumeration_budget);
  if (frontier.empty())
    throw precondition_error("reconstruct: oracle vanishes on all grade-1 classes");

  ReconstructReport report;
  report.r_max = r_max;
  report.star_total = star_total;

  for (int r = 2; r <= r_max; ++r) {
    // Deepen every positive tree so that all leaves sit at distance r,
    // extending one leaf at a time and keeping positive branches. Each
    // step must satisfy the one-edge Kirchhoff identity.
    std::vector<Partial> done;
    std::vector<Partial> work = std::move(frontier);
    while (!work.empty()) {
      Partial p = std::move(work.back());
      work.pop_back();
      auto dist = bfs_distances(p.tree, p.center);
      Vertex leaf = -1;
      for (Vertex v = 0; v < p.tree.num_vertices(); ++v)
        if (p.tree.degree(v) == 1 && dist[v] < r) {
          leaf = v;
          break;
        }
      if (leaf < 0) {
        done.push_back(std::move(p));
        continue;
      }
      EdgeRef in_lab = inverse(p.tree.label(p.tree.star(leaf)[0]));
      std::vector<Extension> exts;
      detail::extensions_below(marking, in_lab, 1, exts, options.enumeration_budget);
      BigInt kirchhoff = 0;
      for (const Extension& ext : exts) {
        GammaGraph extended = apply_extension(p.tree, leaf, ext);
        BigInt w = ask(extended);
        kirchhoff += w;
        if (w > 0) work.push_back({std::move(extended), p.center, w});
      }
      if (kirchhoff != p.weight)
        throw precondition_error(
            "reconstruct: oracle violates the Kirchhoff identity at a one-edge extension");
    }

    WeightSystem table(marking, r);
    for (const Partial& p : done) table.add(canonical_key(p.tree, p.center), Rational(p.weight));
    {
      SwitchReport sw = check_switch(table);
      if (!sw.ok())
        throw precondition_error("reconstruct: assembled grade-" + std::to_string(r) +
                                 " table violates the switch conditions");
    }
    GammaGraph delta = realize(table);
    report.vertex_counts.push_back(delta.num_vertices());
    report.grade_weights_match.push_back(weights_of(delta, r) == table);
    report.tables.push_back(table);
    report.graphs.push_back(std::move(delta));
    frontier = std::move(done);
  }

  for (const BigInt& c : report.vertex_counts)
    if (c != report.star_total)
      throw precondition_error(
          "reconstruct: realized vertex counts are not constant across grades; the oracle is not "
          "a subset current");

  // Group the realized graphs into isomorphism classes.
  report.iso_class.assign(report.graphs.size(), -1);
  for (size_t i = 0; i < report.graphs.size(); ++i) {
    for (size_t j = 0; j <= i; ++j) {
      if (report.iso_class[j] == static_cast<int>(j) || j == i) {
        if (j == i || isomorphic(report.graphs[i], report.graphs[j])) {
          report.iso_class[i] = static_cast<int>(j);
          break;
        }
      }
    }
  }

  report.result = report.graphs.back();
  report.final_matches_all = true;
  for (size_t idx = 0; idx < report.tables.size(); ++idx) {
    int r = 2 + static_cast<int>(idx);
    if (!(weights_of(report.result, r) == report.tables[idx])) {
      report.final_matches_all = false;
      break;
    }
  }
  return report;
}

}  // namespace scw
