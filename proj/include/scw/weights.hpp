#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scw/graph.hpp"
#include "scw/rational.hpp"
#include "scw/tree.hpp"

namespace scw {

// Sparse nonnegative weight function on grade-r round-graph classes,
// indexed by canonical keys. Absent key means weight zero. Values are
// exact rationals throughout; the switch conditions are exact linear
// identities and float drift would fake violations.
class WeightSystem {
 public:
  WeightSystem(const MarkingGraph& marking, int grade) : marking_(&marking), grade_(grade) {
    if (grade < 2) throw precondition_error("weight system: grade must be >= 2");
  }

  const MarkingGraph& marking() const { return *marking_; }
  int grade() const { return grade_; }

  const std::map<CanonicalKey, Rational>& entries() const { return entries_; }

  Rational value(const CanonicalKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? Rational(0) : it->second;
  }

  // Setting a value validates the key: it must decode to a round graph of
  // this grade. Zero values erase the entry.
  void set(const CanonicalKey& key, Rational v) {
    if (v < 0) throw precondition_error("weight system: negative weight");
    decode_round_key(*marking_, key, grade_);
    if (v == 0)
      entries_.erase(key);
    else
      entries_[key] = std::move(v);
  }

  void add(const CanonicalKey& key, const Rational& v) { set(key, value(key) + v); }

  Rational total() const {
    Rational s = 0;
    for (const auto& [k, v] : entries_) s += v;
    return s;
  }

  bool is_zero() const { return entries_.empty(); }

  bool is_integral() const {
    for (const auto& [k, v] : entries_)
      if (!is_integer(v)) return false;
    return true;
  }

  WeightSystem scaled(const Rational& c) const {
    if (c < 0) throw precondition_error("weight system: negative scale");
    WeightSystem out(*marking_, grade_);
    if (c == 0) return out;
    for (const auto& [k, v] : entries_) out.entries_[k] = v * c;
    return out;
  }

  WeightSystem plus(const WeightSystem& other) const {
    if (grade_ != other.grade_ || !(marking() == other.marking()))
      throw precondition_error("weight system: grade/marking mismatch");
    WeightSystem out = *this;
    for (const auto& [k, v] : other.entries_) {
      auto& slot = out.entries_[k];
      slot += v;
    }
    return out;
  }

  bool operator==(const WeightSystem& other) const {
    return grade_ == other.grade_ && marking() == other.marking() && entries_ == other.entries_;
  }

 private:
  const MarkingGraph* marking_;
  int grade_;
  std::map<CanonicalKey, Rational> entries_;
};

namespace detail {

// Attempts the unique label-preserving extension of anchor -> image and
// checks link equality at every vertex of k of degree >= 2 (the occurrence
// condition). Returns false when some edge of k has no image or a link
// differs.
inline bool occurrence_at(const GammaGraph& k, Vertex anchor, const GammaGraph& d, Vertex image) {
  auto map = propagate_map(k, anchor, d, image);
  if (!map) return false;
  for (Vertex x = 0; x < k.num_vertices(); ++x) {
    if (k.degree(x) < 2) continue;
    if (k.degree(x) != d.degree(map->at(x))) return false;
    std::vector<char> have(d.marking().num_oriented(), 0);
    for (EdgeRef e : d.star(map->at(x))) have[d.label(e)] = 1;
    for (EdgeRef e : k.star(x))
      if (!have[k.label(e)]) return false;
  }
  return true;
}

}  // namespace detail

// Number of occurrences of the tree k in the folded graph d: label-
// preserving morphisms that are local homeomorphisms away from the leaves
// of k. The count is anchored at vertex 0 of k; foldedness makes it
// anchor-independent.
inline long occurrences(const GammaGraph& k, const GammaGraph& d) {
  require_tree(k);
  if (!is_folded(d)) throw precondition_error("occurrences: target graph is not folded");
  if (!(k.marking() == d.marking()))
    throw precondition_error("occurrences: tree and graph use different markings");
  long count = 0;
  for (Vertex u = 0; u < d.num_vertices(); ++u)
    if (detail::occurrence_at(k, 0, d, u)) ++count;
  return count;
}

// The grade-r weight table of a cyclically reduced graph: one ball per
// vertex, keyed by its center-rooted canonical form. By construction the
// total equals the number of vertices of d.
inline WeightSystem weights_of(const GammaGraph& d, int r) {
  if (d.empty()) throw precondition_error("weights_of: graph is empty");
  if (!is_cyclically_reduced(d))
    throw precondition_error("weights_of: graph is not cyclically reduced");
  if (r < 2) throw precondition_error("weights_of: grade must be >= 2");
  WeightSystem out(d.marking(), r);
  for (Vertex u = 0; u < d.num_vertices(); ++u) {
    RoundGraph b = ball(d, u, r);
    out.add(canonical_key(b.tree, b.center), 1);
  }
  return out;
}

struct SwitchViolation {
  CanonicalKey semi_round_key;  // unoriented class
  Rational origin_sum;
  Rational terminus_sum;
};

struct SwitchReport {
  std::vector<SwitchViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the switch conditions: for every semi-round class [J] reachable
// from the support, the weight sums over the two one-level completions of
// J (toward either axis endpoint) agree.
//
// A support key K contributes its weight to the origin side of [J] when J
// is the child of K along a center edge whose orientation matches the
// canonical orientation of [J], and to the terminus side otherwise; per
// side at most one center edge of K can match, because spokes of a folded
// vertex carry distinct labels. Classes not reachable from the support
// have both sums zero and are vacuously balanced.
inline SwitchReport check_switch(const WeightSystem& t) {
  std::map<CanonicalKey, std::pair<Rational, Rational>> sums;
  for (const auto& [key, val] : t.entries()) {
    RoundGraph k = decode_round_key(t.marking(), key, t.grade());
    for (EdgeRef e : k.tree.star(k.center)) {
      SemiRoundGraph j = child(k, e);
      OrientedSemiRoundKey jk = semi_round_keys(j.tree, j.axis);
      auto& slot = sums[jk.unoriented];
      (jk.forward_is_canonical ? slot.first : slot.second) += val;
    }
  }
  SwitchReport report;
  for (const auto& [jkey, lr] : sums)
    if (lr.first != lr.second) report.violations.push_back({jkey, lr.first, lr.second});
  return report;
}

// <K, mu> for a subtree k of radius <= r, evaluated from a grade-r weight
// system: the sum of t over all grade-r round graphs obtained by attaching
// admissible trees at every terminal edge of k, with depths determined by
// the distances from v.
//
// A support class contributes at most once: round subtrees of the
// universal cover centered at a fixed vertex are unique per class, so the
// sum collapses to scanning the support for classes K_s that admit the
// (unique, foldedness-forced) embedding of k with v on the center and link
// equality away from the terminal vertices of k.
inline Rational subtree_weight(const GammaGraph& k, Vertex v, const WeightSystem& t) {
  require_tree(k);
  if (v < 0 || v >= k.num_vertices()) throw precondition_error("subtree_weight: unknown vertex");
  if (!(k.marking() == t.marking()))
    throw precondition_error("subtree_weight: tree and table use different markings");
  int reach = tree_radius_at(k, v);
  if (reach > t.grade())
    throw precondition_error("subtree_weight: R(K,v) = " + std::to_string(reach) +
                             " exceeds the table grade " + std::to_string(t.grade()));
  Rational total = 0;
  for (const auto& [key, val] : t.entries()) {
    RoundGraph ks = decode_round_key(t.marking(), key, t.grade());
    if (detail::occurrence_at(k, v, ks.tree, ks.center)) total += val;
  }
  return total;
}

}  // namespace scw
