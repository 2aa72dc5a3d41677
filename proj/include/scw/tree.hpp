#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "scw/graph.hpp"

namespace scw {

// Canonical byte encoding of a rooted labeled tree; equality of keys is
// exactly rooted label-preserving isomorphism.
using CanonicalKey = std::string;

namespace keybytes {
inline constexpr unsigned char kVertexTag = 0xF0;
inline constexpr unsigned char kEdgeTag = 0xF1;
inline constexpr unsigned char kOpen = 0xFB;
inline constexpr unsigned char kClose = 0xFC;
inline constexpr int kMaxSymbol = 0xF0;
}  // namespace keybytes

// A finite folded labeled tree modeling a translation class of subtrees of
// the universal cover: all leaves at distance exactly `grade` from the
// center vertex.
struct RoundGraph {
  GammaGraph tree;
  Vertex center = -1;
  int grade = 0;
};

// Same with the center at the midpoint of `axis`: leaves on the origin
// side at distance grade-1 from origin(axis), symmetrically on the
// terminus side.
struct SemiRoundGraph {
  GammaGraph tree;
  EdgeRef axis = -1;
  int grade = 0;
};

inline void require_tree(const GammaGraph& g) {
  if (g.num_pairs() < 1) throw precondition_error("tree: must have at least one edge");
  if (g.num_pairs() != g.num_vertices() - 1 || components(g).size() != 1)
    throw precondition_error("tree: carrier is not a connected tree");
  if (!is_folded(g)) throw precondition_error("tree: not folded");
}

inline std::vector<int> bfs_distances(const GammaGraph& g, Vertex from) {
  std::vector<int> dist(g.num_vertices(), -1);
  std::vector<Vertex> queue{from};
  dist[from] = 0;
  size_t head = 0;
  while (head < queue.size()) {
    Vertex v = queue[head++];
    for (EdgeRef e : g.star(v)) {
      Vertex w = g.terminus(e);
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

// R(K,v): the maximum distance from v to a terminal vertex of the tree.
inline int tree_radius_at(const GammaGraph& tree, Vertex v) {
  if (v < 0 || v >= tree.num_vertices()) throw precondition_error("tree_radius_at: unknown vertex");
  auto dist = bfs_distances(tree, v);
  int r = 0;
  for (Vertex u = 0; u < tree.num_vertices(); ++u)
    if (tree.degree(u) == 1) r = std::max(r, dist[u]);
  return r;
}

// Radius r(K) = min over vertices of R(K,v), with the lowest-id minimizer.
inline std::pair<int, Vertex> tree_radius(const GammaGraph& tree) {
  require_tree(tree);
  int best = -1;
  Vertex arg = -1;
  for (Vertex v = 0; v < tree.num_vertices(); ++v) {
    int r = tree_radius_at(tree, v);
    if (best < 0 || r < best) {
      best = r;
      arg = v;
    }
  }
  return {best, arg};
}

namespace detail {

inline void check_key_symbols(const GammaGraph& g) {
  if (g.marking().num_oriented() >= keybytes::kMaxSymbol ||
      g.marking().num_vertices() >= keybytes::kMaxSymbol)
    throw precondition_error("canonical key: marking too large for one-byte symbols");
}

// Recursive AHU-style encoding of the subtree hanging below `v`, skipping
// the edge `banned` (the way back to the parent). Sibling items sort by
// label, which is injective at a folded vertex.
inline std::string encode_below(const GammaGraph& t, Vertex v, EdgeRef banned) {
  std::vector<std::string> items;
  for (EdgeRef e : t.star(v)) {
    if (e == banned) continue;
    std::string item;
    item.push_back(static_cast<char>(static_cast<unsigned char>(t.label(e))));
    item.push_back(static_cast<char>(keybytes::kOpen));
    item += encode_below(t, t.terminus(e), inverse(e));
    item.push_back(static_cast<char>(keybytes::kClose));
    items.push_back(std::move(item));
  }
  std::sort(items.begin(), items.end());
  std::string out;
  for (auto& it : items) out += it;
  return out;
}

}  // namespace detail

// Key of the tree rooted at a vertex.
inline CanonicalKey canonical_key(const GammaGraph& tree, Vertex root) {
  require_tree(tree);
  detail::check_key_symbols(tree);
  if (root < 0 || root >= tree.num_vertices())
    throw precondition_error("canonical key: root not in tree");
  std::string out;
  out.push_back(static_cast<char>(keybytes::kVertexTag));
  out.push_back(static_cast<char>(static_cast<unsigned char>(tree.vertex_type(root))));
  out += detail::encode_below(tree, root, -1);
  return out;
}

// Key of the tree rooted at an oriented edge: the axis label followed by
// the two endpoint halves in (origin, terminus) order.
inline CanonicalKey canonical_key_edge(const GammaGraph& tree, EdgeRef axis) {
  require_tree(tree);
  detail::check_key_symbols(tree);
  if (axis < 0 || axis >= tree.num_oriented())
    throw precondition_error("canonical key: axis edge not in tree");
  std::string out;
  out.push_back(static_cast<char>(keybytes::kEdgeTag));
  out.push_back(static_cast<char>(static_cast<unsigned char>(tree.label(axis))));
  out.push_back(static_cast<char>(keybytes::kOpen));
  out += detail::encode_below(tree, tree.origin(axis), axis);
  out.push_back(static_cast<char>(keybytes::kClose));
  out.push_back(static_cast<char>(keybytes::kOpen));
  out += detail::encode_below(tree, tree.terminus(axis), inverse(axis));
  out.push_back(static_cast<char>(keybytes::kClose));
  return out;
}

// Translation classes of semi-round graphs do not orient their axis; the
// class is keyed by the lexicographically smaller of the two oriented
// encodings. `forward_is_canonical` records which orientation a concrete
// instance occupies. The two encodings are never equal: that would give a
// label-preserving automorphism inverting an edge, which inverse labels
// rule out.
struct OrientedSemiRoundKey {
  CanonicalKey unoriented;
  CanonicalKey oriented;
  bool forward_is_canonical = true;
};

inline OrientedSemiRoundKey semi_round_keys(const GammaGraph& tree, EdgeRef axis) {
  CanonicalKey fwd = canonical_key_edge(tree, axis);
  CanonicalKey rev = canonical_key_edge(tree, inverse(axis));
  if (fwd == rev) throw precondition_error("semi-round key: axis-reversing automorphism");
  OrientedSemiRoundKey out;
  out.oriented = fwd;
  out.forward_is_canonical = fwd < rev;
  out.unoriented = out.forward_is_canonical ? fwd : rev;
  return out;
}

namespace detail {

struct KeyParser {
  const MarkingGraph& marking;
  const CanonicalKey& key;
  size_t pos = 0;

  unsigned char peek() const {
    if (pos >= key.size()) throw parse_error("canonical key: truncated");
    return static_cast<unsigned char>(key[pos]);
  }
  unsigned char take() {
    unsigned char c = peek();
    ++pos;
    return c;
  }
  void expect(unsigned char c) {
    if (take() != c) throw parse_error("canonical key: malformed structure");
  }

  // Parses sibling items until CLOSE / end; children must appear in
  // strictly increasing label order (canonical form).
  void parse_children(GammaGraphBuilder& b, Vertex parent) {
    int last_label = -1;
    while (pos < key.size() && peek() != keybytes::kClose) {
      int lab = take();
      if (lab >= marking.num_oriented()) throw parse_error("canonical key: label out of range");
      if (lab <= last_label) throw parse_error("canonical key: children not in canonical order");
      last_label = lab;
      expect(keybytes::kOpen);
      Vertex child = b.add_vertex(marking.terminus(lab));
      b.add_edge(parent, child, lab);
      parse_children(b, child);
      expect(keybytes::kClose);
    }
  }
};

}  // namespace detail

// Rebuilds the tree of a vertex-rooted key. Vertex 0 is the root; edges
// appear in depth-first canonical order.
inline RoundGraph decode_round_key(const MarkingGraph& marking, const CanonicalKey& key,
                                   int grade) {
  detail::KeyParser p{marking, key};
  p.expect(keybytes::kVertexTag);
  int type = p.take();
  if (type >= marking.num_vertices()) throw parse_error("canonical key: root type out of range");
  GammaGraphBuilder b(marking);
  Vertex root = b.add_vertex(type);
  p.parse_children(b, root);
  if (p.pos != key.size()) throw parse_error("canonical key: trailing bytes");
  RoundGraph out{b.build(), root, grade};
  require_tree(out.tree);
  if (out.tree.degree(root) < 2)
    throw parse_error("round graph key: center must have degree >= 2");
  auto dist = bfs_distances(out.tree, root);
  for (Vertex v = 0; v < out.tree.num_vertices(); ++v)
    if (out.tree.degree(v) == 1 && dist[v] != grade)
      throw parse_error("round graph key: leaf at wrong distance from center");
  return out;
}

// Rebuilds a semi-round instance from an oriented edge-rooted key; the
// axis is oriented edge 0 of the result.
inline SemiRoundGraph decode_semi_round_key(const MarkingGraph& marking, const CanonicalKey& key,
                                            int grade) {
  detail::KeyParser p{marking, key};
  p.expect(keybytes::kEdgeTag);
  int lab = p.take();
  if (lab >= marking.num_oriented()) throw parse_error("canonical key: axis label out of range");
  GammaGraphBuilder b(marking);
  Vertex o = b.add_vertex(marking.origin(lab));
  Vertex t = b.add_vertex(marking.terminus(lab));
  b.add_edge(o, t, lab);  // pair 0, forward orientation = the axis
  p.expect(keybytes::kOpen);
  p.parse_children(b, o);
  p.expect(keybytes::kClose);
  p.expect(keybytes::kOpen);
  p.parse_children(b, t);
  p.expect(keybytes::kClose);
  if (p.pos != key.size()) throw parse_error("canonical key: trailing bytes");
  SemiRoundGraph out{b.build(), 0, grade};
  require_tree(out.tree);
  auto do_ = bfs_distances(out.tree, o);
  auto dt = bfs_distances(out.tree, t);
  for (Vertex v = 0; v < out.tree.num_vertices(); ++v) {
    if (out.tree.degree(v) != 1) continue;
    int d = (do_[v] < dt[v]) ? do_[v] : dt[v];
    if (d != grade - 1)
      throw parse_error("semi-round key: leaf at wrong distance from its axis endpoint");
  }
  return out;
}

// The ball of radius r around a lift of u in the universal cover of d:
// the tree of reduced edge-paths of length <= r starting at u. Minimum
// degree 2 in d forces every leaf to distance exactly r.
inline RoundGraph ball(const GammaGraph& d, Vertex u, int r) {
  if (!is_cyclically_reduced(d)) throw precondition_error("ball: graph is not cyclically reduced");
  if (u < 0 || u >= d.num_vertices()) throw precondition_error("ball: unknown vertex");
  if (r < 1) throw precondition_error("ball: radius must be >= 1");
  GammaGraphBuilder b(d.marking());
  struct Node {
    Vertex tree_v;
    Vertex graph_v;
    EdgeRef in_edge;  // oriented edge of d we arrived by, -1 at the root
    int depth;
  };
  Vertex root = b.add_vertex(d.vertex_type(u));
  std::vector<Node> queue{{root, u, -1, 0}};
  size_t head = 0;
  while (head < queue.size()) {
    Node n = queue[head++];
    if (n.depth == r) continue;
    for (EdgeRef e : d.star(n.graph_v)) {
      if (n.in_edge >= 0 && e == inverse(n.in_edge)) continue;
      Vertex child = b.add_vertex(d.vertex_type(d.terminus(e)));
      b.add_edge(n.tree_v, child, d.label(e));
      queue.push_back({child, d.terminus(e), e, n.depth + 1});
    }
  }
  return RoundGraph{b.build(), root, r};
}

// The e-child of a round graph: everything within distance r - 1/2 of the
// midpoint of e. Concretely, the whole branch through e plus the radius
// r-1 ball around the center on the other branches.
inline SemiRoundGraph child(const RoundGraph& k, EdgeRef e) {
  if (k.grade < 2) throw precondition_error("child: grade must be >= 2");
  if (e < 0 || e >= k.tree.num_oriented() || k.tree.origin(e) != k.center)
    throw precondition_error("child: edge does not leave the center");
  const GammaGraph& t = k.tree;
  auto dist = bfs_distances(t, k.center);
  // Mark the branch hanging through e.
  std::vector<char> in_branch(t.num_vertices(), 0);
  {
    std::vector<Vertex> stack{t.terminus(e)};
    in_branch[t.terminus(e)] = 1;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (EdgeRef f : t.star(v)) {
        Vertex w = t.terminus(f);
        if (w == k.center && v == t.terminus(e) && f == inverse(e)) continue;
        if (!in_branch[w] && dist[w] == dist[v] + 1) {
          in_branch[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  std::vector<char> keep(t.num_vertices(), 0);
  for (Vertex v = 0; v < t.num_vertices(); ++v)
    keep[v] = in_branch[v] || dist[v] <= k.grade - 1;

  GammaGraphBuilder b(t.marking());
  std::vector<Vertex> vmap(t.num_vertices(), -1);
  for (Vertex v = 0; v < t.num_vertices(); ++v)
    if (keep[v]) vmap[v] = b.add_vertex(t.vertex_type(v));
  EdgeRef new_axis = -1;
  for (int p = 0; p < t.num_pairs(); ++p) {
    Vertex o = t.origin(2 * p), tm = t.terminus(2 * p);
    if (!keep[o] || !keep[tm]) continue;
    int pair_id = b.add_edge(vmap[o], vmap[tm], t.label(2 * p));
    if (p == edge_pair(e)) new_axis = 2 * pair_id + (is_forward(e) ? 0 : 1);
  }
  return SemiRoundGraph{b.build(), new_axis, k.grade};
}

// One admissible extension hanging at the endpoint of a terminal edge:
// a list of branches, each branch a label plus its own sub-branches.
struct ExtensionNode {
  EdgeRef label;
  std::vector<ExtensionNode> children;
};
using Extension = std::vector<ExtensionNode>;

namespace detail {

// All ways to continue past an edge labeled `lab` so that every new leaf
// sits exactly `depth` levels below: a nonempty subset of q(lab), each
// член recursively extended.
inline void extensions_below(const MarkingGraph& marking, EdgeRef lab, int depth,
                             std::vector<Extension>& out, uint64_t budget) {
  if (depth == 0) {
    out.push_back({});
    return;
  }
  const auto& cont = marking.continuations(lab);
  int n = static_cast<int>(cont.size());
  if (n >= 30) throw budget_error("admissible extensions: continuation set too large");
  std::vector<std::vector<Extension>> per_label(n);
  for (int i = 0; i < n; ++i)
    extensions_below(marking, cont[i], depth - 1, per_label[i], budget);
  for (uint64_t mask = 1; mask < (1ull << n); ++mask) {
    std::vector<int> chosen;
    for (int i = 0; i < n; ++i)
      if (mask & (1ull << i)) chosen.push_back(i);
    // cartesian product over the chosen labels
    std::vector<size_t> idx(chosen.size(), 0);
    while (true) {
      Extension ext;
      for (size_t j = 0; j < chosen.size(); ++j) {
        ExtensionNode node{cont[chosen[j]], per_label[chosen[j]][idx[j]]};
        ext.push_back(std::move(node));
      }
      out.push_back(std::move(ext));
      if (out.size() > budget)
        throw budget_error("admissible extensions: enumeration exceeds budget");
      size_t j = 0;
      while (j < chosen.size()) {
        if (++idx[j] < per_label[chosen[j]].size()) break;
        idx[j] = 0;
        ++j;
      }
      if (j == chosen.size()) break;
    }
  }
}

}  // namespace detail

// B(K,e,m): all trees hanging at terminus(e) whose leaves sit at distance
// exactly m, growing only along reduced continuations of e. For m = 1 this
// is P_+(q(e)).
inline std::vector<Extension> admissible_extensions(const GammaGraph& k, EdgeRef terminal_edge,
                                                    int m, uint64_t budget = 1'000'000) {
  require_tree(k);
  if (terminal_edge < 0 || terminal_edge >= k.num_oriented() ||
      k.degree(k.terminus(terminal_edge)) != 1)
    throw precondition_error("admissible extensions: edge is not terminal");
  if (m < 1) throw precondition_error("admissible extensions: m must be >= 1");
  std::vector<Extension> out;
  detail::extensions_below(k.marking(), k.label(terminal_edge), m, out, budget);
  return out;
}

namespace detail {

inline void attach_extension(GammaGraphBuilder& b, const MarkingGraph& marking, Vertex at,
                             const Extension& ext) {
  for (const auto& node : ext) {
    Vertex child = b.add_vertex(marking.terminus(node.label));
    b.add_edge(at, child, node.label);
    attach_extension(b, marking, child, node.children);
  }
}

}  // namespace detail

// Glue one admissible extension onto the tree at the endpoint of the given
// terminal edge. `at` maps to the same vertex id in the result.
inline GammaGraph apply_extension(const GammaGraph& k, Vertex at, const Extension& ext) {
  GammaGraphBuilder b(k.marking());
  for (Vertex v = 0; v < k.num_vertices(); ++v) b.add_vertex(k.vertex_type(v));
  for (int p = 0; p < k.num_pairs(); ++p)
    b.add_edge(k.origin(2 * p), k.terminus(2 * p), k.label(2 * p));
  detail::attach_extension(b, k.marking(), at, ext);
  return b.build();
}

enum class Side { origin, terminus };

// All round graphs of the same grade centered at the chosen endpoint of
// the axis, obtained by extending every leaf on that endpoint's side of
// the axis midpoint by one level (all nonempty continuation subsets).
// Distinct extension tuples give pairwise non-isomorphic results, so the
// list has no repeated translation classes.
inline std::vector<RoundGraph> completions(const SemiRoundGraph& j, Side side,
                                           uint64_t budget = 1'000'000) {
  if (j.grade < 2) throw precondition_error("completions: grade must be >= 2");
  const GammaGraph& t = j.tree;
  require_tree(t);
  Vertex endpoint = (side == Side::origin) ? t.origin(j.axis) : t.terminus(j.axis);
  EdgeRef blocked = (side == Side::origin) ? j.axis : inverse(j.axis);
  // Leaves in the endpoint's component of tree minus the axis midpoint.
  std::vector<char> on_side(t.num_vertices(), 0);
  {
    std::vector<Vertex> stack{endpoint};
    on_side[endpoint] = 1;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (EdgeRef f : t.star(v)) {
        if (v == endpoint && f == blocked) continue;
        Vertex w = t.terminus(f);
        if (!on_side[w]) {
          on_side[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  std::vector<Vertex> leaves;
  std::vector<EdgeRef> leaf_in_label;  // label of the terminal edge, toward the leaf
  for (Vertex v = 0; v < t.num_vertices(); ++v) {
    if (!on_side[v] || t.degree(v) != 1) continue;
    leaves.push_back(v);
    leaf_in_label.push_back(inverse(t.label(t.star(v)[0])));
  }
  const MarkingGraph& marking = t.marking();
  std::vector<std::vector<Extension>> options(leaves.size());
  for (size_t i = 0; i < leaves.size(); ++i)
    detail::extensions_below(marking, leaf_in_label[i], 1, options[i], budget);

  std::vector<RoundGraph> out;
  std::vector<size_t> idx(leaves.size(), 0);
  while (true) {
    GammaGraphBuilder b(marking);
    for (Vertex v = 0; v < t.num_vertices(); ++v) b.add_vertex(t.vertex_type(v));
    for (int p = 0; p < t.num_pairs(); ++p)
      b.add_edge(t.origin(2 * p), t.terminus(2 * p), t.label(2 * p));
    for (size_t i = 0; i < leaves.size(); ++i)
      detail::attach_extension(b, marking, leaves[i], options[i][idx[i]]);
    out.push_back(RoundGraph{b.build(), endpoint, j.grade});
    if (out.size() > budget) throw budget_error("completions: enumeration exceeds budget");
    size_t i = 0;
    while (i < leaves.size()) {
      if (++idx[i] < options[i].size()) break;
      idx[i] = 0;
      ++i;
    }
    if (i == leaves.size()) break;
  }
  return out;
}

// Streams the canonical keys of all grade-r round-graph classes over the
// marking: center type, center link of size >= 2, then r-1 rounds of
// nonempty continuation subsets at every leaf. Throws budget_error when
// more than `budget` classes would be emitted.
inline void enumerate_round(const MarkingGraph& marking, int r,
                            const std::function<void(const CanonicalKey&, const RoundGraph&)>& sink,
                            uint64_t budget = 1'000'000) {
  if (r < 1) throw precondition_error("enumerate_round: grade must be >= 1");
  uint64_t emitted = 0;

  struct Frame {
    GammaGraph tree;
    Vertex center;
    std::vector<Vertex> frontier;
    int depth;
  };

  std::function<void(Frame&)> grow = [&](Frame& f) {
    if (f.depth == r) {
      RoundGraph k{f.tree, f.center, r};
      if (++emitted > budget) throw budget_error("enumerate_round: class budget exceeded");
      sink(canonical_key(k.tree, k.center), k);
      return;
    }
    // Extend every frontier leaf by one level, in all combinations.
    size_t n = f.frontier.size();
    std::vector<std::vector<Extension>> options(n);
    for (size_t i = 0; i < n; ++i) {
      EdgeRef in_lab = inverse(f.tree.label(f.tree.star(f.frontier[i])[0]));
      detail::extensions_below(marking, in_lab, 1, options[i], budget);
    }
    std::vector<size_t> idx(n, 0);
    while (true) {
      GammaGraphBuilder b(marking);
      for (Vertex v = 0; v < f.tree.num_vertices(); ++v) b.add_vertex(f.tree.vertex_type(v));
      for (int p = 0; p < f.tree.num_pairs(); ++p)
        b.add_edge(f.tree.origin(2 * p), f.tree.terminus(2 * p), f.tree.label(2 * p));
      int first_new = f.tree.num_vertices();
      for (size_t i = 0; i < n; ++i)
        detail::attach_extension(b, marking, f.frontier[i], options[i][idx[i]]);
      Frame next{b.build(), f.center, {}, f.depth + 1};
      for (Vertex v = first_new; v < next.tree.num_vertices(); ++v) next.frontier.push_back(v);
      grow(next);
      size_t i = 0;
      while (i < n) {
        if (++idx[i] < options[i].size()) break;
        idx[i] = 0;
        ++i;
      }
      if (i == n) break;
    }
  };

  for (Vertex type = 0; type < marking.num_vertices(); ++type) {
    const auto& st = marking.star(type);
    int deg = static_cast<int>(st.size());
    if (deg >= 30 || ((1ull << deg) - 1 - static_cast<uint64_t>(deg)) > budget)
      throw budget_error("enumerate_round: center-link count already exceeds the budget");
    for (uint64_t mask = 0; mask < (1ull << deg); ++mask) {
      if (std::popcount(mask) < 2) continue;
      GammaGraphBuilder b(marking);
      Vertex center = b.add_vertex(type);
      std::vector<Vertex> frontier;
      for (int i = 0; i < deg; ++i) {
        if (!(mask & (1u << i))) continue;
        Vertex leaf = b.add_vertex(marking.terminus(st[i]));
        b.add_edge(center, leaf, st[i]);
        frontier.push_back(leaf);
      }
      Frame f{b.build(), center, frontier, 1};
      grow(f);
    }
  }
}

inline std::vector<CanonicalKey> enumerate_round(const MarkingGraph& marking, int r,
                                                 uint64_t budget = 1'000'000) {
  std::vector<CanonicalKey> out;
  enumerate_round(
      marking, r, [&](const CanonicalKey& key, const RoundGraph&) { out.push_back(key); }, budget);
  return out;
}

// Vertices from which every leaf lies at distance exactly r; used to test
// that round-graph centers are unique.
inline std::vector<Vertex> round_center_candidates(const GammaGraph& tree, int r) {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < tree.num_vertices(); ++v) {
    auto dist = bfs_distances(tree, v);
    bool ok = true;
    for (Vertex u = 0; u < tree.num_vertices(); ++u)
      if (tree.degree(u) == 1 && dist[u] != r) {
        ok = false;
        break;
      }
    if (ok && tree.degree(v) >= 2) out.push_back(v);
  }
  return out;
}

}  // namespace scw
