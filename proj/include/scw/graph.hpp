#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scw/errors.hpp"

namespace scw {

using Vertex = int;
// Oriented edges come in inverse pairs 2k / 2k+1; inverse() flips orientation.
using EdgeRef = int;

inline constexpr EdgeRef inverse(EdgeRef e) { return e ^ 1; }
inline constexpr int edge_pair(EdgeRef e) { return e >> 1; }
inline constexpr bool is_forward(EdgeRef e) { return (e & 1) == 0; }

// The finite connected graph that fixes the marking. Oriented edge 2k is
// the named orientation of pair k, 2k+1 its inverse.
class MarkingGraph {
 public:
  MarkingGraph() = default;

  static MarkingGraph build(int num_vertices,
                            const std::vector<std::string>& names,
                            const std::vector<std::pair<Vertex, Vertex>>& endpoints) {
    if (names.size() != endpoints.size())
      throw precondition_error("marking graph: name/endpoint count mismatch");
    MarkingGraph g;
    g.num_vertices_ = num_vertices;
    std::set<std::string> seen;
    for (size_t k = 0; k < names.size(); ++k) {
      const auto& [o, t] = endpoints[k];
      if (o < 0 || o >= num_vertices || t < 0 || t >= num_vertices)
        throw precondition_error("marking graph: edge endpoint out of range");
      if (names[k].empty() || names[k][0] == '~' || !seen.insert(names[k]).second)
        throw precondition_error("marking graph: invalid or duplicate edge name '" + names[k] + "'");
      g.pair_name_.push_back(names[k]);
      g.origin_.push_back(o);
      g.origin_.push_back(t);
    }
    g.rebuild_tables();
    return g;
  }

  // Rose with n loop pairs at one vertex, named a, b, c, ...
  static MarkingGraph rose(int n) {
    if (n < 1 || n > 26) throw precondition_error("rose: supported rank range is 1..26");
    std::vector<std::string> names;
    std::vector<std::pair<Vertex, Vertex>> ends;
    for (int i = 0; i < n; ++i) {
      names.push_back(std::string(1, static_cast<char>('a' + i)));
      ends.push_back({0, 0});
    }
    return build(1, names, ends);
  }

  // Two vertices joined by `parallel` edge pairs.
  static MarkingGraph theta(int parallel = 3) {
    if (parallel < 2 || parallel > 26) throw precondition_error("theta: supported range is 2..26");
    std::vector<std::string> names;
    std::vector<std::pair<Vertex, Vertex>> ends;
    for (int i = 0; i < parallel; ++i) {
      names.push_back(std::string(1, static_cast<char>('a' + i)));
      ends.push_back({0, 1});
    }
    return build(2, names, ends);
  }

  int num_vertices() const { return num_vertices_; }
  int num_pairs() const { return static_cast<int>(pair_name_.size()); }
  int num_oriented() const { return 2 * num_pairs(); }

  Vertex origin(EdgeRef e) const { return origin_[e]; }
  Vertex terminus(EdgeRef e) const { return origin_[inverse(e)]; }

  const std::vector<EdgeRef>& star(Vertex v) const { return star_[v]; }
  int degree(Vertex v) const { return static_cast<int>(star_[v].size()); }

  // q(e): labels e' with origin(e') = terminus(e) and e' != e^-1, i.e. the
  // reduced one-edge continuations of e in the universal cover.
  const std::vector<EdgeRef>& continuations(EdgeRef e) const {
    if (e < 0 || e >= num_oriented()) throw precondition_error("continuations: unknown label");
    return continuations_[e];
  }

  std::string edge_name(EdgeRef e) const {
    return is_forward(e) ? pair_name_[edge_pair(e)] : "~" + pair_name_[edge_pair(e)];
  }

  std::optional<EdgeRef> find_edge(std::string_view name) const {
    bool inv = !name.empty() && name[0] == '~';
    std::string_view base = inv ? name.substr(1) : name;
    for (int k = 0; k < num_pairs(); ++k)
      if (pair_name_[k] == base) return (k << 1) | (inv ? 1 : 0);
    return std::nullopt;
  }

  bool connected() const {
    if (num_vertices_ == 0) return true;
    std::vector<char> seen(num_vertices_, 0);
    std::vector<Vertex> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (EdgeRef e : star_[v]) {
        Vertex w = terminus(e);
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == num_vertices_;
  }

  int betti() const { return num_pairs() - num_vertices_ + 1; }

  bool operator==(const MarkingGraph& other) const {
    return num_vertices_ == other.num_vertices_ && pair_name_ == other.pair_name_ &&
           origin_ == other.origin_;
  }

 private:
  void rebuild_tables() {
    star_.assign(num_vertices_, {});
    for (EdgeRef e = 0; e < num_oriented(); ++e) star_[origin_[e]].push_back(e);
    continuations_.assign(num_oriented(), {});
    for (EdgeRef e = 0; e < num_oriented(); ++e)
      for (EdgeRef f : star_[terminus(e)])
        if (f != inverse(e)) continuations_[e].push_back(f);
  }

  int num_vertices_ = 0;
  std::vector<std::string> pair_name_;
  std::vector<Vertex> origin_;
  std::vector<std::vector<EdgeRef>> star_;
  std::vector<std::vector<EdgeRef>> continuations_;
};

struct MarkingViolation {
  std::string code;
  std::string message;
};

// Returns the first betti number N on success. Degree-2 vertices are
// rejected by default; `allow_degree_two` relaxes the bound to the weaker
// no-degree-one convention.
inline std::variant<int, MarkingViolation> validate_marking(const MarkingGraph& g,
                                                            bool allow_degree_two = false) {
  if (g.num_vertices() == 0)
    return MarkingViolation{"empty", "marking graph has no vertices"};
  if (!g.connected()) return MarkingViolation{"disconnected", "marking graph is not connected"};
  int min_degree = allow_degree_two ? 2 : 3;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) < min_degree)
      return MarkingViolation{"degree",
                              "vertex " + std::to_string(v) + " has degree " +
                                  std::to_string(g.degree(v)) + " < " + std::to_string(min_degree)};
  if (g.betti() < 2)
    return MarkingViolation{"betti", "first betti number " + std::to_string(g.betti()) + " < 2"};
  return g.betti();
}

// A finite graph labeled over a marking graph: vertices carry types in
// V(Gamma), oriented edges carry labels in E(Gamma), and the labeling is a
// graph morphism. The empty graph is legal.
class GammaGraph {
 public:
  GammaGraph() = default;
  explicit GammaGraph(const MarkingGraph* marking) : marking_(marking) {}

  const MarkingGraph& marking() const {
    if (!marking_) throw precondition_error("gamma graph without marking");
    return *marking_;
  }
  const MarkingGraph* marking_ptr() const { return marking_; }

  int num_vertices() const { return static_cast<int>(vtype_.size()); }
  int num_pairs() const { return static_cast<int>(eorigin_.size() / 2); }
  int num_oriented() const { return static_cast<int>(eorigin_.size()); }
  bool empty() const { return vtype_.empty(); }

  int vertex_type(Vertex v) const { return vtype_[v]; }
  Vertex origin(EdgeRef e) const { return eorigin_[e]; }
  Vertex terminus(EdgeRef e) const { return eorigin_[inverse(e)]; }
  EdgeRef label(EdgeRef e) const {
    return is_forward(e) ? elabel_[edge_pair(e)] : inverse(elabel_[edge_pair(e)]);
  }

  const std::vector<EdgeRef>& star(Vertex v) const { return star_[v]; }
  int degree(Vertex v) const { return static_cast<int>(star_[v].size()); }

  // Unique outgoing edge at v with the given label, if any (meaningful for
  // folded graphs, where it is unique).
  std::optional<EdgeRef> edge_at(Vertex v, EdgeRef lab) const {
    for (EdgeRef e : star_[v])
      if (label(e) == lab) return e;
    return std::nullopt;
  }

  int betti() const;  // pairs - vertices + components

  bool operator==(const GammaGraph& other) const {
    bool marking_eq = (marking_ == other.marking_) ||
                      (marking_ && other.marking_ && *marking_ == *other.marking_);
    return marking_eq && vtype_ == other.vtype_ && eorigin_ == other.eorigin_ &&
           elabel_ == other.elabel_;
  }

  friend class GammaGraphBuilder;

 private:
  void rebuild_star() {
    star_.assign(vtype_.size(), {});
    for (EdgeRef e = 0; e < num_oriented(); ++e) star_[eorigin_[e]].push_back(e);
  }

  const MarkingGraph* marking_ = nullptr;
  std::vector<int> vtype_;
  std::vector<Vertex> eorigin_;   // per oriented edge
  std::vector<EdgeRef> elabel_;   // per pair; label of the even orientation
  std::vector<std::vector<EdgeRef>> star_;
};

class GammaGraphBuilder {
 public:
  explicit GammaGraphBuilder(const MarkingGraph& marking) : marking_(&marking) {}

  Vertex add_vertex(int type) {
    if (type < 0 || type >= marking_->num_vertices())
      throw precondition_error("builder: vertex type out of range");
    vtype_.push_back(type);
    return static_cast<Vertex>(vtype_.size() - 1);
  }

  // Adds the pair (o --label--> t); the inverse orientation is implicit.
  int add_edge(Vertex o, Vertex t, EdgeRef lab) {
    if (o < 0 || o >= static_cast<int>(vtype_.size()) || t < 0 ||
        t >= static_cast<int>(vtype_.size()))
      throw precondition_error("builder: edge endpoint out of range");
    if (lab < 0 || lab >= marking_->num_oriented())
      throw precondition_error("builder: unknown edge label");
    if (vtype_[o] != marking_->origin(lab) || vtype_[t] != marking_->terminus(lab))
      throw precondition_error("builder: labeling is not a graph morphism at edge " +
                               marking_->edge_name(lab));
    eorigin_.push_back(o);
    eorigin_.push_back(t);
    elabel_.push_back(lab);
    return static_cast<int>(elabel_.size()) - 1;
  }

  GammaGraph build() const {
    GammaGraph g(marking_);
    g.vtype_ = vtype_;
    g.eorigin_ = eorigin_;
    g.elabel_ = elabel_;
    g.rebuild_star();
    return g;
  }

 private:
  const MarkingGraph* marking_;
  std::vector<int> vtype_;
  std::vector<Vertex> eorigin_;
  std::vector<EdgeRef> elabel_;
};

// Lk(x): outgoing-label counts at a vertex.
class Link {
 public:
  Link() = default;
  explicit Link(int num_labels) : counts_(num_labels, 0) {}

  int& operator[](EdgeRef lab) { return counts_[lab]; }
  int operator[](EdgeRef lab) const { return counts_[lab]; }
  int num_labels() const { return static_cast<int>(counts_.size()); }

  int total() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }
  bool all_at_most_one() const {
    return std::all_of(counts_.begin(), counts_.end(), [](int c) { return c <= 1; });
  }
  // Label set view, valid when all counts are <= 1.
  std::vector<EdgeRef> as_set() const {
    std::vector<EdgeRef> out;
    for (EdgeRef lab = 0; lab < num_labels(); ++lab)
      if (counts_[lab] > 0) out.push_back(lab);
    return out;
  }

  bool operator==(const Link&) const = default;

 private:
  std::vector<int> counts_;
};

inline Link link_of(const GammaGraph& g, Vertex x) {
  if (x < 0 || x >= g.num_vertices()) throw precondition_error("link: unknown vertex");
  Link lk(g.marking().num_oriented());
  for (EdgeRef e : g.star(x)) lk[g.label(e)] += 1;
  return lk;
}

inline bool is_folded(const GammaGraph& g) {
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    std::vector<char> seen(g.marking().num_oriented(), 0);
    for (EdgeRef e : g.star(v)) {
      if (seen[g.label(e)]) return false;
      seen[g.label(e)] = 1;
    }
  }
  return true;
}

inline bool is_cyclically_reduced(const GammaGraph& g) {
  if (g.empty()) return false;
  if (!is_folded(g)) return false;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) < 2) return false;
  return true;
}

namespace detail {

// Rebuild a graph keeping the flagged vertices/pairs, compacting ids in
// ascending order of the survivors.
inline GammaGraph compact(const GammaGraph& g, const std::vector<char>& keep_vertex,
                          const std::vector<char>& keep_pair) {
  GammaGraphBuilder b(g.marking());
  std::vector<Vertex> vmap(g.num_vertices(), -1);
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (keep_vertex[v]) vmap[v] = b.add_vertex(g.vertex_type(v));
  for (int p = 0; p < g.num_pairs(); ++p)
    if (keep_pair[p]) b.add_edge(vmap[g.origin(2 * p)], vmap[g.terminus(2 * p)], g.label(2 * p));
  return b.build();
}

}  // namespace detail

// Stallings folding: iteratively identify pairs of distinct edges with a
// common origin and equal label. Collisions are resolved in ascending
// (vertex, label, edge, edge) order so the output is reproducible. The
// image of pi_1 in pi_1(Gamma) is preserved.
inline GammaGraph fold(const GammaGraph& input) {
  GammaGraph g = input;
  while (true) {
    EdgeRef e1 = -1, e2 = -1;
    for (Vertex v = 0; v < g.num_vertices() && e1 < 0; ++v) {
      // star() lists edges in ascending id order already
      std::vector<std::pair<EdgeRef, EdgeRef>> by_label;
      for (EdgeRef e : g.star(v)) by_label.push_back({g.label(e), e});
      std::sort(by_label.begin(), by_label.end());
      for (size_t i = 0; i + 1 < by_label.size(); ++i) {
        if (by_label[i].first == by_label[i + 1].first) {
          e1 = by_label[i].second;
          e2 = by_label[i + 1].second;
          break;
        }
      }
    }
    if (e1 < 0) return g;

    // Identify terminus(e1) with terminus(e2) and merge the pair of e2
    // into the pair of e1.
    Vertex t1 = g.terminus(e1), t2 = g.terminus(e2);
    Vertex keep = std::min(t1, t2), drop = std::max(t1, t2);
    GammaGraphBuilder b(g.marking());
    std::vector<Vertex> vmap(g.num_vertices(), -1);
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      if (v == drop && drop != keep) continue;
      vmap[v] = b.add_vertex(g.vertex_type(v));
    }
    if (drop != keep) vmap[drop] = vmap[keep];
    int dead_pair = edge_pair(e2);
    for (int p = 0; p < g.num_pairs(); ++p) {
      if (p == dead_pair) continue;
      b.add_edge(vmap[g.origin(2 * p)], vmap[g.terminus(2 * p)], g.label(2 * p));
    }
    g = b.build();
  }
}

// Iteratively delete vertices of degree <= 1 together with their edges.
// Requires a folded input; the result is empty or cyclically reduced.
inline GammaGraph core(const GammaGraph& input) {
  if (!is_folded(input)) throw precondition_error("core: input graph is not folded");
  GammaGraph g = input;
  while (true) {
    Vertex victim = -1;
    for (Vertex v = 0; v < g.num_vertices(); ++v)
      if (g.degree(v) <= 1) {
        victim = v;
        break;
      }
    if (victim < 0) return g;
    std::vector<char> keep_vertex(g.num_vertices(), 1), keep_pair(g.num_pairs(), 1);
    keep_vertex[victim] = 0;
    for (int p = 0; p < g.num_pairs(); ++p)
      if (g.origin(2 * p) == victim || g.terminus(2 * p) == victim) keep_pair[p] = 0;
    g = detail::compact(g, keep_vertex, keep_pair);
  }
}

inline std::vector<GammaGraph> components(const GammaGraph& g) {
  std::vector<GammaGraph> out;
  std::vector<int> comp(g.num_vertices(), -1);
  int count = 0;
  for (Vertex start = 0; start < g.num_vertices(); ++start) {
    if (comp[start] >= 0) continue;
    std::vector<Vertex> stack{start};
    comp[start] = count;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (EdgeRef e : g.star(v)) {
        Vertex w = g.terminus(e);
        if (comp[w] < 0) {
          comp[w] = count;
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  for (int c = 0; c < count; ++c) {
    std::vector<char> keep_vertex(g.num_vertices(), 0), keep_pair(g.num_pairs(), 0);
    for (Vertex v = 0; v < g.num_vertices(); ++v) keep_vertex[v] = (comp[v] == c);
    for (int p = 0; p < g.num_pairs(); ++p) keep_pair[p] = (comp[g.origin(2 * p)] == c);
    out.push_back(detail::compact(g, keep_vertex, keep_pair));
  }
  return out;
}

inline int GammaGraph::betti() const {
  int n = num_vertices();
  if (n == 0) return 0;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Vertex v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int comps = n;
  for (int p = 0; p < num_pairs(); ++p) {
    Vertex a = find(origin(2 * p)), b = find(terminus(2 * p));
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return num_pairs() - n + comps;
}

namespace detail {

// Unique label-preserving extension of anchor -> image over a connected
// folded graph; returns the vertex map or nullopt when some edge has no
// image. Used both for isomorphism testing and occurrence counting.
inline std::optional<std::vector<Vertex>> propagate_map(const GammaGraph& a, Vertex anchor,
                                                        const GammaGraph& b, Vertex image) {
  if (a.vertex_type(anchor) != b.vertex_type(image)) return std::nullopt;
  std::vector<Vertex> map(a.num_vertices(), -1);
  map[anchor] = image;
  std::vector<Vertex> queue{anchor};
  size_t head = 0;
  while (head < queue.size()) {
    Vertex v = queue[head++];
    for (EdgeRef e : a.star(v)) {
      auto img = b.edge_at(map[v], a.label(e));
      if (!img) return std::nullopt;
      Vertex w = a.terminus(e), iw = b.terminus(*img);
      if (map[w] < 0) {
        map[w] = iw;
        queue.push_back(w);
      } else if (map[w] != iw) {
        return std::nullopt;
      }
    }
  }
  return map;
}

inline bool component_isomorphic(const GammaGraph& a, const GammaGraph& b) {
  if (a.num_vertices() != b.num_vertices() || a.num_pairs() != b.num_pairs()) return false;
  if (a.num_vertices() == 0) return true;
  for (Vertex u = 0; u < b.num_vertices(); ++u) {
    auto map = propagate_map(a, 0, b, u);
    if (!map) continue;
    std::vector<char> hit(b.num_vertices(), 0);
    bool injective = true;
    for (Vertex v = 0; v < a.num_vertices(); ++v) {
      if (map->at(v) < 0 || hit[map->at(v)]) {
        injective = false;  // unreached vertex can't happen for connected a
        break;
      }
      hit[map->at(v)] = 1;
    }
    if (injective) return true;
  }
  return false;
}

}  // namespace detail

// Label-preserving isomorphism of folded graphs. Components are matched
// greedily; inside a component the map is forced by a single anchor choice.
inline bool isomorphic(const GammaGraph& a, const GammaGraph& b) {
  if (!is_folded(a) || !is_folded(b)) throw precondition_error("isomorphic: inputs must be folded");
  if (!(a.marking() == b.marking())) return false;
  auto ca = components(a), cb = components(b);
  if (ca.size() != cb.size()) return false;
  std::vector<char> used(cb.size(), 0);
  for (const auto& comp : ca) {
    bool matched = false;
    for (size_t j = 0; j < cb.size(); ++j) {
      if (used[j]) continue;
      if (detail::component_isomorphic(comp, cb[j])) {
        used[j] = 1;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

// Wedge the given closed edge-paths at one vertex, fold, and take the
// core. The result is the core graph of the subgroup generated by the
// loops, as read from the base vertex.
inline GammaGraph subgroup_graph(const MarkingGraph& marking,
                                 const std::vector<std::vector<EdgeRef>>& loops) {
  std::optional<Vertex> base;
  for (const auto& loop : loops) {
    if (loop.empty()) throw precondition_error("subgroup graph: empty loop word");
    for (size_t i = 0; i < loop.size(); ++i) {
      EdgeRef lab = loop[i];
      if (lab < 0 || lab >= marking.num_oriented())
        throw precondition_error("subgroup graph: unknown edge label in loop");
      if (i > 0 && marking.origin(lab) != marking.terminus(loop[i - 1]))
        throw precondition_error("subgroup graph: loop is not an edge-path in the marking graph");
    }
    if (marking.terminus(loop.back()) != marking.origin(loop.front()))
      throw precondition_error("subgroup graph: loop is not closed");
    if (base && *base != marking.origin(loop.front()))
      throw precondition_error("subgroup graph: loops must share a base vertex");
    base = marking.origin(loop.front());
  }

  GammaGraphBuilder b(marking);
  if (!base) return core(b.build());  // no loops: empty graph
  Vertex hub = b.add_vertex(*base);
  for (const auto& loop : loops) {
    Vertex prev = hub;
    for (size_t i = 0; i < loop.size(); ++i) {
      Vertex next = (i + 1 == loop.size()) ? hub : b.add_vertex(marking.terminus(loop[i]));
      b.add_edge(prev, next, loop[i]);
      prev = next;
    }
  }
  return core(fold(b.build()));
}

inline GammaGraph disjoint_union(const GammaGraph& a, const GammaGraph& b) {
  if (!(a.marking() == b.marking()))
    throw precondition_error("disjoint union: markings differ");
  GammaGraphBuilder out(a.marking());
  for (Vertex v = 0; v < a.num_vertices(); ++v) out.add_vertex(a.vertex_type(v));
  for (Vertex v = 0; v < b.num_vertices(); ++v) out.add_vertex(b.vertex_type(v));
  for (int p = 0; p < a.num_pairs(); ++p)
    out.add_edge(a.origin(2 * p), a.terminus(2 * p), a.label(2 * p));
  int shift = a.num_vertices();
  for (int p = 0; p < b.num_pairs(); ++p)
    out.add_edge(b.origin(2 * p) + shift, b.terminus(2 * p) + shift, b.label(2 * p));
  return out.build();
}

}  // namespace scw
