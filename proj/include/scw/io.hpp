#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scw/graph.hpp"
#include "scw/rational.hpp"
#include "scw/tree.hpp"
#include "scw/weights.hpp"

namespace scw {

inline uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

inline std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw parse_error("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw parse_error("invalid hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  return out;
}

inline std::string hash16(std::string_view bytes) {
  uint64_t h = fnv1a64(bytes);
  std::string raw(8, '\0');
  for (int i = 7; i >= 0; --i) {
    raw[i] = static_cast<char>(h & 0xFF);
    h >>= 8;
  }
  return to_hex(raw);
}

// Keys in files are self-describing: a 16-hex content hash, a colon, then
// the full canonical encoding in hex.
inline std::string key_to_text(const CanonicalKey& key) {
  return hash16(key) + ":" + to_hex(key);
}

inline CanonicalKey key_from_text(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw parse_error("weight key: missing hash prefix");
  CanonicalKey key = from_hex(text.substr(colon + 1));
  if (hash16(key) != text.substr(0, colon))
    throw parse_error("weight key: hash does not match encoding");
  return key;
}

namespace detail {

struct LineReader {
  std::istringstream in;
  std::string current;
  size_t line_no = 0;

  explicit LineReader(std::string_view text) : in{std::string(text)} {}

  // Next non-blank, non-comment line split into tokens.
  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) {
        if (tok[0] == '#') break;
        tokens.push_back(tok);
      }
      if (!tokens.empty()) {
        current = line;
        return tokens;
      }
    }
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw parse_error("line " + std::to_string(line_no) + ": " + what);
  }
};

inline int to_int(LineReader& r, const std::string& tok) {
  try {
    size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) r.fail("invalid integer '" + tok + "'");
    return v;
  } catch (const parse_error&) {
    throw;
  } catch (const std::exception&) {
    r.fail("invalid integer '" + tok + "'");
  }
}

inline void serialize_marking_body(const MarkingGraph& g, std::ostringstream& out) {
  out << "vertices " << g.num_vertices() << "\n";
  for (int p = 0; p < g.num_pairs(); ++p)
    out << "edge " << g.edge_name(2 * p) << " " << g.origin(2 * p) << " " << g.terminus(2 * p)
        << "\n";
}

// Reads the body lines up to (not consuming past) `sentinel`; when
// sentinel is empty, reads to end of input.
inline MarkingGraph parse_marking_body(LineReader& r, const std::string& sentinel) {
  std::optional<int> vertices;
  std::vector<std::string> names;
  std::vector<std::pair<Vertex, Vertex>> ends;
  while (auto tokens = r.next()) {
    const auto& t = *tokens;
    if (!sentinel.empty() && t[0] == sentinel) {
      if (!vertices) r.fail("marking: missing 'vertices' line");
      return MarkingGraph::build(*vertices, names, ends);
    }
    if (t[0] == "vertices" && t.size() == 2) {
      vertices = to_int(r, t[1]);
    } else if (t[0] == "edge" && t.size() == 4) {
      names.push_back(t[1]);
      ends.push_back({to_int(r, t[2]), to_int(r, t[3])});
    } else {
      r.fail("marking: unexpected line '" + r.current + "'");
    }
  }
  if (!sentinel.empty()) r.fail("marking: missing '" + sentinel + "'");
  if (!vertices) r.fail("marking: missing 'vertices' line");
  return MarkingGraph::build(*vertices, names, ends);
}

}  // namespace detail

inline std::string serialize_marking(const MarkingGraph& g) {
  std::ostringstream out;
  out << "marking-graph\n";
  detail::serialize_marking_body(g, out);
  return out.str();
}

inline MarkingGraph parse_marking(std::string_view text) {
  detail::LineReader r(text);
  auto head = r.next();
  if (!head || (*head)[0] != "marking-graph") r.fail("expected 'marking-graph' header");
  return detail::parse_marking_body(r, "");
}

inline std::string marking_hash_hex(const MarkingGraph& g) { return hash16(serialize_marking(g)); }

namespace detail {

inline void serialize_graph_body(const GammaGraph& g, std::ostringstream& out) {
  out << "marking\n";
  serialize_marking_body(g.marking(), out);
  out << "end-marking\n";
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    out << "vertex " << v << " " << g.vertex_type(v) << "\n";
  for (int p = 0; p < g.num_pairs(); ++p)
    out << "edge " << p << " " << g.origin(2 * p) << " " << g.terminus(2 * p) << " "
        << g.marking().edge_name(g.label(2 * p)) << "\n";
}

struct GraphBody {
  GammaGraph graph;
  std::optional<Vertex> center;
  std::optional<EdgeRef> axis;
};

inline GraphBody parse_graph_body(LineReader& r, const MarkingGraph& marking) {
  // Vertex/edge ids may be arbitrary distinct integers; they are compacted
  // in order of appearance, which is ascending for canonical files.
  std::vector<std::pair<int, int>> vertices;  // (file id, type)
  struct EdgeLine {
    int id, o, t;
    std::string label;
  };
  std::vector<EdgeLine> edges;
  std::optional<int> center_id;
  std::optional<int> axis_id;
  while (auto tokens = r.next()) {
    const auto& t = *tokens;
    if (t[0] == "vertex" && t.size() == 3) {
      vertices.push_back({to_int(r, t[1]), to_int(r, t[2])});
    } else if (t[0] == "edge" && t.size() == 5) {
      edges.push_back({to_int(r, t[1]), to_int(r, t[2]), to_int(r, t[3]), t[4]});
    } else if (t[0] == "center" && t.size() == 2) {
      center_id = to_int(r, t[1]);
    } else if (t[0] == "axis" && t.size() == 2) {
      axis_id = to_int(r, t[1]);
    } else {
      r.fail("graph: unexpected line '" + r.current + "'");
    }
  }
  std::map<int, Vertex> vmap;
  GammaGraphBuilder b(marking);
  for (const auto& [id, type] : vertices) {
    if (vmap.count(id)) r.fail("graph: duplicate vertex id " + std::to_string(id));
    vmap[id] = b.add_vertex(type);
  }
  std::map<int, int> emap;
  for (const auto& e : edges) {
    if (emap.count(e.id)) r.fail("graph: duplicate edge id " + std::to_string(e.id));
    auto lab = marking.find_edge(e.label);
    if (!lab) r.fail("graph: unknown label '" + e.label + "'");
    if (!vmap.count(e.o) || !vmap.count(e.t)) r.fail("graph: edge endpoint not declared");
    emap[e.id] = b.add_edge(vmap[e.o], vmap[e.t], *lab);
  }
  GraphBody out{b.build(), std::nullopt, std::nullopt};
  if (center_id) {
    if (!vmap.count(*center_id)) r.fail("graph: center vertex not declared");
    out.center = vmap[*center_id];
  }
  if (axis_id) {
    int pair_id = *axis_id / 2;
    if (!emap.count(pair_id)) r.fail("graph: axis edge not declared");
    out.axis = 2 * emap[pair_id] + (*axis_id % 2);
  }
  return out;
}

}  // namespace detail

// A parsed document owns its marking; the graph references it.
struct ParsedGraph {
  std::shared_ptr<const MarkingGraph> marking;
  GammaGraph graph;
};

inline std::string serialize_graph(const GammaGraph& g) {
  std::ostringstream out;
  out << "gamma-graph\n";
  detail::serialize_graph_body(g, out);
  return out.str();
}

inline ParsedGraph parse_graph(std::string_view text) {
  detail::LineReader r(text);
  auto head = r.next();
  if (!head || (*head)[0] != "gamma-graph") r.fail("expected 'gamma-graph' header");
  auto marking_head = r.next();
  if (!marking_head || (*marking_head)[0] != "marking") r.fail("expected 'marking' section");
  auto marking = std::make_shared<MarkingGraph>(detail::parse_marking_body(r, "end-marking"));
  auto body = detail::parse_graph_body(r, *marking);
  return ParsedGraph{marking, std::move(body.graph)};
}

// Rooted tree document: a graph plus a center vertex or an oriented axis
// edge (2 * pair id + orientation bit).
struct ParsedTree {
  std::shared_ptr<const MarkingGraph> marking;
  GammaGraph tree;
  std::optional<Vertex> center;
  std::optional<EdgeRef> axis;
};

inline std::string serialize_tree(const GammaGraph& tree, std::optional<Vertex> center,
                                  std::optional<EdgeRef> axis) {
  std::ostringstream out;
  out << "gamma-tree\n";
  detail::serialize_graph_body(tree, out);
  if (center) out << "center " << *center << "\n";
  if (axis) out << "axis " << *axis << "\n";
  return out.str();
}

inline ParsedTree parse_tree(std::string_view text) {
  detail::LineReader r(text);
  auto head = r.next();
  if (!head || (*head)[0] != "gamma-tree") r.fail("expected 'gamma-tree' header");
  auto marking_head = r.next();
  if (!marking_head || (*marking_head)[0] != "marking") r.fail("expected 'marking' section");
  auto marking = std::make_shared<MarkingGraph>(detail::parse_marking_body(r, "end-marking"));
  auto body = detail::parse_graph_body(r, *marking);
  return ParsedTree{marking, std::move(body.graph), body.center, body.axis};
}

struct ParsedWeights {
  std::shared_ptr<const MarkingGraph> marking;
  WeightSystem weights;
};

inline std::string serialize_weights(const WeightSystem& t) {
  std::ostringstream out;
  out << "weight-table\n";
  out << "marking\n";
  detail::serialize_marking_body(t.marking(), out);
  out << "end-marking\n";
  out << "marking-hash " << marking_hash_hex(t.marking()) << "\n";
  out << "grade " << t.grade() << "\n";
  for (const auto& [key, value] : t.entries())
    out << "row " << key_to_text(key) << " " << rational_to_string(value) << "\n";
  return out.str();
}

inline ParsedWeights parse_weights(std::string_view text) {
  detail::LineReader r(text);
  auto head = r.next();
  if (!head || (*head)[0] != "weight-table") r.fail("expected 'weight-table' header");
  auto marking_head = r.next();
  if (!marking_head || (*marking_head)[0] != "marking") r.fail("expected 'marking' section");
  auto marking = std::make_shared<MarkingGraph>(detail::parse_marking_body(r, "end-marking"));
  std::optional<int> grade;
  std::vector<std::pair<CanonicalKey, Rational>> rows;
  while (auto tokens = r.next()) {
    const auto& t = *tokens;
    if (t[0] == "marking-hash" && t.size() == 2) {
      if (t[1] != marking_hash_hex(*marking))
        r.fail("weight table: marking hash does not match the embedded marking");
    } else if (t[0] == "grade" && t.size() == 2) {
      grade = detail::to_int(r, t[1]);
    } else if (t[0] == "row" && t.size() == 3) {
      rows.push_back({key_from_text(t[1]), parse_rational(t[2])});
    } else {
      r.fail("weight table: unexpected line '" + r.current + "'");
    }
  }
  if (!grade) r.fail("weight table: missing grade");
  WeightSystem w(*marking, *grade);
  for (auto& [key, value] : rows) {
    if (w.entries().count(key)) r.fail("weight table: duplicate key");
    w.set(key, value);
  }
  return ParsedWeights{marking, std::move(w)};
}

}  // namespace scw
