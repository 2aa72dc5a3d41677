// Command-line surface over the library: stable file formats, JSON
// reports on stdout, exit codes 0 (ok), 1 (usage/input), 2 (mathematical
// precondition violated), 3 (budget exceeded).

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "scw/scw.hpp"

namespace {

using nlohmann::json;
using namespace scw;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << content;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

json switch_report_json(const SwitchReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"semi_round_key", key_to_text(v.semi_round_key)},
                          {"origin_sum", rational_to_string(v.origin_sum)},
                          {"terminus_sum", rational_to_string(v.terminus_sum)}});
  return {{"invariant", "switch-conditions"},
          {"meaning",
           "for every semi-round class the weight sums over its one-level completions toward "
           "the two axis endpoints must agree"},
          {"violations", violations}};
}

std::vector<std::vector<EdgeRef>> parse_loops(const MarkingGraph& marking,
                                              const std::vector<std::string>& words) {
  std::vector<std::vector<EdgeRef>> loops;
  for (const auto& word : words) {
    std::istringstream in(word);
    std::vector<EdgeRef> loop;
    std::string name;
    while (in >> name) {
      auto e = marking.find_edge(name);
      if (!e) throw parse_error("unknown edge name '" + name + "'");
      loop.push_back(*e);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

json graph_summary(const GammaGraph& g) {
  return {{"vertices", g.num_vertices()},
          {"edge_pairs", g.num_pairs()},
          {"components", components(g).size()},
          {"betti", g.betti()}};
}

void require_same_marking(const MarkingGraph& a, const MarkingGraph& b) {
  if (!(a == b))
    throw precondition_error("inputs use different markings (hashes " + marking_hash_hex(a) +
                             " vs " + marking_hash_hex(b) + ")");
}

int run(int argc, char** argv) {
  CLI::App app{"subset-current weight calculus: folded graphs, weight tables, realization"};
  app.require_subcommand(1);

  // validate-marking
  std::string vm_path;
  bool vm_allow_degree2 = false;
  auto* vm = app.add_subcommand("validate-marking", "check marking graph invariants");
  vm->add_option("--marking", vm_path, "marking graph file (.mg)")->required();
  vm->add_flag("--allow-degree-2", vm_allow_degree2, "accept degree-2 vertices");

  // subgroup-graph
  std::string sg_marking, sg_out;
  std::vector<std::string> sg_loops;
  auto* sg = app.add_subcommand("subgroup-graph", "fold and core a wedge of loops");
  sg->add_option("--marking", sg_marking)->required();
  sg->add_option("--loop", sg_loops, "closed edge-path, space-separated edge names (repeatable)")
      ->required();
  sg->add_option("--out", sg_out, "output graph file (.gg)")->required();

  // weights
  std::string w_graph, w_out;
  int w_grade = 2;
  auto* wcmd = app.add_subcommand("weights", "grade-r weight table of a graph");
  wcmd->add_option("--graph", w_graph)->required();
  wcmd->add_option("--grade", w_grade)->required();
  wcmd->add_option("--out", w_out, "output weight table (.wt)");

  // check-switch
  std::string cs_weights;
  auto* cs = app.add_subcommand("check-switch", "verify switch conditions of a weight table");
  cs->add_option("--weights", cs_weights)->required();

  // subtree-weight
  std::string sw_tree, sw_weights;
  int sw_vertex = -1;
  auto* sw = app.add_subcommand("subtree-weight", "evaluate a subtree weight from a table");
  sw->add_option("--tree", sw_tree, "rooted tree file (.gt)")->required();
  sw->add_option("--weights", sw_weights)->required();
  sw->add_option("--vertex", sw_vertex, "reference vertex (default: radius minimizer)");

  // realize
  std::string rz_weights, rz_out;
  std::optional<uint64_t> rz_seed;
  auto* rz = app.add_subcommand("realize", "realize an integral weight table as a graph");
  rz->add_option("--weights", rz_weights)->required();
  rz->add_option("--seed", rz_seed, "shuffle the matching");
  rz->add_option("--out", rz_out)->required();

  // verify
  std::string vf_weights, vf_graph;
  auto* vf = app.add_subcommand("verify", "check that a graph carries exactly a weight table");
  vf->add_option("--weights", vf_weights)->required();
  vf->add_option("--graph", vf_graph)->required();

  // reconstruct
  std::string rc_hidden, rc_out, rc_report;
  int rc_rmax = 3;
  auto* rc = app.add_subcommand("reconstruct",
                                "rebuild a graph from its occurrence counts, grade by grade");
  rc->add_option("--hidden", rc_hidden, "graph backing the weight oracle (.gg)")->required();
  rc->add_option("--rmax", rc_rmax)->required();
  rc->add_option("--out", rc_out)->required();
  rc->add_option("--report", rc_report, "stabilization report (.json)");

  // approximate
  std::string ap_target, ap_out, ap_report, ap_reference;
  std::string ap_eps = "1e-3";
  auto* ap = app.add_subcommand("approximate",
                                "approximate a weight table by a rational multiple of a graph");
  ap->add_option("--target", ap_target, "target weight table (.wt), values may be decimal")
      ->required();
  ap->add_option("--eps", ap_eps)->required();
  ap->add_option("--out", ap_out)->required();
  ap->add_option("--report", ap_report);
  ap->add_option("--reference", ap_reference, "strictly positive kernel point (.wt)");

  // words-realize
  std::string wr_alphabet, wr_weights, wr_out;
  int wr_m = 2;
  auto* wr = app.add_subcommand("words-realize", "Euler-circuit realization of block weights");
  wr->add_option("--alphabet", wr_alphabet)->required();
  wr->add_option("--m", wr_m, "block length")->required();
  wr->add_option("--weights", wr_weights, "JSON object block -> count")->required();
  wr->add_option("--out", wr_out, "write the words as JSON");

  // iso
  std::string iso_a, iso_b;
  auto* is = app.add_subcommand("iso", "label-preserving isomorphism test");
  is->add_option("--a", iso_a)->required();
  is->add_option("--b", iso_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*vm) {
    MarkingGraph g = parse_marking(read_file(vm_path));
    auto result = validate_marking(g, vm_allow_degree2);
    if (std::holds_alternative<int>(result)) {
      emit({{"ok", true}, {"betti", std::get<int>(result)}});
      return 0;
    }
    const auto& violation = std::get<MarkingViolation>(result);
    emit({{"ok", false},
          {"error",
           {{"invariant", "marking-" + violation.code},
            {"meaning", "a marking graph must be connected, of minimum degree 3 (2 with "
                        "--allow-degree-2), with first betti number at least 2"},
            {"message", violation.message}}}});
    return 2;
  }

  if (*sg) {
    MarkingGraph marking = parse_marking(read_file(sg_marking));
    GammaGraph h = subgroup_graph(marking, parse_loops(marking, sg_loops));
    write_file(sg_out, serialize_graph(h));
    emit(graph_summary(h));
    return 0;
  }

  if (*wcmd) {
    ParsedGraph d = parse_graph(read_file(w_graph));
    WeightSystem t = weights_of(d.graph, w_grade);
    if (!w_out.empty()) write_file(w_out, serialize_weights(t));
    emit({{"vertices", d.graph.num_vertices()},
          {"rows", t.entries().size()},
          {"total", rational_to_string(t.total())}});
    return 0;
  }

  if (*cs) {
    ParsedWeights t = parse_weights(read_file(cs_weights));
    SwitchReport report = check_switch(t.weights);
    if (report.ok()) {
      emit({{"ok", true}, {"rows", t.weights.entries().size()}});
      return 0;
    }
    emit({{"ok", false}, {"error", switch_report_json(report)}});
    return 2;
  }

  if (*sw) {
    ParsedTree k = parse_tree(read_file(sw_tree));
    ParsedWeights t = parse_weights(read_file(sw_weights));
    require_same_marking(*k.marking, *t.marking);
    Vertex v = sw_vertex >= 0 ? sw_vertex : tree_radius(k.tree).second;
    Rational value = subtree_weight(k.tree, v, t.weights);
    emit({{"value", rational_to_string(value)}, {"vertex", v}});
    return 0;
  }

  if (*rz) {
    ParsedWeights t = parse_weights(read_file(rz_weights));
    RealizeOptions options;
    options.seed = rz_seed;
    GammaGraph d = realize(t.weights, options);
    write_file(rz_out, serialize_graph(d));
    emit(graph_summary(d));
    return 0;
  }

  if (*vf) {
    ParsedWeights t = parse_weights(read_file(vf_weights));
    ParsedGraph d = parse_graph(read_file(vf_graph));
    require_same_marking(*t.marking, *d.marking);
    bool ok = verify_realization(t.weights, d.graph);
    emit({{"ok", ok}});
    return ok ? 0 : 2;
  }

  if (*rc) {
    ParsedGraph hidden = parse_graph(read_file(rc_hidden));
    if (!is_cyclically_reduced(hidden.graph))
      throw precondition_error("reconstruct: hidden graph must be cyclically reduced");
    WeightOracle oracle = [&](const GammaGraph& tree) {
      return BigInt(occurrences(tree, hidden.graph));
    };
    ReconstructReport report = reconstruct(*hidden.marking, oracle, rc_rmax);
    write_file(rc_out, serialize_graph(report.result));
    json counts = json::array();
    for (const auto& c : report.vertex_counts) counts.push_back(c.str());
    json matches = json::array();
    for (bool b : report.grade_weights_match) matches.push_back(b);
    json j{{"star_total", report.star_total.str()},
           {"vertex_counts", counts},
           {"iso_classes", report.iso_class},
           {"grade_weights_match", matches},
           {"final_matches_all", report.final_matches_all}};
    if (!rc_report.empty()) write_file(rc_report, j.dump(2) + "\n");
    emit(j);
    return 0;
  }

  if (*ap) {
    ParsedWeights target = parse_weights(read_file(ap_target));
    RationalizeOptions ropts;
    std::map<CanonicalKey, Rational> reference;
    std::shared_ptr<const MarkingGraph> ref_marking;
    if (!ap_reference.empty()) {
      ParsedWeights ref = parse_weights(read_file(ap_reference));
      require_same_marking(*target.marking, *ref.marking);
      reference = ref.weights.entries();
      ropts.nonneg_reference = &reference;
      ref_marking = ref.marking;
    }
    std::map<CanonicalKey, Rational> tmap = target.weights.entries();
    ApproximationResult result = approximate_by_rational_current(
        *target.marking, tmap, target.weights.grade(), parse_rational(ap_eps), ropts);
    write_file(ap_out, serialize_graph(result.graph));
    json errors = json::object();
    for (const auto& [key, err] : result.per_key_error)
      errors[key_to_text(key)] = rational_to_string(err);
    json j{{"denominator", result.denominator.str()},
           {"max_error", rational_to_string(result.max_error)},
           {"component_count", result.component_count},
           {"vertices", result.graph.num_vertices()},
           {"per_key_errors", errors}};
    if (!ap_report.empty()) write_file(ap_report, j.dump(2) + "\n");
    emit(j);
    return 0;
  }

  if (*wr) {
    json spec = json::parse(read_file(wr_weights));
    WordWeightSystem t(wr_alphabet, wr_m);
    for (auto it = spec.begin(); it != spec.end(); ++it)
      t.set(it.key(), it.value().get<long long>());
    std::vector<CyclicWord> words = realize_words(t);
    json jwords = json::array();
    long long total_length = 0;
    for (const auto& w : words) {
      jwords.push_back(w.letters());
      total_length += static_cast<long long>(w.size());
    }
    // Round-trip check: the realized words carry exactly the input counts.
    bool verified = true;
    std::map<std::string, long long> counts;
    for (const auto& [block, v] : t.entries()) counts[block] = 0;
    for (const auto& w : words)
      for (const auto& [block, v] : t.entries()) counts[block] += occurrences_cyclic(block, w);
    for (const auto& [block, v] : t.entries())
      if (counts[block] != v) verified = false;
    json j{{"words", jwords}, {"total_length", total_length}, {"verified", verified}};
    if (!wr_out.empty()) write_file(wr_out, j.dump(2) + "\n");
    emit(j);
    return verified ? 0 : 2;
  }

  if (*is) {
    ParsedGraph a = parse_graph(read_file(iso_a));
    ParsedGraph b = parse_graph(read_file(iso_b));
    require_same_marking(*a.marking, *b.marking);
    emit({{"isomorphic", isomorphic(a.graph, b.graph)}});
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const scw::switch_violation_error& e) {
    emit({{"ok", false}, {"error", switch_report_json(e.report())}});
    return 2;
  } catch (const scw::word_switch_error& e) {
    json stems = json::array();
    for (const auto& v : e.violations())
      stems.push_back({{"stem", v.stem},
                       {"left_extension_sum", v.left_extension_sum},
                       {"right_extension_sum", v.right_extension_sum}});
    emit({{"ok", false},
          {"error",
           {{"invariant", "word-switch-conditions"},
            {"meaning", "for every stem the left and right one-letter extension sums must agree"},
            {"violations", stems}}}});
    return 2;
  } catch (const scw::rationalize_error& e) {
    json detail{{"invariant", "rational-approximation"}, {"message", e.what()}};
    if (e.achieved_distance)
      detail["achieved_distance"] = rational_to_string(*e.achieved_distance);
    emit({{"ok", false}, {"error", detail}});
    return 2;
  } catch (const scw::budget_error& e) {
    emit({{"ok", false}, {"error", {{"invariant", "budget"}, {"message", e.what()}}}});
    return 3;
  } catch (const scw::precondition_error& e) {
    emit({{"ok", false}, {"error", {{"invariant", "precondition"}, {"message", e.what()}}}});
    return 2;
  } catch (const scw::parse_error& e) {
    emit({{"ok", false}, {"error", {{"invariant", "input"}, {"message", e.what()}}}});
    return 1;
  } catch (const std::exception& e) {
    emit({{"ok", false}, {"error", {{"invariant", "internal"}, {"message", e.what()}}}});
    return 1;
  }
}
