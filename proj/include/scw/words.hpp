#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scw/errors.hpp"

namespace scw {

// Necklace over a finite alphabet, stored in its lexicographically
// minimal rotation.
class CyclicWord {
 public:
  explicit CyclicWord(std::string_view letters) {
    if (letters.empty()) throw precondition_error("cyclic word: empty");
    letters_ = minimal_rotation(letters);
  }

  const std::string& letters() const { return letters_; }
  size_t size() const { return letters_.size(); }

  bool operator==(const CyclicWord&) const = default;
  bool operator<(const CyclicWord& other) const { return letters_ < other.letters_; }

  static std::string minimal_rotation(std::string_view w) {
    std::string best(w);
    std::string cur(w);
    for (size_t i = 1; i < w.size(); ++i) {
      std::rotate(cur.begin(), cur.begin() + 1, cur.end());
      if (cur < best) best = cur;
    }
    return best;
  }

 private:
  std::string letters_;
};

// Number of starting positions on the cycle from which `pattern` can be
// read; the read may wrap around and overlap itself.
inline long occurrences_cyclic(std::string_view pattern, const CyclicWord& w) {
  if (pattern.empty()) throw precondition_error("occurrences: empty pattern");
  const std::string& s = w.letters();
  long count = 0;
  for (size_t start = 0; start < s.size(); ++start) {
    bool match = true;
    for (size_t j = 0; j < pattern.size(); ++j)
      if (s[(start + j) % s.size()] != pattern[j]) {
        match = false;
        break;
      }
    if (match) ++count;
  }
  return count;
}

inline std::pair<std::string, int> primitive_root(std::string_view w) {
  if (w.empty()) throw precondition_error("primitive root: empty word");
  size_t n = w.size();
  for (size_t p = 1; p <= n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (size_t i = p; i < n && periodic; ++i) periodic = (w[i] == w[i - p]);
    if (periodic) return {std::string(w.substr(0, p)), static_cast<int>(n / p)};
  }
  return {std::string(w), 1};  // unreachable
}

inline bool is_primitive(std::string_view w) { return primitive_root(w).second == 1; }

// Nonnegative integer weights on length-m blocks over a fixed alphabet.
class WordWeightSystem {
 public:
  WordWeightSystem(std::string alphabet, int block_length)
      : alphabet_(std::move(alphabet)), block_(block_length) {
    if (alphabet_.size() < 2) throw precondition_error("word weights: alphabet needs >= 2 letters");
    if (std::set<char>(alphabet_.begin(), alphabet_.end()).size() != alphabet_.size())
      throw precondition_error("word weights: duplicate letters in alphabet");
    if (block_ < 2) throw precondition_error("word weights: block length must be >= 2");
  }

  const std::string& alphabet() const { return alphabet_; }
  int block_length() const { return block_; }
  const std::map<std::string, long long>& entries() const { return entries_; }

  long long value(const std::string& block) const {
    auto it = entries_.find(block);
    return it == entries_.end() ? 0 : it->second;
  }

  void set(const std::string& block, long long v) {
    if (static_cast<int>(block.size()) != block_)
      throw precondition_error("word weights: block has wrong length");
    for (char c : block)
      if (alphabet_.find(c) == std::string::npos)
        throw precondition_error("word weights: letter outside alphabet");
    if (v < 0) throw precondition_error("word weights: negative weight");
    if (v == 0)
      entries_.erase(block);
    else
      entries_[block] = v;
  }

  bool is_zero() const { return entries_.empty(); }

  long long total() const {
    long long s = 0;
    for (const auto& [b, v] : entries_) s += v;
    return s;
  }

 private:
  std::string alphabet_;
  int block_;
  std::map<std::string, long long> entries_;
};

struct WordSwitchViolation {
  std::string stem;  // u in A^{m-1}
  long long left_extension_sum;
  long long right_extension_sum;
};

// For every stem u: the sum of weights of blocks u·a must equal the sum
// over blocks b·u. Only stems touching the support can violate.
inline std::vector<WordSwitchViolation> check_word_switch(const WordWeightSystem& t) {
  std::map<std::string, std::pair<long long, long long>> sums;
  for (const auto& [block, v] : t.entries()) {
    sums[block.substr(0, block.size() - 1)].first += v;   // u = prefix: block = u·a
    sums[block.substr(1)].second += v;                    // u = suffix: block = b·u
  }
  std::vector<WordSwitchViolation> out;
  for (const auto& [stem, lr] : sums)
    if (lr.first != lr.second) out.push_back({stem, lr.first, lr.second});
  return out;
}

class word_switch_error : public precondition_error {
 public:
  explicit word_switch_error(std::vector<WordSwitchViolation> violations)
      : precondition_error("word switch conditions violated at " +
                           std::to_string(violations.size()) + " stem(s)"),
        violations_(std::move(violations)) {}
  const std::vector<WordSwitchViolation>& violations() const { return violations_; }

 private:
  std::vector<WordSwitchViolation> violations_;
};

// Euler-circuit realization on the de Bruijn multigraph over (m-1)-blocks:
// each support block v contributes t_v parallel edges prefix(v) ->
// suffix(v). The switch conditions balance in- and out-degrees, so every
// weakly connected component of the edge support carries an Euler circuit;
// each circuit is read off as one cyclic word. Together the words carry
// every block weight exactly.
inline std::vector<CyclicWord> realize_words(const WordWeightSystem& t) {
  if (t.is_zero()) throw precondition_error("realize words: weight system is zero");
  {
    auto violations = check_word_switch(t);
    if (!violations.empty()) throw word_switch_error(std::move(violations));
  }

  // Vertices are stems; edges sorted by block for determinism.
  struct EdgeRec {
    std::string from, to;
    char letter;
  };
  std::vector<EdgeRec> edges;
  for (const auto& [block, v] : t.entries())
    for (long long i = 0; i < v; ++i)
      edges.push_back({block.substr(0, block.size() - 1), block.substr(1), block.back()});

  std::map<std::string, std::vector<int>> out_edges;  // vertex -> edge indices (ascending)
  for (int i = 0; i < static_cast<int>(edges.size()); ++i)
    out_edges[edges[i].from].push_back(i);

  // Weakly connected components of the support.
  std::map<std::string, int> comp;
  {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : edges) {
      adj[e.from].push_back(e.to);
      adj[e.to].push_back(e.from);
    }
    int c = 0;
    for (const auto& [v, nbrs] : adj) {
      if (comp.count(v)) continue;
      std::vector<std::string> stack{v};
      comp[v] = c;
      while (!stack.empty()) {
        std::string x = stack.back();
        stack.pop_back();
        for (const auto& y : adj[x])
          if (!comp.count(y)) {
            comp[y] = c;
            stack.push_back(y);
          }
      }
      ++c;
    }
  }

  int num_components = comp.empty() ? 0 : 1 + std::max_element(comp.begin(), comp.end(),
                                                               [](const auto& a, const auto& b) {
                                                                 return a.second < b.second;
                                                               })
                                              ->second;
  std::vector<char> used(edges.size(), 0);
  std::map<std::string, size_t> next_out;  // Hierholzer cursor per vertex
  std::vector<CyclicWord> words;
  for (int c = 0; c < num_components; ++c) {
    // Start at the lexicographically smallest vertex of the component.
    std::string start;
    for (const auto& [v, cc] : comp)
      if (cc == c && !out_edges[v].empty() && (start.empty() || v < start)) start = v;
    if (start.empty()) continue;

    // Hierholzer: walk until stuck, splicing side circuits.
    std::vector<int> circuit;
    std::vector<std::pair<std::string, int>> stack{{start, -1}};
    while (!stack.empty()) {
      std::string v = stack.back().first;
      auto& cursor = next_out[v];
      const auto& outs = out_edges[v];
      bool advanced = false;
      while (cursor < outs.size()) {
        int e = outs[cursor++];
        if (used[e]) continue;
        used[e] = 1;
        stack.push_back({edges[e].to, e});
        advanced = true;
        break;
      }
      if (!advanced) {
        if (stack.back().second >= 0) circuit.push_back(stack.back().second);
        stack.pop_back();
      }
    }
    std::reverse(circuit.begin(), circuit.end());
    std::string letters;
    for (int e : circuit) letters.push_back(edges[e].letter);
    words.push_back(CyclicWord(letters));
  }
  return words;
}

struct WordScaleCheck {
  bool ok = true;
  bool primitive = true;
  long long patterns_checked = 0;
  std::vector<std::string> failures;
};

// Verifies occurrence-count scaling between a word and its k-th power:
// every pattern up to max_pattern_length occurs exactly k times as often
// on the k-fold cycle.
inline WordScaleCheck word_measure_scale(std::string_view w, int k, std::string_view alphabet,
                                         int max_pattern_length) {
  if (w.empty()) throw precondition_error("word scale: empty word");
  if (k < 1) throw precondition_error("word scale: k must be >= 1");
  WordScaleCheck out;
  out.primitive = is_primitive(w);
  std::string power;
  for (int i = 0; i < k; ++i) power += w;
  CyclicWord base{w}, repeated{power};
  std::vector<std::string> patterns{""};
  for (int len = 1; len <= max_pattern_length; ++len) {
    std::vector<std::string> next;
    for (const auto& p : patterns)
      for (char c : alphabet) next.push_back(p + c);
    for (const auto& p : next) {
      ++out.patterns_checked;
      if (occurrences_cyclic(p, repeated) != static_cast<long>(k) * occurrences_cyclic(p, base)) {
        out.ok = false;
        out.failures.push_back(p);
      }
    }
    patterns = std::move(next);
  }
  return out;
}

}  // namespace scw
