#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scw/graph.hpp"
#include "scw/rational.hpp"
#include "scw/realize.hpp"
#include "scw/tree.hpp"
#include "scw/weights.hpp"

namespace scw {

// Integer matrix of the switch conditions over a finite column set of
// round-graph keys: row J, column K carries +1 when K is a one-level
// completion of J toward the canonical axis origin, -1 toward the other
// endpoint (0 when both or neither). A sparse theta supported on the
// columns satisfies every switch condition iff A theta = 0.
struct SwitchMatrix {
  const MarkingGraph* marking = nullptr;
  int grade = 0;
  std::vector<CanonicalKey> columns;  // sorted round-graph keys
  std::vector<CanonicalKey> rows;     // sorted unoriented semi-round keys
  std::map<CanonicalKey, int> column_index;
  std::vector<std::vector<std::pair<int, int>>> column_entries;  // per column: (row, coeff)

  size_t num_rows() const { return rows.size(); }
  size_t num_columns() const { return columns.size(); }

  // Sparse evaluation of A theta; keys outside the column set are
  // rejected.
  std::map<int, Rational> apply(const std::map<CanonicalKey, Rational>& theta) const {
    std::map<int, Rational> acc;
    for (const auto& [key, v] : theta) {
      if (v == 0) continue;
      auto it = column_index.find(key);
      if (it == column_index.end())
        throw precondition_error("switch matrix: weight key outside the column closure");
      for (const auto& [row, coeff] : column_entries[it->second]) acc[row] += coeff * v;
    }
    for (auto it = acc.begin(); it != acc.end();)
      it = (it->second == 0) ? acc.erase(it) : std::next(it);
    return acc;
  }

  bool annihilates(const std::map<CanonicalKey, Rational>& theta) const {
    return apply(theta).empty();
  }

  Rational max_residual(const std::map<CanonicalKey, Rational>& theta) const {
    Rational best = 0;
    for (const auto& [row, v] : apply(theta)) best = std::max(best, Rational(abs(v)));
    return best;
  }
};

// Builds the switch matrix for a support set. The column set closes the
// support one step: every one-level completion (both sides) of every
// child of a support key becomes a column. Rows cover the children of all
// columns, so A theta = 0 certifies every switch condition binding on a
// theta supported inside the closure.
inline SwitchMatrix switch_matrix(const MarkingGraph& marking,
                                  const std::set<CanonicalKey>& support, int grade,
                                  uint64_t closure_budget = 200'000) {
  SwitchMatrix A;
  A.marking = &marking;
  A.grade = grade;

  std::set<CanonicalKey> closure = support;
  uint64_t enumerated = 0;
  for (const CanonicalKey& key : support) {
    RoundGraph k = decode_round_key(marking, key, grade);
    for (EdgeRef e : k.tree.star(k.center)) {
      SemiRoundGraph j = child(k, e);
      for (Side side : {Side::origin, Side::terminus}) {
        auto comps = completions(j, side, closure_budget);
        enumerated += comps.size();
        if (enumerated > closure_budget)
          throw budget_error("switch matrix: completion closure exceeds budget");
        for (const RoundGraph& c : comps) closure.insert(canonical_key(c.tree, c.center));
      }
    }
  }

  A.columns.assign(closure.begin(), closure.end());
  for (int i = 0; i < static_cast<int>(A.columns.size()); ++i) A.column_index[A.columns[i]] = i;
  A.column_entries.assign(A.columns.size(), {});

  std::map<CanonicalKey, int> row_index;
  std::map<std::pair<int, int>, int> coeffs;  // (row, col) -> coefficient
  for (int col = 0; col < static_cast<int>(A.columns.size()); ++col) {
    RoundGraph k = decode_round_key(marking, A.columns[col], grade);
    for (EdgeRef e : k.tree.star(k.center)) {
      SemiRoundGraph j = child(k, e);
      OrientedSemiRoundKey jk = semi_round_keys(j.tree, j.axis);
      auto [it, fresh] = row_index.try_emplace(jk.unoriented, static_cast<int>(row_index.size()));
      coeffs[{it->second, col}] += jk.forward_is_canonical ? 1 : -1;
    }
  }
  // row_index assigned in first-seen order; renumber rows sorted by key.
  A.rows.resize(row_index.size());
  std::vector<int> renumber(row_index.size());
  {
    int i = 0;
    for (const auto& [key, old] : row_index) {
      A.rows[i] = key;
      renumber[old] = i;
      ++i;
    }
  }
  for (const auto& [rc, coeff] : coeffs) {
    if (coeff == 0) continue;
    A.column_entries[rc.second].push_back({renumber[rc.first], coeff});
  }
  for (auto& col : A.column_entries) std::sort(col.begin(), col.end());
  return A;
}

namespace detail {

// Integer kernel basis of a dense integer matrix: fraction-free (Bareiss)
// forward elimination, back-substitution per free column, denominators
// cleared.
inline std::vector<std::vector<BigInt>> kernel_basis_dense(std::vector<std::vector<BigInt>> M,
                                                           size_t ncols) {
  size_t nrows = M.size();
  std::vector<int> pivot_col;
  BigInt prev = 1;
  size_t r = 0;
  for (size_t c = 0; c < ncols && r < nrows; ++c) {
    size_t pr = r;
    while (pr < nrows && M[pr][c] == 0) ++pr;
    if (pr == nrows) continue;
    std::swap(M[r], M[pr]);
    for (size_t i = r + 1; i < nrows; ++i) {
      for (size_t j = c + 1; j < ncols; ++j) M[i][j] = (M[r][c] * M[i][j] - M[i][c] * M[r][j]) / prev;
      M[i][c] = 0;
    }
    prev = M[r][c];
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  size_t rank = r;

  std::vector<char> is_pivot(ncols, 0);
  for (int c : pivot_col) is_pivot[c] = 1;
  std::vector<std::vector<BigInt>> basis;
  for (size_t f = 0; f < ncols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> x(ncols, Rational(0));
    x[f] = 1;
    for (size_t i = rank; i-- > 0;) {
      size_t pc = pivot_col[i];
      Rational s = 0;
      for (size_t j = pc + 1; j < ncols; ++j)
        if (M[i][j] != 0 && x[j] != 0) s += Rational(M[i][j]) * x[j];
      x[pc] = -s / Rational(M[i][pc]);
    }
    BigInt denom = 1;
    for (const Rational& xi : x) denom = boost::multiprecision::lcm(denom, rat_den(xi));
    std::vector<BigInt> v(ncols);
    BigInt g = 0;
    for (size_t j = 0; j < ncols; ++j) {
      v[j] = BigInt(x[j] * denom);
      g = boost::multiprecision::gcd(g, v[j]);
    }
    if (g > 1)
      for (auto& vj : v) vj /= g;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace detail

inline std::vector<std::vector<BigInt>> integer_kernel_basis(const SwitchMatrix& A,
                                                             uint64_t max_cells = 4'000'000) {
  size_t nrows = A.num_rows(), ncols = A.num_columns();
  if (nrows * ncols > max_cells)
    throw budget_error("kernel basis: matrix too large for the dense elimination");
  std::vector<std::vector<BigInt>> M(nrows, std::vector<BigInt>(ncols, 0));
  for (size_t c = 0; c < ncols; ++c)
    for (const auto& [row, coeff] : A.column_entries[c]) M[row][c] = coeff;
  return detail::kernel_basis_dense(std::move(M), ncols);
}

class rationalize_error : public precondition_error {
 public:
  rationalize_error(const std::string& what, std::optional<Rational> achieved)
      : precondition_error(what), achieved_distance(std::move(achieved)) {}
  std::optional<Rational> achieved_distance;  // best valid candidate found, if any
};

struct RationalizeOptions {
  // Denominator bounds grow as 2^k for k = 0..max_denominator_doublings
  // (the matrix entries are integers, so the base lcm is 1).
  int max_denominator_doublings = 64;
  // Exact kernel point used to repair negative entries in the fallback
  // path; must be strictly positive wherever the repair needs it.
  const std::map<CanonicalKey, Rational>* nonneg_reference = nullptr;
  size_t kernel_path_max_columns = 400;
  // A target that already satisfies the switch conditions exactly is
  // returned unchanged. The density pipeline disables this when clearing
  // the target's denominators would make realization infeasible.
  bool allow_exact_shortcut = true;
};

struct RationalizeResult {
  WeightSystem system;
  Rational achieved_error;
};

namespace detail {

inline Rational sup_distance(const std::map<CanonicalKey, Rational>& a,
                             const std::map<CanonicalKey, Rational>& b) {
  Rational best = 0;
  auto visit = [&](const CanonicalKey& key) {
    auto ia = a.find(key);
    auto ib = b.find(key);
    Rational va = ia == a.end() ? Rational(0) : ia->second;
    Rational vb = ib == b.end() ? Rational(0) : ib->second;
    best = std::max(best, Rational(abs(va - vb)));
  };
  for (const auto& [k, v] : a) visit(k);
  for (const auto& [k, v] : b) visit(k);
  return best;
}

// Adds the smallest multiple of the reference kernel point that clears
// every negative entry; nullopt when the reference vanishes (or is
// negative) at a negative entry.
inline std::optional<std::map<CanonicalKey, Rational>> repair_nonnegative(
    const std::map<CanonicalKey, Rational>& theta,
    const std::map<CanonicalKey, Rational>& reference) {
  Rational lambda = 0;
  for (const auto& [key, v] : theta) {
    if (v >= 0) continue;
    auto it = reference.find(key);
    if (it == reference.end() || it->second <= 0) return std::nullopt;
    lambda = std::max(lambda, Rational(-v / it->second));
  }
  if (lambda == 0) return theta;
  std::map<CanonicalKey, Rational> out = theta;
  for (const auto& [key, v] : reference) {
    auto& slot = out[key];
    slot += lambda * v;
    if (slot == 0) out.erase(key);
  }
  for (const auto& [key, v] : out)
    if (v < 0) return std::nullopt;
  return out;
}

// Exact least-squares solve of min |B c - t|_2 via the normal equations,
// over the rationals.
inline std::vector<Rational> least_squares_coords(const std::vector<std::vector<BigInt>>& basis,
                                                  const std::vector<Rational>& t) {
  size_t k = basis.size(), n = t.size();
  std::vector<std::vector<Rational>> G(k, std::vector<Rational>(k + 1, Rational(0)));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i; j < k; ++j) {
      Rational s = 0;
      for (size_t x = 0; x < n; ++x)
        if (basis[i][x] != 0 && basis[j][x] != 0) s += Rational(basis[i][x] * basis[j][x]);
      G[i][j] = s;
      G[j][i] = s;
    }
    Rational s = 0;
    for (size_t x = 0; x < n; ++x)
      if (basis[i][x] != 0 && t[x] != 0) s += Rational(basis[i][x]) * t[x];
    G[i][k] = s;
  }
  // Gaussian elimination with partial pivoting by nonzero.
  std::vector<Rational> c(k, Rational(0));
  size_t row = 0;
  std::vector<int> pivot_of_row;
  for (size_t col = 0; col < k && row < k; ++col) {
    size_t pr = row;
    while (pr < k && G[pr][col] == 0) ++pr;
    if (pr == k) continue;
    std::swap(G[row], G[pr]);
    for (size_t i = 0; i < k; ++i) {
      if (i == row || G[i][col] == 0) continue;
      Rational f = G[i][col] / G[row][col];
      for (size_t j = col; j <= k; ++j) G[i][j] -= f * G[row][j];
    }
    pivot_of_row.push_back(static_cast<int>(col));
    ++row;
  }
  for (size_t i = 0; i < pivot_of_row.size(); ++i)
    c[pivot_of_row[i]] = G[i][k] / G[i][pivot_of_row[i]];
  return c;
}

}  // namespace detail

// Finds an exact rational point of the switch polytope within eps of the
// target (sup norm over the closure). The target must already sit near
// the polytope: its exact residual may not exceed 10 eps.
//
// Entries are first rounded with bounded denominators (continued-fraction
// best approximations, denominators 2^k); when no denominator bound lands
// the rounded vector in the kernel, coordinates over an exact integer
// kernel basis are rounded instead, with an optional strictly positive
// kernel point mixed in to repair negative entries.
inline RationalizeResult rationalize(const SwitchMatrix& A,
                                     const std::map<CanonicalKey, Rational>& target,
                                     const Rational& eps,
                                     const RationalizeOptions& options = {}) {
  if (eps <= 0) throw precondition_error("rationalize: eps must be positive");
  for (const auto& [key, v] : target)
    if (v < 0) throw precondition_error("rationalize: target has a negative entry");
  if (A.max_residual(target) > 10 * eps)
    throw precondition_error(
        "rationalize: target violates the switch conditions beyond the 10*eps gate");

  auto finish = [&](const std::map<CanonicalKey, Rational>& theta) {
    WeightSystem out(*A.marking, A.grade);
    for (const auto& [key, v] : theta) out.set(key, v);
    return RationalizeResult{out, detail::sup_distance(theta, target)};
  };

  if (options.allow_exact_shortcut && A.annihilates(target)) return finish(target);

  std::optional<Rational> best_valid;
  auto note_valid = [&](const Rational& dist) {
    if (!best_valid || dist < *best_valid) best_valid = dist;
  };

  // Entrywise rounding schedule.
  for (int k = 0; k <= options.max_denominator_doublings; ++k) {
    BigInt bound = BigInt(1) << k;
    std::map<CanonicalKey, Rational> theta;
    for (const auto& [key, v] : target) {
      Rational r = best_rational_approx(v, bound);
      if (r != 0) theta[key] = r;
    }
    if (!A.annihilates(theta)) continue;
    Rational dist = detail::sup_distance(theta, target);
    note_valid(dist);
    if (dist <= eps) return finish(theta);
  }

  // Kernel-coordinate rounding over the support columns only: a kernel
  // point supported on the target's keys stays a kernel point of the full
  // matrix, and keys off the support keep weight exactly zero.
  std::vector<CanonicalKey> sub_keys;
  for (const auto& [key, v] : target) sub_keys.push_back(key);
  if (sub_keys.size() <= options.kernel_path_max_columns) {
    // Only rows touching the support columns constrain the subspace.
    std::map<int, int> row_compress;
    for (const auto& key : sub_keys)
      for (const auto& [row, coeff] : A.column_entries[A.column_index.at(key)])
        row_compress.try_emplace(row, static_cast<int>(row_compress.size()));
    std::vector<std::vector<BigInt>> M(row_compress.size(),
                                       std::vector<BigInt>(sub_keys.size(), 0));
    for (size_t j = 0; j < sub_keys.size(); ++j)
      for (const auto& [row, coeff] : A.column_entries[A.column_index.at(sub_keys[j])])
        M[row_compress[row]][j] = coeff;
    auto basis = detail::kernel_basis_dense(std::move(M), sub_keys.size());
    if (!basis.empty()) {
      std::vector<Rational> tvec(sub_keys.size(), Rational(0));
      for (size_t j = 0; j < sub_keys.size(); ++j) tvec[j] = target.at(sub_keys[j]);
      auto coords = detail::least_squares_coords(basis, tvec);
      for (int k = 0; k <= options.max_denominator_doublings; ++k) {
        BigInt bound = BigInt(1) << k;
        std::vector<Rational> rounded(coords.size());
        for (size_t i = 0; i < coords.size(); ++i)
          rounded[i] = best_rational_approx(coords[i], bound);
        std::map<CanonicalKey, Rational> theta;
        bool nonneg = true;
        for (size_t j = 0; j < sub_keys.size(); ++j) {
          Rational v = 0;
          for (size_t i = 0; i < basis.size(); ++i)
            if (basis[i][j] != 0 && rounded[i] != 0) v += Rational(basis[i][j]) * rounded[i];
          if (v != 0) theta[sub_keys[j]] = v;
          if (v < 0) nonneg = false;
        }
        if (!nonneg && options.nonneg_reference) {
          auto repaired = detail::repair_nonnegative(theta, *options.nonneg_reference);
          if (repaired) {
            theta = std::move(*repaired);
            nonneg = true;
          }
        }
        if (!nonneg || !A.annihilates(theta)) continue;
        Rational dist = detail::sup_distance(theta, target);
        note_valid(dist);
        if (dist <= eps) return finish(theta);
      }
    }
  }

  throw rationalize_error(
      "rationalize: no nonnegative rational switch-polytope point within eps of the target",
      best_valid);
}

struct ApproximationResult {
  BigInt denominator;  // m with m * theta' integral
  GammaGraph graph;    // realization of m * theta'
  WeightSystem rounded;
  Rational max_error;
  std::map<CanonicalKey, Rational> per_key_error;
  int component_count = 0;
};

// Density pipeline: round the target to an exact rational point theta' of
// the switch polytope, clear denominators, and realize. The output pair
// (m, graph) encodes the rational combination (1/m) * (counting current of
// the graph) = sum over components of (1/m) * (component current); its
// grade-r weights equal theta' exactly, hence sit within eps of the
// target per key.
inline ApproximationResult approximate_by_rational_current(
    const MarkingGraph& marking, const std::map<CanonicalKey, Rational>& target, int grade,
    const Rational& eps, const RationalizeOptions& ropts = {}, uint64_t closure_budget = 200'000,
    const RealizeOptions& realize_opts = {}) {
  std::set<CanonicalKey> support;
  for (const auto& [key, v] : target) support.insert(key);
  SwitchMatrix A = switch_matrix(marking, support, grade, closure_budget);
  RationalizeResult rounded = rationalize(A, target, eps, ropts);

  auto cleared_total = [&](const RationalizeResult& r) {
    BigInt m = 1;
    for (const auto& [key, v] : r.system.entries())
      m = boost::multiprecision::lcm(m, rat_den(v));
    return std::pair<BigInt, BigInt>(m, BigInt(r.system.total() * m));
  };
  auto [m, copies] = cleared_total(rounded);
  if (copies > realize_opts.max_vertices && ropts.allow_exact_shortcut) {
    // The target itself was a (typically decimal-rendered) exact polytope
    // point with infeasibly large denominators; round it properly instead.
    RationalizeOptions no_shortcut = ropts;
    no_shortcut.allow_exact_shortcut = false;
    rounded = rationalize(A, target, eps, no_shortcut);
    std::tie(m, copies) = cleared_total(rounded);
  }
  if (rounded.system.is_zero())
    throw precondition_error("approximate: target rounded to the zero system");
  GammaGraph graph = realize(rounded.system.scaled(Rational(m)), realize_opts);
  if (!verify_realization(rounded.system.scaled(Rational(m)), graph))
    throw precondition_error("approximate: realized graph fails verification");

  ApproximationResult out{m, std::move(graph), rounded.system, Rational(0), {}, 0};
  out.component_count = static_cast<int>(components(out.graph).size());
  out.max_error = 0;
  auto visit = [&](const CanonicalKey& key) {
    if (out.per_key_error.count(key)) return;
    auto it = target.find(key);
    Rational tv = it == target.end() ? Rational(0) : it->second;
    Rational err = abs(out.rounded.value(key) - tv);
    out.per_key_error[key] = err;
    out.max_error = std::max(out.max_error, err);
  };
  for (const auto& [key, v] : target) visit(key);
  for (const auto& [key, v] : out.rounded.entries()) visit(key);
  return out;
}

}  // namespace scw
