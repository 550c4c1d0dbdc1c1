#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "singtens/span.hpp"

namespace singtens {

/// n_k - 2 distinct fiber prefixes I_1 < ... < I_{n_k-2}, each a linear
/// prefix number in [0, prod_{i<k} n_i).
struct IndexSetChoice {
  std::vector<std::size_t> prefixes;

  bool contains(std::size_t p) const { return std::binary_search(prefixes.begin(), prefixes.end(), p); }

  /// "{(1,1),(1,2)}", one-based.
  std::string label(const Format& f) const {
    std::string s = "{";
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      if (i) s += ',';
      const auto J = f.multi_index(prefixes[i] * f.last_dim());
      s += '(';
      for (std::size_t l = 0; l + 1 < J.size(); ++l) {
        if (l) s += ',';
        s += std::to_string(J[l] + 1);
      }
      s += ')';
    }
    return s + "}";
  }
};

/// A symmetry of the prefix grid prod_{i<k} [n_i]: factors of equal size may
/// be reordered and coordinates permuted within each factor. It maps a prefix
/// j to pi(j) with pi(j)_i = coord_perm[i][j_{factor_order[i]}].
///
/// Applied to vectors it turns (y_1, ..., y_{k-1}) into the tuple y~ with
/// y~_{factor_order[i]}[a] = y_i[coord_perm[i][a]], so that the prefix
/// coordinates of y~ (x) y_k are those of y (x) y_k read through pi.
struct PrefixSymmetry {
  std::vector<std::size_t> factor_order;
  std::vector<std::vector<std::size_t>> coord_perm;

  static PrefixSymmetry identity(const Format& f) {
    PrefixSymmetry s;
    const std::size_t m = f.order() - 1;
    s.factor_order.resize(m);
    s.coord_perm.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      s.factor_order[i] = i;
      s.coord_perm[i].resize(f.dim(i));
      for (std::size_t a = 0; a < f.dim(i); ++a) s.coord_perm[i][a] = a;
    }
    return s;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < factor_order.size(); ++i) {
      if (factor_order[i] != i) return false;
      for (std::size_t a = 0; a < coord_perm[i].size(); ++a)
        if (coord_perm[i][a] != a) return false;
    }
    return true;
  }

  /// Throws unless this is a symmetry of the prefix grid of f.
  void check(const Format& f) const {
    const std::size_t m = f.order() - 1;
    if (factor_order.size() != m || coord_perm.size() != m) {
      throw DimensionMismatch("prefix symmetry has the wrong number of factors");
    }
    std::vector<bool> seen(m, false);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t o = factor_order[i];
      if (o >= m || seen[o]) throw std::invalid_argument("prefix symmetry factor order is not a permutation");
      seen[o] = true;
      if (f.dim(o) != f.dim(i)) throw std::invalid_argument("prefix symmetry swaps factors of different sizes");
      if (coord_perm[i].size() != f.dim(i)) throw DimensionMismatch("prefix symmetry coordinate map has wrong size");
      std::vector<bool> hit(f.dim(i), false);
      for (auto a : coord_perm[i]) {
        if (a >= f.dim(i) || hit[a]) throw std::invalid_argument("prefix symmetry coordinate map is not a permutation");
        hit[a] = true;
      }
    }
  }

  /// pi(j) for a prefix number j.
  std::size_t apply(const Format& f, std::size_t j) const {
    const auto J = f.multi_index(j * f.last_dim());
    MultiIndex P(f.order(), 0);
    for (std::size_t i = 0; i + 1 < f.order(); ++i) P[i] = coord_perm[i][J[factor_order[i]]];
    return f.linear_index(P) / f.last_dim();
  }

  /// The transformed tuple y~ described above; y_k is passed through.
  std::vector<CVector> transform(const std::vector<CVector>& y) const {
    std::vector<CVector> out = y;
    for (std::size_t i = 0; i < factor_order.size(); ++i) {
      CVector& target = out[factor_order[i]];
      for (std::size_t a = 0; a < coord_perm[i].size(); ++a) target[a] = y[i][coord_perm[i][a]];
    }
    return out;
  }

  /// "id", or e.g. "order(2,1) x1(2,1) x2(1,2)", one-based.
  std::string label() const {
    if (is_identity()) return "id";
    std::string s;
    bool reordered = false;
    for (std::size_t i = 0; i < factor_order.size(); ++i) reordered = reordered || factor_order[i] != i;
    auto list = [](const std::vector<std::size_t>& v) {
      std::string t = "(";
      for (std::size_t i = 0; i < v.size(); ++i) t += (i ? "," : "") + std::to_string(v[i] + 1);
      return t + ")";
    };
    if (reordered) s += "order" + list(factor_order);
    for (std::size_t i = 0; i < coord_perm.size(); ++i) {
      if (!s.empty()) s += ' ';
      s += "x" + std::to_string(i + 1) + list(coord_perm[i]);
    }
    return s;
  }

  bool operator==(const PrefixSymmetry&) const = default;
};

inline constexpr std::size_t kMaxPrefixSymmetries = 100000;

/// Every symmetry of the prefix grid of f, the identity first.
inline std::vector<PrefixSymmetry> prefix_symmetries(const Format& f) {
  const std::size_t m = f.order() - 1;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 2; a <= f.dim(i); ++a) {
      count *= a;
      if (count > kMaxPrefixSymmetries) throw std::length_error("too many prefix symmetries for " + f.to_string());
    }
  std::vector<PrefixSymmetry> out;
  PrefixSymmetry s = PrefixSymmetry::identity(f);
  std::vector<std::size_t> order = s.factor_order;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < m; ++i) ok = ok && f.dim(order[i]) == f.dim(i);
    if (!ok) continue;
    s.factor_order = order;
    // odometer over the coordinate permutations of every factor
    auto fill = [&](auto& self, std::size_t i) -> void {
      if (i == m) {
        out.push_back(s);
        if (out.size() > kMaxPrefixSymmetries) throw std::length_error("too many prefix symmetries");
        return;
      }
      std::sort(s.coord_perm[i].begin(), s.coord_perm[i].end());
      do {
        self(self, i + 1);
      } while (std::next_permutation(s.coord_perm[i].begin(), s.coord_perm[i].end()));
    };
    fill(fill, 0);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

/// Thrown when a constructed relation has no nonzero coefficient.
class DegenerateRelation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_choice(const Format& f, const IndexSetChoice& c) {
  const std::size_t n = f.last_dim();
  if (c.prefixes.size() + 2 != n) {
    throw DimensionMismatch("index set has " + std::to_string(c.prefixes.size()) + " prefixes; a square " +
                            std::to_string(n) + "x" + std::to_string(n) + " matrix needs " + std::to_string(n - 2));
  }
  for (std::size_t i = 0; i < c.prefixes.size(); ++i) {
    if (c.prefixes[i] >= f.fiber_count()) throw std::out_of_range("index set prefix out of range");
    if (i && c.prefixes[i] <= c.prefixes[i - 1]) {
      throw std::invalid_argument("index set prefixes must be strictly increasing");
    }
  }
}

/// Matrix with rows [first; second; T_{I_1}; ...; T_{I_{n-2}}].
inline Matrix stacked(const CTensor& T, const IndexSetChoice& c, const CVector& first, const CVector& second) {
  std::vector<CVector> rows{first, second};
  for (auto p : c.prefixes) rows.push_back(slice_fiber(T, p));
  return Matrix::from_rows(rows);
}

/// Cofactor coefficients of sum_{j not in I} det [T_j; z_j; T_I] with z
/// unpermuted. Entry (j, s) is the signed cofactor of position (2, s).
inline CTensor relation_cofactors(const CTensor& T, const IndexSetChoice& choice) {
  const Format& f = T.format();
  const std::size_t n = f.last_dim();
  CTensor coeff(f);
  std::vector<CVector> fixed_rows;
  for (auto p : choice.prefixes) fixed_rows.push_back(slice_fiber(T, p));
  for (std::size_t j = 0; j < f.fiber_count(); ++j) {
    if (choice.contains(j)) continue;
    const CVector head = slice_fiber(T, j);
    for (std::size_t s = 0; s < n; ++s) {
      // Minor: rows [T_j; T_I...] with column s removed.
      Matrix minor(n - 1, n - 1);
      auto fill = [&](std::size_t r, const CVector& row) {
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
          if (c != s) minor(r, cc++) = row[c];
        }
      };
      fill(0, head);
      for (std::size_t r = 0; r < fixed_rows.size(); ++r) fill(r + 1, fixed_rows[r]);
      const double sign = (s % 2 == 0) ? -1.0 : 1.0;  // (-1)^{2+(s+1)}
      coeff[j * n + s] = sign * determinant(minor);
    }
  }
  return coeff;
}

/// Moves the z-block of prefix j to prefix pi(j).
inline LinearFormZ permuted_form(const CTensor& cofactors, const PrefixSymmetry& sym, std::string label) {
  const Format& f = cofactors.format();
  const std::size_t n = f.last_dim();
  LinearFormZ form{CTensor(f), std::move(label)};
  bool nonzero = false;
  for (std::size_t j = 0; j < f.fiber_count(); ++j) {
    const std::size_t pj = sym.apply(f, j);
    for (std::size_t s = 0; s < n; ++s) {
      const cplx c = cofactors[j * n + s];
      form.coefficients[pj * n + s] = c;
      if (c != cplx(0.0)) nonzero = true;
    }
  }
  if (!nonzero) throw DegenerateRelation("relation " + form.label + " vanishes identically");
  return form;
}

inline std::string relation_label(const Format& f, const IndexSetChoice& choice, const PrefixSymmetry& sym) {
  std::string s = "det" + choice.label(f);
  if (!sym.is_identity()) s += "[" + sym.label() + "]";
  return s;
}

}  // namespace detail

/// The linear form sum_{j not in I} det [T_j; z_{pi(j)}; T_{I_1}; ...; T_{I_{n_k-2}}].
///
/// On a rank-one z = y_1 (x) ... (x) y_k it equals det [T(y~); y_k; T_I], where
/// T(y~) contracts T with the transformed vectors of `sym` over the first k-1
/// factors. With the identity symmetry the form is a combination of the
/// critical-space equations of the last factor; nontrivial symmetries give
/// the candidates that can lie outside the critical space.
///
/// The coefficient of z_{pi(j),s} is the cofactor of entry (2, s) of the j-th
/// determinant; blocks with j in I are identically zero (repeated row).
inline LinearFormZ build_relation(const CTensor& T, const IndexSetChoice& choice, const PrefixSymmetry& sym) {
  const Format& f = T.format();
  detail::check_choice(f, choice);
  sym.check(f);
  return detail::permuted_form(detail::relation_cofactors(T, choice), sym, detail::relation_label(f, choice, sym));
}

inline LinearFormZ build_relation(const CTensor& T, const IndexSetChoice& choice) {
  return build_relation(T, choice, PrefixSymmetry::identity(T.format()));
}

/// |det(A) - sum_{j not in I} det(A~(j))| relative to the larger side, where A
/// has rows [contract(T, y~, skip=k); y_k; T_I...], A~(j) has rows
/// [T_j; z_{pi(j)}; T_I...] and z = y_1 (x) ... (x) y_k.
inline double laplace_identity_check(const CTensor& T, const IndexSetChoice& choice, const std::vector<CVector>& y,
                                     const PrefixSymmetry& sym) {
  const Format& f = T.format();
  detail::check_choice(f, choice);
  sym.check(f);
  const std::size_t k = f.order();
  const std::size_t n = f.last_dim();
  const CVector contracted = contract(T, sym.transform(y), k - 1);
  const cplx lhs = determinant(detail::stacked(T, choice, contracted, y[k - 1]));

  const CTensor z = rank_one(y);
  cplx rhs = 0.0;
  double magnitude = 0.0;
  for (std::size_t j = 0; j < f.fiber_count(); ++j) {
    if (choice.contains(j)) continue;
    const std::size_t pj = sym.apply(f, j);
    const CVector zj(z.entries().begin() + pj * n, z.entries().begin() + (pj + 1) * n);
    const cplx d = determinant(detail::stacked(T, choice, slice_fiber(T, j), zj));
    rhs += d;
    magnitude += std::abs(d);
  }
  const double scale = std::max(std::abs(lhs), magnitude);
  return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

inline double laplace_identity_check(const CTensor& T, const IndexSetChoice& choice, const std::vector<CVector>& y) {
  return laplace_identity_check(T, choice, y, PrefixSymmetry::identity(T.format()));
}

struct DeterminantalRelation {
  IndexSetChoice choice;
  PrefixSymmetry symmetry;
  LinearFormZ form;
  double containment = 0.0;  // residual on the solved tuples
};

struct RelationSearch {
  std::size_t index_sets = 0;  // choices of n_k - 2 prefixes
  std::size_t symmetries = 0;  // nontrivial prefix symmetries tried per choice
  std::size_t candidates = 0;  // (choice, symmetry) pairs
  std::size_t degenerate = 0;
  std::vector<DeterminantalRelation> validated;
  // Smallest residual among rejected candidates; infinity when none was rejected.
  double min_rejected_residual = std::numeric_limits<double>::infinity();
};

inline constexpr std::size_t kMaxRelationCandidates = 100000;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t b = 1;
  for (std::uint64_t i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

/// Calls f(choice) for every strictly increasing choice of r prefixes out of D,
/// in lexicographic order.
template <class F>
void for_each_index_set(std::size_t D, std::size_t r, F&& f) {
  if (r > D) return;
  std::vector<std::size_t> pick(r);
  for (std::size_t i = 0; i < r; ++i) pick[i] = i;
  while (true) {
    f(IndexSetChoice{pick});
    std::size_t i = r;
    while (i > 0 && pick[i - 1] == D - r + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
}

/// Throws std::length_error when the relation search for this format would
/// exceed kMaxRelationCandidates index sets or (index set, symmetry) pairs.
/// Cheap, so callers can run it before solving for the tuples.
inline void check_relation_search_size(const Format& f) {
  const std::uint64_t sets = binomial(f.fiber_count(), f.last_dim() - 2);
  if (sets > kMaxRelationCandidates) {
    throw std::length_error("relation search would enumerate " + std::to_string(sets) + " index sets (limit " +
                            std::to_string(kMaxRelationCandidates) + ")");
  }
  const std::uint64_t total = sets * (prefix_symmetries(f).size() - 1);
  if (total > kMaxRelationCandidates) {
    throw std::length_error("relation search would enumerate " + std::to_string(total) + " candidates (limit " +
                            std::to_string(kMaxRelationCandidates) + ")");
  }
}

/// Builds the relation for every choice of n_k - 2 prefixes and every
/// nontrivial prefix symmetry, and keeps those whose containment residual on
/// `sols` is below `tol`. The identity symmetry is skipped because its forms
/// always lie in the critical space. Index sets are processed on up to
/// `threads` workers; the result does not depend on the thread count.
inline RelationSearch enumerate_and_filter(const CTensor& T, const SolutionSet& sols, double tol = 1e-8,
                                           int threads = 1) {
  const Format& f = T.format();
  const std::size_t D = f.fiber_count();
  const std::size_t r = f.last_dim() - 2;
  RelationSearch out;
  check_relation_search_size(f);
  const auto syms = prefix_symmetries(f);
  out.symmetries = syms.size() - 1;

  std::vector<IndexSetChoice> choices;
  for_each_index_set(D, r, [&](const IndexSetChoice& c) { choices.push_back(c); });
  out.index_sets = choices.size();

  struct Partial {
    std::size_t degenerate = 0;
    std::vector<DeterminantalRelation> validated;
    double min_rejected = std::numeric_limits<double>::infinity();
  };
  std::vector<Partial> parts(choices.size());
  detail::parallel_for(choices.size(), threads, [&](std::size_t c) {
    const CTensor cof = detail::relation_cofactors(T, choices[c]);
    Partial& part = parts[c];
    for (std::size_t g = 1; g < syms.size(); ++g) {
      try {
        LinearFormZ form = detail::permuted_form(cof, syms[g], detail::relation_label(f, choices[c], syms[g]));
        const double res = containment_check({form}, sols);
        if (res < tol) {
          part.validated.push_back({choices[c], syms[g], std::move(form), res});
        } else {
          part.min_rejected = std::min(part.min_rejected, res);
        }
      } catch (const DegenerateRelation&) {
        ++part.degenerate;
      }
    }
  });
  for (auto& part : parts) {
    out.candidates += syms.size() - 1;
    out.degenerate += part.degenerate;
    out.min_rejected_residual = std::min(out.min_rejected_residual, part.min_rejected);
    for (auto& v : part.validated) out.validated.push_back(std::move(v));
  }
  return out;
}

/// Labels of the (choice, symmetry) pairs validated in every search. A pair
/// that vanishes on Z_T for one random T only by accident is unlikely to do so
/// for several independent tensors of the same format.
inline std::set<std::string> stable_relation_labels(const std::vector<RelationSearch>& searches) {
  std::set<std::string> common;
  for (std::size_t i = 0; i < searches.size(); ++i) {
    std::set<std::string> here;
    for (const auto& r : searches[i].validated) here.insert(r.form.label);
    if (i == 0) {
      common = std::move(here);
    } else {
      std::set<std::string> both;
      std::set_intersection(common.begin(), common.end(), here.begin(), here.end(),
                            std::inserter(both, both.begin()));
      common = std::move(both);
    }
  }
  return common;
}

inline std::vector<LinearFormZ> forms_of(const std::vector<DeterminantalRelation>& rels) {
  std::vector<LinearFormZ> forms;
  forms.reserve(rels.size());
  for (const auto& r : rels) forms.push_back(r.form);
  return forms;
}

/// Independent relations contributed beyond the critical-space equations.
inline std::int64_t extra_relation_rank(const std::vector<LinearFormZ>& validated,
                                        const std::vector<LinearFormZ>& critical, RankOptions opt = {}) {
  std::vector<LinearFormZ> all = critical;
  all.insert(all.end(), validated.begin(), validated.end());
  const auto both = matrix_rank(form_matrix(all), opt.relative_floor, opt.min_gap).rank;
  const auto base = critical.empty() ? 0 : matrix_rank(form_matrix(critical), opt.relative_floor, opt.min_gap).rank;
  return static_cast<std::int64_t>(both) - static_cast<std::int64_t>(base);
}

/// max |form(T)| / (|form| |T|).
inline double verify_T_satisfies(const std::vector<LinearFormZ>& validated, const CTensor& T) {
  double worst = 0.0;
  const double tn = T.norm();
  for (const auto& form : validated) {
    const double fn = form.norm();
    if (fn == 0.0 || tn == 0.0) continue;
    worst = std::max(worst, std::abs(form(T)) / (fn * tn));
  }
  return worst;
}

}  // namespace singtens
