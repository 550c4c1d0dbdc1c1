#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "singtens/combinatorics.hpp"
#include "singtens/linalg.hpp"
#include "singtens/monodromy.hpp"

namespace singtens {

/// Linear functional z -> sum_J c_J z_J on the tensor space.
struct LinearFormZ {
  CTensor coefficients;
  std::string label;

  cplx operator()(const CTensor& z) const { return frobenius_inner(coefficients, z); }
  double norm() const { return coefficients.norm(); }
};

/// Bilinear relations of the critical space H_T, one per (factor l, p < q):
/// sum over the other indices of t_{..p..} z_{..q..} - t_{..q..} z_{..p..}.
inline std::vector<LinearFormZ> critical_space_equations(const CTensor& T) {
  const Format& f = T.format();
  std::vector<LinearFormZ> forms;
  for (std::size_t l = 0; l < f.order(); ++l) {
    const std::size_t stride = f.stride(l);
    for (std::size_t p = 0; p < f.dim(l); ++p) {
      for (std::size_t q = p + 1; q < f.dim(l); ++q) {
        LinearFormZ form{CTensor(f), "critical(" + std::to_string(l + 1) + "," + std::to_string(p + 1) + "," +
                                         std::to_string(q + 1) + ")"};
        for_each_index(f, [&](std::size_t lin, const MultiIndex& J) {
          if (J[l] != p) return;
          const std::size_t lin_q = lin + (q - p) * stride;
          form.coefficients[lin_q] += T[lin];
          form.coefficients[lin] -= T[lin_q];
        });
        forms.push_back(std::move(form));
      }
    }
  }
  return forms;
}

/// Rows = coefficient vectors of the forms, each scaled to unit norm.
inline Matrix form_matrix(const std::vector<LinearFormZ>& forms) {
  std::vector<CVector> rows;
  rows.reserve(forms.size());
  for (const auto& form : forms) {
    CVector r = form.coefficients.vectorize();
    const double n = norm2(r);
    if (n > 0)
      for (auto& z : r) z /= n;
    rows.push_back(std::move(r));
  }
  return Matrix::from_rows(rows);
}

/// Columns = vectorized rank-one tensors of the tuples, each scaled to unit norm.
inline Matrix span_matrix(const SolutionSet& sols) {
  std::vector<CVector> cols;
  cols.reserve(sols.size());
  for (const auto& t : sols.tuples) {
    CVector c = t.rank_one.vectorize();
    const double n = norm2(c);
    for (auto& z : c) z /= n;
    cols.push_back(std::move(c));
  }
  return Matrix::from_columns(cols);
}

struct RankOptions {
  double relative_floor = kDefaultRankFloor;
  double min_gap = kDefaultRankGap;
};

struct SpanDimension {
  RankReport rank;
  std::int64_t projective_dim = -1;
  bool provisional = false;  // solution set was incomplete
};

inline SpanDimension span_dimension(const SolutionSet& sols, RankOptions opt = {}) {
  if (sols.tuples.empty()) throw std::invalid_argument("span_dimension: empty solution set");
  SpanDimension out;
  out.rank = matrix_rank(span_matrix(sols), opt.relative_floor, opt.min_gap);
  out.projective_dim = static_cast<std::int64_t>(out.rank.rank) - 1;
  out.provisional = !sols.complete;
  return out;
}

/// max |form(x_1 (x) ... (x) x_k)| / (|form| |x_1 (x) ... (x) x_k|) over forms and tuples.
inline double containment_check(const std::vector<LinearFormZ>& forms, const SolutionSet& sols) {
  double worst = 0.0;
  for (const auto& form : forms) {
    const double fn = form.norm();
    if (fn == 0.0) continue;
    for (const auto& t : sols.tuples) {
      worst = std::max(worst, std::abs(form(t.rank_one)) / (fn * t.rank_one.norm()));
    }
  }
  return worst;
}

/// Relative least-squares residual of vec(T) against the span of Z_T.
inline double membership_residual(const CTensor& T, const SolutionSet& sols, RankOptions opt = {}) {
  if (sols.tuples.empty()) throw std::invalid_argument("membership_residual: empty solution set");
  const CVector b = T.vectorize();
  return least_squares(span_matrix(sols), b, opt.relative_floor, opt.min_gap).relative_residual;
}

inline constexpr double kMembershipTolerance = 1e-8;

struct CriticalDimCheck {
  std::int64_t measured = 0;  // affine
  std::int64_t formula = 0;   // affine
  RankReport rank;
  bool agree = false;
};

inline CriticalDimCheck critical_space_dim_check(const CTensor& T, RankOptions opt = {}) {
  CriticalDimCheck out;
  const auto forms = critical_space_equations(T);
  out.rank = matrix_rank(form_matrix(forms), opt.relative_floor, opt.min_gap);
  out.measured = static_cast<std::int64_t>(T.format().total_size()) - static_cast<std::int64_t>(out.rank.rank);
  out.formula = critical_space_dim(T.format());
  out.agree = out.measured == out.formula;
  return out;
}

/// Summary of the span analysis for one tensor.
struct SpanReport {
  Format format;
  std::int64_t ed = 0;
  std::size_t tuples_found = 0;
  bool complete = false;
  std::size_t span_matrix_rank = 0;
  std::int64_t span_dim_projective = -1;
  std::int64_t critical_dim_projective = -1;
  std::int64_t critical_dim_formula = -1;  // projective
  std::int64_t extra_relations = 0;        // critical - span
  double gap_ratio = 0.0;
  bool rank_ambiguous = false;
  std::vector<double> singular_values;
  double containment_residual = 0.0;
  double membership_residual = 0.0;
  std::optional<SpanExpectation> expected;
};

inline SpanReport analyze_span(const CTensor& T, const SolutionSet& sols, RankOptions opt = {}) {
  SpanReport rep;
  rep.format = T.format();
  rep.ed = sols.ed;
  rep.tuples_found = sols.size();
  rep.complete = sols.complete;
  const auto span = span_dimension(sols, opt);
  rep.span_matrix_rank = span.rank.rank;
  rep.span_dim_projective = span.projective_dim;
  rep.gap_ratio = span.rank.gap_ratio;
  rep.rank_ambiguous = span.rank.ambiguous;
  rep.singular_values = span.rank.singular_values;
  const auto crit = critical_space_dim_check(T, opt);
  rep.critical_dim_projective = crit.measured - 1;
  rep.critical_dim_formula = crit.formula - 1;
  rep.extra_relations = rep.critical_dim_projective - rep.span_dim_projective;
  rep.containment_residual = containment_check(critical_space_equations(T), sols);
  rep.membership_residual = membership_residual(T, sols, opt);
  rep.expected = expected_span_dim(T.format());
  return rep;
}

}  // namespace singtens
