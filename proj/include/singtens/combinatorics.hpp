#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "singtens/format.hpp"

namespace singtens {

using BigInt = boost::multiprecision::cpp_int;

/// Combinatorial type of a format. Thresholds are taken with dims sorted
/// ascending, so n_B and D refer to the largest factor.
struct FormatClass {
  bool is_sub_boundary = false;
  bool is_boundary = false;
  bool is_concise = false;
  std::size_t boundary_threshold = 0;  // n_B = 1 + sum_{i<k} (n_i - 1)
  std::size_t concise_threshold = 0;   // D = prod_{i<k} n_i

  std::string describe() const {
    std::string s = is_boundary ? "boundary" : (is_sub_boundary ? "sub-boundary" : "non-sub-boundary");
    s += is_concise ? ", concise" : ", non-concise";
    return s;
  }
};

inline FormatClass classify(const Format& format) {
  const auto dims = format.dim_vector();
  std::size_t sum_minus_one = 0;
  for (auto n : dims) sum_minus_one += n - 1;
  const std::size_t total = format.total_size();

  FormatClass c;
  c.is_sub_boundary = true;
  c.is_concise = true;
  for (auto n : dims) {
    // n_i <= 1 + sum_{j != i}(n_j - 1)
    const std::size_t rhs = 1 + sum_minus_one - (n - 1);
    if (n > rhs) c.is_sub_boundary = false;
    if (n == rhs) c.is_boundary = true;
    if (n > total / n) c.is_concise = false;
  }
  const std::size_t largest = *std::max_element(dims.begin(), dims.end());
  c.boundary_threshold = 1 + sum_minus_one - (largest - 1);
  c.concise_threshold = total / largest;
  return c;
}

/// Polynomial in k variables with big-integer coefficients, stored densely on
/// the box of exponents e_i < box_i. Products drop every monomial that leaves
/// the box, which is exact for any coefficient that stays inside it.
class TruncatedPoly {
 public:
  explicit TruncatedPoly(std::vector<std::size_t> box) : box_(std::move(box)) {
    strides_.assign(box_.size(), 1);
    std::size_t total = 1;
    for (std::size_t i = box_.size(); i-- > 0;) {
      strides_[i] = total;
      total *= box_[i];
    }
    coeffs_.assign(total, BigInt(0));
  }

  static TruncatedPoly constant(std::vector<std::size_t> box, BigInt c) {
    TruncatedPoly p(std::move(box));
    p.coeffs_[0] = std::move(c);
    return p;
  }

  std::size_t variables() const { return box_.size(); }
  std::size_t cells() const { return coeffs_.size(); }
  const std::vector<std::size_t>& box() const { return box_; }

  /// Coefficient of prod h_i^{e_i}; zero outside the box.
  BigInt coefficient(const std::vector<std::size_t>& e) const {
    std::size_t lin = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] >= box_[i]) return 0;
      lin += e[i] * strides_[i];
    }
    return coeffs_[lin];
  }

  void set(const std::vector<std::size_t>& e, BigInt c) {
    std::size_t lin = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] >= box_[i]) return;
      lin += e[i] * strides_[i];
    }
    coeffs_[lin] = std::move(c);
  }

  /// Exponent vector of cell `lin`.
  std::vector<std::size_t> exponents(std::size_t lin) const {
    std::vector<std::size_t> e(box_.size());
    for (std::size_t i = 0; i < box_.size(); ++i) {
      e[i] = lin / strides_[i];
      lin %= strides_[i];
    }
    return e;
  }

  TruncatedPoly& operator+=(const TruncatedPoly& o) {
    check_box(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }

  friend TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) {
    a.check_box(b);
    TruncatedPoly out(a.box_);
    const std::size_t k = a.box_.size();
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (a.coeffs_[i] == 0) continue;
      const auto ea = a.exponents(i);
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
        if (b.coeffs_[j] == 0) continue;
        std::size_t lin = 0;
        bool inside = true;
        for (std::size_t v = 0; v < k; ++v) {
          const std::size_t e = ea[v] + (j / b.strides_[v]) % b.box_[v];
          if (e >= a.box_[v]) {
            inside = false;
            break;
          }
          lin += e * a.strides_[v];
        }
        if (inside) out.coeffs_[lin] += a.coeffs_[i] * b.coeffs_[j];
      }
    }
    return out;
  }

  /// Multiplies by h_var^power (a shift along one axis).
  TruncatedPoly shifted(std::size_t var, std::size_t power) const {
    TruncatedPoly out(box_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == 0) continue;
      const std::size_t e = (i / strides_[var]) % box_[var];
      if (e + power < box_[var]) out.coeffs_[i + power * strides_[var]] = coeffs_[i];
    }
    return out;
  }

  /// Multiplies by sum_{j != skip} h_j.
  TruncatedPoly times_sum_except(std::size_t skip) const {
    TruncatedPoly out(box_);
    for (std::size_t v = 0; v < box_.size(); ++v) {
      if (v == skip) continue;
      for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0) continue;
        const std::size_t e = (i / strides_[v]) % box_[v];
        if (e + 1 < box_[v]) out.coeffs_[i + strides_[v]] += coeffs_[i];
      }
    }
    return out;
  }

  /// Coefficient of the top corner monomial of a*b, without forming a*b.
  friend BigInt corner_of_product(const TruncatedPoly& a, const TruncatedPoly& b) {
    a.check_box(b);
    BigInt s = 0;
    const std::size_t last = a.coeffs_.size() - 1;
    // Cell lin and cell (last - lin) have complementary exponents.
    for (std::size_t i = 0; i <= last; ++i) {
      if (a.coeffs_[i] != 0 && b.coeffs_[last - i] != 0) s += a.coeffs_[i] * b.coeffs_[last - i];
    }
    return s;
  }

 private:
  void check_box(const TruncatedPoly& o) const {
    if (box_ != o.box_) throw DimensionMismatch("TruncatedPoly: box mismatch");
  }

  std::vector<std::size_t> box_;
  std::vector<std::size_t> strides_;
  std::vector<BigInt> coeffs_;
};

/// Number of singular tuples of a generic tensor of this format: the
/// coefficient of h_1^{n_1-1}...h_k^{n_k-1} in
/// prod_i sum_{j=0}^{n_i-1} hhat_i^{n_i-1-j} h_i^j, hhat_i = sum_{l != i} h_l.
inline BigInt ed_degree(const Format& format) {
  const auto& dims = format.dim_vector();
  const std::size_t k = dims.size();
  std::vector<std::size_t> box(dims.begin(), dims.end());

  std::vector<TruncatedPoly> factors;
  factors.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t n = dims[i];
    std::vector<TruncatedPoly> hat_powers;
    hat_powers.push_back(TruncatedPoly::constant(box, 1));
    for (std::size_t m = 1; m < n; ++m) hat_powers.push_back(hat_powers.back().times_sum_except(i));
    TruncatedPoly f(box);
    for (std::size_t j = 0; j < n; ++j) f += hat_powers[n - 1 - j].shifted(i, j);
    factors.push_back(std::move(f));
  }
  TruncatedPoly acc = factors[0];
  for (std::size_t i = 1; i + 1 < k; ++i) acc = acc * factors[i];
  return corner_of_product(acc, factors[k - 1]);
}

inline std::int64_t binom2(std::int64_t n) { return n * (n - 1) / 2; }

/// Affine dimension of the critical space H_T of a generic tensor.
inline std::int64_t critical_space_dim(const Format& format) {
  auto dims = format.dim_vector();
  std::sort(dims.begin(), dims.end());
  const std::int64_t nk = static_cast<std::int64_t>(dims.back());
  std::int64_t D = 1;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) D *= static_cast<std::int64_t>(dims[i]);
  std::int64_t pairs_head = 0;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) pairs_head += binom2(static_cast<std::int64_t>(dims[i]));
  if (nk <= D) return D * nk - pairs_head - binom2(nk);
  return binom2(D + 1) - pairs_head;
}

/// One row of the order-three table: format (a, b, n) with stabilized span
/// dimension `dim` for n >= n_B + delta.
struct OrderThreeRow {
  std::size_t a, b, n_boundary;
  std::int64_t dim;
  std::size_t delta;
  std::int64_t ed;
  bool strict;  // stabilized span is a proper subspace of P(H_T)
};

inline constexpr std::array<OrderThreeRow, 18> kOrderThreeTable{{
    {2, 2, 3, 6, 0, 8, false},      {2, 3, 4, 13, 0, 18, false},    {2, 4, 5, 22, 0, 32, false},
    {2, 5, 6, 33, 0, 50, false},    {2, 6, 7, 46, 0, 72, false},    {3, 3, 5, 29, 1, 61, true},
    {3, 4, 6, 50, 1, 148, true},    {3, 5, 7, 76, 1, 295, true},    {4, 4, 7, 87, 1, 480, false},
    {4, 5, 8, 133, 2, 1220, true},  {4, 6, 9, 188, 3, 2624, true},  {4, 7, 10, 252, 3, 5012, true},
    {5, 5, 9, 204, 3, 3881, true},  {5, 6, 10, 289, 4, 10166, true}, {5, 7, 11, 388, 4, 23051, false},
    {6, 6, 11, 410, 5, 31976, true}, {6, 7, 12, 551, 6, 85526, true}, {6, 8, 13, 712, 7, 201536, true},
}};

/// Span dimensions for (2,...,2,n) with l twos, n = l+1, l+2, ...; the last
/// entry is the stabilized value.
struct BinaryRow {
  std::size_t twos;
  std::vector<std::int64_t> dims;
  std::int64_t ed;
};

inline const std::vector<BinaryRow>& binary_table() {
  static const std::vector<BinaryRow> rows{
      {2, {6}, 8},
      {3, {22, 23}, 48},
      {4, {65, 76}, 384},
      {5, {171, 197, 222, 237}, 3840},
      {6, {420, 477, 533, 588, 642, 695, 722}, 46080},
  };
  return rows;
}

/// Closed form for the projective span dimension in format (2,...,2,l+2).
inline std::int64_t binary_span_formula(std::int64_t l) {
  auto ipow = [](std::int64_t b, std::int64_t e) {
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) r *= b;
    return r;
  };
  const std::int64_t correction = ipow(l - 1, l) - ipow(l - 2, l) * (l + 2);
  return ipow(2, l) * (l + 2) - (l + 1) - binom2(l + 2) - std::max<std::int64_t>(0, correction);
}

enum class SpanBasis {
  sub_boundary_equality,  // span equals P(H_T)
  binary_formula,         // (2,...,2,l+2) closed form
  tabulated,              // numerically tabulated value
  symbolically_resolved,  // (2,3,5), (2,3,6): 13 settled by explicit relations
};

inline const char* to_string(SpanBasis b) {
  switch (b) {
    case SpanBasis::sub_boundary_equality: return "sub-boundary equality";
    case SpanBasis::binary_formula: return "closed form (2,...,2,l+2)";
    case SpanBasis::tabulated: return "tabulated";
    case SpanBasis::symbolically_resolved: return "symbolically resolved";
  }
  return "?";
}

struct SpanExpectation {
  std::int64_t dim;  // projective
  SpanBasis basis;
};

/// Known projective dimension of the span of Z_T for a generic T, or nullopt
/// when the format is not settled.
inline std::optional<SpanExpectation> expected_span_dim(const Format& format) {
  const Format s = format.sorted();
  const auto& d = s.dim_vector();
  const std::size_t k = d.size();
  const std::size_t n = d.back();

  if (classify(s).is_sub_boundary) return SpanExpectation{critical_space_dim(s) - 1, SpanBasis::sub_boundary_equality};

  const bool binary = std::all_of(d.begin(), d.end() - 1, [](std::size_t v) { return v == 2; });
  if (binary && n == k + 1) {
    return SpanExpectation{binary_span_formula(static_cast<std::int64_t>(k - 1)), SpanBasis::binary_formula};
  }
  if (k == 3 && d[0] == 2 && d[1] == 3 && (n == 5 || n == 6)) {
    return SpanExpectation{13, SpanBasis::symbolically_resolved};
  }
  if (binary) {
    for (const auto& row : binary_table()) {
      if (row.twos != k - 1) continue;
      const std::size_t first = row.twos + 1;
      const std::size_t pos = std::min(n - first, row.dims.size() - 1);
      return SpanExpectation{row.dims[pos], SpanBasis::tabulated};
    }
  }
  if (k == 3) {
    for (const auto& row : kOrderThreeTable) {
      if (row.a == d[0] && row.b == d[1] && n >= row.n_boundary + row.delta) {
        return SpanExpectation{row.dim, SpanBasis::tabulated};
      }
    }
  }
  return std::nullopt;
}

/// True when T in <Z_T> is known for a generic T of this format: sub-boundary
/// formats (where <Z_T> = P(H_T) contains T), (2,2,n) with n >= 4, (2,3,n)
/// with n >= 5 and (2,...,2,l+2) with l >= 4. Elsewhere membership is only
/// conjectured.
inline bool membership_proven(const Format& format) {
  const Format s = format.sorted();
  const auto& d = s.dim_vector();
  const std::size_t k = d.size();
  const std::size_t n = d.back();
  if (classify(s).is_sub_boundary) return true;
  if (k == 3 && d[0] == 2 && d[1] == 2 && n >= 4) return true;
  if (k == 3 && d[0] == 2 && d[1] == 3 && n >= 5) return true;
  const bool binary = std::all_of(d.begin(), d.end() - 1, [](std::size_t v) { return v == 2; });
  return binary && k >= 5 && n == k + 1;
}

}  // namespace singtens
