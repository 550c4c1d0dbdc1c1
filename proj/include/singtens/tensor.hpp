#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "singtens/format.hpp"
#include "singtens/random.hpp"

namespace singtens {

/// Dense complex tensor of a fixed Format, stored in layout order
/// (last index fastest).
class CTensor {
 public:
  CTensor() = default;
  explicit CTensor(Format format) : format_(std::move(format)), entries_(format_.total_size()) {}

  CTensor(Format format, CVector entries) : format_(std::move(format)), entries_(std::move(entries)) {
    if (entries_.size() != format_.total_size()) {
      throw DimensionMismatch("tensor of format (" + format_.to_string() + ") needs " +
                              std::to_string(format_.total_size()) + " entries, got " +
                              std::to_string(entries_.size()));
    }
  }

  const Format& format() const { return format_; }
  std::size_t size() const { return entries_.size(); }

  cplx& operator[](std::size_t linear) { return entries_[linear]; }
  const cplx& operator[](std::size_t linear) const { return entries_[linear]; }
  cplx& at(std::span<const std::size_t> idx) { return entries_[format_.linear_index(idx)]; }
  const cplx& at(std::span<const std::size_t> idx) const { return entries_[format_.linear_index(idx)]; }

  std::span<const cplx> entries() const { return entries_; }
  std::span<cplx> entries() { return entries_; }

  CVector vectorize() const { return entries_; }
  static CTensor devectorize(const Format& format, CVector entries) {
    return CTensor(format, std::move(entries));
  }

  /// Hermitian Frobenius norm sqrt(sum |t_J|^2); used only for scaling.
  double norm() const {
    double s = 0.0;
    for (const auto& z : entries_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : entries_) m = std::max(m, std::abs(z));
    return m;
  }

  CTensor& operator+=(const CTensor& o) {
    require_same(o);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
  }
  CTensor& operator-=(const CTensor& o) {
    require_same(o);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
    return *this;
  }
  CTensor& operator*=(cplx a) {
    for (auto& z : entries_) z *= a;
    return *this;
  }
  friend CTensor operator+(CTensor a, const CTensor& b) { return a += b; }
  friend CTensor operator-(CTensor a, const CTensor& b) { return a -= b; }
  friend CTensor operator*(cplx a, CTensor t) { return t *= a; }

  void require_same(const CTensor& o) const {
    if (!(format_ == o.format_)) {
      throw DimensionMismatch("format mismatch: (" + format_.to_string() + ") vs (" +
                              o.format_.to_string() + ")");
    }
  }

 private:
  Format format_;
  CVector entries_;
};

/// Plain bilinear dot product sum a_i b_i (no conjugation).
inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace detail {

inline void check_factors(const Format& f, std::span<const CVector> x, std::size_t skip) {
  if (x.size() != f.order()) {
    throw DimensionMismatch("expected " + std::to_string(f.order()) + " factor vectors, got " +
                            std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < f.order(); ++i) {
    if (i != skip && x[i].size() != f.dim(i)) {
      throw DimensionMismatch("factor vector " + std::to_string(i + 1) + " has length " +
                              std::to_string(x[i].size()) + ", expected " + std::to_string(f.dim(i)));
    }
  }
}

}  // namespace detail

/// Contraction of T against every x_j except x_skip; returns a vector of
/// length n_skip whose s-th entry sums t_J prod_{l != skip} x_{l,J_l} over J
/// with J_skip = s.
inline CVector contract(const CTensor& T, std::span<const CVector> x, std::size_t skip) {
  const Format& f = T.format();
  if (skip >= f.order()) throw std::out_of_range("contract: skip index out of range");
  detail::check_factors(f, x, skip);
  CVector out(f.dim(skip));
  for_each_index(f, [&](std::size_t lin, const MultiIndex& J) {
    cplx p = T[lin];
    for (std::size_t l = 0; l < J.size(); ++l) {
      if (l != skip) p *= x[l][J[l]];
    }
    out[J[skip]] += p;
  });
  return out;
}

/// The k-linear form of T evaluated at (x_1, ..., x_k).
inline cplx multilinear_value(const CTensor& T, std::span<const CVector> x) {
  const Format& f = T.format();
  detail::check_factors(f, x, f.order());
  cplx s = 0.0;
  for_each_index(f, [&](std::size_t lin, const MultiIndex& J) {
    cplx p = T[lin];
    for (std::size_t l = 0; l < J.size(); ++l) p *= x[l][J[l]];
    s += p;
  });
  return s;
}

/// Complex-bilinear Frobenius product sum_J t_J s_J.
inline cplx frobenius_inner(const CTensor& T, const CTensor& S) {
  T.require_same(S);
  return dot(T.entries(), S.entries());
}

/// x_1 (x) ... (x) x_k.
inline CTensor rank_one(std::span<const CVector> x) {
  std::vector<std::size_t> dims;
  dims.reserve(x.size());
  for (const auto& v : x) dims.push_back(v.size());
  CTensor out{Format(std::move(dims))};
  for_each_index(out.format(), [&](std::size_t lin, const MultiIndex& J) {
    cplx p = 1.0;
    for (std::size_t l = 0; l < J.size(); ++l) p *= x[l][J[l]];
    out[lin] = p;
  });
  return out;
}

/// Linear position of the mode-k fiber addressed by a prefix over the
/// first k-1 factors.
inline std::size_t fiber_offset(const Format& f, std::span<const std::size_t> prefix) {
  if (prefix.size() + 1 != f.order()) {
    throw DimensionMismatch("fiber prefix must have " + std::to_string(f.order() - 1) + " entries");
  }
  MultiIndex full(prefix.begin(), prefix.end());
  full.push_back(0);
  return f.linear_index(full);
}

/// The mode-k fiber (t_{prefix,1}, ..., t_{prefix,n_k}).
inline CVector slice_fiber(const CTensor& T, std::span<const std::size_t> prefix) {
  const std::size_t off = fiber_offset(T.format(), prefix);
  const std::size_t n = T.format().last_dim();
  return CVector(T.entries().begin() + off, T.entries().begin() + off + n);
}

/// Fiber by linear prefix number p in [0, fiber_count()).
inline CVector slice_fiber(const CTensor& T, std::size_t prefix_number) {
  const std::size_t n = T.format().last_dim();
  if (prefix_number >= T.format().fiber_count()) throw std::out_of_range("fiber prefix out of range");
  const auto begin = T.entries().begin() + prefix_number * n;
  return CVector(begin, begin + n);
}

/// Entries i.i.d. complex Gaussian, deterministic per seed.
inline CTensor random_tensor(const Format& format, std::uint64_t seed) {
  Rng rng(seed, 0x7e4507);
  CTensor T(format);
  for (std::size_t i = 0; i < T.size(); ++i) T[i] = rng.complex_normal();
  return T;
}

/// Same as random_tensor but with zero imaginary parts.
inline CTensor random_real_tensor(const Format& format, std::uint64_t seed) {
  Rng rng(seed, 0x7e4508);
  CTensor T(format);
  for (std::size_t i = 0; i < T.size(); ++i) T[i] = rng.real_normal();
  return T;
}

/// Embeds T of format (n_1,...,n_{k-1},N) into (n_1,...,n_{k-1},m), m >= N,
/// padding the last factor with zeros.
inline CTensor pad_last(const CTensor& T, std::size_t m) {
  const Format& f = T.format();
  const std::size_t N = f.last_dim();
  if (m < N) throw DimensionMismatch("pad_last: target size smaller than current");
  CTensor out(f.with_last(m));
  for (std::size_t p = 0; p < f.fiber_count(); ++p) {
    for (std::size_t s = 0; s < N; ++s) out[p * m + s] = T[p * N + s];
  }
  return out;
}

}  // namespace singtens
