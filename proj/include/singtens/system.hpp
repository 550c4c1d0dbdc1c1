#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "singtens/linalg.hpp"
#include "singtens/tensor.hpp"

namespace singtens {

/// Candidate solution (x_1, ..., x_k, lambda_1, ..., lambda_k).
struct SystemPoint {
  std::vector<CVector> x;
  CVector lambda;
};

/// Square system in the chart x_{i,1} = 1:
///   contract(U, x, skip=i) - lambda_i x_i = 0   (k blocks of n_i rows)
///   x_{i,1} - 1 = 0                             (k rows)
/// Variables are laid out as (x_1, ..., x_k, lambda_1, ..., lambda_k).
class SingularSystem {
 public:
  explicit SingularSystem(Format format) : format_(std::move(format)) {
    const std::size_t k = format_.order();
    offsets_.resize(k);
    std::size_t off = 0;
    for (std::size_t i = 0; i < k; ++i) {
      offsets_[i] = off;
      off += format_.dim(i);
    }
    lambda_offset_ = off;
    size_ = off + k;
  }

  const Format& format() const { return format_; }
  std::size_t size() const { return size_; }
  std::size_t x_offset(std::size_t i) const { return offsets_[i]; }
  std::size_t lambda_offset() const { return lambda_offset_; }

  CVector flatten(const SystemPoint& p) const {
    check(p);
    CVector v(size_);
    for (std::size_t i = 0; i < format_.order(); ++i) {
      std::copy(p.x[i].begin(), p.x[i].end(), v.begin() + offsets_[i]);
      v[lambda_offset_ + i] = p.lambda[i];
    }
    return v;
  }

  SystemPoint unflatten(std::span<const cplx> v) const {
    if (v.size() != size_) throw DimensionMismatch("unflatten: wrong length");
    SystemPoint p;
    p.x.resize(format_.order());
    p.lambda.resize(format_.order());
    for (std::size_t i = 0; i < format_.order(); ++i) {
      p.x[i].assign(v.begin() + offsets_[i], v.begin() + offsets_[i] + format_.dim(i));
      p.lambda[i] = v[lambda_offset_ + i];
    }
    return p;
  }

  void check(const SystemPoint& p) const {
    if (p.x.size() != format_.order() || p.lambda.size() != format_.order()) {
      throw DimensionMismatch("system point has the wrong number of factors");
    }
    for (std::size_t i = 0; i < format_.order(); ++i) {
      if (p.x[i].size() != format_.dim(i)) throw DimensionMismatch("system point factor has the wrong length");
    }
  }

  void check(const CTensor& U) const {
    if (!(U.format() == format_)) {
      throw DimensionMismatch("tensor format (" + U.format().to_string() + ") does not match system format (" +
                              format_.to_string() + ")");
    }
  }

 private:
  Format format_;
  std::vector<std::size_t> offsets_;
  std::size_t lambda_offset_ = 0;
  std::size_t size_ = 0;
};

namespace detail {

/// Adds contract(U, x, skip=i) into out at the block offsets, for every i.
inline void add_all_contractions(const SingularSystem& sys, const CTensor& U, const SystemPoint& p, CVector& out) {
  const Format& f = sys.format();
  const std::size_t k = f.order();
  std::vector<cplx> prefix(k + 1), suffix(k + 1);
  for_each_index(f, [&](std::size_t lin, const MultiIndex& J) {
    const cplx u = U[lin];
    if (u == cplx(0.0)) return;
    prefix[0] = 1.0;
    for (std::size_t l = 0; l < k; ++l) prefix[l + 1] = prefix[l] * p.x[l][J[l]];
    suffix[k] = 1.0;
    for (std::size_t l = k; l-- > 0;) suffix[l] = suffix[l + 1] * p.x[l][J[l]];
    for (std::size_t i = 0; i < k; ++i) out[sys.x_offset(i) + J[i]] += u * prefix[i] * suffix[i + 1];
  });
}

}  // namespace detail

/// Residual vector of length sys.size().
inline CVector evaluate(const SingularSystem& sys, const SystemPoint& p, const CTensor& U) {
  sys.check(p);
  sys.check(U);
  CVector r(sys.size());
  detail::add_all_contractions(sys, U, p, r);
  const std::size_t k = sys.format().order();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t s = 0; s < p.x[i].size(); ++s) r[sys.x_offset(i) + s] -= p.lambda[i] * p.x[i][s];
    r[sys.lambda_offset() + i] = p.x[i][0] - 1.0;
  }
  return r;
}

/// Max-norm of the residual.
inline double residual_norm(const SingularSystem& sys, const SystemPoint& p, const CTensor& U) {
  return max_norm(evaluate(sys, p, U));
}

/// Partial derivatives of the residual with respect to the variables.
inline Matrix jacobian(const SingularSystem& sys, const SystemPoint& p, const CTensor& U) {
  sys.check(p);
  sys.check(U);
  const Format& f = sys.format();
  const std::size_t k = f.order();
  Matrix Jm(sys.size(), sys.size());

  // Gradient rows: d/dx_{j,t} of block i, row s, is the second contraction
  // sum_{J: J_i = s, J_j = t} u_J prod_{l != i,j} x_{l,J_l}.
  for_each_index(f, [&](std::size_t lin, const MultiIndex& J) {
    const cplx u = U[lin];
    if (u == cplx(0.0)) return;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        cplx prod = u;
        for (std::size_t l = 0; l < k; ++l) {
          if (l != i && l != j) prod *= p.x[l][J[l]];
        }
        Jm(sys.x_offset(i) + J[i], sys.x_offset(j) + J[j]) += prod;
      }
    }
  });
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t s = 0; s < f.dim(i); ++s) {
      Jm(sys.x_offset(i) + s, sys.x_offset(i) + s) -= p.lambda[i];
      Jm(sys.x_offset(i) + s, sys.lambda_offset() + i) = -p.x[i][s];
    }
    Jm(sys.lambda_offset() + i, sys.x_offset(i)) = 1.0;
  }
  return Jm;
}

/// Derivative of the residual along a tensor direction dU.
inline CVector param_tangent(const SingularSystem& sys, const SystemPoint& p, const CTensor& dU) {
  sys.check(p);
  sys.check(dU);
  CVector r(sys.size());
  detail::add_all_contractions(sys, dU, p, r);
  return r;
}

/// A tensor U* with a known solution p*: x_i* = e_1, lambda_i* = lambda*,
/// u*_{1...1} = lambda*, u*_J = 0 when exactly one index of J exceeds 1,
/// and random otherwise.
inline std::pair<CTensor, SystemPoint> start_pair(const Format& format, std::uint64_t seed) {
  Rng rng(seed, 0x57a27);
  const cplx lambda = rng.complex_normal();
  CTensor U(format);
  for_each_index(format, [&](std::size_t lin, const MultiIndex& J) {
    const auto above = std::count_if(J.begin(), J.end(), [](std::size_t j) { return j > 0; });
    if (above == 0) {
      U[lin] = lambda;
    } else if (above == 1) {
      U[lin] = 0.0;
    } else {
      U[lin] = rng.complex_normal();
    }
  });
  SystemPoint p;
  for (std::size_t i = 0; i < format.order(); ++i) {
    CVector e(format.dim(i));
    e[0] = 1.0;
    p.x.push_back(std::move(e));
  }
  p.lambda.assign(format.order(), lambda);
  return {std::move(U), std::move(p)};
}

}  // namespace singtens
