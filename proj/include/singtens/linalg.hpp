#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "singtens/format.hpp"
#include "singtens/random.hpp"

namespace singtens {

/// Thrown by lu_solve (and the Newton corrector) when a pivot falls below
/// 1e-14 times the scale of its row.
class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major complex matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Matrix whose columns are the given vectors (all of equal length).
  static Matrix from_columns(std::span<const CVector> columns) {
    if (columns.empty()) return {};
    Matrix m(columns[0].size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != m.rows_) throw DimensionMismatch("from_columns: ragged columns");
      for (std::size_t i = 0; i < m.rows_; ++i) m(i, j) = columns[j][i];
    }
    return m;
  }

  static Matrix from_rows(std::span<const CVector> rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw DimensionMismatch("from_rows: ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<cplx> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  CVector column(std::size_t j) const {
    CVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix adjoint() const {
    Matrix a(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) a(j, i) = std::conj((*this)(i, j));
    return a;
  }

  Matrix transpose() const {
    Matrix a(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) a(j, i) = (*this)(i, j);
    return a;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  Matrix& operator*=(cplx a) {
    for (auto& z : data_) z *= a;
    return *this;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product: inner dimensions differ");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const cplx ail = a(i, l);
        if (ail == cplx(0.0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += ail * b(l, j);
      }
    return c;
  }

  friend Matrix operator-(Matrix a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionMismatch("matrix difference: shape mismatch");
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

  friend CVector operator*(const Matrix& a, std::span<const cplx> x) {
    if (a.cols_ != x.size()) throw DimensionMismatch("matrix-vector product: length mismatch");
    CVector y(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  CVector data_;
};

inline double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_norm(std::span<const cplx> v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

/// In-place LU factorization with partial pivoting, P A = L U.
struct LUDecomposition {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;  // some pivot below 1e-14 * (row scale)
};

inline constexpr double kPivotTolerance = 1e-14;

inline LUDecomposition lu_factor(Matrix A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("LU needs a square matrix");
  const std::size_t n = A.rows();
  LUDecomposition f;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);

  std::vector<double> scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) scale[i] = max_norm(A.row(i));

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    double best = -1.0;
    for (std::size_t r = c; r < n; ++r) {
      const double v = std::abs(A(r, c));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(p, j), A(c, j));
      std::swap(f.perm[p], f.perm[c]);
      std::swap(scale[p], scale[c]);
      f.sign = -f.sign;
    }
    const cplx piv = A(c, c);
    if (std::abs(piv) <= kPivotTolerance * scale[c] || piv == cplx(0.0)) {
      f.singular = true;
      if (piv == cplx(0.0)) continue;
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const cplx m = A(r, c) / piv;
      A(r, c) = m;
      if (m == cplx(0.0)) continue;
      for (std::size_t j = c + 1; j < n; ++j) A(r, j) -= m * A(c, j);
    }
  }
  f.lu = std::move(A);
  return f;
}

inline CVector lu_substitute(const LUDecomposition& f, std::span<const cplx> b) {
  const std::size_t n = f.lu.rows();
  if (b.size() != n) throw DimensionMismatch("lu_solve: right-hand side length mismatch");
  CVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = b[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    cplx s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

/// Solves A x = b; throws SingularMatrix on a negligible pivot.
inline CVector lu_solve(const Matrix& A, std::span<const cplx> b) {
  auto f = lu_factor(A);
  if (f.singular) throw SingularMatrix("lu_solve: matrix is numerically singular");
  return lu_substitute(f, b);
}

/// Signed product of the LU pivots. A singular matrix yields a (near) zero
/// value, not an error.
inline cplx determinant(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("determinant needs a square matrix");
  if (A.rows() == 0) return 1.0;
  const auto f = lu_factor(A);
  cplx d = static_cast<double>(f.sign);
  for (std::size_t i = 0; i < A.rows(); ++i) d *= f.lu(i, i);
  return d;
}

/// Thin SVD A = U diag(s) V^H with p = min(m, n) singular values, descending.
struct SVDResult {
  std::vector<double> values;
  Matrix U;  // m x p
  Matrix V;  // n x p
};

namespace detail {

/// One-sided (Hestenes) Jacobi on the columns of W (m x n, m >= n).
/// On return the columns of W are mutually orthogonal and V accumulates the
/// applied rotations.
inline void hestenes_jacobi(Matrix& W, Matrix* V) {
  const std::size_t m = W.rows();
  const std::size_t n = W.cols();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double alpha = 0.0, beta = 0.0;
        cplx gamma = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          alpha += std::norm(W(r, i));
          beta += std::norm(W(r, j));
          gamma += std::conj(W(r, i)) * W(r, j);
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const cplx phase = gamma / g;  // rotate column j by conj(phase) to make gamma real
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const cplx wi = W(r, i);
          const cplx wj = W(r, j) * std::conj(phase);
          W(r, i) = c * wi - s * wj;
          W(r, j) = s * wi + c * wj;
        }
        if (V) {
          for (std::size_t r = 0; r < V->rows(); ++r) {
            const cplx vi = (*V)(r, i);
            const cplx vj = (*V)(r, j) * std::conj(phase);
            (*V)(r, i) = c * vi - s * vj;
            (*V)(r, j) = s * vi + c * vj;
          }
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace detail

inline SVDResult svd(const Matrix& A, bool with_factors = true) {
  const bool wide = A.rows() < A.cols();
  Matrix W = wide ? A.adjoint() : A;  // tall: m >= n
  const std::size_t m = W.rows();
  const std::size_t n = W.cols();
  Matrix V = Matrix::identity(n);
  detail::hestenes_jacobi(W, with_factors ? &V : nullptr);

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += std::norm(W(r, j));
    norms[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return norms[a] > norms[b]; });

  SVDResult out;
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.values[j] = norms[order[j]];
  if (!with_factors) return out;

  // W = A_tall V, so A_tall = (W diag(1/s)) diag(s) V^H.
  Matrix Ut(m, n), Vt(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    const double s = norms[src];
    for (std::size_t r = 0; r < m; ++r) Ut(r, j) = s > 0 ? W(r, src) / s : cplx(0.0);
    for (std::size_t r = 0; r < n; ++r) Vt(r, j) = V(r, src);
  }
  if (wide) {
    // A = (A^H)^H = V diag(s) U^H: roles swap.
    out.U = std::move(Vt);
    out.V = std::move(Ut);
  } else {
    out.U = std::move(Ut);
    out.V = std::move(Vt);
  }
  return out;
}

/// Outcome of the two-criterion rank decision.
struct RankReport {
  std::vector<double> singular_values;
  std::size_t rank = 0;
  double gap_ratio = std::numeric_limits<double>::infinity();  // s_r / s_{r+1}
  double threshold_used = 0.0;                                   // absolute floor
  bool ambiguous = false;  // no cut met the gap criterion; floor cut returned
};

inline constexpr double kDefaultRankFloor = 1e-8;  // relative to s_1
inline constexpr double kDefaultRankGap = 1e6;

/// rank = largest r with s_r >= floor and (r = count or s_r / s_{r+1} >= min_gap).
inline RankReport numerical_rank(std::vector<double> values, double relative_floor = kDefaultRankFloor,
                                 double min_gap = kDefaultRankGap) {
  RankReport rep;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1]) throw std::invalid_argument("numerical_rank: values must be descending");
  }
  rep.singular_values = std::move(values);
  const auto& s = rep.singular_values;
  if (s.empty() || s[0] == 0.0) {
    rep.rank = 0;
    rep.gap_ratio = std::numeric_limits<double>::infinity();
    return rep;
  }
  const double floor = relative_floor * s[0];
  rep.threshold_used = floor;
  auto gap_at = [&](std::size_t r) {  // r is 1-based
    if (r == s.size() || s[r] == 0.0) return std::numeric_limits<double>::infinity();
    return s[r - 1] / s[r];
  };
  for (std::size_t r = s.size(); r >= 1; --r) {
    if (s[r - 1] >= floor && gap_at(r) >= min_gap) {
      rep.rank = r;
      rep.gap_ratio = gap_at(r);
      return rep;
    }
  }
  rep.ambiguous = true;
  rep.rank = static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) { return v >= floor; }));
  rep.gap_ratio = gap_at(rep.rank);
  return rep;
}

inline RankReport matrix_rank(const Matrix& A, double relative_floor = kDefaultRankFloor,
                              double min_gap = kDefaultRankGap) {
  return numerical_rank(svd(A, false).values, relative_floor, min_gap);
}

struct LeastSquaresResult {
  CVector coefficients;
  double relative_residual = 0.0;  // |A x - b| / |b|
  RankReport rank;
};

/// Minimum-norm least squares through the SVD pseudoinverse, truncated at the
/// numerical rank.
inline LeastSquaresResult least_squares(const Matrix& A, std::span<const cplx> b,
                                        double relative_floor = kDefaultRankFloor,
                                        double min_gap = kDefaultRankGap) {
  if (b.size() != A.rows()) throw DimensionMismatch("least_squares: right-hand side length mismatch");
  LeastSquaresResult out;
  out.coefficients.assign(A.cols(), 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return out;

  const auto dec = svd(A, true);
  out.rank = numerical_rank(dec.values, relative_floor, min_gap);
  for (std::size_t j = 0; j < out.rank.rank; ++j) {
    cplx proj = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) proj += std::conj(dec.U(i, j)) * b[i];
    proj /= dec.values[j];
    for (std::size_t i = 0; i < A.cols(); ++i) out.coefficients[i] += dec.V(i, j) * proj;
  }
  CVector r = A * std::span<const cplx>(out.coefficients);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  out.relative_residual = norm2(r) / bnorm;
  return out;
}

}  // namespace singtens
