#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace singtens;

namespace {

SystemPoint random_point(const Format& f, std::uint64_t seed) {
  Rng rng(seed, 5);
  SystemPoint p;
  for (std::size_t i = 0; i < f.order(); ++i) p.x.push_back(rng.complex_vector(f.dim(i)));
  p.lambda = rng.complex_vector(f.order());
  return p;
}

/// Central finite differences of evaluate() along every variable.
Matrix finite_difference_jacobian(const SingularSystem& sys, const SystemPoint& p, const CTensor& U, double h) {
  const CVector v = sys.flatten(p);
  Matrix J(sys.size(), sys.size());
  for (std::size_t c = 0; c < sys.size(); ++c) {
    CVector plus = v, minus = v;
    plus[c] += h;
    minus[c] -= h;
    const CVector fp = evaluate(sys, sys.unflatten(plus), U), fm = evaluate(sys, sys.unflatten(minus), U);
    for (std::size_t r = 0; r < sys.size(); ++r) J(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return J;
}

}  // namespace

TEST(System, LayoutOffsets) {
  const SingularSystem sys(Format{2, 3, 4});
  EXPECT_EQ(sys.size(), 12u);
  EXPECT_EQ(sys.x_offset(0), 0u);
  EXPECT_EQ(sys.x_offset(1), 2u);
  EXPECT_EQ(sys.x_offset(2), 5u);
  EXPECT_EQ(sys.lambda_offset(), 9u);
}

TEST(System, FlattenRoundTrip) {
  const Format f{3, 2, 2};
  const SingularSystem sys(f);
  const SystemPoint p = random_point(f, 1);
  const SystemPoint q = sys.unflatten(sys.flatten(p));
  EXPECT_EQ(q.x, p.x);
  EXPECT_EQ(q.lambda, p.lambda);
  EXPECT_THROW(sys.unflatten(CVector(3)), DimensionMismatch);
}

TEST(System, CheckRejectsMalformedInput) {
  const Format f{2, 3};
  const SingularSystem sys(f);
  SystemPoint p = random_point(f, 2);
  const CTensor U = random_tensor(f, 2);
  EXPECT_THROW(evaluate(sys, p, random_tensor(Format{3, 2}, 1)), DimensionMismatch);
  p.x[1].pop_back();
  EXPECT_THROW(evaluate(sys, p, U), DimensionMismatch);
  p = random_point(f, 2);
  p.lambda.pop_back();
  EXPECT_THROW(jacobian(sys, p, U), DimensionMismatch);
  p = random_point(f, 2);
  p.x.pop_back();
  EXPECT_THROW(sys.flatten(p), DimensionMismatch);
}

TEST(System, StartPairIsAnExactSolution) {
  for (const Format& f : {Format{2, 2, 2}, Format{2, 3, 5}, Format{3, 4}, Format{2, 2, 2, 3}}) {
    const auto [U, p] = start_pair(f, 3);
    const SingularSystem sys(f);
    EXPECT_EQ(residual_norm(sys, p, U), 0.0) << f.to_string();
  }
}

TEST(System, StartPairIsNonsingular) {
  const Format f{2, 3, 4};
  const auto [U, p] = start_pair(f, 4);
  const SingularSystem sys(f);
  const auto rep = matrix_rank(jacobian(sys, p, U));
  EXPECT_EQ(rep.rank, sys.size());
}

TEST(System, ResidualMatchesDefinition) {
  const Format f{2, 3, 2};
  const SingularSystem sys(f);
  const SystemPoint p = random_point(f, 6);
  const CTensor U = random_tensor(f, 6);
  const CVector r = evaluate(sys, p, U);
  for (std::size_t i = 0; i < f.order(); ++i) {
    const CVector c = oracle::contract(U, p.x, i);
    for (std::size_t s = 0; s < f.dim(i); ++s) {
      EXPECT_LT(std::abs(r[sys.x_offset(i) + s] - (c[s] - p.lambda[i] * p.x[i][s])), 1e-12);
    }
    EXPECT_EQ(r[sys.lambda_offset() + i], p.x[i][0] - 1.0);
  }
}

TEST(System, JacobianMatchesFiniteDifferences) {
  for (const Format& f : {Format{2, 2}, Format{2, 3, 4}, Format{2, 2, 2, 3}}) {
    const SingularSystem sys(f);
    const SystemPoint p = random_point(f, 7);
    const CTensor U = random_tensor(f, 7);
    const Matrix J = jacobian(sys, p, U), F = finite_difference_jacobian(sys, p, U, 1e-6);
    double err = 0.0;
    for (std::size_t r = 0; r < J.rows(); ++r)
      for (std::size_t c = 0; c < J.cols(); ++c) err = std::max(err, std::abs(J(r, c) - F(r, c)));
    EXPECT_LT(err, 1e-6) << f.to_string();
  }
}

TEST(System, JacobianIsComplexAnalytic) {
  // A purely imaginary step gives i times the real-step derivative.
  const Format f{2, 3};
  const SingularSystem sys(f);
  const SystemPoint p = random_point(f, 8);
  const CTensor U = random_tensor(f, 8);
  const Matrix J = jacobian(sys, p, U);
  const CVector v = sys.flatten(p);
  const double h = 1e-6;
  for (std::size_t c = 0; c < sys.size(); ++c) {
    CVector plus = v, minus = v;
    plus[c] += cplx(0, h);
    minus[c] -= cplx(0, h);
    const CVector fp = evaluate(sys, sys.unflatten(plus), U), fm = evaluate(sys, sys.unflatten(minus), U);
    for (std::size_t r = 0; r < sys.size(); ++r) {
      EXPECT_LT(std::abs((fp[r] - fm[r]) / cplx(0, 2 * h) - J(r, c)), 1e-6);
    }
  }
}

TEST(System, ParamTangentIsTheDerivativeInTheTensor) {
  const Format f{2, 2, 3};
  const SingularSystem sys(f);
  const SystemPoint p = random_point(f, 9);
  const CTensor U = random_tensor(f, 9), dU = random_tensor(f, 10);
  const double h = 1e-6;
  const CVector fp = evaluate(sys, p, U + cplx(h) * dU), fm = evaluate(sys, p, U - cplx(h) * dU);
  const CVector t = param_tangent(sys, p, dU);
  for (std::size_t r = 0; r < sys.size(); ++r) EXPECT_LT(std::abs((fp[r] - fm[r]) / (2 * h) - t[r]), 1e-7);
  // The chart rows do not depend on the tensor.
  for (std::size_t i = 0; i < f.order(); ++i) EXPECT_EQ(t[sys.lambda_offset() + i], cplx(0.0));
}

TEST(System, ResidualIsLinearInTheTensor) {
  const Format f{3, 2};
  const SingularSystem sys(f);
  const SystemPoint p = random_point(f, 11);
  const CTensor A = random_tensor(f, 1), B = random_tensor(f, 2);
  const CVector ra = evaluate(sys, p, A), rb = evaluate(sys, p, B), rab = evaluate(sys, p, A + B);
  const CVector r0 = evaluate(sys, p, CTensor(f));
  for (std::size_t r = 0; r < sys.size(); ++r) EXPECT_LT(std::abs(rab[r] - (ra[r] + rb[r] - r0[r])), 1e-12);
}
