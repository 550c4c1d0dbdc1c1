#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace singtens;

namespace {

std::vector<CVector> random_factors(const Format& f, std::uint64_t seed) {
  Rng rng(seed, 99);
  std::vector<CVector> x;
  for (std::size_t i = 0; i < f.order(); ++i) x.push_back(rng.complex_vector(f.dim(i)));
  return x;
}

double max_diff(const CVector& a, const CVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST(Tensor, ConstructionChecksLength) {
  EXPECT_THROW(CTensor(Format{2, 2}, CVector(3)), DimensionMismatch);
  const CTensor T(Format{2, 3});
  EXPECT_EQ(T.size(), 6u);
  EXPECT_EQ(T.max_abs(), 0.0);
}

TEST(Tensor, ContractMatchesBruteForceOracle) {
  for (const Format& f : {Format{2, 3}, Format{2, 2, 4}, Format{3, 2, 2, 3}}) {
    const CTensor T = random_tensor(f, 11);
    const auto x = random_factors(f, 5);
    for (std::size_t skip = 0; skip < f.order(); ++skip) {
      EXPECT_LT(max_diff(contract(T, x, skip), oracle::contract(T, x, skip)), 1e-12) << f.to_string();
    }
  }
}

TEST(Tensor, ContractIgnoresTheSkippedVector) {
  const Format f{2, 3, 2};
  const CTensor T = random_tensor(f, 3);
  auto x = random_factors(f, 4);
  const CVector a = contract(T, x, 1);
  x[1] = CVector(7, cplx(9.0));  // wrong length on purpose: it is never read
  EXPECT_EQ(max_diff(a, contract(T, x, 1)), 0.0);
}

TEST(Tensor, MultilinearValueIsContractionDotted) {
  const Format f{2, 3, 4};
  const CTensor T = random_tensor(f, 8);
  const auto x = random_factors(f, 9);
  const cplx v = multilinear_value(T, x);
  for (std::size_t i = 0; i < f.order(); ++i) {
    EXPECT_LT(std::abs(v - dot(contract(T, x, i), x[i])), 1e-12);
  }
}

TEST(Tensor, ContractErrorPaths) {
  const Format f{2, 3};
  const CTensor T = random_tensor(f, 1);
  std::vector<CVector> x{CVector(2), CVector(3)};
  EXPECT_THROW(contract(T, x, 2), std::out_of_range);
  std::vector<CVector> short_list{CVector(2)};
  EXPECT_THROW(contract(T, short_list, 0), DimensionMismatch);
  std::vector<CVector> bad{CVector(2), CVector(4)};
  EXPECT_THROW(contract(T, bad, 0), DimensionMismatch);
  EXPECT_THROW(multilinear_value(T, bad), DimensionMismatch);
}

TEST(Tensor, DotIsBilinearWithoutConjugation) {
  const CVector a{cplx(0, 1)}, b{cplx(0, 1)};
  EXPECT_EQ(dot(a, b), cplx(-1, 0));
  EXPECT_THROW(dot(a, CVector(2)), DimensionMismatch);
}

TEST(Tensor, FrobeniusInnerOfRankOnesFactorizes) {
  const Format f{2, 3, 2};
  const auto x = random_factors(f, 1), y = random_factors(f, 2);
  cplx expected = 1.0;
  for (std::size_t i = 0; i < f.order(); ++i) expected *= dot(x[i], y[i]);
  EXPECT_LT(std::abs(frobenius_inner(rank_one(x), rank_one(y)) - expected), 1e-12);
  EXPECT_THROW(frobenius_inner(CTensor(Format{2, 2}), CTensor(Format{2, 3})), DimensionMismatch);
}

TEST(Tensor, RankOneEntries) {
  const std::vector<CVector> x{{1.0, 2.0}, {3.0, cplx(0, 1), 5.0}};
  const CTensor R = rank_one(x);
  EXPECT_EQ(R.format(), (Format{2, 3}));
  EXPECT_EQ(R[0], cplx(3.0));
  EXPECT_EQ(R[1], cplx(0, 1));
  EXPECT_EQ(R[5], cplx(10.0));
}

TEST(Tensor, VectorizeRoundTrip) {
  const CTensor T = random_tensor(Format{3, 2, 2}, 4);
  const CTensor S = CTensor::devectorize(T.format(), T.vectorize());
  EXPECT_TRUE(std::ranges::equal(S.entries(), T.entries()));
  EXPECT_THROW(CTensor::devectorize(T.format(), CVector(5)), DimensionMismatch);
}

TEST(Tensor, NormIsHermitian) {
  CTensor T(Format{2, 2});
  T[0] = cplx(3, 4);
  EXPECT_DOUBLE_EQ(T.norm(), 5.0);
  EXPECT_DOUBLE_EQ(T.max_abs(), 5.0);
}

TEST(Tensor, Arithmetic) {
  const Format f{2, 2};
  const CTensor A = random_tensor(f, 1), B = random_tensor(f, 2);
  const CTensor C = A + B - A;
  for (std::size_t i = 0; i < f.total_size(); ++i) EXPECT_LT(std::abs(C[i] - B[i]), 1e-15);
  const CTensor D = cplx(2.0) * A;
  EXPECT_NEAR(D.norm(), 2.0 * A.norm(), 1e-12);
  CTensor E(Format{2, 3});
  EXPECT_THROW(E += A, DimensionMismatch);
}

TEST(Tensor, FiberSlicing) {
  const Format f{2, 3, 4};
  const CTensor T = random_tensor(f, 5);
  const std::vector<std::size_t> prefix{1, 2};
  const CVector fib = slice_fiber(T, prefix);
  ASSERT_EQ(fib.size(), 4u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_EQ(fib[s], T.at(std::vector<std::size_t>{1, 2, s}));
  }
  EXPECT_EQ(slice_fiber(T, 5), fib);  // prefix number 1*3 + 2
  EXPECT_THROW(slice_fiber(T, 6), std::out_of_range);
  EXPECT_THROW(slice_fiber(T, std::vector<std::size_t>{1}), DimensionMismatch);
}

TEST(Tensor, RandomTensorsAreDeterministicPerSeed) {
  const Format f{2, 3, 2};
  EXPECT_TRUE(std::ranges::equal(random_tensor(f, 42).entries(), random_tensor(f, 42).entries()));
  EXPECT_FALSE(std::ranges::equal(random_tensor(f, 42).entries(), random_tensor(f, 43).entries()));
  const CTensor R = random_real_tensor(f, 7);
  for (const auto& z : R.entries()) EXPECT_EQ(z.imag(), 0.0);
}

TEST(Tensor, PadLastEmbedsWithZeros) {
  const CTensor T = random_tensor(Format{2, 2, 3}, 6);
  const CTensor P = pad_last(T, 5);
  EXPECT_EQ(P.format(), (Format{2, 2, 5}));
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t s = 0; s < 5; ++s) {
      EXPECT_EQ(P[p * 5 + s], s < 3 ? T[p * 3 + s] : cplx(0.0));
    }
  }
  EXPECT_NEAR(P.norm(), T.norm(), 1e-14);
  EXPECT_THROW(pad_last(T, 2), DimensionMismatch);
}

TEST(Random, StreamsAreIndependent) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  Rng a(5, 1), b(5, 1);
  EXPECT_EQ(a.complex_normal(), b.complex_normal());
  EXPECT_NEAR(std::abs(a.unit_phase()), 1.0, 1e-15);
}
