#include <gtest/gtest.h>

#include "singtens/singtens.hpp"

using namespace singtens;

namespace {

cplx lambda_invariant(const SystemPoint& p, std::size_t i) { return p.lambda[i] * dot(p.x[i], p.x[i]); }

}  // namespace

TEST(Tracker, DefaultConfigIsValid) { EXPECT_NO_THROW(TrackerConfig{}.validate()); }

TEST(Tracker, InvalidConfigsThrow) {
  auto bad = [](auto mutate) {
    TrackerConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](auto& c) { c.newton_tol = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.corrector_tol = -1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.min_step = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.initial_step = 0.5; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.step_shrink = 1.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.step_expand = 0.5; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.max_steps = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](auto& c) { c.endpoint_refine_iters = -1; }).validate(), std::invalid_argument);
}

TEST(Tracker, TrackIntoAGenericTensor) {
  for (const Format& f : {Format{2, 2, 2}, Format{2, 3, 4}, Format{3, 3}}) {
    const SingularSystem sys(f);
    const auto [U0, p0] = start_pair(f, 12);
    const CTensor T = random_tensor(f, 13);
    const auto res = track(sys, p0, U0, T, Rng(1).unit_phase(), TrackerConfig{});
    ASSERT_EQ(res.status, TrackStatus::success) << f.to_string();
    EXPECT_LT(res.endpoint_residual, 1e-10);
    EXPECT_GT(res.steps_taken, 0);
    // Every factor carries the same value of lambda_i (x_i . x_i).
    for (std::size_t i = 1; i < f.order(); ++i) {
      EXPECT_LT(std::abs(lambda_invariant(res.endpoint, i) - lambda_invariant(res.endpoint, 0)),
                1e-8 * std::abs(lambda_invariant(res.endpoint, 0)));
    }
  }
}

TEST(Tracker, TrivialPathKeepsTheStart) {
  const Format f{2, 3};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 2);
  const auto res = track(sys, p0, U0, U0, cplx(1.0), TrackerConfig{});
  ASSERT_EQ(res.status, TrackStatus::success);
  const CVector a = sys.flatten(res.endpoint), b = sys.flatten(p0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-12);
}

TEST(Tracker, GammaScalesLambdaAtTheStart) {
  // With U_to = gamma U_from the path is constant; the endpoint is the start
  // with every lambda multiplied by gamma.
  const Format f{2, 2, 3};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 3);
  const cplx gamma = std::polar(1.0, 0.7);
  const auto res = track(sys, p0, U0, gamma * U0, gamma, TrackerConfig{});
  ASSERT_EQ(res.status, TrackStatus::success);
  for (std::size_t i = 0; i < f.order(); ++i) EXPECT_LT(std::abs(res.endpoint.lambda[i] - gamma * p0.lambda[i]), 1e-12);
}

TEST(Tracker, StepBudgetExhaustion) {
  const Format f{2, 2, 2};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 4);
  TrackerConfig cfg;
  cfg.max_steps = 1;
  const auto res = track(sys, p0, U0, random_tensor(f, 5), cplx(1.0), cfg);
  EXPECT_EQ(res.status, TrackStatus::max_steps_exceeded);
  EXPECT_EQ(res.steps_taken, 1);
}

TEST(Tracker, UnsatisfiableCorrectorUnderflows) {
  const Format f{2, 2, 2};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 4);
  TrackerConfig cfg;
  cfg.corrector_tol = 1e-300;
  cfg.max_corrector_iters = 1;
  cfg.min_step = 1e-3;
  const auto res = track(sys, p0, U0, random_tensor(f, 5), cplx(1.0), cfg);
  EXPECT_EQ(res.status, TrackStatus::step_underflow);
}

TEST(Tracker, MismatchedInputsThrow) {
  const Format f{2, 2};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 1);
  EXPECT_THROW(track(sys, p0, U0, random_tensor(Format{2, 3}, 1), cplx(1.0), TrackerConfig{}), DimensionMismatch);
  TrackerConfig cfg;
  cfg.max_steps = 0;
  EXPECT_THROW(track(sys, p0, U0, U0, cplx(1.0), cfg), std::invalid_argument);
}

TEST(NewtonRefine, ConvergesFromAPerturbedSolution) {
  const Format f{2, 3, 3};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 7);
  CVector v = sys.flatten(p0);
  Rng rng(7, 1);
  for (auto& z : v) z += 1e-4 * rng.complex_normal();
  const auto r = newton_refine(sys, sys.unflatten(v), U0, 1e-13, 10);
  EXPECT_LT(r.residual, 1e-13);
  EXPECT_LE(r.iterations, 4);  // quadratic convergence
  EXPECT_GE(r.iterations, 1);
}

TEST(NewtonRefine, ZeroIterationsOnlyReports) {
  const Format f{2, 2};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 8);
  SystemPoint q = p0;
  q.lambda[0] += 1.0;
  const auto r = newton_refine(sys, q, U0, 1e-12, 0);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_NEAR(r.residual, 1.0, 1e-12);
}

TEST(NewtonRefine, AlreadyConvergedDoesNothing) {
  const Format f{2, 2};
  const SingularSystem sys(f);
  const auto [U0, p0] = start_pair(f, 9);
  EXPECT_EQ(newton_refine(sys, p0, U0, 1e-12, 5).iterations, 0);
}

TEST(NewtonRefine, SingularJacobianThrows) {
  // The zero tensor with x = e_1 and lambda = 0 has a rank-deficient Jacobian.
  const Format f{2, 2};
  const SingularSystem sys(f);
  SystemPoint p{{CVector{1.0, 0.0}, CVector{1.0, 0.0}}, CVector{0.0, 0.0}};
  SystemPoint q = p;
  q.x[0][0] = 2.0;  // nonzero chart residual forces a Newton step
  EXPECT_THROW(newton_refine(sys, q, CTensor(f), 1e-12, 3), SingularMatrix);
}

TEST(Tracker, StatusNames) {
  EXPECT_STREQ(to_string(TrackStatus::success), "success");
  EXPECT_STREQ(to_string(TrackStatus::step_underflow), "step_underflow");
  EXPECT_STREQ(to_string(TrackStatus::max_steps_exceeded), "max_steps_exceeded");
  EXPECT_STREQ(to_string(TrackStatus::singular_jacobian), "singular_jacobian");
  EXPECT_STREQ(to_string(TrackStatus::diverged), "diverged");
}
