#include "mtoep/operators.hpp"
#include "mtoep/stability.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mtoep;

namespace {

TruncatedOperator wrap(Matrix m) {
  TruncatedOperator t;
  t.data = std::move(m);
  return t;
}

SchemeRun make_run(TruncatedOperator b, Forcing f, std::uint64_t seed, int steps) {
  Lcg64 rng(seed);
  SchemeRun run;
  const auto n = b.dim();
  run.b = std::move(b);
  run.forcing = std::move(f);
  run.u0 = random_vector(n, rng);
  run.v0 = 1e-3 * random_vector(n, rng);
  run.steps = steps;
  return run;
}

}  // namespace

TEST(Scheme, HalfIdentityContracts) {
  const int n = 5, k = 30;
  auto run = make_run(wrap(0.5 * Matrix::Identity(n, n)), Forcing::zero(), 3, k);
  const auto res = run_scheme(run);
  const double v0 = run.v0.norm();
  ASSERT_EQ(res.error.norms.size(), static_cast<std::size_t>(k + 1));
  for (int i = 0; i <= k; ++i) EXPECT_NEAR(res.error.norms[i], std::ldexp(v0, -i), 1e-15);
  EXPECT_DOUBLE_EQ(res.error.m_hat, 1.0);
  EXPECT_EQ(res.error.verdict, Verdict::Pass);
  EXPECT_FALSE(res.error.unstable);
}

TEST(Scheme, NilpotentBlockKillsErrorInTwoSteps) {
  Matrix j = Matrix::Zero(2, 2);
  j(0, 1) = 1.0;
  SchemeRun run;
  run.b = wrap(j);
  run.u0 = Vector::Ones(2);
  run.v0 = Vector::Zero(2);
  run.v0[1] = 1.0;
  run.steps = 4;
  const auto res = run_scheme(run);
  EXPECT_EQ(res.error.errors[1][0], Complex(1.0));
  EXPECT_EQ(res.error.errors[1][1], Complex(0.0));
  EXPECT_EQ(res.error.norms[2], 0.0);
  EXPECT_EQ(res.error.verdict, Verdict::Pass);
}

TEST(Scheme, ErrorIndependentOfForcing) {
  const auto b = build_operator(FamilyParams::conjugate_shift(0.8), 40, BuildMode::FiniteSection);
  const int k = 60;
  const auto zero = run_scheme(make_run(b, Forcing::zero(), 11, k));

  Lcg64 rng(99);
  std::vector<Vector> seq;
  for (int i = 0; i < 7; ++i) seq.push_back(random_vector(40, rng));
  const auto cyc = run_scheme(make_run(b, Forcing::from_sequence(seq), 11, k));
  const auto gen = run_scheme(make_run(b, Forcing::generator(5, 0.5), 11, k));

  EXPECT_LE(trajectory_gap(zero.error, cyc.error), 1e-12);
  EXPECT_LE(trajectory_gap(zero.error, gen.error), 1e-12);
  // the forced solutions themselves differ
  EXPECT_GT(std::abs(zero.u_norms.back() - gen.u_norms.back()), 1e-3);
  for (const auto* r : {&zero, &cyc, &gen}) {
    EXPECT_LE(r->error.max_two_way_gap, 1e-12);
    EXPECT_EQ(r->error.verdict, Verdict::Pass);
  }
}

TEST(Scheme, GeneratorIsReproducible) {
  const auto b = build_operator(FamilyParams::real_part(0.4), 16, BuildMode::FiniteSection);
  const auto a = run_scheme(make_run(b, Forcing::generator(7), 1, 20));
  const auto c = run_scheme(make_run(b, Forcing::generator(7), 1, 20));
  EXPECT_EQ(a.u_norms, c.u_norms);
  const auto d = run_scheme(make_run(b, Forcing::generator(8), 1, 20));
  EXPECT_NE(a.u_norms, d.u_norms);
}

TEST(Scheme, RealPartErrorStaysInsideEnvelope) {
  const auto b = build_operator(FamilyParams::real_part(0.5), 64, BuildMode::FiniteSection);
  const int k = 200;
  auto run = make_run(b, Forcing::generator(2), 4, k);
  const auto res = run_scheme(run);
  EXPECT_LE(res.error.m_hat, 3.0);
  EXPECT_GE(res.error.m_hat, 1.0);
  EXPECT_NEAR(res.error.envelope, res.error.m_hat * run.v0.norm(), 1e-15);
  for (double x : res.error.norms) EXPECT_LE(x, res.error.envelope * (1 + 1e-9));
  EXPECT_EQ(res.error.verdict, Verdict::Pass);
}

TEST(Scheme, GrowingMatrixIsDeclaredUnstable) {
  auto run = make_run(wrap(2.0 * Matrix::Identity(3, 3)), Forcing::zero(), 1, 100);
  const auto res = run_scheme(run);
  EXPECT_TRUE(res.error.unstable);
  EXPECT_EQ(res.error.verdict, Verdict::Fail);
  EXPECT_LT(res.error.norms.size(), 101u);
}

TEST(Scheme, ValidatesShapes) {
  auto run = make_run(wrap(Matrix::Identity(3, 3)), Forcing::zero(), 1, 5);
  run.v0 = Vector::Zero(2);
  EXPECT_THROW(run_scheme(run), DimensionError);
  run.v0 = Vector::Zero(3);
  run.steps = 0;
  EXPECT_THROW(run_scheme(run), DomainError);
  run.steps = 2;
  run.forcing = Forcing::from_sequence({Vector::Zero(4)});
  EXPECT_THROW(run_scheme(run), DimensionError);
  EXPECT_THROW(Forcing::from_sequence({}), DomainError);
  run.forcing = Forcing::zero();
  run.b = wrap(Matrix::Zero(3, 2));
  EXPECT_THROW(run_scheme(run), DimensionError);
}
