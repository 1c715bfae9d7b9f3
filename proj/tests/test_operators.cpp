#include "mtoep/model.hpp"
#include "mtoep/norm.hpp"
#include "mtoep/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mtoep;

namespace {

// ((T_z)_N^*)^k: ones on the k-th superdiagonal
Matrix backward_shift_power(int n, int k) {
  Matrix s = Matrix::Zero(n, n);
  for (int m = 0; m + k < n; ++m) s(m, m + k) = 1.0;
  return s;
}

Matrix finite_section(const FamilyParams& p, int n) {
  return build_operator(p, n, BuildMode::FiniteSection).data;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Build, ConjShiftClosedFormSmall) {
  const auto a = build_operator(FamilyParams::conjugate_shift(0.5), 3, BuildMode::ClosedForm);
  Matrix want = backward_shift_power(3, 1);
  want(0, 0) = 0.5;
  want(1, 0) = -0.25;
  want(2, 0) = 0.125;
  EXPECT_LT(max_abs(a.data - want), 1e-16);
  EXPECT_EQ(a.provenance.construction, Construction::ClosedForm);
  EXPECT_FALSE(a.provenance.formula.empty());
}

TEST(Build, FiniteSectionIsProductOfSections) {
  const Complex beta{0.3, 0.5};
  const auto p = FamilyParams::real_part(beta);
  const int n = 12;
  Matrix g = Matrix::Identity(n, n);
  for (int m = 1; m < n; ++m) g(m, m - 1) = beta;
  const Matrix f = toeplitz_matrix(LaurentSymbol::real_part(), n).data;
  const Matrix want = g.inverse() * f * g;
  EXPECT_LT(max_abs(finite_section(p, n) - want), 1e-14);
}

TEST(Build, RealPartModesAgreeAwayFromBoundary) {
  for (Complex beta : {Complex{0.5}, Complex{-0.7}, Complex{0.0, 0.6}}) {
    const auto p = FamilyParams::real_part(beta);
    const int n = 96;
    const Matrix fs = finite_section(p, n);
    const Matrix cf = build_operator(p, n, BuildMode::ClosedForm).data;
    EXPECT_LT(max_abs((fs - cf).topLeftCorner(n - 2, n - 2)), 1e-12) << beta;
    // the closed form itself: T_{Re z} + (beta / 2) k_{-conj(beta)} e_0^*
    Matrix want = toeplitz_matrix(LaurentSymbol::real_part(), n).data;
    want.col(0) += beta / 2.0 * kernel_vector(-std::conj(beta), n).coeffs;
    EXPECT_LT(max_abs(cf - want), 1e-15);
  }
}

TEST(Build, TrivialConjugatorGivesToeplitz) {
  const auto f = LaurentSymbol::real_part();
  const auto a = build_operator(FamilyParams::custom(f, LaurentSymbol::constant(1.0)), 10,
                                BuildMode::FiniteSection);
  EXPECT_EQ(a.data, toeplitz_matrix(f, 10).data);
}

TEST(Build, Guards) {
  EXPECT_THROW(build_operator(FamilyParams::conjugate_shift(1.0), 4, BuildMode::FiniteSection),
               DomainError);
  const auto custom = FamilyParams::custom(LaurentSymbol::conjugate_shift(), LaurentSymbol::affine(0.2));
  EXPECT_THROW(build_operator(custom, 4, BuildMode::ClosedForm), UnsupportedModeError);
  EXPECT_THROW(parse_build_mode("dense"), ParseError);
}

TEST(Structured, MatchesDenseBuild) {
  for (auto mode : {BuildMode::FiniteSection, BuildMode::ClosedForm})
    for (const auto& p : {FamilyParams::conjugate_shift({0.4, -0.7}), FamilyParams::real_part(0.9)}) {
      const auto s = structured_operator(p, 40, mode);
      const Matrix dense = build_operator(p, 40, mode).data;
      Lcg64 rng(11);
      const Vector x = random_vector(40, rng);
      Vector y, z;
      s.apply(x, y);
      s.apply_adjoint(x, z);
      EXPECT_LT((y - dense * x).norm(), 1e-12);
      EXPECT_LT((z - dense.adjoint() * x).norm(), 1e-12);
    }
}

TEST(Power, FirstPowerMatchesBuild) {
  const auto p = FamilyParams::conjugate_shift(0.5);
  EXPECT_LT(max_abs(power_closed_form(p, PowerIndex(1), 3).data -
                    build_operator(p, 3, BuildMode::ClosedForm).data),
            1e-16);
}

TEST(Power, SecondPowerSmall) {
  const auto a = power_closed_form(FamilyParams::conjugate_shift(0.5), PowerIndex(2), 4);
  Matrix want = backward_shift_power(4, 2);
  want(0, 1) += 0.5;
  want(1, 1) += -0.25;
  want(2, 1) += 0.125;
  want(3, 1) += -0.0625;
  EXPECT_LT(max_abs(a.data - want), 1e-16);
  EXPECT_EQ(a.provenance.power, 2);
}

TEST(Power, InteriorAgreesWithMatrixPowers) {
  const int n = 256;
  for (Complex beta : {Complex{0.5}, Complex{0.0, 0.9}, Complex{-0.6, 0.3}}) {
    const auto p = FamilyParams::conjugate_shift(beta);
    const Matrix a = finite_section(p, n);
    Matrix an = Matrix::Identity(n, n);
    for (int k = 1; k <= 16; ++k) {
      an = a * an;
      const Matrix cf = power_closed_form(p, PowerIndex(k), n).data;
      const int keep = n - k - 1;
      EXPECT_LT(max_abs((an - cf).topLeftCorner(keep, keep)), 1e-10) << beta << " n=" << k;
    }
  }
}

TEST(Power, CorrectionHasRankOne) {
  const int n = 64;
  const auto p = FamilyParams::conjugate_shift({0.2, 0.7});
  for (int k : {1, 3, 10}) {
    const Matrix diff = power_closed_form(p, PowerIndex(k), n).data - backward_shift_power(n, k);
    Eigen::JacobiSVD<Matrix> svd(diff);
    EXPECT_GT(svd.singularValues()[0], 0.1);
    EXPECT_LT(svd.singularValues()[1], 1e-12);
  }
}

TEST(Power, Guards) {
  const auto p = FamilyParams::conjugate_shift(0.5);
  EXPECT_THROW(power_closed_form(p, PowerIndex(4), 4), DimensionError);
  EXPECT_THROW(power_closed_form(p, PowerIndex(0), 4), DomainError);
  EXPECT_THROW(PowerIndex(-1), DomainError);
  EXPECT_THROW(power_closed_form(FamilyParams::real_part(0.5), PowerIndex(1), 4), UnsupportedModeError);
}

TEST(Commutator, SelfCommutatorVanishes) {
  Lcg64 rng(3);
  TruncatedOperator x{random_matrix(7, 7, rng), {}};
  EXPECT_LT(max_abs(commutator(x, x).data), 1e-15);
}

TEST(Commutator, ShiftPowersInterior) {
  const int n = 32;
  const auto tz = toeplitz_matrix(LaurentSymbol({{1, 1.0}}), n);
  for (int k = 1; k <= 8; ++k) {
    TruncatedOperator sk{backward_shift_power(n, k), {}};
    const Matrix c = commutator(sk, tz).data;
    Matrix want = Matrix::Zero(n - k, n - k);
    want(0, k - 1) = 1.0;
    EXPECT_EQ(Matrix(c.topLeftCorner(n - k, n - k)), want) << k;
  }
}

TEST(Commutator, DimensionMismatch) {
  TruncatedOperator a{Matrix::Identity(3, 3), {}}, b{Matrix::Identity(4, 4), {}};
  EXPECT_THROW(commutator(a, b), DimensionError);
}

TEST(Resolvent, QueryRejectsUnitDisk) {
  EXPECT_THROW(ResolventQuery(1.0, 4), DomainError);
  EXPECT_THROW(ResolventQuery({0.6, 0.8}, 4), DomainError);
  EXPECT_NO_THROW(ResolventQuery(1.0001, 4));
}

TEST(Resolvent, ClosedFormMatchesFormula) {
  const int n = 20;
  const Complex beta{0.3, -0.4}, lambda{1.2, 0.9};
  const auto r = resolvent_closed_form(FamilyParams::conjugate_shift(beta), ResolventQuery(lambda, n));
  Matrix want = Matrix::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = m; k < n; ++k) want(m, k) = std::pow(lambda, -(k - m + 1));
  Vector right(n);
  for (int k = 0; k < n; ++k) right[k] = std::pow(1.0 / lambda, k);
  want += beta / (lambda * lambda) * kernel_vector(-std::conj(beta), n).coeffs * right.transpose();
  EXPECT_LT(max_abs(r.data - want), 1e-14);
  EXPECT_EQ(r.provenance.construction, Construction::ClosedFormResolvent);
}

TEST(Resolvent, VanishingBetaInvertsBackwardShift) {
  const int n = 16;
  const Complex lambda{1.5, -0.5};
  const auto r = resolvent_closed_form(FamilyParams::conjugate_shift(1e-300), ResolventQuery(lambda, n));
  const Matrix shifted = lambda * Matrix::Identity(n, n) - backward_shift_power(n, 1);
  EXPECT_LT(max_abs(shifted * r.data - Matrix::Identity(n, n)), 1e-15);
}

TEST(Resolvent, ClosedFormResidualOnLeadingBlock) {
  const auto p = FamilyParams::conjugate_shift(0.5);
  for (auto [n, lambda] : {std::pair<int, Complex>{128, 2.0}, {256, 2.0}, {256, {1.5, 0.5}}, {256, 1.01}}) {
    const Matrix a = build_operator(p, n, BuildMode::ClosedForm).data;
    const Matrix r = resolvent_closed_form(p, ResolventQuery(lambda, n)).data;
    const Matrix res = (lambda * Matrix::Identity(n, n) - a) * r - Matrix::Identity(n, n);
    EXPECT_LT(dense_norm(res.topLeftCorner(n / 2, n / 2)), 1e-10) << n << " " << lambda;
  }
}

TEST(Resolvent, DecaysLikeInverseLambda) {
  const auto p = FamilyParams::conjugate_shift(0.5);
  for (double lambda : {1e3, 1e6}) {
    const Matrix r = resolvent_closed_form(p, ResolventQuery(lambda, 32)).data;
    EXPECT_NEAR(dense_norm(r) * lambda, 1.0, 2.0 / lambda);
  }
}

TEST(Resolvent, FiniteSectionOfZeroAndDiagonal) {
  const Complex lambda{1.1, 0.7};
  TruncatedOperator zero{Matrix::Zero(5, 5), {}};
  const auto r0 = resolvent_finite_section(zero, ResolventQuery(lambda, 5));
  EXPECT_LT(max_abs(r0.data - Matrix::Identity(5, 5) / lambda), 1e-16);

  Vector d(4);
  d << 0.5, -0.9, Complex(0, 0.99), Complex(-0.3, 0.2);
  TruncatedOperator diag{d.asDiagonal().toDenseMatrix(), {}};
  const auto r = resolvent_finite_section(diag, ResolventQuery(lambda, 4));
  double min_dist = 1e300;
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(std::abs(r.data(j, j) - 1.0 / (lambda - d[j])), 0.0, 1e-15);
    min_dist = std::min(min_dist, std::abs(lambda - d[j]));
  }
  EXPECT_NEAR(dense_norm(r.data), 1.0 / min_dist, 1e-12);
}

TEST(Resolvent, FiniteSectionAgreesWithClosedFormInterior) {
  const int n = 256;
  const Complex lambda{1.5, 0.5};
  const auto p = FamilyParams::conjugate_shift(0.5);
  const auto fs = resolvent_finite_section(build_operator(p, n, BuildMode::FiniteSection),
                                           ResolventQuery(lambda, n));
  const auto cf = resolvent_closed_form(p, ResolventQuery(lambda, n));
  EXPECT_LT(max_abs((fs.data - cf.data).topLeftCorner(n / 2, n / 2)), 1e-8);
}

TEST(Resolvent, RealPartClosedFormMatchesDenseInverse) {
  // the infinite operator's resolvent, compressed, against the inverse of a
  // much larger section
  const int n = 24, big = 400;
  for (Complex beta : {Complex{0.5}, Complex{0.0, 0.8}})
    for (Complex lambda : {Complex{2.0}, Complex{0.3, 1.1}, Complex{-1.05, 0.0}, Complex{0.0, -1.0001}}) {
      const auto p = FamilyParams::real_part(beta);
      const Matrix a = build_operator(p, big, BuildMode::ClosedForm).data;
      const Matrix inv = (lambda * Matrix::Identity(big, big) - a).inverse();
      const Matrix cf = ClosedFormRealPartResolvent(beta, lambda, n).to_dense();
      EXPECT_LT(max_abs(inv.topLeftCorner(n, n) - cf), 1e-9) << beta << " " << lambda;
    }
}

TEST(Resolvent, ModelMapsApplyTheirAdjoints) {
  const auto p = FamilyParams::real_part({0.2, 0.6});
  const auto model = OperatorModel::family(p, 30, BuildMode::FiniteSection);
  Lcg64 rng(5);
  const Vector x = random_vector(30, rng), y = random_vector(30, rng);
  for (auto mode : {ResolventMode::ClosedForm, ResolventMode::FiniteSection}) {
    const auto r = model.resolvent({1.3, 0.4}, mode);
    Vector rx, ry;
    r->apply(x, rx);
    r->apply_adjoint(y, ry);
    EXPECT_NEAR(std::abs(y.dot(rx) - ry.dot(x)), 0.0, 1e-12);
  }
}

TEST(Resolvent, SingularShiftIsReported) {
  EXPECT_THROW(DenseResolvent(Matrix::Identity(3, 3), 1.0), SingularError);
}

TEST(SimilarityIdentity, IdentityConjugatorIsExact) {
  Lcg64 rng(9);
  const Matrix b = 0.3 * random_matrix(6, 6, rng);
  const auto r = similarity_resolvent_identity_check(b, Matrix::Identity(6, 6), 2.0);
  EXPECT_LT(r.derived, 1e-15);
}

TEST(SimilarityIdentity, CommutingDiagonals) {
  Vector b(3), s(3);
  b << 0.1, -0.5, Complex(0, 0.4);
  s << 2.0, 0.5, Complex(1, 1);
  const auto r = similarity_resolvent_identity_check(b.asDiagonal().toDenseMatrix(),
                                                     s.asDiagonal().toDenseMatrix(), {1.5, 0.5});
  EXPECT_LT(r.derived, 1e-15);
}

TEST(SimilarityIdentity, RandomInstances) {
  Lcg64 rng(2024);
  for (int t = 0; t < 100; ++t) {
    Matrix b = random_matrix(8, 8, rng);
    b /= 1.25 * dense_norm(b);
    const Matrix s = Matrix::Identity(8, 8) + 0.3 * random_matrix(8, 8, rng);
    const auto r = similarity_resolvent_identity_check(b, s, 2.0);
    EXPECT_LT(r.derived, 1e-10) << t;
    ASSERT_TRUE(r.as_stated.has_value());
  }
}

TEST(KernelPairing, ConjShiftPowerMaximizer) {
  const int n = 400;
  for (Complex beta : {Complex{0.5}, Complex{-0.8}, Complex{0.0, 0.7}}) {
    const auto p = FamilyParams::conjugate_shift(beta);
    const double b = std::abs(beta);
    const Complex omega = -std::conj(beta);
    for (int k : {1, 4}) {
      const Matrix ak = power_closed_form(p, PowerIndex(k), n).data;
      Vector e = Vector::Zero(n);
      e[k - 1] = 1.0;
      EXPECT_NEAR(std::abs(pair_with_kernel(ak, e, omega)), b / std::sqrt(1 - b * b), 1e-12);
    }
  }
}

TEST(KernelPairing, NormalizedSelfPairing) {
  const auto k = kernel_vector({0.3, -0.5}, 50);
  const Vector khat = k.coeffs / k.coeffs.norm();
  EXPECT_NEAR(std::abs(pair_with_kernel(Matrix::Identity(50, 50), khat, {0.3, -0.5}) - 1.0), 0.0, 1e-15);
}

TEST(KernelPairing, RealPartCubeAtReflectedPoint) {
  const int n = 256;
  const double beta = 0.8;
  const auto p = FamilyParams::real_part(beta);
  const Matrix a = build_operator(p, n, BuildMode::ClosedForm).data;
  Vector e0 = Vector::Zero(n);
  e0[0] = 1.0;
  const Complex v = pair_with_kernel(a * a * a, e0, -beta);
  const double b2 = beta * beta;
  const double want =
      std::sqrt(1 - b2) / 8 * std::abs(beta * (2 + b2) / (1 - b2) - 2 * beta - beta * b2);
  EXPECT_NEAR(std::abs(v), want, 1e-12);
  EXPECT_NEAR(want, 0.2816, 5e-5);
}

TEST(KernelPairing, DimensionMismatch) {
  EXPECT_THROW(pair_with_kernel(Matrix::Identity(3, 3), Vector::Zero(4), 0.1), DimensionError);
}
