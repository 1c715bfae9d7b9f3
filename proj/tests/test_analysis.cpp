#include "mtoep/analysis.hpp"
#include "mtoep/theorems.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mtoep;

namespace {

OperatorModel dense_model(const Matrix& m) { return OperatorModel::dense(m); }

Matrix diag(std::initializer_list<Complex> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (auto x : d) v[i++] = x;
  return v.asDiagonal().toDenseMatrix();
}

// largest singular value of [[a, b], [0, a]] for real a, b >= 0
double upper_triangular_norm(double a, double b) { return 0.5 * (b + std::sqrt(b * b + 4 * a * a)); }

GridSpec small_grid() { return GridSpec::standard(30, 96); }

}  // namespace

// ---------------------------------------------------------------- distance

TEST(Distance, Examples) {
  const auto disk = SpectrumModel::unit_disk();
  const auto interval = SpectrumModel::interval();
  const auto ends = SpectrumModel::finite_points({-1.0, 1.0});
  EXPECT_DOUBLE_EQ(dist_to_spectrum(2.0, interval), 1.0);
  EXPECT_DOUBLE_EQ(dist_to_spectrum(2.0, disk), 1.0);
  EXPECT_DOUBLE_EQ(dist_to_spectrum({0, 2}, ends), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(dist_to_spectrum({0, 2}, interval), 2.0);
  EXPECT_DOUBLE_EQ(dist_to_spectrum({0.5, 0.9}, interval), 0.9);
  EXPECT_NEAR(dist_to_spectrum({0.5, 0.9}, ends), std::sqrt(0.25 + 0.81), 1e-15);
  EXPECT_DOUBLE_EQ(dist_to_spectrum({-1.5, 0.0}, interval), 0.5);
  EXPECT_DOUBLE_EQ(dist_to_spectrum({-4.0, 4.0}, interval), 5.0);
}

TEST(Distance, IntervalAgainstEndpointsOnAnnulusGrid) {
  const auto interval = SpectrumModel::interval();
  const auto ends = SpectrumModel::finite_points({-1.0, 1.0});
  const auto grid = GridSpec::standard(60, 256);
  for (double r : grid.radial)
    for (int j = 0; j < 256; ++j) {
      const Complex z = std::polar(r, 2 * M_PI * j / 256);
      const double di = interval.distance(z), de = ends.distance(z);
      EXPECT_LE(di, de + 1e-15);
      EXPECT_LE(de, std::sqrt(2.0) * di + 1e-15) << z;
    }
}

TEST(Distance, EmptyPointSetRejected) { EXPECT_THROW(SpectrumModel::finite_points({}), DomainError); }

// ---------------------------------------------------------------- verdicts

TEST(Verdict, Semantics) {
  EXPECT_EQ(judge(1.5, 1.0, 2.0, 0.0, true), Verdict::Pass);
  EXPECT_EQ(judge(2.05, 1.0, 2.0, 0.1, true), Verdict::Pass);
  EXPECT_EQ(judge(2.2, 1.0, 2.0, 0.1, false), Verdict::Fail);
  EXPECT_EQ(judge(0.8, 1.0, 2.0, 0.1, true), Verdict::Fail);
  EXPECT_EQ(judge(0.8, 1.0, 2.0, 0.1, false), Verdict::Advisory);
  EXPECT_EQ(judge(5.0, std::nullopt, std::nullopt, 0.0, false), Verdict::Advisory);
  EXPECT_EQ(judge(std::nan(""), std::nullopt, std::nullopt, 0.0, true), Verdict::Fail);
}

// ---------------------------------------------------------------- norms

TEST(Norm, Identity) { EXPECT_NEAR(operator_norm(Matrix::Identity(50, 50)), 1.0, 1e-12); }

TEST(Norm, RankOne) {
  Lcg64 rng(1);
  const Vector u = random_vector(40, rng), v = random_vector(40, rng);
  const Matrix m = u * v.adjoint();
  EXPECT_NEAR(operator_norm(m), u.norm() * v.norm(), 1e-10 * u.norm() * v.norm());
}

TEST(Norm, TridiagonalRealPart) {
  const auto t = toeplitz_matrix(LaurentSymbol::real_part(), 256);
  EXPECT_NEAR(operator_norm(t), std::cos(M_PI / 257), 1e-9);
  EXPECT_LT(operator_norm(t), 1.0);
}

TEST(Norm, RejectsBadTolerance) { EXPECT_THROW(operator_norm(Matrix::Identity(2, 2), 0.0), DomainError); }

TEST(SpectralRadius, Examples) {
  Matrix shift = Matrix::Zero(6, 6);
  for (int i = 0; i + 1 < 6; ++i) shift(i, i + 1) = 1.0;
  EXPECT_NEAR(spectral_radius(shift).value, 0.0, 1e-12);
  EXPECT_NEAR(spectral_radius(diag({0.3, -0.8})).value, 0.8, 1e-14);
  EXPECT_NEAR(spectral_radius(toeplitz_matrix(LaurentSymbol::real_part(), 256)).value,
              std::cos(M_PI / 257), 1e-12);
}

TEST(SpectralRadius, PowerIterationPathForLargeMatrices) {
  Vector d = Vector::Constant(600, 0.5);
  d[17] = -0.9;
  const auto rho = spectral_radius(Matrix(d.asDiagonal()));
  EXPECT_TRUE(rho.advisory);
  EXPECT_NEAR(rho.value, 0.9, 1e-3);
}

// ---------------------------------------------------------------- power bound

TEST(PowerBound, HalfIdentity) {
  const auto r = power_bound(dense_model(0.5 * Matrix::Identity(4, 4)), 10);
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_EQ(r.argmax_n, 0);
  EXPECT_EQ(r.diagnostics.at("interior_argmax"), "true");
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(PowerBound, ConjShiftBrackets) {
  const double s9 = 0.9 / std::sqrt(1 - 0.81);
  auto m9 = power_bound(OperatorModel::family(FamilyParams::conjugate_shift(0.9), 512,
                                              BuildMode::FiniteSection),
                        64);
  EXPECT_GE(m9.value, s9 - 1e-3);
  EXPECT_LE(m9.value, 1 + s9 + 1e-3);
  auto m5 = power_bound(OperatorModel::family(FamilyParams::conjugate_shift(0.5), 256,
                                              BuildMode::FiniteSection),
                        64);
  EXPECT_GE(m5.value, 1.0);
  EXPECT_LE(m5.value, 1 + 0.5 / std::sqrt(0.75));
}

TEST(PowerBound, PathsAgree) {
  // dense SVD, dense Lanczos and matrix-free paths on the same operator
  const auto p = FamilyParams::conjugate_shift({0.3, 0.6});
  const auto t = build_operator(p, 60, BuildMode::FiniteSection);
  const auto exact = power_bound(OperatorModel::dense(t.data), 20);
  PowerOptions lanczos;
  lanczos.exact_dense_limit = 0;
  const auto iter = power_bound(OperatorModel::dense(t.data), 20, lanczos);
  const auto free = power_bound(OperatorModel::family(p, 60, BuildMode::FiniteSection), 20);
  EXPECT_EQ(exact.diagnostics.at("method"), "dense-svd");
  EXPECT_EQ(iter.diagnostics.at("method"), "dense-lanczos");
  EXPECT_EQ(free.diagnostics.at("method"), "structured-lanczos");
  EXPECT_NEAR(iter.value, exact.value, 1e-9 * exact.value);
  EXPECT_NEAR(free.value, exact.value, 1e-9 * exact.value);
  EXPECT_EQ(iter.argmax_n, exact.argmax_n);
}

TEST(PowerBound, ExplicitPowersOracle) {
  Lcg64 rng(77);
  Matrix b = random_matrix(10, 10, rng);
  b /= 0.9 * dense_norm(b);
  double want = 1.0;
  Matrix p = Matrix::Identity(10, 10);
  for (int k = 1; k <= 30; ++k) {
    p = b * p;
    Eigen::JacobiSVD<Matrix> svd(p);
    want = std::max(want, svd.singularValues()[0]);
  }
  EXPECT_NEAR(power_bound(dense_model(b), 30).value, want, 1e-12 * want);
}

TEST(PowerBound, BoundaryArgmaxIsAdvisory) {
  Matrix jordan(2, 2);
  jordan << 1, 1, 0, 1;
  const auto r = power_bound(dense_model(jordan), 5);
  EXPECT_EQ(r.argmax_n, 5);
  EXPECT_EQ(r.diagnostics.at("interior_argmax"), "false");
  EXPECT_EQ(r.verdict, Verdict::Advisory);
}

TEST(PowerBound, OverflowStops) {
  const auto r = power_bound(dense_model(3.0 * Matrix::Identity(3, 3)), 100);
  EXPECT_EQ(r.diagnostics.at("power_bounded"), "false");
  EXPECT_GT(r.value, 1e12);
  EXPECT_LT(std::stoi(r.diagnostics.at("stopped_at_n")), 100);
  EXPECT_FALSE(r.converged);
}

TEST(PowerBound, MonotoneInNMax) {
  const auto model = OperatorModel::family(FamilyParams::real_part({0.0, 0.7}), 128,
                                           BuildMode::FiniteSection);
  double prev = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    const double v = power_bound(model, n).value;
    EXPECT_GE(v, prev - 1e-12);
    EXPECT_GE(v, 1.0);
    prev = v;
  }
}

TEST(PowerBound, RejectsZeroPowers) { EXPECT_THROW(power_bound(dense_model(Matrix::Identity(2, 2)), 0), DomainError); }

// ---------------------------------------------------------------- resolvent sup

TEST(ResolventCondition, DiagonalWithItsSpectrum) {
  const Matrix d = diag({0.5, {0.0, -0.3}, -0.9});
  const auto r = resolvent_condition(dense_model(d), SpectrumModel::finite_points({0.5, {0.0, -0.3}, -0.9}),
                                     small_grid());
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(ResolventCondition, ConjShiftBracket) {
  const auto model = OperatorModel::family(FamilyParams::conjugate_shift(0.9), 512, BuildMode::FiniteSection);
  const auto r = resolvent_condition(model, SpectrumModel::unit_disk(), GridSpec::standard());
  const double upper = 1 + kResolventConstant * 0.9 / std::sqrt(0.19);
  EXPECT_NEAR(upper, 1.6200, 1e-4);
  EXPECT_GE(r.value, 1.0 - 1e-3);
  EXPECT_LE(r.value, upper + 1e-2);
  EXPECT_EQ(r.diagnostics.at("resolvent"), "closed-form");
}

TEST(ResolventCondition, IntervalBelowEndpoints) {
  const auto model = OperatorModel::family(FamilyParams::real_part(0.5), 80, BuildMode::FiniteSection);
  const auto grid = small_grid();
  const auto pi = resolvent_condition(model, SpectrumModel::interval(), grid);
  const auto pe = resolvent_condition(model, SpectrumModel::finite_points({-1.0, 1.0}), grid);
  EXPECT_LE(pi.value, pe.value + 1e-6);
  EXPECT_GE(pi.value, 1.0 - 1e-6);
}

TEST(ResolventCondition, PointObjectiveMatchesDirectEvaluation) {
  Lcg64 rng(4);
  Matrix a = random_matrix(12, 12, rng);
  a /= 1.1 * dense_norm(a);
  const Complex lambda{0.4, 1.3};
  const auto v = resolvent_objective(dense_model(a), SpectrumModel::unit_disk(), lambda, small_grid());
  ASSERT_TRUE(v.has_value());
  const Matrix r = (lambda * Matrix::Identity(12, 12) - a).inverse();
  Eigen::JacobiSVD<Matrix> svd(r);
  EXPECT_NEAR(*v, (std::abs(lambda) - 1) * svd.singularValues()[0], 1e-12);
}

TEST(ResolventCondition, RefinementIsMonotone) {
  Lcg64 rng(8);
  Matrix a = random_matrix(8, 8, rng);
  a /= dense_norm(a);
  a(0, 7) += 2.0;
  const auto model = dense_model(a);
  double prev = 0.0;
  for (int depth = 0; depth <= 6; ++depth) {
    auto grid = GridSpec::standard(20, 64);
    grid.max_refine = depth;
    grid.refine_tol = 1e-12;
    const double v = resolvent_condition(model, SpectrumModel::unit_disk(), grid).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(ResolventCondition, ThreadCountInvariant) {
  const auto model = OperatorModel::family(FamilyParams::conjugate_shift({0.0, 0.9}), 200,
                                           BuildMode::FiniteSection);
  auto g1 = small_grid();
  auto g4 = g1;
  g4.threads = 4;
  const auto a = resolvent_condition(model, SpectrumModel::unit_disk(), g1);
  const auto b = resolvent_condition(model, SpectrumModel::unit_disk(), g4);
  EXPECT_EQ(a.value, b.value);
  ASSERT_TRUE(a.argmax_lambda.has_value());
  EXPECT_EQ(a.argmax_lambda, b.argmax_lambda);
  EXPECT_EQ(a.refine_depth, b.refine_depth);
}

TEST(ResolventCondition, AtLeastOneForEveryModel) {
  Lcg64 rng(21);
  for (int t = 0; t < 5; ++t) {
    Matrix a = random_matrix(6, 6, rng);
    a /= dense_norm(a);
    for (const auto& s : {SpectrumModel::unit_disk(), SpectrumModel::interval()})
      EXPECT_GE(resolvent_condition(dense_model(a), s, small_grid()).value, 1.0 - 1e-12);
  }
}

TEST(ResolventCondition, ClosedFormNeedsFamily) {
  EXPECT_THROW(resolvent_condition(dense_model(Matrix::Identity(3, 3)), SpectrumModel::unit_disk(),
                                   small_grid(), ResolventMode::ClosedForm),
               UnsupportedModeError);
}

TEST(Grid, StandardContainsGoldenRadius) {
  const auto g = GridSpec::standard();
  EXPECT_EQ(g.radial.size(), 61u);
  EXPECT_NE(std::find(g.radial.begin(), g.radial.end(), kGoldenRatio), g.radial.end());
  EXPECT_NEAR(g.radial.front() - 1, 1e-4, 1e-15);
  EXPECT_NEAR(g.radial.back() - 1, 1e2, 1e-10);
  GridSpec bad = g;
  bad.radial.push_back(0.9);
  EXPECT_THROW(bad.validate(), DomainError);
}

// ---------------------------------------------------------------- Kreiss and HY

TEST(Kreiss, ZeroAndIdentity) {
  EXPECT_NEAR(kreiss_constant(dense_model(Matrix::Zero(2, 2)), small_grid()).value, 1.0, 1e-12);
  EXPECT_NEAR(kreiss_constant(dense_model(Matrix::Identity(3, 3)), small_grid()).value, 1.0, 1e-9);
}

TEST(Kreiss, JordanBlockAgainstRadialScan) {
  Matrix j = Matrix::Zero(2, 2);
  j(0, 1) = 1.0;
  // (lambda - J)^{-1} = [[1/l, 1/l^2], [0, 1/l]]; its norm depends on |lambda| only
  double oracle = 0.0;
  for (int i = 0; i <= 400000; ++i) {
    const double r = 1.0 + std::exp(std::log(1e-4) + i * (std::log(1e3) - std::log(1e-4)) / 400000);
    oracle = std::max(oracle, (r - 1) * upper_triangular_norm(1 / r, 1 / (r * r)));
  }
  const auto k = kreiss_constant(dense_model(j), GridSpec::standard());
  EXPECT_NEAR(k.value, oracle, 1e-3);
  EXPECT_EQ(k.quantity, Quantity::K);
}

TEST(Kreiss, EqualsUnitDiskResolventCondition) {
  const auto model = OperatorModel::family(FamilyParams::conjugate_shift(-0.9), 150, BuildMode::FiniteSection);
  const auto g = small_grid();
  const auto k = kreiss_constant(model, g);
  const auto p = resolvent_condition(model, SpectrumModel::unit_disk(), g);
  EXPECT_EQ(k.value, p.value);
  ASSERT_TRUE(k.argmax_lambda.has_value());
  EXPECT_EQ(k.argmax_lambda, p.argmax_lambda);
}

TEST(HilleYosida, Identity) {
  const auto r = hille_yosida_constant(dense_model(Matrix::Identity(2, 2)), 5, small_grid());
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(HilleYosida, DiagonalContractionAgainstBruteForce) {
  const Matrix d = diag({0.5, -0.5});
  const auto grid = small_grid();
  const auto r = hille_yosida_constant(dense_model(d), 4, grid);
  // diagonal resolvent powers: ||R^k|| = max_j |lambda - d_j|^{-k}
  double oracle = 0.0;
  for (double rad : grid.radial)
    for (int j = 0; j < grid.angular; ++j) {
      const Complex l = std::polar(rad, 2 * M_PI * j / grid.angular);
      const double dmin = std::min(std::abs(l - 0.5), std::abs(l + 0.5));
      for (int k = 1; k <= 4; ++k) oracle = std::max(oracle, std::pow((rad - 1) / dmin, k));
    }
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  EXPECT_GE(r.value, oracle - 1e-12);
  EXPECT_NEAR(kreiss_constant(dense_model(d), grid).value, 1.0, 1e-3);
}

TEST(HilleYosida, FirstPowerIsKreissBitForBit) {
  for (const auto& model :
       {OperatorModel::family(FamilyParams::real_part({0.1, 0.6}), 90, BuildMode::FiniteSection),
        dense_model(diag({0.2, {0.0, 0.9}}))}) {
    const auto g = small_grid();
    EXPECT_EQ(hille_yosida_constant(model, 1, g).value, kreiss_constant(model, g).value);
  }
}

TEST(HilleYosida, RejectsZeroPowers) {
  EXPECT_THROW(hille_yosida_constant(dense_model(Matrix::Identity(2, 2)), 0, small_grid()), DomainError);
}
