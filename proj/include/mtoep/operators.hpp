#pragma once

/// The conjugated families A = T_{1+beta z}^{-1} T_f T_{1+beta z} on
/// N-sections, built two independent ways:
///
///  - finite section: multiply the three compressed factors;
///  - closed form: Toeplitz part plus the rank-one kernel correction
///    beta k_{-conj(beta)} e_{n-1}^*, and the matching resolvent
///    T_{1/(lambda - conj z)} + (beta/lambda^2) k_{-conj(beta)} k_{1/lambda}^*.
///
/// The two modes agree away from the last rows of the section, which is what
/// the cross-validation tests pin down.

#include "mtoep/common.hpp"
#include "mtoep/norm.hpp"
#include "mtoep/structured.hpp"
#include "mtoep/symbols.hpp"

#include <optional>
#include <string>

namespace mtoep {

enum class BuildMode { FiniteSection, ClosedForm };

inline std::string_view to_string(BuildMode m) {
  return m == BuildMode::FiniteSection ? "finite-section" : "closed-form";
}

inline BuildMode parse_build_mode(std::string_view s) {
  if (s == "finite-section") return BuildMode::FiniteSection;
  if (s == "closed-form") return BuildMode::ClosedForm;
  throw ParseError("unknown mode '" + std::string(s) + "'");
}

/// Exponent n of A^n; n = 0 is the identity.
class PowerIndex {
 public:
  explicit PowerIndex(int n) : n_(n) {
    if (n < 0) throw DomainError("PowerIndex: n must be >= 0");
  }
  int value() const { return n_; }

 private:
  int n_;
};

/// A resolvent point lambda with |lambda| > 1 on an N-section.
class ResolventQuery {
 public:
  ResolventQuery(Complex lambda, Eigen::Index dim) : lambda_(lambda), dim_(dim) {
    if (!(std::abs(lambda) > 1.0))
      throw DomainError("resolvent point must satisfy |lambda| > 1");
    if (dim < 1) throw DimensionError("ResolventQuery: N must be >= 1");
  }
  Complex lambda() const { return lambda_; }
  Eigen::Index dim() const { return dim_; }

 private:
  Complex lambda_;
  Eigen::Index dim_;
};

namespace detail {

inline std::optional<RankOne> closed_form_correction(const FamilyParams& p, Eigen::Index n) {
  const Complex beta = p.beta();
  const auto k = kernel_vector(-std::conj(beta), n);
  const Complex weight = p.family() == Family::ConjugateShift ? beta : beta / 2.0;
  RankOne r{weight * k.coeffs, Vector::Zero(n)};
  r.v[0] = 1.0;
  return r;
}

inline std::string closed_form_formula(Family f) {
  return f == Family::ConjugateShift
             ? "(T_z^*)_N + beta k_{-conj(beta)} e_0^*"
             : "(T_{(z+conj z)/2})_N + (beta/2) k_{-conj(beta)} e_0^*";
}

}  // namespace detail

/// Matrix-free form of build_operator: G^{-1} F G for finite sections,
/// F + c k e_0^* for the closed form.
inline StructuredOperator structured_operator(const FamilyParams& p, Eigen::Index n,
                                              BuildMode mode) {
  p.validate();
  if (n < 1) throw DimensionError("structured_operator: N must be >= 1");
  if (mode == BuildMode::FiniteSection)
    return StructuredOperator(n, p.symbol(), p.conjugator());
  if (p.family() == Family::Custom)
    throw UnsupportedModeError("closed-form mode is only available for conj-shift and real-part");
  return StructuredOperator(n, p.symbol(), LaurentSymbol::constant(1.0),
                            detail::closed_form_correction(p, n));
}

inline TruncatedOperator build_operator(const FamilyParams& p, Eigen::Index n, BuildMode mode) {
  p.validate();
  if (n < 1) throw DimensionError("build_operator: N must be >= 1");
  Provenance prov;
  prov.family = p;
  prov.power = 1;
  if (mode == BuildMode::FiniteSection) {
    const Matrix ginv = analytic_toeplitz_inverse(p.conjugator(), n).data;
    const Matrix f = toeplitz_matrix(p.symbol(), n).data;
    const Matrix g = toeplitz_matrix(p.conjugator(), n).data;
    prov.construction = Construction::FiniteSection;
    prov.formula = "(T_{1/g})_N (T_f)_N (T_g)_N";
    Matrix a = ginv * (f * g);
    return {std::move(a), std::move(prov)};
  }
  const auto s = structured_operator(p, n, mode);
  prov.construction = Construction::ClosedForm;
  prov.formula = detail::closed_form_formula(p.family());
  return {s.to_dense(), std::move(prov)};
}

/// A^n = ((T_z)_N^*)^n + beta k_{-conj(beta)} e_{n-1}^* for the conj-shift family.
inline TruncatedOperator power_closed_form(const FamilyParams& p, PowerIndex power,
                                           Eigen::Index n) {
  if (p.family() != Family::ConjugateShift)
    throw UnsupportedModeError("power_closed_form is only defined for the conj-shift family");
  p.validate();
  const int k = power.value();
  if (k < 1) throw DomainError("power_closed_form: n must be >= 1");
  if (k >= n) throw DimensionError("power_closed_form: truncation too small (need n < N)");
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index m = 0; m + k < n; ++m) a(m, m + k) = 1.0;
  const auto kern = kernel_vector(-std::conj(p.beta()), n);
  a.col(k - 1) += p.beta() * kern.coeffs;
  Provenance prov;
  prov.construction = Construction::ClosedFormPower;
  prov.family = p;
  prov.power = k;
  prov.formula = "((T_z)_N^*)^n + beta k_{-conj(beta)} e_{n-1}^*";
  return {std::move(a), std::move(prov)};
}

/// [X, Y] = XY - YX.
inline TruncatedOperator commutator(const TruncatedOperator& x, const TruncatedOperator& y) {
  if (x.dim() != y.dim() || x.data.cols() != y.data.cols())
    throw DimensionError("commutator: dimension mismatch");
  Provenance prov;
  prov.construction = Construction::Commutator;
  prov.formula = "XY - YX";
  Matrix c = x.data * y.data - y.data * x.data;
  return {std::move(c), std::move(prov)};
}

/// Matrix-free closed-form resolvent of the conj-shift family:
/// R = (lambda - (T_z^*)_N)^{-1} + (beta/lambda^2) k_{-conj(beta)} k_{1/lambda}^*.
/// The Toeplitz part is upper triangular with entry (m, n) = lambda^{-(n-m+1)},
/// applied by back substitution.
class ClosedFormShiftResolvent {
 public:
  ClosedFormShiftResolvent(Complex beta, const ResolventQuery& q)
      : lambda_(q.lambda()),
        weight_(beta / (q.lambda() * q.lambda())),
        left_(kernel_vector(-std::conj(beta), q.dim()).coeffs),
        right_(kernel_vector(1.0 / q.lambda(), q.dim()).coeffs) {}

  Eigen::Index dim() const { return left_.size(); }

  void apply(const Vector& x, Vector& y) const {
    const Eigen::Index n = x.size();
    y.resize(n);
    y[n - 1] = x[n - 1] / lambda_;
    for (Eigen::Index m = n - 2; m >= 0; --m) y[m] = (x[m] + y[m + 1]) / lambda_;
    y += left_ * (weight_ * right_.dot(x));
  }

  void apply_adjoint(const Vector& x, Vector& y) const {
    const Eigen::Index n = x.size();
    const Complex lc = std::conj(lambda_);
    y.resize(n);
    y[0] = x[0] / lc;
    for (Eigen::Index m = 1; m < n; ++m) y[m] = (x[m] + y[m - 1]) / lc;
    y += right_ * (std::conj(weight_) * left_.dot(x));
  }

  Matrix to_dense() const {
    const Eigen::Index n = dim();
    Matrix r = Matrix::Zero(n, n);
    const Complex inv = 1.0 / lambda_;
    // first row: lambda^{-(j+1)}, constant along diagonals
    Vector row(n);
    Complex p = inv;
    for (Eigen::Index j = 0; j < n; ++j) {
      row[j] = p;
      p *= inv;
    }
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index j = m; j < n; ++j) r(m, j) = row[j - m];
    r.noalias() += weight_ * left_ * right_.adjoint();
    return r;
  }

 private:
  Complex lambda_;
  Complex weight_;
  Vector left_;
  Vector right_;
};

/// Compression to the first N coordinates of the resolvent of the infinite
/// real-part operator A = T_{(z+conj z)/2} + (beta/2) k_{-conj(beta)} e_0^*.
///
/// With w the root of w + 1/w = 2 lambda inside the disk, the semi-infinite
/// tridiagonal part has Green's function
///   c (w^{|j-k|} - w^{j+k+2}),  c = 2w / (1 - w^2),
/// whose first row is 2 w^{k+1}; the rank-one term is folded in by
/// Sherman-Morrison, where 1 - e_0^* R u = 1 / (1 + beta w).
class ClosedFormRealPartResolvent {
 public:
  ClosedFormRealPartResolvent(Complex beta, Complex lambda, Eigen::Index n) : n_(n) {
    if (n < 1) throw DimensionError("resolvent: N must be >= 1");
    const Complex root = std::sqrt(lambda * lambda - 1.0);
    w_ = lambda - root;
    if (std::abs(w_) >= 1.0) w_ = lambda + root;
    if (!(std::abs(w_) < 1.0))
      throw SingularError("lambda lies on [-1, 1]", 0.0);
    c_ = 2.0 * w_ / (1.0 - w_ * w_);
    powers_.resize(n);
    Complex p = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      powers_[j] = p;
      p *= w_;
    }
    // R u over enough coordinates that the kernel tail is below 1e-18
    const double b = std::abs(beta);
    Eigen::Index len = n;
    if (b > 0.0) len = std::max(n, static_cast<Eigen::Index>(std::ceil(std::log(1e-18) / std::log(b))) + 1);
    Vector u(len);
    Complex q = beta / 2.0;
    for (Eigen::Index j = 0; j < len; ++j) {
      u[j] = q;
      q *= -beta;
    }
    Vector ru;
    green_apply(u, ru);
    column_ = ru.head(n) * (1.0 + beta * w_);
  }

  Eigen::Index dim() const { return n_; }

  void apply(const Vector& x, Vector& y) const {
    green_apply(x, y);
    Complex first_row = 0.0;
    for (Eigen::Index k = 0; k < n_; ++k) first_row += powers_[k] * x[k];
    y += column_ * (2.0 * w_ * first_row);
  }

  void apply_adjoint(const Vector& x, Vector& y) const {
    // the Green's function is complex symmetric
    const Vector xc = x.conjugate();
    green_apply(xc, y);
    y = y.conjugate().eval();
    const Complex s = column_.dot(x);
    y += powers_.conjugate() * (std::conj(2.0 * w_) * s);
  }

  Matrix to_dense() const {
    Matrix r(n_, n_);
    Vector e = Vector::Zero(n_), col;
    for (Eigen::Index j = 0; j < n_; ++j) {
      e[j] = 1.0;
      apply(e, col);
      r.col(j) = col;
      e[j] = 0.0;
    }
    return r;
  }

 private:
  // y = c (K x - w^2 p p^T x) with K_{jk} = w^{|j-k|}, p_j = w^j
  void green_apply(const Vector& x, Vector& y) const {
    const Eigen::Index m = x.size();
    Vector fwd(m);
    y.resize(m);
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) fwd[j] = acc = x[j] + w_ * acc;
    acc = 0.0;
    for (Eigen::Index j = m - 1; j >= 0; --j) {
      acc = x[j] + w_ * acc;
      y[j] = fwd[j] + acc - x[j];
    }
    Complex proj = 0.0, p = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      proj += p * x[j];
      p *= w_;
    }
    p = w_ * w_ * proj;
    for (Eigen::Index j = 0; j < m; ++j) {
      y[j] -= p;
      p *= w_;
    }
    y *= c_;
  }

  Eigen::Index n_;
  Complex w_, c_;
  Vector powers_;
  Vector column_;  // (R u)_j (1 + beta w), j < N
};

inline TruncatedOperator resolvent_closed_form(const FamilyParams& p, const ResolventQuery& q) {
  if (p.family() != Family::ConjugateShift)
    throw UnsupportedModeError("resolvent_closed_form is only defined for the conj-shift family");
  p.validate();
  Provenance prov;
  prov.construction = Construction::ClosedFormResolvent;
  prov.family = p;
  prov.lambda = q.lambda();
  prov.formula = "T_{1/(lambda - conj z)} + (beta/lambda^2) k_{-conj(beta)} k_{1/lambda}^*";
  return {ClosedFormShiftResolvent(p.beta(), q).to_dense(), std::move(prov)};
}

/// (lambda I - A)^{-1} for a dense A through partial-pivoting LU. When the
/// reciprocal condition estimate drops below 1e-8 every solve gets one step
/// of iterative refinement.
class DenseResolvent {
 public:
  DenseResolvent(const Matrix& a, Complex lambda)
      : shifted_(lambda * Matrix::Identity(a.rows(), a.cols()) - a), lu_(shifted_) {
    rcond_ = lu_.rcond();
    if (!(rcond_ > 1e-15))
      throw SingularError("lambda I - A is numerically singular (rcond estimate " +
                              std::to_string(rcond_) + ")",
                          rcond_);
    refine_ = rcond_ < 1e-8;
  }

  Eigen::Index dim() const { return shifted_.rows(); }
  double rcond() const { return rcond_; }
  bool refined() const { return refine_; }

  void apply(const Vector& x, Vector& y) const {
    y = lu_.solve(x);
    if (refine_) {
      const Vector r = x - shifted_ * y;
      y += lu_.solve(r);
    }
  }

  void apply_adjoint(const Vector& x, Vector& y) const {
    y = lu_.adjoint().solve(x);
    if (refine_) {
      const Vector r = x - shifted_.adjoint() * y;
      const Vector d = lu_.adjoint().solve(r);
      y += d;
    }
  }

  Matrix inverse() const {
    Matrix x = lu_.inverse();
    if (refine_) {
      const Matrix eye = Matrix::Identity(dim(), dim());
      x += x * (eye - shifted_ * x);
    }
    return x;
  }

 private:
  Matrix shifted_;
  Eigen::PartialPivLU<Matrix> lu_;
  double rcond_ = 1.0;
  bool refine_ = false;
};

inline TruncatedOperator resolvent_finite_section(const TruncatedOperator& a,
                                                  const ResolventQuery& q) {
  if (a.dim() != q.dim() || a.data.cols() != a.dim())
    throw DimensionError("resolvent_finite_section: dimension mismatch");
  DenseResolvent r(a.data, q.lambda());
  Provenance prov;
  prov.construction = Construction::FiniteSectionResolvent;
  prov.family = a.provenance.family;
  prov.lambda = q.lambda();
  prov.formula = "(lambda I - A_N)^{-1} by LU";
  return {r.inverse(), std::move(prov)};
}

/// Residuals of the similarity-resolvent identity
///   (lambda - S^{-1} B S)^{-1} = (lambda - B)^{-1} + S^{-1} [R, S]
/// with R = (lambda - B)^{-1} (the derivation) and with R = (lambda - S)^{-1}
/// (the form as literally stated). The second is absent when lambda is in
/// the spectrum of S.
struct IdentityResiduals {
  double derived = 0.0;
  std::optional<double> as_stated;
};

inline IdentityResiduals similarity_resolvent_identity_check(const Matrix& b, const Matrix& s,
                                                             Complex lambda) {
  if (b.rows() != b.cols() || s.rows() != s.cols() || b.rows() != s.rows())
    throw DimensionError("similarity_resolvent_identity_check: dimension mismatch");
  const Eigen::Index n = b.rows();
  Eigen::PartialPivLU<Matrix> slu(s);
  if (!(slu.rcond() > 1e-14)) throw SingularError("S is singular", slu.rcond());
  const Matrix sinv = slu.inverse();
  const Matrix conjugated = sinv * b * s;
  const Matrix lhs = DenseResolvent(conjugated, lambda).inverse();
  const Matrix rb = DenseResolvent(b, lambda).inverse();
  IdentityResiduals out;
  out.derived = dense_norm(lhs - (rb + sinv * (rb * s - s * rb)));
  Eigen::PartialPivLU<Matrix> slu_shift(lambda * Matrix::Identity(n, n) - s);
  if (slu_shift.rcond() > 1e-14) {
    const Matrix rs = slu_shift.inverse();
    out.as_stated = dense_norm(lhs - (rb + sinv * (rs * s - s * rs)));
  }
  return out;
}

/// <M x, k_omega / ||k_omega||>.
inline Complex pair_with_kernel(const Matrix& m, const Vector& x, Complex omega) {
  if (m.cols() != x.size()) throw DimensionError("pair_with_kernel: dimension mismatch");
  auto k = kernel_vector(omega, m.rows());
  const Vector khat = k.coeffs / k.coeffs.norm();
  return khat.dot(m * x);
}

}  // namespace mtoep
