#pragma once

/// Matrix-free kernels for sections of banded Toeplitz operators and for
/// operators of the form A = G^{-1} F G + u v^*, with F = P_N T_f P_N banded
/// and G = P_N T_g P_N lower triangular. Everything here costs O(N * band).

#include "mtoep/common.hpp"
#include "mtoep/symbols.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace mtoep {

// y = P_N T_f P_N x
inline void toeplitz_apply(const LaurentSymbol& f, const Vector& x, Vector& y) {
  const Eigen::Index n = x.size();
  y.setZero(n);
  for (const auto& [k, c] : f.coeffs()) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k);
    const Eigen::Index hi = std::min<Eigen::Index>(n, n + k);
    for (Eigen::Index m = lo; m < hi; ++m) y[m] += c * x[m - k];
  }
}

// y = (P_N T_f P_N)^* x
inline void toeplitz_apply_adjoint(const LaurentSymbol& f, const Vector& x, Vector& y) {
  const Eigen::Index n = x.size();
  y.setZero(n);
  for (const auto& [k, c] : f.coeffs()) {
    const Complex cc = std::conj(c);
    const Eigen::Index lo = std::max<Eigen::Index>(0, -k);
    const Eigen::Index hi = std::min<Eigen::Index>(n, n - k);
    for (Eigen::Index m = lo; m < hi; ++m) y[m] += cc * x[m + k];
  }
}

// In place x <- G^{-1} x for analytic g (forward substitution).
inline void analytic_solve(const LaurentSymbol& g, Vector& x) {
  const Complex g0 = g.coeff(0);
  const Eigen::Index n = x.size();
  for (Eigen::Index m = 0; m < n; ++m) {
    Complex acc = x[m];
    for (const auto& [j, c] : g.coeffs())
      if (j > 0 && j <= m) acc -= c * x[m - j];
    x[m] = acc / g0;
  }
}

// In place x <- G^{-*} x (backward substitution with the upper factor).
inline void analytic_solve_adjoint(const LaurentSymbol& g, Vector& x) {
  const Complex g0 = std::conj(g.coeff(0));
  const Eigen::Index n = x.size();
  for (Eigen::Index m = n - 1; m >= 0; --m) {
    Complex acc = x[m];
    for (const auto& [j, c] : g.coeffs())
      if (j > 0 && m + j < n) acc -= std::conj(c) * x[m + j];
    x[m] = acc / g0;
  }
}

/// LU with partial pivoting for a banded matrix (kl sub-, ku super-diagonals),
/// stored row-wise with fill room for ku + kl super-diagonals.
class BandedLU {
 public:
  /// Factors lambda I - P_N T_f P_N.
  BandedLU(const LaurentSymbol& f, Complex lambda, Eigen::Index n)
      : n_(n), kl_(f.lower_bandwidth()), ku_(f.upper_bandwidth()) {
    width_ = 2 * kl_ + ku_ + 1;
    band_.assign(static_cast<std::size_t>(n_ * width_), Complex{});
    pivots_.assign(static_cast<std::size_t>(n_), 0);
    for (Eigen::Index i = 0; i < n_; ++i) at(i, i) = lambda;
    for (const auto& [k, c] : f.coeffs())
      for (Eigen::Index i = std::max<Eigen::Index>(0, k); i < n_ && i - k < n_; ++i)
        at(i, i - k) -= c;
    factor();
  }

  Eigen::Index dim() const { return n_; }

  /// min |u_kk| / max |u_kk|: a cheap reciprocal-condition indicator.
  double pivot_ratio() const { return pivot_ratio_; }

  void solve(Vector& b) const {
    for (Eigen::Index k = 0; k < n_; ++k) {
      const Eigen::Index p = pivots_[static_cast<std::size_t>(k)];
      if (p != k) std::swap(b[k], b[p]);
      const Eigen::Index last = std::min(n_ - 1, k + kl_);
      for (Eigen::Index i = k + 1; i <= last; ++i) b[i] -= at(i, k) * b[k];
    }
    const Eigen::Index span = kl_ + ku_;
    for (Eigen::Index k = n_ - 1; k >= 0; --k) {
      Complex acc = b[k];
      const Eigen::Index last = std::min(n_ - 1, k + span);
      for (Eigen::Index c = k + 1; c <= last; ++c) acc -= at(k, c) * b[c];
      b[k] = acc / at(k, k);
    }
  }

  void solve_adjoint(Vector& b) const {
    const Eigen::Index span = kl_ + ku_;
    // U^* z = b, forward
    for (Eigen::Index k = 0; k < n_; ++k) {
      Complex acc = b[k];
      const Eigen::Index first = std::max<Eigen::Index>(0, k - span);
      for (Eigen::Index r = first; r < k; ++r) acc -= std::conj(at(r, k)) * b[r];
      b[k] = acc / std::conj(at(k, k));
    }
    // then L_k^{-*} and P_k in reverse order
    for (Eigen::Index k = n_ - 1; k >= 0; --k) {
      const Eigen::Index last = std::min(n_ - 1, k + kl_);
      Complex acc{};
      for (Eigen::Index i = k + 1; i <= last; ++i) acc += std::conj(at(i, k)) * b[i];
      b[k] -= acc;
      const Eigen::Index p = pivots_[static_cast<std::size_t>(k)];
      if (p != k) std::swap(b[k], b[p]);
    }
  }

 private:
  Complex& at(Eigen::Index i, Eigen::Index c) {
    return band_[static_cast<std::size_t>(i * width_ + (c - i + kl_))];
  }
  const Complex& at(Eigen::Index i, Eigen::Index c) const {
    return band_[static_cast<std::size_t>(i * width_ + (c - i + kl_))];
  }

  void factor() {
    const Eigen::Index span = kl_ + ku_;
    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n_; ++k) {
      const Eigen::Index last_row = std::min(n_ - 1, k + kl_);
      Eigen::Index p = k;
      double best = std::abs(at(k, k));
      for (Eigen::Index i = k + 1; i <= last_row; ++i) {
        const double v = std::abs(at(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      pivots_[static_cast<std::size_t>(k)] = p;
      if (best == 0.0) throw SingularError("BandedLU: exactly singular pivot", 0.0);
      const Eigen::Index last_col = std::min(n_ - 1, k + span);
      if (p != k)
        for (Eigen::Index c = k; c <= last_col; ++c) std::swap(at(k, c), at(p, c));
      const Complex pivot = at(k, k);
      for (Eigen::Index i = k + 1; i <= last_row; ++i) {
        const Complex l = at(i, k) / pivot;
        at(i, k) = l;
        if (l == Complex{}) continue;
        for (Eigen::Index c = k + 1; c <= last_col; ++c) at(i, c) -= l * at(k, c);
      }
      max_pivot = std::max(max_pivot, best);
      min_pivot = std::min(min_pivot, best);
    }
    pivot_ratio_ = max_pivot > 0.0 ? min_pivot / max_pivot : 0.0;
    if (pivot_ratio_ < 1e-15)
      throw SingularError("BandedLU: numerically singular system", pivot_ratio_);
  }

  Eigen::Index n_;
  Eigen::Index kl_;
  Eigen::Index ku_;
  Eigen::Index width_ = 1;
  std::vector<Complex> band_;
  std::vector<Eigen::Index> pivots_;
  double pivot_ratio_ = 1.0;
};

/// Rank-one term u v^*.
struct RankOne {
  Vector u;
  Vector v;
};

/// A = G^{-1} F G + u v^* on C^N, applied without forming the matrix.
class StructuredOperator {
 public:
  StructuredOperator(Eigen::Index n, LaurentSymbol f, LaurentSymbol g,
                     std::optional<RankOne> correction = std::nullopt)
      : n_(n), f_(std::move(f)), g_(std::move(g)), correction_(std::move(correction)) {
    if (n_ < 1) throw DimensionError("StructuredOperator: N must be >= 1");
    if (!g_.is_analytic() || g_.coeff(0) == Complex{})
      throw DomainError("StructuredOperator: g must be analytic with g(0) != 0");
    if (correction_ && (correction_->u.size() != n_ || correction_->v.size() != n_))
      throw DimensionError("StructuredOperator: rank-one vectors must have length N");
    identity_g_ = g_ == LaurentSymbol::constant(1.0);
  }

  Eigen::Index dim() const { return n_; }
  const LaurentSymbol& symbol() const { return f_; }
  const LaurentSymbol& conjugator() const { return g_; }
  const std::optional<RankOne>& correction() const { return correction_; }
  bool identity_conjugator() const { return identity_g_; }

  void apply(const Vector& x, Vector& y) const {
    if (identity_g_) {
      toeplitz_apply(f_, x, y);
    } else {
      Vector t;
      toeplitz_apply(g_, x, t);
      toeplitz_apply(f_, t, y);
      analytic_solve(g_, y);
    }
    if (correction_) y += correction_->u * correction_->v.dot(x);
  }

  void apply_adjoint(const Vector& x, Vector& y) const {
    if (identity_g_) {
      toeplitz_apply_adjoint(f_, x, y);
    } else {
      Vector t = x;
      analytic_solve_adjoint(g_, t);
      Vector s;
      toeplitz_apply_adjoint(f_, t, s);
      toeplitz_apply_adjoint(g_, s, y);
    }
    if (correction_) y += correction_->v * correction_->u.dot(x);
  }

  Matrix to_dense() const {
    Matrix a(n_, n_);
    Vector e = Vector::Zero(n_);
    Vector col;
    for (Eigen::Index j = 0; j < n_; ++j) {
      e[j] = 1.0;
      apply(e, col);
      a.col(j) = col;
      e[j] = 0.0;
    }
    return a;
  }

 private:
  Eigen::Index n_;
  LaurentSymbol f_;
  LaurentSymbol g_;
  std::optional<RankOne> correction_;
  bool identity_g_ = false;
};

/// (lambda I - A)^{-1} for a StructuredOperator:
/// G^{-1} (lambda - F - (G u)(G^{-*} v)^*)^{-1} G, with the rank-one part
/// handled by Sherman-Morrison.
class StructuredResolvent {
 public:
  StructuredResolvent(const StructuredOperator& a, Complex lambda)
      : op_(&a), lu_(a.symbol(), lambda, a.dim()) {
    if (const auto& c = a.correction()) {
      Vector gu;
      if (a.identity_conjugator()) {
        gu = c->u;
      } else {
        toeplitz_apply(a.conjugator(), c->u, gu);
      }
      Vector gv = c->v;
      if (!a.identity_conjugator()) analytic_solve_adjoint(a.conjugator(), gv);
      z_ = gu;
      lu_.solve(z_);
      zt_ = gv;
      lu_.solve_adjoint(zt_);
      u_ = std::move(gu);
      v_ = std::move(gv);
      denom_ = 1.0 - v_.dot(z_);
      if (std::abs(denom_) < 1e-14 * (1.0 + v_.norm() * z_.norm()))
        throw SingularError("StructuredResolvent: rank-one update is singular",
                            std::abs(denom_));
      has_correction_ = true;
    }
  }

  Eigen::Index dim() const { return op_->dim(); }
  double pivot_ratio() const { return lu_.pivot_ratio(); }

  void apply(const Vector& x, Vector& y) const {
    const auto& g = op_->conjugator();
    if (op_->identity_conjugator()) {
      y = x;
    } else {
      toeplitz_apply(g, x, y);
    }
    lu_.solve(y);
    if (has_correction_) y += z_ * (v_.dot(y) / denom_);
    if (!op_->identity_conjugator()) analytic_solve(g, y);
  }

  void apply_adjoint(const Vector& x, Vector& y) const {
    const auto& g = op_->conjugator();
    Vector q = x;
    if (!op_->identity_conjugator()) analytic_solve_adjoint(g, q);
    lu_.solve_adjoint(q);
    if (has_correction_) q += zt_ * (u_.dot(q) / std::conj(denom_));
    if (op_->identity_conjugator()) {
      y = std::move(q);
    } else {
      toeplitz_apply_adjoint(g, q, y);
    }
  }

 private:
  const StructuredOperator* op_;
  BandedLU lu_;
  bool has_correction_ = false;
  Vector u_, v_, z_, zt_;
  Complex denom_{1.0};
};

}  // namespace mtoep
