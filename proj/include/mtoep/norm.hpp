#pragma once

/// Largest singular value of a linear map given only x -> Ax and x -> A^*x.
///
/// Lanczos on A^*A with full reorthogonalisation and explicit restarts from
/// the current Ritz vector. The returned value is ||A y|| for the unit Ritz
/// vector y, so it never exceeds ||A|| beyond rounding: every estimate is a
/// lower estimate, tightened until the Ritz residual drops below tol.

#include "mtoep/common.hpp"

#include <concepts>
#include <cstdint>

namespace mtoep {

template <class M>
concept LinearMap = requires(const M& m, const Vector& x, Vector& y) {
  { m.dim() } -> std::convertible_to<Eigen::Index>;
  m.apply(x, y);
  m.apply_adjoint(x, y);
};

/// View of a dense matrix as a LinearMap.
class DenseMap {
 public:
  explicit DenseMap(const Matrix& a) : a_(&a) {}
  Eigen::Index dim() const { return a_->rows(); }
  void apply(const Vector& x, Vector& y) const { y.noalias() = (*a_) * x; }
  void apply_adjoint(const Vector& x, Vector& y) const { y.noalias() = a_->adjoint() * x; }

 private:
  const Matrix* a_;
};

/// x -> A^n x by repeated application.
template <LinearMap A>
class PowerMap {
 public:
  PowerMap(const A& a, int power) : a_(&a), power_(power) {}
  Eigen::Index dim() const { return a_->dim(); }
  int power() const { return power_; }

  void apply(const Vector& x, Vector& y) const {
    if (power_ == 0) {
      y = x;
      return;
    }
    Vector t = x;
    for (int i = 0; i < power_; ++i) {
      a_->apply(t, y);
      if (i + 1 < power_) t.swap(y);
    }
  }
  void apply_adjoint(const Vector& x, Vector& y) const {
    if (power_ == 0) {
      y = x;
      return;
    }
    Vector t = x;
    for (int i = 0; i < power_; ++i) {
      a_->apply_adjoint(t, y);
      if (i + 1 < power_) t.swap(y);
    }
  }

 private:
  const A* a_;
  int power_;
};

struct NormOptions {
  double tol = 1e-10;      // relative Ritz residual on sigma^2
  int krylov_dim = 40;     // vectors per restart cycle
  int max_restarts = 40;
  std::uint64_t seed = 0x5EEDULL;
  double warm_mix = 1e-3;  // weight of the seeded vector mixed into warm starts
  // also stop once one Lanczos step moves the top Ritz value by at most
  // stall_tol relative (after min_steps); 0 disables. Clustered top singular
  // values converge in value long before the residual test is met.
  double stall_tol = 0.0;
  int min_steps = 6;
};

struct NormEstimate {
  double value = 0.0;
  Vector vector;  // unit right singular vector estimate
  int applications = 0;
  bool converged = false;
  double residual = 0.0;
};

template <LinearMap A>
NormEstimate estimate_norm(const A& a, const NormOptions& opt = {},
                           const Vector* warm = nullptr) {
  const Eigen::Index n = a.dim();
  NormEstimate out;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  Lcg64 rng(opt.seed);
  Vector x = random_vector(n, rng);
  if (warm != nullptr && warm->size() == n && warm->norm() > 0.0) {
    x = *warm / warm->norm() + opt.warm_mix * x / x.norm();
  }
  x.normalize();

  const Eigen::Index kmax = std::max<Eigen::Index>(1, std::min<Eigen::Index>(opt.krylov_dim, n));
  Matrix basis(n, kmax + 1);
  Eigen::VectorXd alpha(kmax), beta(kmax);
  Vector w(n), t(n), coeffs;
  Vector ritz = x;
  double theta = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int cycle = 0; cycle <= opt.max_restarts && !converged; ++cycle) {
    basis.col(0) = ritz;
    Eigen::Index steps = 0;
    Eigen::VectorXd s_top;
    double theta_prev = 0.0;
    for (Eigen::Index j = 0; j < kmax; ++j) {
      a.apply(basis.col(j), t);
      a.apply_adjoint(t, w);
      out.applications += 2;
      alpha[j] = basis.col(j).dot(w).real();
      // two passes of classical Gram-Schmidt against the whole basis
      for (int pass = 0; pass < 2; ++pass) {
        coeffs.noalias() = basis.leftCols(j + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(j + 1) * coeffs;
      }
      beta[j] = w.norm();
      steps = j + 1;

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      if (steps == 1) {
        theta = alpha[0];
        s_top = Eigen::VectorXd::Ones(1);
      } else {
        es.computeFromTridiagonal(alpha.head(steps), beta.head(steps - 1),
                                  Eigen::ComputeEigenvectors);
        theta = es.eigenvalues()[steps - 1];
        s_top = es.eigenvectors().col(steps - 1);
      }
      residual = beta[j] * std::abs(s_top[steps - 1]);
      const double scale = std::max(theta, std::numeric_limits<double>::min());
      const bool stalled = opt.stall_tol > 0.0 && steps >= opt.min_steps &&
                           theta - theta_prev <= opt.stall_tol * scale;
      theta_prev = theta;
      if (residual <= opt.tol * scale || beta[j] <= 1e-14 * std::max(scale, 1e-300) ||
          steps == n || stalled) {
        converged = true;
        break;
      }
      if (j + 1 < kmax + 1) basis.col(j + 1) = w / beta[j];
    }
    ritz.noalias() = basis.leftCols(steps) * s_top.cast<Complex>();
    const double rn = ritz.norm();
    if (rn > 0.0) ritz /= rn;
  }

  a.apply(ritz, t);
  ++out.applications;
  out.value = t.norm();
  out.vector = std::move(ritz);
  out.converged = converged;
  out.residual = residual;
  return out;
}

/// Largest singular value and right singular vector of a dense matrix from
/// the Hermitian eigenproblem of A^* A. (Eigen 3.4's BDCSVD can index out of
/// range while deflating matrices with clustered zero singular values.)
struct DenseTop {
  double value = 0.0;
  Vector vector;
};

inline DenseTop dense_top(const Matrix& a, bool with_vector = true) {
  DenseTop out;
  if (a.size() == 0) return out;
  const Matrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      gram, with_vector ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  const Eigen::Index last = gram.rows() - 1;
  out.value = std::sqrt(std::max(0.0, es.eigenvalues()[last]));
  if (with_vector) out.vector = es.eigenvectors().col(last);
  return out;
}

inline double dense_norm(const Matrix& a) { return dense_top(a, false).value; }

}  // namespace mtoep
