#pragma once

/// Norms, power bounds and resolvent-type suprema.
///
/// The resolvent searches all go through one routine, sup_search(), which
/// scans circles |lambda| = r on a grid, then refines around the best point.
/// Kreiss, Hille-Yosida and the general resolvent condition differ only in
/// the spectrum model and the number of resolvent powers, so Kreiss equals
/// resolvent_condition(UnitDisk) and HY with n_max = 1 equals Kreiss exactly.

#include "mtoep/common.hpp"
#include "mtoep/model.hpp"
#include "mtoep/norm.hpp"
#include "mtoep/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mtoep {

// ---------------------------------------------------------------- spectra

enum class SpectrumKind { UnitDisk, Interval, FinitePoints };

class SpectrumModel {
 public:
  static SpectrumModel unit_disk() { return SpectrumModel(SpectrumKind::UnitDisk, {}); }
  /// The real interval [-1, 1].
  static SpectrumModel interval() { return SpectrumModel(SpectrumKind::Interval, {}); }
  static SpectrumModel finite_points(std::vector<Complex> pts) {
    if (pts.empty()) throw DomainError("finite spectrum model needs at least one point");
    return SpectrumModel(SpectrumKind::FinitePoints, std::move(pts));
  }

  SpectrumKind kind() const { return kind_; }
  const std::vector<Complex>& points() const { return points_; }

  double distance(Complex z) const {
    switch (kind_) {
      case SpectrumKind::UnitDisk:
        return std::max(0.0, std::abs(z) - 1.0);
      case SpectrumKind::Interval: {
        const double re = std::abs(z.real());
        if (re <= 1.0) return std::abs(z.imag());
        return std::hypot(re - 1.0, z.imag());
      }
      case SpectrumKind::FinitePoints: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : points_) best = std::min(best, std::abs(z - p));
        return best;
      }
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind_) {
      case SpectrumKind::UnitDisk: return "unit-disk";
      case SpectrumKind::Interval: return "interval[-1,1]";
      case SpectrumKind::FinitePoints: return "points(" + std::to_string(points_.size()) + ")";
    }
    return "";
  }

 private:
  SpectrumModel(SpectrumKind k, std::vector<Complex> p) : kind_(k), points_(std::move(p)) {}
  SpectrumKind kind_;
  std::vector<Complex> points_;
};

inline double dist_to_spectrum(Complex z, const SpectrumModel& s) { return s.distance(z); }

// ---------------------------------------------------------------- reports

enum class Quantity { M, P, K, HY, Norm };
enum class Verdict { Pass, Fail, Advisory };

inline std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::M: return "M";
    case Quantity::P: return "P";
    case Quantity::K: return "K";
    case Quantity::HY: return "HY";
    case Quantity::Norm: return "norm";
  }
  return "";
}

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Advisory: return "ADVISORY";
  }
  return "";
}

inline std::string fmt_double(double x, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

struct BoundReport {
  Quantity quantity = Quantity::Norm;
  double value = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Pass;
  // whether the estimate is trusted as close to the true value; a lower
  // bracket can only fail a converged estimate
  bool converged = true;
  std::optional<Complex> argmax_lambda;
  std::optional<int> argmax_n;
  int refine_depth = 0;
  std::map<std::string, std::string> diagnostics;
  Vector argmax_vector;  // right singular vector at the argmax, for reuse
};

/// Upper violations always fail; lower violations fail only for converged
/// estimates. Without any violated bracket the verdict is Pass, except that
/// an unconverged report with no brackets at all is Advisory.
inline Verdict judge(double value, std::optional<double> lower, std::optional<double> upper,
                     double tol, bool converged) {
  if (!std::isfinite(value)) return Verdict::Fail;
  if (upper && value > *upper + tol) return Verdict::Fail;
  if (lower && value < *lower - tol) return converged ? Verdict::Fail : Verdict::Advisory;
  if (!lower && !upper && !converged) return Verdict::Advisory;
  return Verdict::Pass;
}

inline void set_bracket(BoundReport& r, std::optional<double> lower, std::optional<double> upper,
                        double tol) {
  r.lower = lower;
  r.upper = upper;
  r.tolerance = tol;
  r.verdict = judge(r.value, lower, upper, tol, r.converged);
}

// ---------------------------------------------------------------- norms

/// Lanczos estimate with a dense fallback for N <= 512 when it stalls.
template <LinearMap A>
NormEstimate norm_with_fallback(const A& a, const NormOptions& opt, const Vector* warm = nullptr) {
  NormEstimate est = estimate_norm(a, opt, warm);
  if (est.converged) return est;
  const Eigen::Index n = a.dim();
  if (n <= 512) {
    Matrix dense(n, n);
    Vector e = Vector::Zero(n), col;
    for (Eigen::Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      a.apply(e, col);
      dense.col(j) = col;
      e[j] = 0.0;
    }
    auto top = dense_top(dense);
    est.value = std::max(est.value, top.value);
    est.vector = std::move(top.vector);
    est.converged = true;
    est.residual = 0.0;
    return est;
  }
  throw ConvergenceError("norm estimate did not converge", est.value);
}

inline double operator_norm(const Matrix& m, double tol = 1e-10) {
  if (!(tol > 0.0)) throw DomainError("operator_norm: tol must be > 0");
  NormOptions opt;
  opt.tol = tol;
  return norm_with_fallback(DenseMap(m), opt).value;
}

inline double operator_norm(const TruncatedOperator& m, double tol = 1e-10) {
  return operator_norm(m.data, tol);
}

struct SpectralRadius {
  double value = 0.0;
  bool advisory = false;  // true when only a power-iteration estimate is available
};

inline SpectralRadius spectral_radius(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return {};
  if (n <= 512) {
    Eigen::ComplexEigenSolver<Matrix> es(a, false);
    if (es.info() == Eigen::Success) return {es.eigenvalues().cwiseAbs().maxCoeff(), false};
  }
  // power iteration on the growth rate; the first half absorbs the transient
  Lcg64 rng(0x5EEDULL);
  Vector x = random_vector(n, rng);
  x.normalize();
  double log_growth = 0.0;
  Vector y;
  const int steps = 2000;
  for (int k = 1; k <= steps; ++k) {
    y.noalias() = a * x;
    const double nrm = y.norm();
    if (nrm == 0.0) return {0.0, false};  // nilpotent on this start vector
    if (k > steps / 2) log_growth += std::log(nrm);
    x = y / nrm;
  }
  return {std::exp(log_growth / (steps - steps / 2)), true};
}

inline SpectralRadius spectral_radius(const TruncatedOperator& a) { return spectral_radius(a.data); }

// ---------------------------------------------------------------- power bound

struct PowerOptions {
  double tol = 1e-10;
  double overflow = 1e12;
  int exact_dense_limit = 64;  // dense SVD of every power at or below this N
};

inline BoundReport power_bound(const OperatorModel& a, int n_max, const PowerOptions& po = {}) {
  if (n_max < 1) throw DomainError("power_bound: n_max must be >= 1");
  BoundReport r;
  r.quantity = Quantity::M;
  std::vector<double> norms{1.0};
  bool all_converged = true;
  bool overflowed = false;
  NormOptions opt;
  opt.tol = po.tol;
  const Eigen::Index n = a.dim();

  auto push = [&](double v) {
    norms.push_back(v);
    if (v > po.overflow) overflowed = true;
  };

  if (!a.is_structured() && n <= po.exact_dense_limit) {
    const Matrix& m = *a.dense_data();
    Matrix p = Matrix::Identity(n, n);
    for (int k = 1; k <= n_max && !overflowed; ++k) {
      p = m * p;
      push(dense_norm(p));
    }
  } else if (!a.is_structured()) {
    // explicit powers kept at unit scale; log_scale carries the magnitude
    const Matrix& m = *a.dense_data();
    Matrix p = Matrix::Identity(n, n);
    double log_scale = 0.0;
    Vector warm;
    for (int k = 1; k <= n_max && !overflowed; ++k) {
      p = m * p;
      const double s = p.norm();
      if (s == 0.0) {
        push(0.0);
        continue;
      }
      p /= s;
      log_scale += std::log(s);
      const auto est = norm_with_fallback(DenseMap(p), opt, warm.size() ? &warm : nullptr);
      all_converged = all_converged && est.converged;
      warm = est.vector;
      push(est.value * std::exp(log_scale));
    }
  } else {
    Vector warm;
    for (int k = 1; k <= n_max && !overflowed; ++k) {
      PowerMap<OperatorModel> pk(a, k);
      const auto est = norm_with_fallback(pk, opt, warm.size() ? &warm : nullptr);
      all_converged = all_converged && est.converged;
      warm = est.vector;
      push(est.value);
    }
  }

  double best = 0.0;
  for (double v : norms) best = std::max(best, v);
  int arg = 0;
  while (norms[static_cast<std::size_t>(arg)] < best * (1.0 - 1e-8)) ++arg;
  r.value = best;
  r.argmax_n = arg;
  const bool interior = arg < n_max;
  r.converged = all_converged && interior && !overflowed;
  r.diagnostics["argmax_n"] = std::to_string(arg);
  r.diagnostics["n_max"] = std::to_string(n_max);
  r.diagnostics["interior_argmax"] = interior ? "true" : "false";
  r.diagnostics["method"] = a.is_structured() ? "structured-lanczos"
                            : n <= po.exact_dense_limit ? "dense-svd"
                                                        : "dense-lanczos";
  if (overflowed) {
    r.diagnostics["power_bounded"] = "false";
    r.diagnostics["stopped_at_n"] = std::to_string(norms.size() - 1);
  }
  r.verdict = judge(r.value, std::nullopt, std::nullopt, 0.0, r.converged);
  return r;
}

inline BoundReport power_bound(const TruncatedOperator& a, int n_max, const PowerOptions& po = {}) {
  return power_bound(OperatorModel::from(a), n_max, po);
}

// ---------------------------------------------------------------- grids

struct GridSpec {
  std::vector<double> radial;  // radii r > 1
  int angular = 256;
  double refine_tol = 1e-4;
  int max_refine = 6;
  std::vector<Complex> extra_points;  // additional |lambda| > 1 candidates
  int threads = 1;
  // scan points get a short warm-started Krylov pass (a lower estimate);
  // the argmax is re-evaluated with final_norm and a dense fallback
  NormOptions scan_norm{.tol = 1e-8, .krylov_dim = 8, .max_restarts = 0, .stall_tol = 1e-10,
                        .min_steps = 4};
  NormOptions final_norm{.stall_tol = 1e-14};
  Eigen::Index dense_fallback_limit = 512;
  int exact_dense_limit = 64;

  /// r - 1 logarithmic on [1e-4, 1e2] plus the golden ratio radius.
  static GridSpec standard(int radial_points = 60, int angular_points = 256) {
    GridSpec g;
    g.angular = angular_points;
    const double lo = std::log(1e-4), hi = std::log(1e2);
    for (int i = 0; i < radial_points; ++i) {
      const double t = radial_points == 1 ? 0.0 : static_cast<double>(i) / (radial_points - 1);
      g.radial.push_back(1.0 + std::exp(lo + t * (hi - lo)));
    }
    g.radial.push_back(kGoldenRatio);
    std::sort(g.radial.begin(), g.radial.end());
    return g;
  }

  void validate() const {
    if (radial.empty()) throw DomainError("grid: no radii");
    for (double r : radial)
      if (!(r > 1.0) || !std::isfinite(r)) throw DomainError("grid: every radius must be > 1");
    if (angular < 1) throw DomainError("grid: angular count must be >= 1");
    if (!(refine_tol > 0.0)) throw DomainError("grid: refine_tol must be > 0");
    if (max_refine < 0) throw DomainError("grid: max_refine must be >= 0");
    for (const auto& z : extra_points)
      if (!(std::abs(z) > 1.0)) throw DomainError("grid: extra points must satisfy |lambda| > 1");
  }
};

namespace detail {

struct PointValue {
  double value = 0.0;
  bool ok = false;
  bool converged = true;
};

/// lambda -> max_{1<=k<=n_max} dist(lambda)^k ||R(lambda)^k||.
class ResolventObjective {
 public:
  ResolventObjective(const OperatorModel& a, const SpectrumModel& s, ResolventMode mode,
                     int n_max, int exact_dense_limit)
      : a_(&a),
        s_(&s),
        mode_(mode),
        n_max_(n_max),
        exact_(!a.is_structured() && mode != ResolventMode::ClosedForm &&
               a.dim() <= exact_dense_limit) {}

  int n_max() const { return n_max_; }
  bool exact() const { return exact_; }

  PointValue eval(Complex lambda, std::vector<Vector>& warm, const NormOptions& opt,
                  bool fallback = false) const {
    PointValue out;
    const double d = s_->distance(lambda);
    if (!(d > 0.0)) return out;
    try {
      if (exact_) {
        const Matrix rinv = DenseResolvent(*a_->dense_data(), lambda).inverse();
        Matrix p = rinv;
        for (int k = 1; k <= n_max_; ++k) {
          if (k > 1) p = p * rinv;
          out.value = std::max(out.value, std::pow(d, k) * dense_norm(p));
        }
      } else {
        const auto r = a_->resolvent(lambda, mode_);
        warm.resize(static_cast<std::size_t>(n_max_));
        for (int k = 1; k <= n_max_; ++k) {
          auto& w = warm[static_cast<std::size_t>(k - 1)];
          PowerMap<AnyMap> rk(*r, k);
          const auto est = fallback ? norm_with_fallback(rk, opt, w.size() ? &w : nullptr)
                                    : estimate_norm(rk, opt, w.size() ? &w : nullptr);
          w = est.vector;
          out.converged = out.converged && est.converged;
          out.value = std::max(out.value, std::pow(d, k) * est.value);
        }
      }
    } catch (const SingularError& e) {
      log(LogLevel::Debug, std::string("skipping grid point: ") + e.what());
      return out;
    } catch (const ConvergenceError&) {
      out.converged = false;
    }
    out.ok = std::isfinite(out.value);
    return out;
  }

 private:
  const OperatorModel* a_;
  const SpectrumModel* s_;
  ResolventMode mode_;
  int n_max_;
  bool exact_;
};

struct Candidate {
  double value = -1.0;
  double s = 0.0;      // log(r - 1)
  double theta = 0.0;
  double step_s = 0.1;  // local radial spacing in s
  std::vector<Vector> warm;
  bool found = false;
};

inline ResolventMode resolve_mode(const OperatorModel& a, ResolventMode mode) {
  if (mode == ResolventMode::ClosedForm && !a.closed_form_resolvent_available())
    throw UnsupportedModeError("closed-form resolvent needs a conj-shift or real-part operator");
  if (mode == ResolventMode::Auto)
    return a.closed_form_resolvent_available() ? ResolventMode::ClosedForm
                                               : ResolventMode::FiniteSection;
  return mode;
}

inline Complex polar_point(double s, double theta) {
  return std::polar(1.0 + std::exp(s), theta);
}

}  // namespace detail

/// Refined grid supremum of max_k dist(lambda)^k ||(lambda - A)^{-k}||.
inline BoundReport sup_search(const OperatorModel& a, const SpectrumModel& spec,
                              const GridSpec& grid, ResolventMode mode, int n_max,
                              Quantity quantity) {
  grid.validate();
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  mode = detail::resolve_mode(a, mode);
  const detail::ResolventObjective obj(a, spec, mode, n_max, grid.exact_dense_limit);

  const std::size_t nr = grid.radial.size();
  std::vector<double> s_of(nr);
  for (std::size_t i = 0; i < nr; ++i) s_of[i] = std::log(grid.radial[i] - 1.0);
  auto radial_step = [&](std::size_t i) {
    if (nr == 1) return 0.1;
    if (i == 0) return s_of[1] - s_of[0];
    if (i + 1 == nr) return s_of[nr - 1] - s_of[nr - 2];
    return 0.5 * (s_of[i + 1] - s_of[i - 1]);
  };
  const double dtheta = 2.0 * std::numbers::pi / grid.angular;

  // scan: one work unit per circle, warm-started along theta
  struct CircleResult {
    detail::Candidate best;
    int evaluated = 0;
    int skipped = 0;
    bool all_converged = true;
  };
  std::vector<CircleResult> circles(nr);
  parallel_for(nr, grid.threads, [&](std::size_t i) {
    auto& out = circles[i];
    std::vector<Vector> warm;
    for (int j = 0; j < grid.angular; ++j) {
      const double theta = j * dtheta;
      const auto pv = obj.eval(detail::polar_point(s_of[i], theta), warm, grid.scan_norm);
      ++out.evaluated;
      if (!pv.ok) {
        ++out.skipped;
        warm.clear();
        continue;
      }
      out.all_converged = out.all_converged && pv.converged;
      if (pv.value > out.best.value) {
        out.best = {pv.value, s_of[i], theta, radial_step(i), warm, true};
      }
    }
  });

  int evaluated = 0, skipped = 0;
  detail::Candidate best;
  for (const auto& c : circles) {
    evaluated += c.evaluated;
    skipped += c.skipped;
    if (c.best.found && c.best.value > best.value) best = c.best;
  }
  double median_step = radial_step(nr / 2);
  for (const auto& z : grid.extra_points) {
    std::vector<Vector> warm;
    const auto pv = obj.eval(z, warm, grid.scan_norm);
    ++evaluated;
    if (!pv.ok) {
      ++skipped;
      continue;
    }
    if (pv.value > best.value)
      best = {pv.value, std::log(std::abs(z) - 1.0), std::arg(z), median_step, warm, true};
  }

  if (skipped * 10 > evaluated)
    throw ConvergenceError("more than 10% of grid points were singular (" +
                               std::to_string(skipped) + "/" + std::to_string(evaluated) + ")",
                           std::max(best.value, 1.0));

  BoundReport r;
  r.quantity = quantity;
  r.diagnostics["spectrum"] = spec.name();
  r.diagnostics["grid_points"] = std::to_string(evaluated);
  r.diagnostics["skipped_points"] = std::to_string(skipped);
  r.diagnostics["annulus"] = "r-1 in [" + fmt_double(grid.radial.front() - 1.0, 6) + "," +
                             fmt_double(grid.radial.back() - 1.0, 6) + "]";
  r.diagnostics["resolvent"] = obj.exact() ? "dense-exact"
                               : mode == ResolventMode::ClosedForm ? "closed-form"
                               : a.is_structured() ? "structured-solve"
                                                   : "dense-lu";

  // the objective tends to 1 as |lambda| -> infinity for every model
  if (!best.found || best.value <= 1.0) {
    r.value = 1.0;
    r.converged = true;
    r.diagnostics["argmax"] = "infinity";
    r.verdict = judge(r.value, std::nullopt, std::nullopt, 0.0, true);
    return r;
  }

  // refinement: bisect the 8-neighbourhood in (log(r-1), theta)
  const double s_lo = s_of.front(), s_hi = s_of.back();
  bool refined_converged = grid.max_refine == 0;
  int depth = 0;
  for (int level = 1; level <= grid.max_refine; ++level) {
    const double hs = best.step_s / std::ldexp(1.0, level);
    const double ht = dtheta / std::ldexp(1.0, level);
    const double before = best.value;
    detail::Candidate next = best;
    for (int ds = -1; ds <= 1; ++ds) {
      for (int dt = -1; dt <= 1; ++dt) {
        if (ds == 0 && dt == 0) continue;
        const double s = std::clamp(best.s + ds * hs, s_lo, s_hi);
        const double th = best.theta + dt * ht;
        std::vector<Vector> warm = best.warm;
        const auto pv = obj.eval(detail::polar_point(s, th), warm, grid.scan_norm);
        if (pv.ok && pv.value > next.value) next = {pv.value, s, th, best.step_s, warm, true};
      }
    }
    best = next;
    depth = level;
    if (best.value - before <= grid.refine_tol * best.value && level >= 2) {
      refined_converged = true;
      break;
    }
  }

  // final evaluation at the argmax with the strict norm tolerance
  const Complex lam = detail::polar_point(best.s, best.theta);
  std::vector<Vector> warm = best.warm;
  const auto fin =
      obj.eval(lam, warm, grid.final_norm, a.dim() <= grid.dense_fallback_limit);
  r.value = best.value;
  if (fin.ok && fin.value > r.value) r.value = fin.value;
  if (!warm.empty()) r.argmax_vector = warm.front();
  r.argmax_lambda = lam;
  r.refine_depth = depth;
  r.converged = refined_converged && fin.ok && fin.converged;
  r.diagnostics["refine_converged"] = refined_converged ? "true" : "false";
  r.diagnostics["argmax_on_annulus_edge"] =
      (best.s <= s_lo + 1e-12 || best.s >= s_hi - 1e-12) ? "true" : "false";
  r.verdict = judge(r.value, std::nullopt, std::nullopt, 0.0, r.converged);
  return r;
}

/// Objective max_k dist^k ||R^k|| at a single point, evaluated with the strict
/// norm options of `grid`. Returns nullopt where the resolvent is singular.
inline std::optional<double> resolvent_objective(const OperatorModel& a, const SpectrumModel& s,
                                                 Complex lambda, const GridSpec& grid,
                                                 ResolventMode mode = ResolventMode::Auto,
                                                 int n_max = 1) {
  const detail::ResolventObjective obj(a, s, detail::resolve_mode(a, mode), n_max,
                                       grid.exact_dense_limit);
  std::vector<Vector> warm;
  const auto pv = obj.eval(lambda, warm, grid.final_norm, a.dim() <= grid.dense_fallback_limit);
  if (!pv.ok) return std::nullopt;
  return pv.value;
}

inline BoundReport resolvent_condition(const OperatorModel& a, const SpectrumModel& s,
                                       const GridSpec& grid,
                                       ResolventMode mode = ResolventMode::Auto) {
  return sup_search(a, s, grid, mode, 1, Quantity::P);
}

inline BoundReport resolvent_condition(const TruncatedOperator& a, const SpectrumModel& s,
                                       const GridSpec& grid,
                                       ResolventMode mode = ResolventMode::Auto) {
  return resolvent_condition(OperatorModel::from(a), s, grid, mode);
}

namespace detail {
inline void warn_spectral_radius(const OperatorModel& a) {
  if (a.is_structured() || a.dim() > 512) return;
  const auto rho = spectral_radius(*a.dense_data());
  if (rho.value > 1.0 + 1e-8)
    log(LogLevel::Error, "spectral radius " + fmt_double(rho.value, 6) +
                             " exceeds 1; resolvent constants are not meaningful");
}
}  // namespace detail

inline BoundReport kreiss_constant(const OperatorModel& a, const GridSpec& grid,
                                   ResolventMode mode = ResolventMode::Auto) {
  detail::warn_spectral_radius(a);
  auto r = sup_search(a, SpectrumModel::unit_disk(), grid, mode, 1, Quantity::P);
  r.quantity = Quantity::K;
  return r;
}

inline BoundReport kreiss_constant(const TruncatedOperator& a, const GridSpec& grid) {
  return kreiss_constant(OperatorModel::from(a), grid);
}

inline BoundReport hille_yosida_constant(const OperatorModel& a, int n_max, const GridSpec& grid,
                                         ResolventMode mode = ResolventMode::Auto) {
  if (n_max < 1) throw DomainError("hille_yosida_constant: n_max must be >= 1");
  detail::warn_spectral_radius(a);
  auto r = sup_search(a, SpectrumModel::unit_disk(), grid, mode, n_max, Quantity::P);
  r.quantity = Quantity::HY;
  r.diagnostics["n_max"] = std::to_string(n_max);
  return r;
}

inline BoundReport hille_yosida_constant(const TruncatedOperator& a, int n_max,
                                         const GridSpec& grid) {
  return hille_yosida_constant(OperatorModel::from(a), n_max, grid);
}

}  // namespace mtoep
