#pragma once

/// Executable checks of the power-bound and resolvent inequalities for the
/// conj-shift and real-part families, plus the growth sweeps.
///
/// Every check is a BoundReport with a label. Computed sups are lower
/// estimates, so exceeding an upper bracket is always a failure while
/// falling short of a lower bracket only fails a converged estimate.

#include "mtoep/analysis.hpp"
#include "mtoep/common.hpp"
#include "mtoep/model.hpp"
#include "mtoep/operators.hpp"
#include "mtoep/symbols.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mtoep {

inline const double kResolventConstant =
    std::sqrt(2.0) * (std::sqrt(5.0) - 1.0) / std::pow(1.0 + std::sqrt(5.0), 1.5);

enum class TheoremId { Thm3_1, Thm3_2, Thm3_3, Prop2_2, Prop1_1, ER_Thm1_1, Cor3_1, Cor3_2, Lem6_1_norm };

inline std::string_view to_string(TheoremId id) {
  switch (id) {
    case TheoremId::Thm3_1: return "3.1";
    case TheoremId::Thm3_2: return "3.2";
    case TheoremId::Thm3_3: return "3.3";
    case TheoremId::Prop2_2: return "prop2.2";
    case TheoremId::Prop1_1: return "prop1.1";
    case TheoremId::ER_Thm1_1: return "er";
    case TheoremId::Cor3_1: return "cor3.1";
    case TheoremId::Cor3_2: return "cor3.2";
    case TheoremId::Lem6_1_norm: return "lem6.1";
  }
  return "";
}

inline TheoremId parse_theorem(std::string_view s) {
  for (auto id : {TheoremId::Thm3_1, TheoremId::Thm3_2, TheoremId::Thm3_3, TheoremId::Prop2_2,
                  TheoremId::Prop1_1, TheoremId::ER_Thm1_1, TheoremId::Cor3_1, TheoremId::Cor3_2,
                  TheoremId::Lem6_1_norm})
    if (to_string(id) == s) return id;
  throw ParseError("unknown theorem '" + std::string(s) + "'");
}

/// Family each theorem is stated for; nullopt when any operator is allowed.
inline std::optional<Family> required_family(TheoremId id) {
  switch (id) {
    case TheoremId::Thm3_1:
    case TheoremId::Cor3_1:
    case TheoremId::Prop2_2: return Family::ConjugateShift;
    case TheoremId::Thm3_2:
    case TheoremId::Thm3_3:
    case TheoremId::Cor3_2: return Family::RealPart;
    default: return std::nullopt;
  }
}

struct VerifyConfig {
  std::optional<Eigen::Index> dim;  // default: dim_for()
  int n_max = 64;
  GridSpec grid = GridSpec::standard();
  ResolventMode resolvent_mode = ResolventMode::Auto;
  BuildMode build_mode = BuildMode::FiniteSection;
  PowerOptions power{};
  double tol_m = 1e-3;
  double tol_p = 1e-2;
  double tol_chain = 1e-6;
  double tol_chain_sq = 1e-3;
};

/// |beta|^N < 1e-12 and N >= 4 (n_max + 1).
inline Eigen::Index default_dim(Complex beta, int n_max, double tail = 1e-12) {
  const double b = std::abs(beta);
  Eigen::Index n = 4 * (n_max + 1);
  if (b > 0.0 && b < 1.0)
    n = std::max<Eigen::Index>(n, static_cast<Eigen::Index>(std::ceil(std::log(tail) / std::log(b))));
  return n;
}

inline Eigen::Index dim_for(const VerifyConfig& cfg, Complex beta) {
  return cfg.dim ? *cfg.dim : default_dim(beta, cfg.n_max);
}

struct Check {
  std::string label;  // e.g. THM3.1[M]
  Complex beta{};
  bool has_beta = true;
  BoundReport report;
};

inline std::string format_beta(Complex b) {
  char buf[96];
  if (b.imag() == 0.0)
    std::snprintf(buf, sizeof buf, "%.6g", b.real());
  else if (b.real() == 0.0)
    std::snprintf(buf, sizeof buf, "%.6gi", b.imag());
  else
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", b.real(), b.imag());
  return buf;
}

/// THM3.1[M] beta=0.9 value=2.29416 in [2.06474,3.06474] PASS
inline std::string format_check(const Check& c) {
  const auto& r = c.report;
  auto num = [](std::optional<double> v, const char* none) {
    if (!v) return std::string(none);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return std::string(buf);
  };
  std::string line = c.label;
  if (c.has_beta) line += " beta=" + format_beta(c.beta);
  line += " value=" + num(r.value, "nan");
  line += " in [" + num(r.lower, "-inf") + "," + num(r.upper, "inf") + "] ";
  line += to_string(r.verdict);
  return line;
}

namespace detail {

inline double scaled_modulus(double b) { return b / std::sqrt(1.0 - b * b); }

inline void require_beta(Complex beta) {
  const double b = std::abs(beta);
  if (!(b > 0.0 && b < 1.0)) throw DomainError("requires 0 < |beta| < 1");
}

/// A one-sided inequality lhs <= rhs as a report. Violations fail when
/// `hard`, otherwise they are advisory.
inline BoundReport inequality(Quantity q, double lhs, double rhs, double tol, bool hard) {
  BoundReport r;
  r.quantity = q;
  r.value = lhs;
  r.upper = rhs;
  r.tolerance = tol;
  r.converged = hard;
  if (!std::isfinite(lhs) || !std::isfinite(rhs))
    r.verdict = Verdict::Fail;
  else if (lhs > rhs + tol)
    r.verdict = hard ? Verdict::Fail : Verdict::Advisory;
  else
    r.verdict = Verdict::Pass;
  return r;
}

inline void note_truncation(BoundReport& r, Complex beta, Eigen::Index n) {
  r.diagnostics["dim"] = std::to_string(n);
  r.diagnostics["truncation_tail"] = fmt_double(std::pow(std::abs(beta), static_cast<double>(n)), 6);
}

/// Re-evaluate `target` at `other`'s argmax and keep the larger value. Makes
/// pointwise inequalities between two sups hold for the computed estimates.
inline void cross_seed(BoundReport& target, const BoundReport& other, const OperatorModel& a,
                       const SpectrumModel& s, const VerifyConfig& cfg) {
  if (!other.argmax_lambda) return;
  const auto v = resolvent_objective(a, s, *other.argmax_lambda, cfg.grid, cfg.resolvent_mode);
  if (v && *v > target.value) {
    target.value = *v;
    target.argmax_lambda = other.argmax_lambda;
    target.diagnostics["cross_seeded"] = "true";
  }
}

}  // namespace detail

// ---------------------------------------------------------------- conj-shift

struct ShiftReports {
  BoundReport m;
  BoundReport p;
};

/// M and P for the conj-shift family with their brackets.
inline ShiftReports conj_shift_reports(Complex beta, const VerifyConfig& cfg) {
  detail::require_beta(beta);
  const auto params = FamilyParams::conjugate_shift(beta);
  const Eigen::Index n = dim_for(cfg, beta);
  const auto model = OperatorModel::family(params, n, cfg.build_mode);
  const double s = detail::scaled_modulus(std::abs(beta));

  ShiftReports out;
  out.m = power_bound(model, cfg.n_max, cfg.power);
  set_bracket(out.m, std::max(1.0, s), 1.0 + s, cfg.tol_m);
  detail::note_truncation(out.m, beta, n);

  out.p = resolvent_condition(model, SpectrumModel::unit_disk(), cfg.grid, cfg.resolvent_mode);
  const double c0s = kResolventConstant * s;
  set_bracket(out.p, std::max(1.0, c0s), std::min(out.m.value, 1.0 + c0s), cfg.tol_p);
  detail::note_truncation(out.p, beta, n);
  return out;
}

inline std::vector<Check> verify_thm_3_1(Complex beta, const VerifyConfig& cfg) {
  auto r = conj_shift_reports(beta, cfg);
  return {{"THM3.1[M]", beta, true, std::move(r.m)}, {"THM3.1[P]", beta, true, std::move(r.p)}};
}

/// P(A) <= M(A), checked on the conj-shift family.
inline std::vector<Check> verify_prop_2_2(Complex beta, const VerifyConfig& cfg) {
  auto r = conj_shift_reports(beta, cfg);
  auto rep = detail::inequality(Quantity::P, r.p.value, r.m.value, cfg.tol_chain, true);
  rep.argmax_lambda = r.p.argmax_lambda;
  return {{"PROP2.2[P<=M]", beta, true, std::move(rep)}};
}

// ---------------------------------------------------------------- real part

struct RealPartReports {
  BoundReport m;
  BoundReport p_sigma;  // spectrum model [-1, 1]
  BoundReport p_ends;   // spectrum model {-1, 1}
};

inline RealPartReports real_part_reports(Complex beta, const VerifyConfig& cfg) {
  detail::require_beta(beta);
  const auto params = FamilyParams::real_part(beta);
  const Eigen::Index n = dim_for(cfg, beta);
  const auto model = OperatorModel::family(params, n, cfg.build_mode);
  const auto interval = SpectrumModel::interval();
  const auto ends = SpectrumModel::finite_points({-1.0, 1.0});

  RealPartReports out;
  out.m = power_bound(model, cfg.n_max, cfg.power);
  out.p_sigma = resolvent_condition(model, interval, cfg.grid, cfg.resolvent_mode);
  out.p_ends = resolvent_condition(model, ends, cfg.grid, cfg.resolvent_mode);
  detail::cross_seed(out.p_ends, out.p_sigma, model, ends, cfg);
  detail::cross_seed(out.p_sigma, out.p_ends, model, interval, cfg);
  for (auto* r : {&out.m, &out.p_sigma, &out.p_ends}) detail::note_truncation(*r, beta, n);
  return out;
}

/// M <= e P_{-1,1}^2 <= 2e P_sigma^2, P_sigma <= P_{-1,1}, and the floor
/// P_sigma >= sqrt(M / 2e).
inline std::vector<Check> verify_thm_3_2(Complex beta, const VerifyConfig& cfg) {
  const auto r = real_part_reports(beta, cfg);
  constexpr double e = std::numbers::e;
  const double ps = r.p_sigma.value, pe = r.p_ends.value;
  std::vector<Check> out;
  out.push_back({"THM3.2[Psig<=P12]", beta, true,
                 detail::inequality(Quantity::P, ps, pe, cfg.tol_chain, true)});
  out.push_back({"THM3.2[M<=eP12^2]", beta, true,
                 detail::inequality(Quantity::M, r.m.value, e * pe * pe, cfg.tol_chain_sq,
                                    r.p_ends.converged && r.m.converged)});
  out.push_back({"THM3.2[eP12^2<=2ePsig^2]", beta, true,
                 detail::inequality(Quantity::P, e * pe * pe, 2.0 * e * ps * ps, cfg.tol_chain_sq,
                                    r.p_sigma.converged && r.p_ends.converged)});
  BoundReport floor = r.p_sigma;
  set_bracket(floor, std::sqrt(r.m.value / (2.0 * e)), std::nullopt, cfg.tol_p);
  out.push_back({"THM3.2[Psig>=sqrt(M/2e)]", beta, true, std::move(floor)});
  out[0].report.diagnostics["p12"] = fmt_double(pe);
  out[1].report.diagnostics["p12"] = fmt_double(pe);
  out[2].report.diagnostics["psig"] = fmt_double(ps);
  return out;
}

/// Lower bracket pieces for M of the real-part family.
struct RealPartFloor {
  double first = 0.0;
  double second_stated = 0.0;   // (2 + conj(b)^2) form
  double second_variant = 0.0;  // (2 - conj(b)^3) form
  double effective = 1.0;
};

inline RealPartFloor real_part_floor(Complex beta) {
  const Complex bc = std::conj(beta);
  const double b2 = std::norm(beta);
  const double root = std::sqrt(1.0 - b2);
  RealPartFloor f;
  f.first = std::abs(beta - bc * (1.0 - b2)) / (2.0 * root);
  auto second = [&](Complex numer) {
    return root / 8.0 * std::abs(numer / (1.0 - b2) - 2.0 * bc - bc * bc * bc);
  };
  f.second_stated = second(2.0 + bc * bc);
  f.second_variant = second(2.0 - bc * bc * bc);
  f.effective = std::max({1.0, f.first, std::min(f.second_stated, f.second_variant)});
  return f;
}

inline std::vector<Check> verify_thm_3_3(Complex beta, const VerifyConfig& cfg) {
  auto r = real_part_reports(beta, cfg);
  const double b = std::abs(beta);
  const double upper = (1.0 + b) / (1.0 - b);
  const auto floor = real_part_floor(beta);

  BoundReport m = r.m;
  set_bracket(m, floor.effective, upper, cfg.tol_m);
  m.diagnostics["floor_first"] = fmt_double(floor.first);
  m.diagnostics["floor_second_stated"] = fmt_double(floor.second_stated);
  m.diagnostics["floor_second_variant"] = fmt_double(floor.second_variant);

  // sharper bound from the proof, advisory only
  BoundReport m_proof = detail::inequality(Quantity::M, r.m.value, 1.0 + 2.0 * b / (1.0 - b),
                                           cfg.tol_m, false);

  BoundReport p = r.p_sigma;
  set_bracket(p, std::max(1.0, std::sqrt(r.m.value / (2.0 * std::numbers::e))), upper, cfg.tol_p);
  return {{"THM3.3[M]", beta, true, std::move(m)},
          {"THM3.3[M-proof]", beta, true, std::move(m_proof)},
          {"THM3.3[P]", beta, true, std::move(p)}};
}

// ---------------------------------------------------------------- ER bound

/// sup ||A^n|| <= (e/2) C^2 #E with C = P_E(A).
inline Check verify_er_bound(const OperatorModel& a, const std::vector<Complex>& points,
                             const VerifyConfig& cfg) {
  if (points.empty()) throw DomainError("verify_er_bound: E must be nonempty");
  const auto model = SpectrumModel::finite_points(points);
  const auto m = power_bound(a, cfg.n_max, cfg.power);
  const auto c = resolvent_condition(a, model, cfg.grid, cfg.resolvent_mode);
  const double bound = std::numbers::e / 2.0 * c.value * c.value * static_cast<double>(points.size());
  auto rep = detail::inequality(Quantity::M, m.value, bound, cfg.tol_chain_sq,
                                c.converged && m.converged);
  rep.diagnostics["C"] = fmt_double(c.value);
  rep.diagnostics["points"] = std::to_string(points.size());
  Check out{"ER[M<=e/2*C^2*#E]", {}, false, std::move(rep)};
  if (const auto& fam = a.family_params()) {
    out.beta = fam->beta();
    out.has_beta = true;
  }
  return out;
}

// ---------------------------------------------------------------- commutators

/// ||[(T_z + T_z^*)^n, T_z]|| <= 2(n+1) on the leading block unaffected by
/// truncation. Reported as advisory: the bound is not a norm bound in general.
inline std::vector<Check> commutator_growth_check(int n_max, Eigen::Index dim = 256,
                                                  double tol = 1e-6) {
  if (n_max < 0) throw DomainError("commutator_growth_check: n_max must be >= 0");
  if (4 * n_max >= dim) throw DimensionError("commutator_growth_check: need n_max < N/4");
  LaurentSymbol shift_sym({{1, 1.0}});
  LaurentSymbol sum_sym({{1, 1.0}, {-1, 1.0}});
  const Matrix tz = toeplitz_matrix(shift_sym, dim).data;
  const Matrix sum = toeplitz_matrix(sum_sym, dim).data;
  Matrix power = Matrix::Identity(dim, dim);
  std::vector<Check> out;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) power = sum * power;
    const Matrix c = power * tz - tz * power;
    const Eigen::Index keep = dim - n - 2;
    const double nrm = dense_norm(c.topLeftCorner(keep, keep));
    auto rep = detail::inequality(Quantity::Norm, nrm, 2.0 * (n + 1), tol, false);
    rep.argmax_n = n;
    out.push_back({"LEM6.1[n=" + std::to_string(n) + "]", {}, false, std::move(rep)});
  }
  return out;
}

// ---------------------------------------------------------------- sweeps

struct SweepRow {
  Complex beta{};
  Eigen::Index dim = 0;
  int n_max = 0;
  BoundReport m;
  BoundReport p;
  Verdict verdict = Verdict::Pass;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  // 95% Student-t interval on the slope
  double expected_lo = 0.0;
  double expected_hi = 0.0;
  bool in_range() const { return slope >= expected_lo && slope <= expected_hi; }
};

struct SweepReport {
  Family family = Family::ConjugateShift;
  std::vector<SweepRow> rows;
  SlopeFit m_fit;
  SlopeFit p_fit;
  std::vector<std::string> warnings;
};

/// Least-squares slope of y against x with a 95% confidence halfwidth.
inline SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 5 || y.size() != n) throw DomainError("slope fit needs at least 5 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("slope fit needs distinct abscissae");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    rss += e * e;
  }
  const double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  boost::math::students_t dist(static_cast<double>(n - 2));
  f.halfwidth = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return f;
}

struct SweepConfig {
  int k_min = 2;
  int k_max = 8;
  double phase = 0.0;   // beta = (1 - 2^{-k}) e^{i phase}
  int n_max = 16;
  double tail = 1e-8;   // |beta|^N below this
  Eigen::Index max_dim = 8192;
  VerifyConfig verify{};
};

inline SweepReport sweep_growth(Family family, const SweepConfig& sc) {
  if (family == Family::Custom) throw UnsupportedModeError("sweeps need a named family");
  if (sc.k_max - sc.k_min + 1 < 5) throw DomainError("slope fit needs at least 5 points");
  SweepReport rep;
  rep.family = family;
  std::vector<double> xs, ym, yp;
  for (int k = sc.k_min; k <= sc.k_max; ++k) {
    const double b = 1.0 - std::ldexp(1.0, -k);
    const Complex beta = std::polar(b, sc.phase);
    const Eigen::Index n = default_dim(beta, sc.n_max, sc.tail);
    if (n > sc.max_dim) {
      rep.warnings.push_back("k=" + std::to_string(k) + " needs N=" + std::to_string(n) +
                             " > " + std::to_string(sc.max_dim) + "; row skipped");
      log(LogLevel::Error, rep.warnings.back());
      continue;
    }
    VerifyConfig vc = sc.verify;
    vc.dim = n;
    vc.n_max = sc.n_max;
    SweepRow row;
    row.beta = beta;
    row.dim = n;
    row.n_max = sc.n_max;
    if (family == Family::ConjugateShift) {
      auto r = conj_shift_reports(beta, vc);
      row.m = std::move(r.m);
      row.p = std::move(r.p);
    } else {
      auto checks = verify_thm_3_3(beta, vc);
      row.m = std::move(checks[0].report);
      row.p = std::move(checks[2].report);
    }
    row.verdict = (row.m.verdict == Verdict::Fail || row.p.verdict == Verdict::Fail) ? Verdict::Fail
                  : (row.m.verdict == Verdict::Advisory || row.p.verdict == Verdict::Advisory)
                      ? Verdict::Advisory
                      : Verdict::Pass;
    xs.push_back(std::log(1.0 - b));
    ym.push_back(std::log(row.m.value));
    yp.push_back(std::log(row.p.value));
    rep.rows.push_back(std::move(row));
  }
  rep.m_fit = fit_slope(xs, ym);
  rep.p_fit = fit_slope(xs, yp);
  if (family == Family::ConjugateShift) {
    rep.m_fit.expected_lo = -0.6;
    rep.m_fit.expected_hi = -0.4;
    rep.p_fit.expected_lo = -0.65;
    rep.p_fit.expected_hi = -0.35;
  } else {
    rep.m_fit.expected_lo = -1.1;
    rep.m_fit.expected_hi = -0.4;
    rep.p_fit.expected_lo = -1.15;
    rep.p_fit.expected_hi = -0.1;
  }
  return rep;
}

}  // namespace mtoep
