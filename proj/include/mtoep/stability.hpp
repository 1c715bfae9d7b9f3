#pragma once

// Propagated error of the recursion u_n = B u_{n-1} + b_n.
//
// A run iterates from u_0 and from u_0 + v_0 with the same forcing; the
// difference v_n must equal B^n v_0 whatever the forcing, and its size is
// bounded by sup_n ||B^n|| |v_0|.

#include "mtoep/analysis.hpp"
#include "mtoep/common.hpp"
#include "mtoep/symbols.hpp"

#include <cstdint>
#include <vector>

namespace mtoep {

struct Forcing {
  enum class Kind { Zero, Sequence, Generator };
  Kind kind = Kind::Zero;
  std::vector<Vector> sequence;  // b_1, b_2, ... repeated cyclically
  std::uint64_t seed = 0;
  double scale = 1.0;            // generator entries uniform in the square [-scale, scale]^2

  static Forcing zero() { return {}; }
  static Forcing from_sequence(std::vector<Vector> seq) {
    if (seq.empty()) throw DomainError("forcing sequence must be nonempty");
    Forcing f;
    f.kind = Kind::Sequence;
    f.sequence = std::move(seq);
    return f;
  }
  static Forcing generator(std::uint64_t seed, double scale = 1.0) {
    Forcing f;
    f.kind = Kind::Generator;
    f.seed = seed;
    f.scale = scale;
    return f;
  }
};

struct SchemeRun {
  TruncatedOperator b;
  Forcing forcing;
  Vector u0;
  Vector v0;
  int steps = 1;

  void validate() const {
    const Eigen::Index n = b.dim();
    if (b.data.cols() != n) throw DimensionError("iteration matrix must be square");
    if (u0.size() != n || v0.size() != n) throw DimensionError("u0, v0 must match the matrix dimension");
    if (steps < 1) throw DomainError("steps must be >= 1");
    for (const auto& s : forcing.sequence)
      if (s.size() != n) throw DimensionError("forcing vectors must match the matrix dimension");
  }
};

struct ErrorTrajectory {
  std::vector<double> norms;        // |v_n|, n = 0..K (recursion difference)
  std::vector<Vector> errors;       // v_n
  double max_two_way_gap = 0.0;     // max_n |v_n - B^n v_0|
  double m_hat = 1.0;
  double envelope = 0.0;            // m_hat |v_0|
  bool unstable = false;
  Verdict verdict = Verdict::Pass;
};

struct SchemeResult {
  std::vector<double> u_norms;  // |u_n|, n = 0..K
  ErrorTrajectory error;
  BoundReport power;
};

struct SchemeOptions {
  double envelope_tol = 1e-6;  // relative slack on the envelope
  double two_way_tol = 1e-10;  // relative to max(1, |v_0|)
  double overflow = 1e12;
  PowerOptions power{};
};

inline SchemeResult run_scheme(const SchemeRun& run, const SchemeOptions& opt = {}) {
  run.validate();
  const Eigen::Index n = run.b.dim();
  const Matrix& b = run.b.data;
  SchemeResult out;
  auto& err = out.error;

  Lcg64 rng(run.forcing.seed);
  Vector forcing_term = Vector::Zero(n);
  auto next_forcing = [&](int step) -> const Vector& {
    switch (run.forcing.kind) {
      case Forcing::Kind::Zero:
        break;
      case Forcing::Kind::Sequence:
        return run.forcing.sequence[static_cast<std::size_t>(step - 1) % run.forcing.sequence.size()];
      case Forcing::Kind::Generator:
        for (Eigen::Index i = 0; i < n; ++i) {
          const double re = rng.uniform(-run.forcing.scale, run.forcing.scale);
          const double im = rng.uniform(-run.forcing.scale, run.forcing.scale);
          forcing_term[i] = Complex(re, im);
        }
        break;
    }
    return forcing_term;
  };

  Vector u = run.u0, w = run.u0 + run.v0, direct = run.v0, t;
  out.u_norms.push_back(u.norm());
  err.norms.push_back(run.v0.norm());
  err.errors.push_back(run.v0);
  for (int step = 1; step <= run.steps; ++step) {
    const Vector& f = next_forcing(step);
    t.noalias() = b * u;
    u = t + f;
    t.noalias() = b * w;
    w = t + f;
    t.noalias() = b * direct;
    direct = t;
    Vector v = w - u;
    err.max_two_way_gap = std::max(err.max_two_way_gap, (v - direct).norm());
    out.u_norms.push_back(u.norm());
    err.norms.push_back(v.norm());
    err.errors.push_back(std::move(v));
    if (!(out.u_norms.back() <= opt.overflow) || !(err.norms.back() <= opt.overflow)) {
      err.unstable = true;
      log(LogLevel::Error, "scheme overflow at step " + std::to_string(step) + "; declared unstable");
      break;
    }
  }

  out.power = power_bound(run.b, run.steps, opt.power);
  err.m_hat = out.power.value;
  const double v0n = run.v0.norm();
  err.envelope = err.m_hat * v0n;
  bool envelope_ok = true;
  for (double x : err.norms) envelope_ok = envelope_ok && x <= err.envelope * (1.0 + opt.envelope_tol);
  const bool two_way_ok = err.max_two_way_gap <= opt.two_way_tol * std::max(1.0, v0n);
  if (err.unstable || !two_way_ok || (!envelope_ok && out.power.converged))
    err.verdict = Verdict::Fail;
  else if (!envelope_ok)
    err.verdict = Verdict::Advisory;
  else
    err.verdict = Verdict::Pass;
  return out;
}

/// max_n |v_n(a) - v_n(b)| over the common steps of two runs.
inline double trajectory_gap(const ErrorTrajectory& a, const ErrorTrajectory& b) {
  const std::size_t k = std::min(a.errors.size(), b.errors.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < k; ++i) gap = std::max(gap, (a.errors[i] - b.errors[i]).norm());
  return gap;
}

}  // namespace mtoep
