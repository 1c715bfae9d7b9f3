#pragma once

/// Shared scalar/vector types, the error hierarchy, the seeded generator and
/// a tiny stderr logger used across the mtoep headers.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtoep {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kGoldenRatio = 1.6180339887498948482;
inline constexpr double kEuler = 2.7182818284590452354;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter outside the domain where the object is defined
/// (|beta| >= 1, |omega| >= 1, |lambda| <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A solve or inverse hit a (numerically) singular system.
class SingularError : public Error {
 public:
  SingularError(const std::string& what, double rcond)
      : Error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// An iteration ran out of budget; carries the best value seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

// ---------------------------------------------------------------------------
// Deterministic random numbers
// ---------------------------------------------------------------------------

/// 64-bit linear congruential generator (Knuth's MMIX constants). Output is
/// the top 53 bits, so sequences are identical on every platform.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed = 0) : state_(seed ^ 0x9E3779B97F4A7C15ULL) {
    next();
  }

  std::uint64_t next() {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Real and imaginary parts independently uniform on [-1, 1).
  Complex complex_uniform() {
    const double re = uniform(-1.0, 1.0);
    const double im = uniform(-1.0, 1.0);
    return {re, im};
  }

 private:
  std::uint64_t state_;
};

inline Vector random_vector(Eigen::Index n, Lcg64& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.complex_uniform();
  return v;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Lcg64& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_uniform();
  return m;
}

// ---------------------------------------------------------------------------
// Logging (TK_LOG = error | info | debug)
// ---------------------------------------------------------------------------

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("TK_LOG");
    if (env == nullptr) return LogLevel::Error;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

inline void log(LogLevel level, std::string_view msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static constexpr const char* kNames[] = {"error", "info", "debug"};
  std::cerr << "[mtoep:" << kNames[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace mtoep
