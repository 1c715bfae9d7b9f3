#pragma once

/// Laurent-polynomial symbols, N x N sections of their Toeplitz operators on
/// H^2, reproducing-kernel vectors, and exact inverses of sections of
/// analytic (lower-triangular) Toeplitz operators.
///
/// Basis convention: e_0, ..., e_{N-1} are the monomials 1, z, ..., z^{N-1};
/// the section of T_f has (m, n) entry c_{m-n}. Inner products are linear in
/// the first slot, <x, y> = sum_n x_n conj(y_n).

#include "mtoep/common.hpp"

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mtoep {

// ---------------------------------------------------------------------------
// LaurentSymbol
// ---------------------------------------------------------------------------

/// f(z) = sum_k c_k z^k with finitely many nonzero c_k; negative k stands
/// for conj(z)^|k| on the unit circle. Exact zeros are never stored.
class LaurentSymbol {
 public:
  LaurentSymbol() = default;

  explicit LaurentSymbol(const std::map<int, Complex>& coeffs) {
    for (const auto& [k, c] : coeffs)
      if (c != Complex{}) coeffs_[k] = c;
  }

  static LaurentSymbol constant(Complex c) { return LaurentSymbol({{0, c}}); }

  /// conj(z): the symbol of the backward shift T_z^*.
  static LaurentSymbol conjugate_shift() { return LaurentSymbol({{-1, 1.0}}); }

  /// (z + conj(z)) / 2 = Re z.
  static LaurentSymbol real_part() {
    return LaurentSymbol({{-1, 0.5}, {1, 0.5}});
  }

  /// 1 + beta z.
  static LaurentSymbol affine(Complex beta) {
    return LaurentSymbol({{0, 1.0}, {1, beta}});
  }

  const std::map<int, Complex>& coeffs() const { return coeffs_; }

  Complex coeff(int k) const {
    const auto it = coeffs_.find(k);
    return it == coeffs_.end() ? Complex{} : it->second;
  }

  bool empty() const { return coeffs_.empty(); }
  int min_index() const { return coeffs_.empty() ? 0 : coeffs_.begin()->first; }
  int max_index() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }

  /// Number of nonzero diagonals strictly below / above the main one in
  /// the Toeplitz section.
  int lower_bandwidth() const { return std::max(0, max_index()); }
  int upper_bandwidth() const { return std::max(0, -min_index()); }

  bool is_analytic() const { return coeffs_.empty() || min_index() >= 0; }

  /// sum |c_k|, an upper bound for the sup norm on the circle.
  double sup_norm_bound() const {
    double s = 0.0;
    for (const auto& [k, c] : coeffs_) s += std::abs(c);
    return s;
  }

  /// Polynomial value q(w) for an analytic symbol (|w| may be anything).
  Complex evaluate_analytic(Complex w) const {
    if (!is_analytic())
      throw DomainError("evaluate_analytic: symbol has negative indices");
    Complex acc{};
    Complex power = 1.0;
    int last = 0;
    for (const auto& [k, c] : coeffs_) {
      for (; last < k; ++last) power *= w;
      acc += c * power;
    }
    return acc;
  }

  /// Value on the unit circle at z = e^{i theta}.
  Complex evaluate_on_circle(double theta) const {
    Complex acc{};
    for (const auto& [k, c] : coeffs_) acc += c * std::polar(1.0, k * theta);
    return acc;
  }

  LaurentSymbol conj_symbol() const {
    std::map<int, Complex> out;
    for (const auto& [k, c] : coeffs_) out[-k] = std::conj(c);
    return LaurentSymbol(out);
  }

  friend bool operator==(const LaurentSymbol&, const LaurentSymbol&) = default;

 private:
  std::map<int, Complex> coeffs_;
};

// Symbol grammar: semicolon separated `k:re,im` terms, e.g. "-1:0.5,0;1:0.5,0".

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, std::string_view context) {
  s = trim(s);
  if (s.empty()) throw ParseError("empty number in " + std::string(context));
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad number '" + std::string(s) + "' in " + std::string(context));
  return value;
}

inline int parse_int(std::string_view s, std::string_view context) {
  s = trim(s);
  int value = 0;
  const auto* first = s.data();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad integer '" + std::string(s) + "' in " + std::string(context));
  return value;
}

}  // namespace detail

/// Parses "re,im" (or a bare real "re") into a complex number.
inline Complex parse_complex(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return {detail::parse_double(text, text), 0.0};
  return {detail::parse_double(text.substr(0, comma), text),
          detail::parse_double(text.substr(comma + 1), text)};
}

inline LaurentSymbol parse_symbol(std::string_view text) {
  std::map<int, Complex> coeffs;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(';', start), text.size());
    const auto term = detail::trim(text.substr(start, end - start));
    if (!term.empty()) {
      const auto colon = term.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("symbol term '" + std::string(term) + "' lacks 'k:'");
      const int k = detail::parse_int(term.substr(0, colon), term);
      const auto value = term.substr(colon + 1);
      if (value.find(',') == std::string_view::npos)
        throw ParseError("symbol term '" + std::string(term) + "' needs re,im");
      if (coeffs.count(k) != 0)
        throw ParseError("symbol index " + std::to_string(k) + " given twice");
      coeffs[k] = parse_complex(value);
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return LaurentSymbol(coeffs);
}

inline std::string format_symbol(const LaurentSymbol& f) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [k, c] : f.coeffs()) {
    if (!first) os << ';';
    os << k << ':' << c.real() << ',' << c.imag();
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Operator families T_g^{-1} T_f T_g
// ---------------------------------------------------------------------------

enum class Family { ConjugateShift, RealPart, Custom };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::ConjugateShift: return "conj-shift";
    case Family::RealPart: return "real-part";
    case Family::Custom: return "custom";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "conj-shift") return Family::ConjugateShift;
  if (s == "real-part") return Family::RealPart;
  if (s == "custom") return Family::Custom;
  throw ParseError("unknown family '" + std::string(s) + "'");
}

/// A = T_g^{-1} T_f T_g. The named families use g = 1 + beta z with
/// f = conj(z) or f = (z + conj(z))/2.
class FamilyParams {
 public:
  static FamilyParams conjugate_shift(Complex beta) {
    return FamilyParams(Family::ConjugateShift, beta, LaurentSymbol::conjugate_shift(),
                        LaurentSymbol::affine(beta));
  }
  static FamilyParams real_part(Complex beta) {
    return FamilyParams(Family::RealPart, beta, LaurentSymbol::real_part(),
                        LaurentSymbol::affine(beta));
  }
  static FamilyParams custom(LaurentSymbol f, LaurentSymbol g) {
    const Complex g0 = g.coeff(0);
    const Complex beta = g0 == Complex{} ? Complex{} : g.coeff(1) / g0;
    return FamilyParams(Family::Custom, beta, std::move(f), std::move(g));
  }
  static FamilyParams make(Family family, Complex beta) {
    switch (family) {
      case Family::ConjugateShift: return conjugate_shift(beta);
      case Family::RealPart: return real_part(beta);
      case Family::Custom: break;
    }
    throw UnsupportedModeError("FamilyParams::make: custom family needs explicit symbols");
  }

  Family family() const { return family_; }
  Complex beta() const { return beta_; }
  const LaurentSymbol& symbol() const { return f_; }
  const LaurentSymbol& conjugator() const { return g_; }

  /// Throws DomainError when the parameters leave the admissible set.
  void validate() const {
    if (family_ == Family::Custom) {
      if (!g_.is_analytic())
        throw DomainError("custom g must be analytic (nonnegative indices only)");
      if (g_.coeff(0) == Complex{}) throw DomainError("g(0) must be nonzero");
      return;
    }
    const double b = std::abs(beta_);
    if (!(b > 0.0 && b < 1.0) || !std::isfinite(b))
      throw DomainError("family " + std::string(to_string(family_)) +
                        " requires 0 < |beta| < 1");
  }

  friend bool operator==(const FamilyParams&, const FamilyParams&) = default;

 private:
  FamilyParams(Family family, Complex beta, LaurentSymbol f, LaurentSymbol g)
      : family_(family), beta_(beta), f_(std::move(f)), g_(std::move(g)) {}

  Family family_;
  Complex beta_;
  LaurentSymbol f_;
  LaurentSymbol g_;
};

// ---------------------------------------------------------------------------
// Provenance and truncated operators
// ---------------------------------------------------------------------------

enum class Construction {
  Toeplitz,
  AnalyticInverse,
  FiniteSection,
  ClosedForm,
  ClosedFormPower,
  ClosedFormResolvent,
  FiniteSectionResolvent,
  Commutator,
  External,
};

inline std::string_view to_string(Construction c) {
  switch (c) {
    case Construction::Toeplitz: return "toeplitz";
    case Construction::AnalyticInverse: return "analytic-inverse";
    case Construction::FiniteSection: return "finite-section";
    case Construction::ClosedForm: return "closed-form";
    case Construction::ClosedFormPower: return "closed-form-power";
    case Construction::ClosedFormResolvent: return "closed-form-resolvent";
    case Construction::FiniteSectionResolvent: return "finite-section-resolvent";
    case Construction::Commutator: return "commutator";
    case Construction::External: return "external";
  }
  return "?";
}

inline Construction parse_construction(std::string_view s) {
  for (auto c : {Construction::Toeplitz, Construction::AnalyticInverse,
                 Construction::FiniteSection, Construction::ClosedForm,
                 Construction::ClosedFormPower, Construction::ClosedFormResolvent,
                 Construction::FiniteSectionResolvent, Construction::Commutator,
                 Construction::External})
    if (to_string(c) == s) return c;
  throw ParseError("unknown construction '" + std::string(s) + "'");
}

struct Provenance {
  Construction construction = Construction::External;
  std::optional<FamilyParams> family;
  std::optional<LaurentSymbol> symbol;  // Toeplitz / analytic inverse
  int power = 1;
  std::optional<Complex> lambda;
  std::string formula;
};

/// Dense N x N section with a record of how it was built.
struct TruncatedOperator {
  Matrix data;
  Provenance provenance;

  Eigen::Index dim() const { return data.rows(); }
};

// ---------------------------------------------------------------------------
// Reproducing kernels
// ---------------------------------------------------------------------------

/// Truncated Szego kernel k_omega(z) = 1 / (1 - conj(omega) z).
struct KernelVector {
  Complex omega;
  Vector coeffs;  // coeffs[n] = conj(omega)^n

  Eigen::Index dim() const { return coeffs.size(); }

  /// (1 - |omega|^{2N}) / (1 - |omega|^2).
  double norm_squared_closed_form() const {
    const double r2 = std::norm(omega);
    if (r2 == 0.0) return 1.0;
    return -std::expm1(static_cast<double>(dim()) * std::log(r2)) / (1.0 - r2);
  }

  /// Squared norm of the untruncated kernel, 1 / (1 - |omega|^2).
  double full_norm_squared() const { return 1.0 / (1.0 - std::norm(omega)); }

  /// |omega|^{2N} / (1 - |omega|^2): distance between the two above.
  double tail_bound() const {
    return std::pow(std::norm(omega), static_cast<double>(dim())) / (1.0 - std::norm(omega));
  }
};

inline KernelVector kernel_vector(Complex omega, Eigen::Index n) {
  if (n < 1) throw DimensionError("kernel_vector: N must be >= 1");
  if (!(std::abs(omega) < 1.0))
    throw DomainError("kernel_vector: |omega| must be < 1 (kernel not in H^2)");
  KernelVector k{omega, Vector(n)};
  const Complex w = std::conj(omega);
  Complex p = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    k.coeffs[i] = p;
    p *= w;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Toeplitz sections
// ---------------------------------------------------------------------------

inline TruncatedOperator toeplitz_matrix(const LaurentSymbol& f, Eigen::Index n) {
  if (n < 1) throw DimensionError("toeplitz_matrix: N must be >= 1");
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [k, c] : f.coeffs()) {
    // entry (m, m - k) for every valid m
    for (Eigen::Index m = std::max<Eigen::Index>(0, k); m < n && m - k < n; ++m) a(m, m - k) = c;
  }
  Provenance p;
  p.construction = Construction::Toeplitz;
  p.symbol = f;
  p.formula = "P_N T_f P_N, entry (m,n) = c_{m-n}";
  return {std::move(a), std::move(p)};
}

/// First N Taylor coefficients of 1/g for analytic g with g(0) != 0.
inline std::vector<Complex> reciprocal_series(const LaurentSymbol& g, Eigen::Index n) {
  if (!g.is_analytic()) throw DomainError("reciprocal_series: g must be analytic");
  const Complex g0 = g.coeff(0);
  if (g0 == Complex{}) throw SingularError("g(0) must be nonzero (singular symbol)", 0.0);
  std::vector<Complex> h(static_cast<std::size_t>(n));
  h[0] = 1.0 / g0;
  for (Eigen::Index k = 1; k < n; ++k) {
    Complex acc{};
    for (const auto& [j, c] : g.coeffs()) {
      if (j == 0 || j > k) continue;
      acc += c * h[static_cast<std::size_t>(k - j)];
    }
    h[static_cast<std::size_t>(k)] = -acc / g0;
  }
  return h;
}

/// Section of T_{1/g}. For analytic g this is lower-triangular Toeplitz and
/// equals the exact inverse of toeplitz_matrix(g, N).
inline TruncatedOperator analytic_toeplitz_inverse(const LaurentSymbol& g, Eigen::Index n) {
  if (n < 1) throw DimensionError("analytic_toeplitz_inverse: N must be >= 1");
  if (!g.is_analytic()) throw DomainError("analytic_toeplitz_inverse: g must be analytic");
  if (g.max_index() == 1 && g.coeff(0) == Complex{1.0} && !(std::abs(g.coeff(1)) < 1.0))
    throw DomainError("analytic_toeplitz_inverse: 1 + beta z requires |beta| < 1");
  const auto h = reciprocal_series(g, n);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) a(i, j) = h[static_cast<std::size_t>(i - j)];
  Provenance p;
  p.construction = Construction::AnalyticInverse;
  p.symbol = g;
  p.formula = "P_N T_{1/g} P_N (series coefficients of 1/g)";
  return {std::move(a), std::move(p)};
}

/// || T_g^* k_omega - conj(g(omega)) k_omega || on the N-section. Nonzero
/// only through the last deg(g) entries, where the section cuts the kernel.
inline double apply_adjoint_kernel_check(const LaurentSymbol& g, Complex omega, Eigen::Index n) {
  if (!g.is_analytic()) throw DomainError("apply_adjoint_kernel_check: g must be analytic");
  const auto k = kernel_vector(omega, n);
  const Complex gw = std::conj(g.evaluate_analytic(omega));
  // (T_g^* x)_m = sum_j conj(g_j) x_{m+j}
  Vector r(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    Complex acc{};
    for (const auto& [j, c] : g.coeffs())
      if (m + j < n) acc += std::conj(c) * k.coeffs[m + j];
    r[m] = acc - gw * k.coeffs[m];
  }
  return r.norm();
}

}  // namespace mtoep
