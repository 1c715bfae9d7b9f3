#pragma once

// Runtime view of an operator for the analysis routines: either a dense
// matrix or a matrix-free family operator, plus a factory for resolvent maps.

#include "mtoep/common.hpp"
#include "mtoep/norm.hpp"
#include "mtoep/operators.hpp"
#include "mtoep/structured.hpp"

#include <memory>
#include <optional>

namespace mtoep {

/// Type-erased linear map.
class AnyMap {
 public:
  virtual ~AnyMap() = default;
  virtual Eigen::Index dim() const = 0;
  virtual void apply(const Vector& x, Vector& y) const = 0;
  virtual void apply_adjoint(const Vector& x, Vector& y) const = 0;
};

template <LinearMap M>
class MapHolder final : public AnyMap {
 public:
  explicit MapHolder(M m) : m_(std::move(m)) {}
  Eigen::Index dim() const override { return m_.dim(); }
  void apply(const Vector& x, Vector& y) const override { m_.apply(x, y); }
  void apply_adjoint(const Vector& x, Vector& y) const override { m_.apply_adjoint(x, y); }
  const M& get() const { return m_; }

 private:
  M m_;
};

template <LinearMap M>
std::unique_ptr<AnyMap> erase(M m) {
  return std::make_unique<MapHolder<M>>(std::move(m));
}

enum class ResolventMode { Auto, ClosedForm, FiniteSection };

inline std::string_view to_string(ResolventMode m) {
  switch (m) {
    case ResolventMode::Auto: return "auto";
    case ResolventMode::ClosedForm: return "closed-form";
    case ResolventMode::FiniteSection: return "finite-section";
  }
  return "auto";
}

inline ResolventMode parse_resolvent_mode(std::string_view s) {
  if (s == "auto") return ResolventMode::Auto;
  if (s == "closed-form") return ResolventMode::ClosedForm;
  if (s == "finite-section") return ResolventMode::FiniteSection;
  throw ParseError("unknown resolvent mode '" + std::string(s) + "'");
}

class OperatorModel {
 public:
  /// Dense matrix, no family information.
  static OperatorModel dense(Matrix a) {
    if (a.rows() != a.cols()) throw DimensionError("operator must be square");
    OperatorModel m;
    m.dense_ = std::make_shared<const Matrix>(std::move(a));
    return m;
  }

  /// Matrix-free family operator; no dense copy is formed.
  static OperatorModel family(const FamilyParams& p, Eigen::Index n, BuildMode mode) {
    OperatorModel m;
    m.structured_ = std::make_shared<const StructuredOperator>(structured_operator(p, n, mode));
    m.family_ = p;
    m.mode_ = mode;
    return m;
  }

  /// From a stored operator. Family provenance selects the matrix-free form,
  /// which is accepted only if it reproduces the stored matrix on a seeded
  /// probe vector.
  static OperatorModel from(const TruncatedOperator& t) {
    OperatorModel m = dense(t.data);
    const auto& prov = t.provenance;
    if (!prov.family) return m;
    std::optional<BuildMode> mode;
    if (prov.construction == Construction::FiniteSection) mode = BuildMode::FiniteSection;
    if (prov.construction == Construction::ClosedForm) mode = BuildMode::ClosedForm;
    if (!mode) return m;
    try {
      auto s = structured_operator(*prov.family, t.dim(), *mode);
      Lcg64 rng(0xC0FFEEULL);
      const Vector x = random_vector(t.dim(), rng);
      Vector y;
      s.apply(x, y);
      const double err = (y - t.data * x).norm();
      const double scale = std::max(1.0, t.data.norm()) * x.norm();
      if (err > 1e-10 * scale) {
        log(LogLevel::Info, "provenance does not match matrix data; using dense model");
        return m;
      }
      m.structured_ = std::make_shared<const StructuredOperator>(std::move(s));
      m.family_ = prov.family;
      m.mode_ = mode;
    } catch (const Error&) {
      return m;
    }
    return m;
  }

  Eigen::Index dim() const { return structured_ ? structured_->dim() : dense_->rows(); }
  bool is_structured() const { return structured_ != nullptr; }
  const Matrix* dense_data() const { return dense_.get(); }
  const StructuredOperator* structured() const { return structured_.get(); }
  const std::optional<FamilyParams>& family_params() const { return family_; }
  std::optional<BuildMode> build_mode() const { return mode_; }

  void apply(const Vector& x, Vector& y) const {
    if (structured_)
      structured_->apply(x, y);
    else
      y.noalias() = (*dense_) * x;
  }
  void apply_adjoint(const Vector& x, Vector& y) const {
    if (structured_)
      structured_->apply_adjoint(x, y);
    else
      y.noalias() = dense_->adjoint() * x;
  }

  Matrix to_dense() const { return dense_ ? *dense_ : structured_->to_dense(); }

  /// Compression of the infinite operator's resolvent is known in closed
  /// form for both named families.
  bool closed_form_resolvent_available() const {
    return family_ && family_->family() != Family::Custom;
  }

  /// (lambda I - A)^{-1} as a linear map. Auto picks the closed form for
  /// family operators: the finite-section matrix has boundary rows whose
  /// resolvent grows faster than the infinite operator's.
  std::unique_ptr<AnyMap> resolvent(Complex lambda, ResolventMode mode) const {
    if (mode == ResolventMode::Auto && closed_form_resolvent_available())
      mode = ResolventMode::ClosedForm;
    if (mode == ResolventMode::ClosedForm) {
      if (!closed_form_resolvent_available())
        throw UnsupportedModeError("closed-form resolvent needs a conj-shift or real-part operator");
      if (family_->family() == Family::ConjugateShift)
        return erase(ClosedFormShiftResolvent(family_->beta(), ResolventQuery(lambda, dim())));
      return erase(ClosedFormRealPartResolvent(family_->beta(), lambda, dim()));
    }
    if (structured_) return erase(StructuredResolvent(*structured_, lambda));
    return erase(DenseResolvent(*dense_, lambda));
  }

 private:
  OperatorModel() = default;

  std::shared_ptr<const Matrix> dense_;
  std::shared_ptr<const StructuredOperator> structured_;
  std::optional<FamilyParams> family_;
  std::optional<BuildMode> mode_;
};

}  // namespace mtoep
