#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cglab/domain.hpp"

namespace cglab {

/// Set of numbered sites a field stores values for. Because D_N, the closure
/// and the double closure are nested prefixes of one numbering, a field reads
/// zero at every id beyond its support.
enum class Support { DN, Closure, DoubleClosure };

int support_size(const LatticeDomain& ld, Support s);

/// Real values per site, implicitly zero outside the support (Dirichlet convention).
///
/// The same type carries microscopic heights phi and macroscopic step
/// functions h-bar; the step function takes value h-bar(x) on the cell
/// B(x/N, 1/N).
class HeightField {
 public:
  HeightField() = default;
  explicit HeightField(std::shared_ptr<const LatticeDomain> ld, Support support = Support::DN);
  HeightField(std::shared_ptr<const LatticeDomain> ld, Support support, std::vector<double> values);

  const LatticeDomain& domain() const { return *ld_; }
  const std::shared_ptr<const LatticeDomain>& domain_ptr() const noexcept { return ld_; }
  Support support() const noexcept { return support_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }

  double operator[](int id) const { return values_[static_cast<std::size_t>(id)]; }
  double& operator[](int id) { return values_[static_cast<std::size_t>(id)]; }
  /// Zero-extended read; any id (including -1) is accepted.
  double at(int id) const noexcept {
    return id >= 0 && id < size() ? values_[static_cast<std::size_t>(id)] : 0.0;
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::vector<double>& data() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  /// Sum over D_N sites only.
  double sum_dn() const;
  double max_abs() const;
  bool all_finite() const;

  /// Copy re-indexed onto another support (truncating or zero-padding).
  HeightField with_support(Support s) const;

  HeightField& operator+=(const HeightField& o);
  HeightField& operator-=(const HeightField& o);
  HeightField& operator*=(double c);

 private:
  std::shared_ptr<const LatticeDomain> ld_;
  Support support_ = Support::DN;
  std::vector<double> values_;
};

HeightField operator+(HeightField a, const HeightField& b);
HeightField operator-(HeightField a, const HeightField& b);
HeightField operator*(double c, HeightField a);

/// Sum over D_N of a(x) b(x).
double dot_dn(const HeightField& a, const HeightField& b);

/// d components per closure site: the discrete gradient lives on bonds leaving closure sites.
class GradientField {
 public:
  GradientField() = default;
  explicit GradientField(std::shared_ptr<const LatticeDomain> ld);

  const LatticeDomain& domain() const { return *ld_; }
  const std::shared_ptr<const LatticeDomain>& domain_ptr() const noexcept { return ld_; }
  int sites() const noexcept { return ld_ ? ld_->closure_size() : 0; }
  int dim() const noexcept { return ld_ ? ld_->dim() : 0; }

  double operator()(int id, int axis) const {
    return values_[static_cast<std::size_t>(id) * dim() + axis];
  }
  double& operator()(int id, int axis) {
    return values_[static_cast<std::size_t>(id) * dim() + axis];
  }
  double at(int id, int axis) const noexcept {
    return id >= 0 && id < sites() ? values_[static_cast<std::size_t>(id) * dim() + axis] : 0.0;
  }
  std::span<const double> component_block(int id) const {
    return {values_.data() + static_cast<std::size_t>(id) * dim(), static_cast<std::size_t>(dim())};
  }

  std::vector<double>& data() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  /// Sum over closure sites and axes of g(x)_i^2.
  double squared_norm() const;

 private:
  std::shared_ptr<const LatticeDomain> ld_;
  std::vector<double> values_;
};

/// Sum over closure sites of a(x) . b(x).
double dot_closure(const GradientField& a, const GradientField& b);

/// A field on D_N whose entries sum to zero.
class MeanZeroField {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Throws PreconditionError unless |sum| <= 1e-10 max(1, sum |f|).
  static MeanZeroField checked(HeightField f);
  /// Subtracts the per-site mean over D_N.
  static MeanZeroField project(HeightField f);

  const HeightField& field() const noexcept { return f_; }
  HeightField release() && { return std::move(f_); }

 private:
  explicit MeanZeroField(HeightField f) : f_(std::move(f)) {}
  HeightField f_;
};

}  // namespace cglab
