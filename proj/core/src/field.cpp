#include "cglab/field.hpp"

#include <cmath>

#include "cglab/errors.hpp"

namespace cglab {

int support_size(const LatticeDomain& ld, Support s) {
  switch (s) {
    case Support::DN: return ld.dn_size();
    case Support::Closure: return ld.closure_size();
    case Support::DoubleClosure: return ld.double_closure_size();
  }
  return 0;
}

HeightField::HeightField(std::shared_ptr<const LatticeDomain> ld, Support support)
    : ld_(std::move(ld)), support_(support) {
  if (!ld_) throw PreconditionError("field needs a lattice domain");
  values_.assign(static_cast<std::size_t>(support_size(*ld_, support_)), 0.0);
}

HeightField::HeightField(std::shared_ptr<const LatticeDomain> ld, Support support,
                         std::vector<double> values)
    : ld_(std::move(ld)), support_(support), values_(std::move(values)) {
  if (!ld_) throw PreconditionError("field needs a lattice domain");
  if (static_cast<int>(values_.size()) != support_size(*ld_, support_)) {
    throw PreconditionError("field value count does not match its support");
  }
}

double HeightField::sum_dn() const {
  double s = 0.0;
  const int n = std::min(size(), ld_->dn_size());
  for (int i = 0; i < n; ++i) s += values_[static_cast<std::size_t>(i)];
  return s;
}

double HeightField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool HeightField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

HeightField HeightField::with_support(Support s) const {
  HeightField out(ld_, s);
  const int n = std::min(size(), out.size());
  for (int i = 0; i < n; ++i) out[i] = (*this)[i];
  return out;
}

namespace {
void require_compatible(const HeightField& a, const HeightField& b) {
  if (a.domain_ptr() != b.domain_ptr() || a.support() != b.support()) {
    throw PreconditionError("fields live on different lattices or supports");
  }
}
}  // namespace

HeightField& HeightField::operator+=(const HeightField& o) {
  require_compatible(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

HeightField& HeightField::operator-=(const HeightField& o) {
  require_compatible(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

HeightField& HeightField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

HeightField operator+(HeightField a, const HeightField& b) { return a += b; }
HeightField operator-(HeightField a, const HeightField& b) { return a -= b; }
HeightField operator*(double c, HeightField a) { return a *= c; }

double dot_dn(const HeightField& a, const HeightField& b) {
  const int n = a.domain().dn_size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a.at(i) * b.at(i);
  return s;
}

GradientField::GradientField(std::shared_ptr<const LatticeDomain> ld) : ld_(std::move(ld)) {
  if (!ld_) throw PreconditionError("field needs a lattice domain");
  values_.assign(static_cast<std::size_t>(ld_->closure_size()) * ld_->dim(), 0.0);
}

double GradientField::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double dot_closure(const GradientField& a, const GradientField& b) {
  if (a.domain_ptr() != b.domain_ptr()) throw PreconditionError("gradients on different lattices");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

MeanZeroField MeanZeroField::checked(HeightField f) {
  if (f.support() != Support::DN) f = f.with_support(Support::DN);
  double s = 0.0;
  double a = 0.0;
  for (double v : f.values()) {
    s += v;
    a += std::abs(v);
  }
  if (std::abs(s) > kTolerance * std::max(1.0, a)) {
    throw PreconditionError("field is not mean-zero on D_N (sum=" + std::to_string(s) + ")");
  }
  return MeanZeroField(std::move(f));
}

MeanZeroField MeanZeroField::project(HeightField f) {
  if (f.support() != Support::DN) f = f.with_support(Support::DN);
  const double m = f.sum_dn() / f.size();
  for (double& v : f.values()) v -= m;
  return MeanZeroField(std::move(f));
}

}  // namespace cglab
