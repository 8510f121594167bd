#include "cglab/potential.hpp"

#include "cglab/errors.hpp"

namespace cglab {

Potential Potential::quadratic(double kappa) {
  Potential p;
  p.kind = PotentialKind::Quadratic;
  p.kappa = kappa;
  p.validate();
  return p;
}

Potential Potential::bounded_anharmonic(double b) {
  Potential p;
  p.kind = PotentialKind::BoundedAnharmonic;
  p.b = b;
  p.validate();
  return p;
}

std::string Potential::id() const {
  return kind == PotentialKind::Quadratic ? "quadratic" : "anharmonic";
}

void Potential::validate() const {
  if (kind == PotentialKind::Quadratic && !(kappa > 0.0)) {
    throw ModelError("quadratic potential needs kappa > 0");
  }
  if (kind == PotentialKind::BoundedAnharmonic && !(b >= 0.0)) {
    throw ModelError("anharmonic potential needs b >= 0");
  }
}

}  // namespace cglab
