#include "svi/soft_constraint.hpp"

#include "svi/errors.hpp"

namespace svi {

SoftConstraint SoftConstraint::affine(Vector a, Real b) {
  if (a.squaredNorm() == 0) throw UsageError("SoftConstraint::affine: zero normal");
  SoftConstraint c(Kind::Affine, HardSet::halfspace(a, b));
  c.a_ = std::move(a);
  c.b_ = b;
  c.subgrad_bound_ = c.a_.norm();
  return c;
}

SoftConstraint SoftConstraint::distance(HardSet set) {
  SoftConstraint c(Kind::Distance, std::move(set));
  c.subgrad_bound_ = 1.0;
  return c;
}

Eigen::Index SoftConstraint::dim() const { return set_.dim(); }

Real SoftConstraint::value(const Vector& x) const {
  switch (kind_) {
    case Kind::Affine:
      return a_.dot(x) - b_;
    case Kind::Distance:
      return set_.dist(x);
  }
  throw UsageError("SoftConstraint::value: unknown kind");
}

Vector SoftConstraint::subgradient(const Vector& x) const {
  switch (kind_) {
    case Kind::Affine:
      return a_;
    case Kind::Distance: {
      Vector p = set_.project(x);
      Real d = (x - p).norm();
      if (d == 0)
        throw std::logic_error(
            "SoftConstraint::subgradient: requested at a feasible point");
      return (x - p) / d;
    }
  }
  throw UsageError("SoftConstraint::subgradient: unknown kind");
}

}  // namespace svi
