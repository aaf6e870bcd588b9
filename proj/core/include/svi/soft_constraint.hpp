#pragma once

#include <memory>
#include <optional>

#include "svi/hard_set.hpp"

namespace svi {

// Soft constraint X_i = { x : g_i(x) <= 0 }, accessed through g_i, its
// positive part, and a bounded subgradient oracle.
//
// Two representations:
//   affine:   g(x) = <a, x> - b           (X_i a halfspace; ||d|| = ||a||)
//   distance: g(x) = dist(x, S)           (S projectable; ||d|| <= 1)
class SoftConstraint {
 public:
  enum class Kind { Affine, Distance };

  static SoftConstraint affine(Vector a, Real b);
  static SoftConstraint distance(HardSet set);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const;

  Real value(const Vector& x) const;
  Real positive_part(const Vector& x) const { return std::max(value(x), 0.0); }

  // Subgradient of g^+ at x. Only meaningful where g^+(x) > 0; a valid convex
  // g^+ cannot have 0 as a subgradient there, and we fail loudly if the
  // oracle would produce one.
  Vector subgradient(const Vector& x) const;

  Real subgrad_bound() const { return subgrad_bound_; }

  // The set X_i itself, as a projectable hard set.
  const HardSet& as_set() const { return set_; }

 private:
  SoftConstraint(Kind k, HardSet set) : kind_(k), set_(std::move(set)) {}

  Kind kind_;
  HardSet set_;
  Vector a_;
  Real b_ = 0;
  Real subgrad_bound_ = 1;
};

}  // namespace svi
