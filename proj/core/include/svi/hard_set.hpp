#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <memory>
#include <vector>

#include "svi/block_vector.hpp"

namespace svi {

// Closed convex set with an exact Euclidean projection. All kinds project in
// closed form (the simplex via sorting); there is no iterative solve here.
class HardSet {
 public:
  enum class Kind { FullSpace, Box, Ball, Halfspace, Affine, Simplex };

  static HardSet full_space(Eigen::Index dim);
  static HardSet box(Vector lo, Vector hi);
  static HardSet ball(Vector center, Real radius);
  // { x : <a, x> <= b }
  static HardSet halfspace(Vector a, Real b);
  // { x : <a_i, x> = b_i for all rows }
  static HardSet affine(Eigen::MatrixXd normals, Vector offsets);
  // standard simplex { x >= 0, sum x = 1 }
  static HardSet simplex(Eigen::Index dim);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }

  Vector project(const Vector& x) const;
  bool contains(const Vector& x, Real tol = 1e-12) const;
  Real dist(const Vector& x) const { return (x - project(x)).norm(); }

  // Diameter when bounded; +inf otherwise.
  Real diameter() const;

  const Vector& box_lo() const { return lo_; }
  const Vector& box_hi() const { return hi_; }

 private:
  HardSet(Kind k, Eigen::Index d) : kind_(k), dim_(d) {}

  Kind kind_;
  Eigen::Index dim_;
  Vector lo_, hi_;           // box
  Vector center_;            // ball
  Real radius_ = 0;          // ball
  Vector a_;                 // halfspace
  Real b_ = 0;               // halfspace
  Eigen::MatrixXd A_;        // affine rows
  Vector rhs_;               // affine offsets
  Eigen::LLT<Eigen::MatrixXd> AAt_;  // factorization of A A^T
};

// Blockwise projection onto the Cartesian hard set X_0 = X_0^1 x ... x X_0^m.
BlockVector project_blocks(const std::vector<HardSet>& hard, const BlockVector& x);

}  // namespace svi
