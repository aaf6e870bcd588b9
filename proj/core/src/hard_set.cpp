#include "svi/hard_set.hpp"

#include <algorithm>
#include <limits>

#include "svi/errors.hpp"

namespace svi {

HardSet HardSet::full_space(Eigen::Index dim) { return HardSet(Kind::FullSpace, dim); }

HardSet HardSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw UsageError("HardSet::box: lo/hi size mismatch");
  if ((lo.array() > hi.array()).any()) throw UsageError("HardSet::box: lo > hi");
  HardSet s(Kind::Box, lo.size());
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

HardSet HardSet::ball(Vector center, Real radius) {
  if (!(radius > 0)) throw UsageError("HardSet::ball: radius must be positive");
  HardSet s(Kind::Ball, center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

HardSet HardSet::halfspace(Vector a, Real b) {
  if (a.squaredNorm() == 0) throw UsageError("HardSet::halfspace: zero normal");
  HardSet s(Kind::Halfspace, a.size());
  s.a_ = std::move(a);
  s.b_ = b;
  return s;
}

HardSet HardSet::affine(Eigen::MatrixXd normals, Vector offsets) {
  if (normals.rows() != offsets.size())
    throw UsageError("HardSet::affine: rows/offsets mismatch");
  if (normals.rows() == 0) throw UsageError("HardSet::affine: no rows");
  HardSet s(Kind::Affine, normals.cols());
  s.AAt_.compute(normals * normals.transpose());
  if (s.AAt_.info() != Eigen::Success)
    throw UsageError("HardSet::affine: rows must be linearly independent");
  s.A_ = std::move(normals);
  s.rhs_ = std::move(offsets);
  return s;
}

HardSet HardSet::simplex(Eigen::Index dim) {
  if (dim < 1) throw UsageError("HardSet::simplex: dim >= 1");
  return HardSet(Kind::Simplex, dim);
}

Vector HardSet::project(const Vector& x) const {
  if (x.size() != dim_) throw StructuralError("HardSet::project: dimension mismatch");
  switch (kind_) {
    case Kind::FullSpace:
      return x;
    case Kind::Box:
      return x.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::Ball: {
      Vector d = x - center_;
      Real n = d.norm();
      if (n <= radius_) return x;
      return center_ + (radius_ / n) * d;
    }
    case Kind::Halfspace: {
      Real viol = a_.dot(x) - b_;
      if (viol <= 0) return x;
      return x - (viol / a_.squaredNorm()) * a_;
    }
    case Kind::Affine:
      return x - A_.transpose() * AAt_.solve(A_ * x - rhs_);
    case Kind::Simplex: {
      // Sort-based projection onto { y >= 0, sum y = 1 }.
      std::vector<Real> u(x.data(), x.data() + x.size());
      std::sort(u.begin(), u.end(), std::greater<Real>());
      Real cssv = 0, theta = 0;
      for (Eigen::Index i = 0; i < dim_; ++i) {
        cssv += u[static_cast<size_t>(i)];
        Real t = (cssv - 1.0) / static_cast<Real>(i + 1);
        if (u[static_cast<size_t>(i)] - t > 0) theta = t;
      }
      return (x.array() - theta).max(0.0).matrix();
    }
  }
  throw UsageError("HardSet::project: unknown kind");
}

bool HardSet::contains(const Vector& x, Real tol) const {
  return (x - project(x)).norm() <= tol;
}

Real HardSet::diameter() const {
  switch (kind_) {
    case Kind::Box:
      return (hi_ - lo_).norm();
    case Kind::Ball:
      return 2 * radius_;
    case Kind::Simplex:
      return std::sqrt(2.0);
    default:
      return std::numeric_limits<Real>::infinity();
  }
}

BlockVector project_blocks(const std::vector<HardSet>& hard, const BlockVector& x) {
  if (static_cast<int>(hard.size()) != x.num_blocks())
    throw StructuralError("project_blocks: hard-set count != block count");
  BlockVector y = x;
  for (int j = 0; j < x.num_blocks(); ++j)
    y.block(j) = hard[static_cast<size_t>(j)].project(x.block(j));
  return y;
}

}  // namespace svi
