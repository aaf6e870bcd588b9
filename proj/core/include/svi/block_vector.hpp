#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <span>
#include <vector>

#include "svi/errors.hpp"

namespace svi {

using Real = double;
using Vector = Eigen::VectorXd;

// Cartesian block structure of R^n = R^{n_1} x ... x R^{n_m}.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<Eigen::Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw UsageError("BlockLayout: need at least one block");
    for (auto d : dims_)
      if (d < 1) throw UsageError("BlockLayout: every block must be nonempty");
  }
  static BlockLayout single(Eigen::Index n) { return BlockLayout({n}); }

  int num_blocks() const { return static_cast<int>(dims_.size()); }
  Eigen::Index block_dim(int j) const { return dims_[static_cast<size_t>(j)]; }
  Eigen::Index total_dim() const {
    Eigen::Index n = 0;
    for (auto d : dims_) n += d;
    return n;
  }
  bool operator==(const BlockLayout& o) const { return dims_ == o.dims_; }
  bool operator!=(const BlockLayout& o) const { return dims_ != o.dims_; }

 private:
  std::vector<Eigen::Index> dims_;
};

// Point of R^n carrying its Cartesian decomposition x = (x_1, ..., x_m).
// The inner product is the sum of blockwise inner products. The centralized
// case is m = 1.
class BlockVector {
 public:
  BlockVector() = default;
  explicit BlockVector(std::vector<Vector> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw UsageError("BlockVector: no blocks");
    for (const auto& b : blocks_)
      if (b.size() == 0) throw UsageError("BlockVector: empty block");
  }
  // Single-block vector (m = 1).
  explicit BlockVector(Vector v) { blocks_.push_back(std::move(v)); }
  BlockVector(std::initializer_list<Real> coords)
      : BlockVector(Vector(Eigen::Map<const Vector>(coords.begin(),
                                                    static_cast<Eigen::Index>(coords.size())))) {}

  static BlockVector zero(const BlockLayout& layout) {
    std::vector<Vector> b;
    b.reserve(static_cast<size_t>(layout.num_blocks()));
    for (int j = 0; j < layout.num_blocks(); ++j)
      b.push_back(Vector::Zero(layout.block_dim(j)));
    return BlockVector(std::move(b));
  }
  static BlockVector from_flat(const BlockLayout& layout, const Vector& flat) {
    if (flat.size() != layout.total_dim())
      throw StructuralError("BlockVector::from_flat: size mismatch");
    std::vector<Vector> b;
    Eigen::Index off = 0;
    for (int j = 0; j < layout.num_blocks(); ++j) {
      b.push_back(flat.segment(off, layout.block_dim(j)));
      off += layout.block_dim(j);
    }
    return BlockVector(std::move(b));
  }

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const Vector& block(int j) const { return blocks_[static_cast<size_t>(j)]; }
  Vector& block(int j) { return blocks_[static_cast<size_t>(j)]; }
  BlockLayout layout() const {
    std::vector<Eigen::Index> d;
    d.reserve(blocks_.size());
    for (const auto& b : blocks_) d.push_back(b.size());
    return BlockLayout(std::move(d));
  }
  Eigen::Index total_dim() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks_) n += b.size();
    return n;
  }
  Vector to_flat() const {
    Vector f(total_dim());
    Eigen::Index off = 0;
    for (const auto& b : blocks_) {
      f.segment(off, b.size()) = b;
      off += b.size();
    }
    return f;
  }

  Real dot(const BlockVector& o) const {
    check_same_layout(o);
    Real s = 0;
    for (size_t j = 0; j < blocks_.size(); ++j) s += blocks_[j].dot(o.blocks_[j]);
    return s;
  }
  Real squared_norm() const {
    Real s = 0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return s;
  }
  Real norm() const { return std::sqrt(squared_norm()); }
  bool all_finite() const {
    for (const auto& b : blocks_)
      if (!b.allFinite()) return false;
    return true;
  }

  BlockVector& operator+=(const BlockVector& o) {
    check_same_layout(o);
    for (size_t j = 0; j < blocks_.size(); ++j) blocks_[j] += o.blocks_[j];
    return *this;
  }
  BlockVector& operator-=(const BlockVector& o) {
    check_same_layout(o);
    for (size_t j = 0; j < blocks_.size(); ++j) blocks_[j] -= o.blocks_[j];
    return *this;
  }
  BlockVector& operator*=(Real c) {
    for (auto& b : blocks_) b *= c;
    return *this;
  }
  friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
  friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
  friend BlockVector operator*(Real c, BlockVector a) { return a *= c; }

  void check_same_layout(const BlockVector& o) const {
    if (blocks_.size() != o.blocks_.size())
      throw StructuralError("BlockVector: block count mismatch");
    for (size_t j = 0; j < blocks_.size(); ++j)
      if (blocks_[j].size() != o.blocks_[j].size())
        throw StructuralError("BlockVector: block dimension mismatch");
  }

 private:
  std::vector<Vector> blocks_;
};

// Componentwise sum c_1 x^1 + ... + c_p x^p. All points must share one layout.
BlockVector linear_combine(std::span<const Real> coeffs,
                           std::span<const BlockVector> points);

// Scales block j by alpha_j: the block-diagonal action D(alpha) x.
// Equals plain scalar multiplication when all alpha_j coincide.
BlockVector block_scale(std::span<const Real> alpha, const BlockVector& x);

}  // namespace svi
