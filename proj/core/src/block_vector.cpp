#include "svi/block_vector.hpp"

namespace svi {

BlockVector linear_combine(std::span<const Real> coeffs,
                           std::span<const BlockVector> points) {
  if (coeffs.empty() || points.empty())
    throw UsageError("linear_combine: empty input");
  if (coeffs.size() != points.size())
    throw UsageError("linear_combine: coeffs/points length mismatch");
  BlockVector acc = points[0];
  acc *= coeffs[0];
  for (size_t i = 1; i < points.size(); ++i) {
    points[i].check_same_layout(acc);
    for (int j = 0; j < acc.num_blocks(); ++j)
      acc.block(j) += coeffs[i] * points[i].block(j);
  }
  return acc;
}

BlockVector block_scale(std::span<const Real> alpha, const BlockVector& x) {
  if (static_cast<int>(alpha.size()) != x.num_blocks())
    throw UsageError("block_scale: alpha length must equal number of blocks");
  for (Real a : alpha)
    if (!(a > 0)) throw UsageError("block_scale: alpha entries must be positive");
  BlockVector y = x;
  for (int j = 0; j < y.num_blocks(); ++j) y.block(j) *= alpha[static_cast<size_t>(j)];
  return y;
}

}  // namespace svi
