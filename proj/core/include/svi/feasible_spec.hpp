#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "svi/block_vector.hpp"
#include "svi/hard_set.hpp"
#include "svi/rng.hpp"
#include "svi/soft_constraint.hpp"

namespace svi {

// Constraint structure X = X_0 ∩ (∩_i X_i), blockwise: each Cartesian
// component j has a hard set X_0^j with exact projection and an indexed
// family of soft constraints {g_i(j|.)}.
struct FeasibleSpec {
  std::vector<HardSet> hard;                          // X_0^j per block
  std::vector<std::vector<SoftConstraint>> soft;      // {g_i(j|.)} per block
  std::vector<std::optional<Real>> regularity_c;      // c^j when known
  // Exact projection onto X (metrics only); when absent, Dykstra is used.
  std::optional<std::function<BlockVector(const BlockVector&)>> exact_feasible_projection;

  int num_blocks() const { return static_cast<int>(hard.size()); }
  int num_soft(int j) const { return static_cast<int>(soft[static_cast<size_t>(j)].size()); }

  bool in_hard_set(const BlockVector& x, Real tol = 1e-10) const {
    for (int j = 0; j < num_blocks(); ++j)
      if (!hard[static_cast<size_t>(j)].contains(x.block(j), tol)) return false;
    return true;
  }

  // Largest single soft-constraint violation across blocks.
  Real max_violation(const BlockVector& x) const {
    Real v = 0;
    for (int j = 0; j < num_blocks(); ++j)
      for (const auto& g : soft[static_cast<size_t>(j)])
        v = std::max(v, g.positive_part(x.block(j)));
    return v;
  }

  void validate() const {
    if (hard.empty()) throw UsageError("FeasibleSpec: no blocks");
    if (soft.size() != hard.size())
      throw StructuralError("FeasibleSpec: soft/hard block count mismatch");
    if (!regularity_c.empty() && regularity_c.size() != hard.size())
      throw StructuralError("FeasibleSpec: regularity_c size mismatch");
  }
};

// Random control over soft-constraint indices, one distribution per block.
// The sampling is a single inverse-CDF lookup per draw so the consumed
// stream length does not depend on the outcome.
struct BlockControl {
  Vector probs;  // nonnegative, sums to 1

  int sample(RngStream& rng) const {
    Real u = rng.uniform01();
    Real acc = 0;
    int last = static_cast<int>(probs.size()) - 1;
    for (int i = 0; i < last; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return last;
  }
  Real min_prob() const { return probs.minCoeff(); }
  // lambda with P(omega = i) >= lambda / |I|.
  Real lambda() const { return min_prob() * static_cast<Real>(probs.size()); }
};

struct ControlSequence {
  std::vector<BlockControl> blocks;

  static ControlSequence uniform(const FeasibleSpec& spec) {
    ControlSequence c;
    for (int j = 0; j < spec.num_blocks(); ++j) {
      int m = spec.num_soft(j);
      if (m == 0) {
        c.blocks.push_back(BlockControl{Vector()});
      } else {
        c.blocks.push_back(
            BlockControl{Vector::Constant(m, 1.0 / static_cast<Real>(m))});
      }
    }
    return c;
  }
};

}  // namespace svi
