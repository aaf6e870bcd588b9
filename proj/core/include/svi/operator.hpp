#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "svi/block_vector.hpp"
#include "svi/rng.hpp"

namespace svi {

// One realization F(v, .) of the random operator, with Cartesian components
// F(v,x) = (F_1(v_1,x), ..., F_m(v_m,x)). evaluate() concatenates the block
// evaluations in block order.
class OperatorSample {
 public:
  virtual ~OperatorSample() = default;
  virtual Vector evaluate_block(int j, const BlockVector& x) const = 0;
  virtual int num_blocks() const = 0;

  BlockVector evaluate(const BlockVector& x) const {
    std::vector<Vector> blocks;
    blocks.reserve(static_cast<size_t>(num_blocks()));
    for (int j = 0; j < num_blocks(); ++j) blocks.push_back(evaluate_block(j, x));
    return BlockVector(std::move(blocks));
  }
};

using SamplePtr = std::unique_ptr<OperatorSample>;

// Exact projector onto the solution set X*, with optional sharpness data.
struct SolutionSpec {
  std::function<BlockVector(const BlockVector&)> project_onto_solution_set;
  std::optional<BlockVector> least_norm_solution;
  std::optional<Real> sharpness_rho;

  Real dist(const BlockVector& x) const {
    return (x - project_onto_solution_set(x)).norm();
  }
};

// SVI instance: a random operator accessed through seeded samples, with the
// mean operator T(x) = E[F(v,x)] optionally available in closed form.
//
// sample(rng) draws the full realization v = (v_1,...,v_m) from one stream
// (the centralized solver's contract); sample_block(j, rng) draws only v_j
// (the distributed solver's per-agent contract). For m = 1 the two coincide
// draw-for-draw.
struct StochasticProblem {
  BlockLayout layout;
  std::function<SamplePtr(RngStream&)> sample;
  std::function<SamplePtr(int, RngStream&)> sample_block;
  // T(.), when known exactly.
  std::optional<std::function<BlockVector(const BlockVector&)>> mean_operator;
  // L = sqrt(E[L(v)^2]) for the pathwise Lipschitz moduli.
  std::optional<Real> lipschitz_L;
  // C_F with sup_{x in X_0} E||F(v,x)||^2 <= 2 C_F^2.
  std::optional<Real> variance_bound;
  std::optional<SolutionSpec> known_solution_set;

  int num_blocks() const { return layout.num_blocks(); }
};

}  // namespace svi
