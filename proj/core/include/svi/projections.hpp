#pragma once

#include <vector>

#include "svi/feasible_spec.hpp"

namespace svi {

// Blockwise Euclidean projection onto the hard set X_0.
BlockVector project_hard(const FeasibleSpec& spec, const BlockVector& x);

// Incremental feasibility step
//   x2 = Pi_{X0}[ y - beta * g^+(y)/||d||^2 * d ],  d in subdiff g^+(y).
// When g^+(y) = 0 the displacement vanishes for any d, so y is returned
// unchanged and no subgradient is requested.
Vector feasibility_step(const Vector& y, const SoftConstraint& g, Real beta,
                        const HardSet& hard);

struct FeasStepCheck {
  Real lhs = 0;
  Real rhs = 0;
  bool holds = false;
};

// Evaluates both sides of the per-step decrease inequality
//   ||x2-x0||^2 <= ||x1-x0||^2 - 2a<x1-x0,u> + [1+tau b(2-b)] a^2 ||u||^2
//                  - (b(2-b)/C_g^2)(1-1/tau) (g^+(x1))^2,
// where y = Pi_{X0}[x1 - a u] and x2 is the feasibility step from y.
// Preconditions: x1, x0 in X_0 and g^+(x0) = 0.
FeasStepCheck check_feasstep_inequality(const Vector& x1, const Vector& u,
                                        const Vector& x0, const SoftConstraint& g,
                                        Real alpha, Real beta, Real tau,
                                        const HardSet& hard);

struct DykstraOptions {
  Real tol = 1e-10;
  int max_sweeps = 100000;
};

// Dykstra's alternating projection onto the intersection of the given sets.
// Used only for high-accuracy metric evaluation; throws ConvergenceError
// (carrying the best iterate) if the sweep cap is reached first.
Vector dykstra_project(const std::vector<HardSet>& sets, const Vector& x,
                       const DykstraOptions& opts = {});

// The sets of one block of the feasible spec: X_0^j plus every soft X_i^j.
std::vector<HardSet> block_sets(const FeasibleSpec& spec, int j);

}  // namespace svi
