#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svi/feasible_spec.hpp"
#include "svi/operator.hpp"
#include "svi/oracles.hpp"

namespace svi {

// A shipped test problem with analytically known solution structure and the
// constants the rate machinery needs.
struct ProblemCatalogEntry {
  std::string name;
  StochasticProblem problem;
  FeasibleSpec spec;
  BlockVector x0;
  std::vector<std::string> tags;
  std::string noise_model;

  std::optional<Real> rho;       // weak-sharpness modulus
  std::optional<Real> eta;       // metric regularity constant
  std::optional<Real> c_reg;     // c = eta |I| / lambda under uniform control
  std::optional<Real> C_F;       // bounded-operator constant
  Real L = 0;                    // Lipschitz constant of T
  Real C_g = 1;                  // uniform subgradient bound

  std::vector<Vector> polytope_vertices;      // LP problems
  std::optional<Eigen::MatrixXd> affine_A;    // T(x) = A x + b
  std::optional<Vector> affine_b;
  std::optional<GapDomain> gap_domain;

  // compact-case constants for the gap bound (when X is compact)
  std::optional<Real> diam_X, M_X, B_X;

  Real gap(const BlockVector& x) const {
    if (!affine_A || !gap_domain)
      throw UsageError("gap: problem does not support the gap oracle");
    return gap_value(*affine_A, *affine_b, *gap_domain, x.to_flat());
  }
};

// Linear stochastic program over a randomly rotated box in R^n described by
// num_halfspaces soft halfspace constraints (2n box facets plus optional
// random cuts). F(v,x) = c + v with bounded uniform noise; the unique optimal
// vertex is the solution set and rho is its normalized optimality gap,
// computed by vertex enumeration. Regenerates (up to 100 draws) until the
// optimal vertex is unique and well separated. hard_box_halfwidth > 0
// replaces X_0 = R^n with the box [-w, w]^n (which contains the polytope).
ProblemCatalogEntry make_weak_sharp_lp(int n, int num_halfspaces, Real noise_level,
                                       std::uint64_t seed,
                                       Real hard_box_halfwidth = 0);

// Unit-simplex variant: X_0 the probability hyperplane, soft constraints the
// n nonnegativity halfspaces, c = (0,1,...,1), X* = {e_1}, rho = 1/sqrt(2).
ProblemCatalogEntry make_weak_sharp_simplex_lp(int n, Real noise_level);

// Two-agent rotation operator T(x) = (-x_2, x_1) over [-1,1]^2: plainly
// monotone (skew, L = 1), not weak-sharp; X* = {0}.
ProblemCatalogEntry make_rotation_cartesian(Real noise_level);

// T(x) = (x_1 - x_2, x_2 - x_1) over [1,2] x [-2,2]: paramonotone with
// eigenvalues {0,2}; X* is the segment (1,1)-(2,2) and the least-norm
// solution is (1,1). m in {1,2} selects the block split.
ProblemCatalogEntry make_segment_solution_affine(Real noise_level, int m);

// Catalog lookup used by the experiment config.
ProblemCatalogEntry make_problem(const std::string& name,
                                 const std::map<std::string, std::string>& params);

}  // namespace svi
