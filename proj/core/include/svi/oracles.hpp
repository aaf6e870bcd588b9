#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

#include "svi/operator.hpp"
#include "svi/schedule.hpp"

namespace svi {

using FlatOperator = std::function<Vector(const Vector&)>;
using FlatProjector = std::function<Vector(const Vector&)>;

struct ExtragradientResult {
  Vector x;
  Real residual = 0;  // natural residual ||x - Pi[x - T(x)]||
  int iterations = 0;
};

// Korpelevich extragradient with constant stepsize alpha in (0, 1/L); the
// independent reference solver, used only on small instances.
ExtragradientResult extragradient_solve(const FlatOperator& T,
                                        const FlatProjector& project,
                                        Vector x0, Real alpha, Real tol = 1e-8,
                                        int cap = 2000000);

struct TykhonovPath {
  std::vector<std::int64_t> ks;
  std::vector<Vector> eps_snapshots;  // per-coordinate eps at each k
  std::vector<Vector> points;         // t^k
  std::vector<Real> residuals;        // regularized natural residuals
  Real M_t = 0;                       // max ||t^k|| over the computed prefix
  Real B_t = 0;                       // max B(t^k), when a B evaluator is given

  // ||t^k - t^{k-1}|| <= M_t (eps_{k-1,max} - eps_{k,min}) / eps_{k,min},
  // checked over consecutive computed ks. Returns the worst slack violation.
  Real path_bound_violation(const TykSchedule& schedule) const;
};

// Solves VI(T + D(eps_k), X) by extragradient at each requested k. The
// regularized operator is eps_min-strongly monotone, so each solve is fast;
// stepsize defaults to 0.9/(L + eps_max).
TykhonovPath tykhonov_path(const FlatOperator& T, const FlatProjector& project,
                           const BlockLayout& layout, const TykSchedule& schedule,
                           const std::vector<std::int64_t>& k_list, Real lipschitz_L,
                           const std::function<Real(const Vector&)>& B_eval = {},
                           Real tol = 1e-8);

// Compact feasible sets supported by the exact gap evaluation.
struct GapDomain {
  enum class Kind { Box, Vertices };
  Kind kind = Kind::Box;
  Vector lo, hi;                 // box
  std::vector<Vector> vertices;  // polytope via vertex list

  static GapDomain box(Vector lo, Vector hi);
  static GapDomain polytope(std::vector<Vector> vertices);
};

// Exact dual gap G(x) = sup_{y in X} <T(y), x - y> for affine T(y) = A y + b.
// Skew (or constant) operators make the objective linear in y: closed-form
// boxwise maximization or a vertex scan. A monotone symmetric part makes it
// concave quadratic: solved by face enumeration over the box.
Real gap_value(const Eigen::MatrixXd& A, const Vector& b, const GapDomain& X,
               const Vector& x);

struct IdentificationResult {
  bool in_solution_set = false;
  std::vector<Vector> minimizers;  // all tied LP vertices
  Vector objective;                // the Monte Carlo estimate of E[F(v, xhat)]
};

// Solves min_{x in X} <E[F(v, xhat)], x> by vertex enumeration and checks the
// minimizers against the solution set (distance <= 1e-8). n_samples = 0 uses
// the exact mean operator instead of Monte Carlo.
IdentificationResult identification_check(const StochasticProblem& problem,
                                          const std::vector<Vector>& vertices,
                                          const BlockVector& x_hat, int n_samples,
                                          const SolutionSpec& solution,
                                          std::uint64_t seed = 1234);

}  // namespace svi
