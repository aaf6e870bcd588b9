#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "svi/feasible_spec.hpp"
#include "svi/metrics.hpp"
#include "svi/operator.hpp"
#include "svi/schedule.hpp"

namespace svi {

// State of the regularized distributed method: per agent j,
//   y_j^k     = Pi_{X0^j}[x_j^k - alpha_{k,j}(F_j(v_j^k, x^k) + eps_{k,j} x_j^k)]
//   x_j^{k+1} = feasibility step from y_j^k on agent j's sampled constraint.
//
// Agents run a synchronous round (all read the same x^k); the asynchrony is
// in the per-agent parameters and controls, not in wall-clock interleaving.
//
// Ergodic accumulators: xtil (weights B_k over x^k) and xhat (weights
// alpha_{k,max} over the feasible projections Pi(x^k)). Without an exact
// feasible projection, Pi is expensive, so xhat mass is folded only at
// logging iterations using the accumulated weight since the previous fold.
struct TykState {
  std::int64_t k = 0;
  BlockVector x;
  std::vector<RngStream> rng_v;  // stream 2j   (operator, agent j)
  std::vector<RngStream> rng_w;  // stream 2j+1 (control, agent j)
  Real Zsum = 0;                 // sum B_i
  Real Ssum = 0;                 // folded sum alpha_{i,max}
  Real pending_mass = 0;         // alpha_max mass not yet folded into xhat
  BlockVector xtil;
  BlockVector xhat;
  bool xtil_includes_current = false;

  static TykState init(BlockVector x0, std::uint64_t seed);
};

void tyk_step(TykState& state, const StochasticProblem& problem,
              const FeasibleSpec& spec, const TykSchedule& schedule,
              const ControlSequence& control);

struct TykRunOptions {
  std::vector<std::int64_t> grid;  // empty -> log grid
  // Dual-gap evaluator for the logged xhat (supplied by the caller when the
  // problem supports the gap oracle).
  std::optional<std::function<Real(const BlockVector&)>> gap;
  bool record_points = false;  // save xhat^k at grid iterations
  bool validate_schedule = true;
};

RunRecord run_tyk(const StochasticProblem& problem, const FeasibleSpec& spec,
                  const TykSchedule& schedule, const ControlSequence& control,
                  std::int64_t k_max, std::uint64_t seed,
                  const BlockVector& x0, const TykRunOptions& opts = {});

// sigma_k = alpha_{k,min} eps_{k,min} - L (alpha_{k,max} - alpha_{k,min}).
Real sigma_k(const TykSchedule& schedule, std::int64_t k, Real L);

// Worst violation of <H_k(y)-H_k(x), y-x> >= sigma_k ||y-x||^2 over random
// pairs, for H_k = D(alpha_k)(T + D(eps_k)) with an exact mean operator.
// Nonpositive result (up to 1e-10) certifies the inequality on the sample.
Real eventual_strong_monotonicity_violation(
    const TykSchedule& schedule, std::int64_t k, Real L,
    const std::function<BlockVector(const BlockVector&)>& T,
    const BlockLayout& layout, int n_pairs, std::uint64_t seed);

// Constants feeding the regularized rate bounds. tau > 1 enters G_tau (the
// theorem text states tau in (0,1) but reuses G_tau = C C_g^2 tau/(tau-1),
// which requires tau > 1); mu in (0,1) is the separate splitting parameter.
struct TykRateConstants {
  Real tau = 1.5;
  Real mu = 0.5;
  Real L = 0;
  Real C = 1;          // max_j c^j
  Real C_g = 1;        // min_j C_g^j
  Real M_t = 0;        // sup ||t^k||
  Real B_t = 0;        // sup B(t^k)
  Real eps0_max = 0;
  // compact-case data
  Real diam_X = 0;
  Real M_X = 0;
  Real B_X = 0;
  Real B_xbar0 = 0;      // B(Pi(x^0))
  Real sigma_xbar0 = 0;  // sigma(Pi(x^0))

  Real G_tau() const { return C * C_g * C_g * tau / (tau - 1); }
};

enum class TykBoundMode { Feasibility, Gap };

// Evaluates the rate-theorem right-hand side at iteration k, divided by
// sum B_i (feasibility) or 2 sum alpha_{i,max} (gap). The per-iteration
// expectation series (E||x^i - t^i||^2 resp. E[dist(x^i)^2]) are supplied
// empirically; their negatively-weighted tail is clipped at zero, which
// keeps the result a valid upper bound.
Real tyk_rate_bounds(const TykRateConstants& consts, const TykSchedule& schedule,
                     std::int64_t k, TykBoundMode mode,
                     std::span<const Real> empirical_sq = {});

}  // namespace svi
