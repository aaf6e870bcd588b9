#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "svi/feasible_spec.hpp"
#include "svi/metrics.hpp"
#include "svi/operator.hpp"
#include "svi/schedule.hpp"

namespace svi {

// State of the centralized incremental constraint projection method
//   y^k     = Pi_{X0}[x^k - alpha_k F(v^k, x^k)]
//   x^{k+1} = feasibility step from y^k on the sampled soft constraint.
//
// Ergodic averages are maintained as streaming weighted means: xhat with
// weights alpha_i, xtil with weights B_i = beta_i(2-beta_i). Averages always
// include the current iterate x^k. A bounded history deque is kept only when
// windowed averages were requested.
struct WsState {
  std::int64_t k = 0;
  BlockVector x;
  Real S0k = 0;  // sum alpha_i, i <= k
  Real Z0k = 0;  // sum B_i
  Real a0k = 0;  // sum alpha_i^2
  Real b0k = 0;  // sum alpha_i^2 / B_i
  BlockVector xhat;
  BlockVector xtil;
  RngStream rng_v;  // operator samples
  RngStream rng_w;  // constraint controls
  bool averages_include_current = false;

  struct HistoryEntry {
    BlockVector x;
    Real alpha;
    Real B;
  };
  bool keep_history = false;
  std::deque<HistoryEntry> history;

  static WsState init(BlockVector x0, std::uint64_t seed, bool keep_history = false);
};

// Folds x^k into the ergodic sums with weights alpha_k and B_k. Idempotent
// per iteration; ws_step calls it, and callers inspecting averages between
// steps (windowed_average included) fold explicitly first.
void ws_fold_averages(WsState& state, const WsSchedule& schedule);

// Folds x^k into the ergodic sums (idempotent per k) and advances one
// iteration. Requires x^k in the hard set.
void ws_step(WsState& state, const StochasticProblem& problem,
             const FeasibleSpec& spec, const WsSchedule& schedule,
             const ControlSequence& control);

struct WsRunOptions {
  std::vector<std::int64_t> grid;  // empty -> log grid
  bool keep_history = false;
  bool record_points = false;  // save xhat^k at grid iterations
  // dual-gap evaluator for the logged xhat, when the problem supports it
  std::optional<std::function<Real(const BlockVector&)>> gap;
};

// Runs k_max steps recording dist(x^k,X*), dist(xhat^k,X*), dist(xtil^k,X)^2,
// S_0^k and Z_0^k on a logarithmic grid. Deterministic per seed.
RunRecord run_ws(const StochasticProblem& problem, const FeasibleSpec& spec,
                 const WsSchedule& schedule, const ControlSequence& control,
                 std::int64_t k_max, std::uint64_t seed,
                 const BlockVector& x0, const WsRunOptions& opts = {});

// Window-based ergodic average over iterates ceil(r k)..k; weights alpha_i,
// or B_i for the feasibility analog. Requires k >= 2/r and recorded history.
BlockVector windowed_average(const WsState& state, Real r, bool use_B_weights = false);

// Smallest natural k0 >= 2 with k0 >= exp[(2(1+tau) L^2 theta^2 /
// (lambda beta(2-beta) phi))^{1/lambda}] + 1.
std::int64_t compute_k0(Real tau, Real theta, Real L, Real beta, Real phi, Real lambda);

// Constants feeding the closed-form rate bounds. G_tau = c C_g^2 tau/(tau-1),
// H_tau = 2(1+tau), C(x) = rho + B(x).
struct WsRateConstants {
  Real tau = 1.5;
  Real phi = 0.5;
  std::int64_t k0 = 2;
  Real L = 0;
  Real rho = 0;
  Real C_g = 1;
  Real c = 1;
  Real C_F = 0;  // bounded case

  Real G_tau() const { return c * C_g * C_g * tau / (tau - 1); }
  Real H_tau() const { return 2 * (1 + tau); }
};

struct WsXStarData {
  Real dist_x0 = 0;      // ||x^0 - x*||
  Real B_xstar = 0;      // B(x*)
  Real max_early = 0;    // max_{k <= k0} E||x^k - x*||^2 (unbounded case)
};

enum class WsBoundForm {
  TheoremUnbounded,   // E_k(x*,k0,f,g)/S (needs L > 0)
  TheoremBounded,     // E_0^k[R,f,g]/S with R = dist(x^0, X*)
  CorollaryRobust,    // closed forms with Q (unbounded) / Qhat (bounded)
  CorollaryConstant,  // constant-stepsize error bounds
};

struct WsBounds {
  Real solvability = 0;  // bound on E[dist(xhat^k, X*)]
  Real feasibility = 0;  // bound on E[dist(xtil^k, X)^2]
};

// Evaluates the closed-form rate bounds at iteration k for the given
// schedule. CorollaryRobust in bounded mode uses Qhat; in unbounded mode
// (L > 0 with x-star data) uses Q built from I(x*, k0).
WsBounds ws_bounds(const WsRateConstants& consts, const WsXStarData& data,
                   std::int64_t k, WsBoundForm form, const WsSchedule& schedule,
                   bool bounded_operator = true);

struct WsValidationInputs {
  std::optional<Real> eta;  // metric regularity constant, when known
  int mc_points = 100;
  int mc_controls = 2000;
  std::uint64_t seed = 777;
  std::int64_t series_horizon = 1000000;
};

WsValidationReport validate_ws_assumptions(const StochasticProblem& problem,
                                           const FeasibleSpec& spec,
                                           const WsSchedule& schedule,
                                           const ControlSequence& control,
                                           const WsValidationInputs& in = {});

}  // namespace svi
