#include "svi/solver_ws.hpp"

#include <chrono>
#include <cmath>

#include "svi/errors.hpp"
#include "svi/projections.hpp"

namespace svi {

WsState WsState::init(BlockVector x0, std::uint64_t seed, bool keep_history) {
  WsState st;
  st.x = std::move(x0);
  st.xhat = BlockVector::zero(st.x.layout());
  st.xtil = BlockVector::zero(st.x.layout());
  st.rng_v = RngStream(seed, 0);
  st.rng_w = RngStream(seed, 1);
  st.keep_history = keep_history;
  return st;
}

// Folds x^k into the running averages with weights alpha_k and B_k.
void ws_fold_averages(WsState& st, const WsSchedule& schedule) {
  if (st.averages_include_current) return;
  const Real a = schedule.alpha(st.k);
  const Real B = schedule.B(st.k);
  st.S0k += a;
  st.Z0k += B;
  st.a0k += a * a;
  st.b0k += a * a / B;
  for (int j = 0; j < st.x.num_blocks(); ++j) {
    st.xhat.block(j) += (a / st.S0k) * (st.x.block(j) - st.xhat.block(j));
    st.xtil.block(j) += (B / st.Z0k) * (st.x.block(j) - st.xtil.block(j));
  }
  if (st.keep_history) st.history.push_back({st.x, a, B});
  st.averages_include_current = true;
}

void ws_step(WsState& state, const StochasticProblem& problem,
             const FeasibleSpec& spec, const WsSchedule& schedule,
             const ControlSequence& control) {
  if (spec.num_blocks() != 1)
    throw UsageError("ws_step: centralized method expects a single-block spec");
  const Real beta = schedule.beta(state.k);
  if (!(beta > 0 && beta < 2))
    throw ConfigError("ws_step: schedule produced beta outside (0,2)");

  ws_fold_averages(state, schedule);

  const Real alpha = schedule.alpha(state.k);
  auto sample = problem.sample(state.rng_v);
  BlockVector F = sample->evaluate(state.x);
  BlockVector y = state.x;
  y.block(0) = spec.hard[0].project(state.x.block(0) - alpha * F.block(0));

  if (spec.num_soft(0) > 0) {
    int w = control.blocks[0].sample(state.rng_w);
    y.block(0) = feasibility_step(y.block(0), spec.soft[0][static_cast<size_t>(w)],
                                  beta, spec.hard[0]);
  }
  state.x = std::move(y);
  ++state.k;
  state.averages_include_current = false;
}

RunRecord run_ws(const StochasticProblem& problem, const FeasibleSpec& spec,
                 const WsSchedule& schedule, const ControlSequence& control,
                 std::int64_t k_max, std::uint64_t seed,
                 const BlockVector& x0, const WsRunOptions& opts) {
  if (k_max < 0) throw UsageError("run_ws: k_max >= 0");
  auto t0 = std::chrono::steady_clock::now();
  WsState st = WsState::init(project_hard(spec, x0), seed, opts.keep_history);

  std::vector<std::int64_t> grid = opts.grid.empty() ? log_grid(k_max) : opts.grid;
  size_t gi = 0;
  RunRecord rec;
  rec.seed = seed;
  rec.schedule_descriptor = schedule.descriptor();

  const bool has_sol = problem.known_solution_set.has_value();
  for (std::int64_t k = 0; k <= k_max; ++k) {
    ws_fold_averages(st, schedule);
    while (gi < grid.size() && grid[gi] < k) ++gi;
    if (gi < grid.size() && grid[gi] == k) {
      rec.push(k);
      if (has_sol) {
        rec.set("dist_sol", problem.known_solution_set->dist(st.x));
        rec.set("dist_sol_erg", problem.known_solution_set->dist(st.xhat));
      }
      rec.set("feas_sq_erg", dist_to_feasible_sq(spec, st.xtil));
      if (opts.gap) rec.set("gap", (*opts.gap)(st.xhat));
      rec.set("S0k", st.S0k);
      rec.set("Z0k", st.Z0k);
      if (opts.record_points) rec.points.emplace_back(k, st.xhat.to_flat());
      ++gi;
    }
    if (k == k_max) break;
    ws_step(st, problem, spec, schedule, control);
    if (!st.x.all_finite())
      throw DivergenceError(st.k, "run_ws: non-finite iterate");
  }
  rec.wall_time_sec =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  rec.validate();
  return rec;
}

BlockVector windowed_average(const WsState& state, Real r, bool use_B_weights) {
  if (!(r > 0 && r < 1)) throw UsageError("windowed_average: r in (0,1)");
  if (static_cast<Real>(state.k) < 2.0 / r)
    throw UsageError("windowed_average: k too small for window");
  if (!state.keep_history || state.history.empty())
    throw UsageError("windowed_average: history not recorded");
  const std::int64_t k = state.averages_include_current ? state.k : state.k - 1;
  const std::int64_t ell =
      static_cast<std::int64_t>(std::ceil(r * static_cast<Real>(k)));
  BlockVector acc = BlockVector::zero(state.x.layout());
  Real wsum = 0;
  for (std::int64_t i = ell; i <= k; ++i) {
    const auto& h = state.history[static_cast<size_t>(i)];
    Real w = use_B_weights ? h.B : h.alpha;
    wsum += w;
    for (int j = 0; j < acc.num_blocks(); ++j)
      acc.block(j) += w * h.x.block(j);
  }
  acc *= 1.0 / wsum;
  return acc;
}

std::int64_t compute_k0(Real tau, Real theta, Real L, Real beta, Real phi, Real lambda) {
  if (!(tau > 1)) throw UsageError("compute_k0: tau > 1");
  if (!(theta > 0)) throw UsageError("compute_k0: theta > 0");
  if (!(L >= 0)) throw UsageError("compute_k0: L >= 0");
  if (!(beta > 0 && beta < 2)) throw UsageError("compute_k0: beta in (0,2)");
  if (!(phi > 0 && phi < 1)) throw UsageError("compute_k0: phi in (0,1)");
  if (!(lambda > 0)) throw UsageError("compute_k0: lambda > 0");
  const Real inner = 2 * (1 + tau) * L * L * theta * theta /
                     (lambda * beta * (2 - beta) * phi);
  const Real threshold = std::exp(std::pow(inner, 1.0 / lambda)) + 1.0;
  if (!std::isfinite(threshold))
    throw UsageError("compute_k0: threshold overflows");
  const Real c = std::ceil(threshold);
  return std::max<std::int64_t>(2, static_cast<std::int64_t>(c));
}

namespace {

// 2 + 1/(2 (ln 2)^{1+lambda}) + 1/(lambda (ln 2)^lambda): the robust
// schedule's bound on a_0^inf / theta^2.
Real robust_sum_factor(Real lambda) {
  const Real l2 = std::log(2.0);
  return 2.0 + 1.0 / (2.0 * std::pow(l2, 1 + lambda)) +
         1.0 / (lambda * std::pow(l2, lambda));
}

}  // namespace

WsBounds ws_bounds(const WsRateConstants& consts, const WsXStarData& data,
                   std::int64_t k, WsBoundForm form, const WsSchedule& schedule,
                   bool bounded_operator) {
  if (!(consts.tau > 1)) throw UsageError("ws_bounds: tau > 1");
  const Real G = consts.G_tau();
  const Real H = consts.H_tau();
  const Real rho = consts.rho;
  if (!(rho > 0)) throw UsageError("ws_bounds: rho > 0 required for bounds");
  const Real beta = schedule.beta(0);
  const Real Bconst = beta * (2 - beta);
  const Real theta = schedule.theta();
  WsBounds out;

  switch (form) {
    case WsBoundForm::TheoremUnbounded: {
      if (!(consts.L > 0)) throw UsageError("ws_bounds: unbounded form needs L > 0");
      const Real C = rho + data.B_xstar;
      const Real I =
          (data.max_early +
           (G / H * C * C / (consts.L * consts.L) +
            data.B_xstar * data.B_xstar / (consts.L * consts.L)) *
               consts.phi) /
          (1 - consts.phi);
      auto sums = schedule.sums_to(k);
      auto E = [&](Real f, Real g) {
        return f * (data.dist_x0 * data.dist_x0 +
                    (I * consts.L * consts.L + data.B_xstar * data.B_xstar) * H * sums.a +
                    g * G * C * C * sums.b);
      };
      out.solvability = E(1 / (2 * rho), 1) / sums.S;
      out.feasibility = E(2 * G, 2) / sums.Z;
      return out;
    }
    case WsBoundForm::TheoremBounded: {
      const Real rC = rho + std::sqrt(2.0) * consts.C_F;
      auto sums = schedule.sums_to(k);
      auto E = [&](Real R, Real f, Real g) {
        return f * (R * R + g * G * rC * rC * sums.b +
                    H * consts.C_F * consts.C_F * sums.a);
      };
      out.solvability = E(data.dist_x0, 1 / (2 * rho), 1) / sums.S;
      out.feasibility = E(data.dist_x0, 2 * G, 2) / sums.Z;
      return out;
    }
    case WsBoundForm::CorollaryRobust: {
      if (schedule.kind() != WsSchedule::Kind::Robust)
        throw UsageError("ws_bounds: CorollaryRobust needs a robust schedule");
      if (k < 2) throw UsageError("ws_bounds: corollary forms need k >= 2");
      const Real lambda = schedule.lambda();
      const Real P = robust_sum_factor(lambda);
      Real Jsol, Jfeas;
      if (bounded_operator) {
        const Real rC = rho + std::sqrt(2.0) * consts.C_F;
        auto Jhat = [&](Real g) {
          return H * consts.C_F * consts.C_F + g * G * rC * rC / Bconst;
        };
        Jsol = Jhat(1);
        Jfeas = Jhat(2);
      } else {
        if (!(consts.L > 0))
          throw UsageError("ws_bounds: unbounded corollary needs L > 0");
        const Real C = rho + data.B_xstar;
        const Real I =
            (data.max_early +
             (G / H * C * C / (consts.L * consts.L) +
              data.B_xstar * data.B_xstar / (consts.L * consts.L)) *
                 consts.phi) /
            (1 - consts.phi);
        auto J = [&](Real g) {
          return (I * consts.L * consts.L + data.B_xstar * data.B_xstar) * H +
                 g * G * C * C / Bconst;
        };
        Jsol = J(1);
        Jfeas = J(2);
      }
      const Real Qsol = data.dist_x0 * data.dist_x0 + Jsol * theta * theta * P;
      const Real Qfeas = data.dist_x0 * data.dist_x0 + Jfeas * theta * theta * P;
      const Real kk = static_cast<Real>(k);
      out.solvability = std::max(theta, 1 / theta) / (2 * rho) *
                        std::pow(std::log(kk), (1 + lambda) / 2) / std::sqrt(kk + 1) *
                        Qsol;
      out.feasibility =
          2 * G * std::max(1.0, theta * theta) / Bconst * Qfeas / (kk + 1);
      return out;
    }
    case WsBoundForm::CorollaryConstant: {
      if (schedule.kind() != WsSchedule::Kind::Constant &&
          schedule.kind() != WsSchedule::Kind::Horizon)
        throw UsageError("ws_bounds: CorollaryConstant needs a constant-type schedule");
      const Real alpha = schedule.alpha(k);
      const Real rC = rho + std::sqrt(2.0) * consts.C_F;
      auto Jhat = [&](Real g) {
        return H * consts.C_F * consts.C_F + g * G * rC * rC / Bconst;
      };
      const Real kk = static_cast<Real>(k);
      out.solvability = 1 / (2 * rho) *
                        (data.dist_x0 * data.dist_x0 / (alpha * (kk + 1)) +
                         Jhat(1) * alpha);
      out.feasibility = 2 * G / Bconst *
                        (data.dist_x0 * data.dist_x0 / (kk + 1) +
                         Jhat(2) * alpha * alpha);
      return out;
    }
  }
  throw UsageError("ws_bounds: unknown form");
}

WsValidationReport validate_ws_assumptions(const StochasticProblem& problem,
                                           const FeasibleSpec& spec,
                                           const WsSchedule& schedule,
                                           const ControlSequence& control,
                                           const WsValidationInputs& in) {
  (void)problem;
  WsValidationReport rep;

  // Partial sums with analytic verdicts per schedule kind.
  auto sums = schedule.sums_to(std::min<std::int64_t>(in.series_horizon, 1000000));
  const bool robust = schedule.kind() == WsSchedule::Kind::Robust;
  const bool constant = schedule.kind() == WsSchedule::Kind::Constant ||
                        schedule.kind() == WsSchedule::Kind::Horizon;
  rep.series.push_back({"sum alpha", sums.S, /*converges=*/false, robust || constant});
  rep.series.push_back({"sum alpha^2", sums.a, robust, robust || constant});
  rep.series.push_back({"sum alpha^2/B", sums.b, robust, robust || constant});
  if (constant) {
    rep.asymptotics_applicable = false;
    rep.warnings.push_back(
        "constant stepsizes: sum alpha^2 diverges; asymptotic theory "
        "inapplicable, error-bound mode only");
  }

  if (!control.blocks.empty() && control.blocks[0].probs.size() > 0) {
    rep.control_min_prob = control.blocks[0].min_prob();
    rep.control_lambda = control.blocks[0].lambda();
  }

  if (in.eta) {
    int I = spec.num_soft(0);
    rep.c_from_eta = *in.eta * static_cast<Real>(I) /
                     std::max(rep.control_lambda, 1e-300);
  }

  // Regularity probe: worst ratio dist(x,X)^2 / E_omega[g^+(x)^2] over random
  // hard-feasible points. The omega-expectation is exact (distribution known).
  RngStream rng(in.seed, 2);
  Real worst = 0;
  const Eigen::Index n = spec.hard[0].dim();
  Vector ref = spec.hard[0].project(Vector::Zero(n));
  for (int p = 0; p < in.mc_points; ++p) {
    Vector dir(n);
    for (Eigen::Index i = 0; i < n; ++i) dir[i] = rng.uniform(-1.0, 1.0);
    Real radius = std::pow(10.0, rng.uniform(-1.0, 1.0));
    Vector x = spec.hard[0].project(ref + radius * dir);
    Real mean_g2 = 0;
    const auto& probs = control.blocks[0].probs;
    for (int i = 0; i < spec.num_soft(0); ++i) {
      Real g = spec.soft[0][static_cast<size_t>(i)].positive_part(x);
      mean_g2 += probs[i] * g * g;
    }
    if (mean_g2 <= 1e-30) continue;
    BlockVector bx(x);
    Real d2 = dist_to_feasible_sq(spec, bx);
    worst = std::max(worst, d2 / mean_g2);
  }
  rep.regularity_c_estimate = worst;
  return rep;
}

}  // namespace svi
