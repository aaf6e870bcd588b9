#include "svi/solver_tyk.hpp"

#include <chrono>
#include <cmath>

#include "svi/errors.hpp"
#include "svi/projections.hpp"

namespace svi {

TykState TykState::init(BlockVector x0, std::uint64_t seed) {
  TykState st;
  st.x = std::move(x0);
  st.xtil = BlockVector::zero(st.x.layout());
  st.xhat = BlockVector::zero(st.x.layout());
  const int m = st.x.num_blocks();
  for (int j = 0; j < m; ++j) {
    st.rng_v.emplace_back(seed, static_cast<std::uint64_t>(2 * j));
    st.rng_w.emplace_back(seed, static_cast<std::uint64_t>(2 * j + 1));
  }
  return st;
}

namespace {

void fold_xtil(TykState& st, const TykSchedule& schedule) {
  if (st.xtil_includes_current) return;
  const Real B = schedule.B(st.k);
  st.Zsum += B;
  for (int j = 0; j < st.x.num_blocks(); ++j)
    st.xtil.block(j) += (B / st.Zsum) * (st.x.block(j) - st.xtil.block(j));
  st.pending_mass += schedule.alpha_max(st.k);
  st.xtil_includes_current = true;
}

// Folds the accumulated alpha_max mass into xhat at the projection of the
// current iterate. Called every step when the projection is exact, else only
// at logging iterations.
void fold_xhat(TykState& st, const FeasibleSpec& spec) {
  if (st.pending_mass == 0) return;
  BlockVector px;
  if (spec.exact_feasible_projection) {
    px = (*spec.exact_feasible_projection)(st.x);
  } else {
    px = st.x;
    for (int j = 0; j < st.x.num_blocks(); ++j)
      px.block(j) = dykstra_project(block_sets(spec, j), st.x.block(j));
  }
  st.Ssum += st.pending_mass;
  for (int j = 0; j < st.x.num_blocks(); ++j)
    st.xhat.block(j) += (st.pending_mass / st.Ssum) * (px.block(j) - st.xhat.block(j));
  st.pending_mass = 0;
}

}  // namespace

void tyk_step(TykState& state, const StochasticProblem& problem,
              const FeasibleSpec& spec, const TykSchedule& schedule,
              const ControlSequence& control) {
  const int m = state.x.num_blocks();
  if (spec.num_blocks() != m || schedule.num_agents() != m)
    throw StructuralError("tyk_step: block count mismatch");

  for (int j = 0; j < m; ++j) {
    if (schedule.eps(state.k, j) > schedule.eps(state.k - 1, j) + 1e-15)
      throw ConfigError("tyk_step: regularization sequence must be decreasing");
    Real b = schedule.beta(state.k, j);
    if (!(b > 0 && b < 2)) throw ConfigError("tyk_step: beta outside (0,2)");
  }

  fold_xtil(state, schedule);
  if (spec.exact_feasible_projection) fold_xhat(state, spec);

  // All agents read the common snapshot x^k.
  BlockVector next = state.x;
  for (int j = 0; j < m; ++j) {
    const Real alpha = schedule.alpha(state.k, j);
    const Real beta = schedule.beta(state.k, j);
    const Real eps = schedule.eps(state.k, j);
    auto sample = problem.sample_block(j, state.rng_v[static_cast<size_t>(j)]);
    Vector dir = sample->evaluate_block(j, state.x);
    if (eps != 0) dir += eps * state.x.block(j);
    Vector y = spec.hard[static_cast<size_t>(j)].project(state.x.block(j) - alpha * dir);
    if (spec.num_soft(j) > 0) {
      int w = control.blocks[static_cast<size_t>(j)].sample(
          state.rng_w[static_cast<size_t>(j)]);
      y = feasibility_step(y, spec.soft[static_cast<size_t>(j)][static_cast<size_t>(w)],
                           beta, spec.hard[static_cast<size_t>(j)]);
    }
    next.block(j) = std::move(y);
  }
  state.x = std::move(next);
  ++state.k;
  state.xtil_includes_current = false;
}

RunRecord run_tyk(const StochasticProblem& problem, const FeasibleSpec& spec,
                  const TykSchedule& schedule, const ControlSequence& control,
                  std::int64_t k_max, std::uint64_t seed,
                  const BlockVector& x0, const TykRunOptions& opts) {
  if (k_max < 0) throw UsageError("run_tyk: k_max >= 0");
  if (opts.validate_schedule) {
    auto rep = validate_tyk_assumptions(schedule, 4096);
    if (!rep.all_pass)
      throw ConfigError(
          "run_tyk: schedule fails the coordination assumptions "
          "(pass validate_schedule=false to override)");
  }
  auto t0 = std::chrono::steady_clock::now();
  TykState st = TykState::init(project_hard(spec, x0), seed);

  std::vector<std::int64_t> grid = opts.grid.empty() ? log_grid(k_max) : opts.grid;
  size_t gi = 0;
  RunRecord rec;
  rec.seed = seed;
  rec.schedule_descriptor = schedule.descriptor();

  const bool has_sol = problem.known_solution_set.has_value();
  const bool has_lnorm =
      has_sol && problem.known_solution_set->least_norm_solution.has_value();
  for (std::int64_t k = 0; k <= k_max; ++k) {
    fold_xtil(st, schedule);
    while (gi < grid.size() && grid[gi] < k) ++gi;
    if (gi < grid.size() && grid[gi] == k) {
      fold_xhat(st, spec);
      rec.push(k);
      if (has_sol) rec.set("dist_sol", problem.known_solution_set->dist(st.x));
      if (has_lnorm)
        rec.set("dist_lnorm",
                (st.x - *problem.known_solution_set->least_norm_solution).norm());
      rec.set("feas_sq_erg", dist_to_feasible_sq(spec, st.xtil));
      if (opts.gap) rec.set("gap", (*opts.gap)(st.xhat));
      rec.set("S0k", st.Ssum);
      rec.set("Z0k", st.Zsum);
      if (opts.record_points) rec.points.emplace_back(k, st.xhat.to_flat());
      ++gi;
    }
    if (k == k_max) break;
    tyk_step(st, problem, spec, schedule, control);
    if (!st.x.all_finite())
      throw DivergenceError(st.k, "run_tyk: non-finite iterate");
  }
  rec.wall_time_sec =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  rec.validate();
  return rec;
}

Real sigma_k(const TykSchedule& schedule, std::int64_t k, Real L) {
  if (!(L >= 0)) throw UsageError("sigma_k: L >= 0");
  return schedule.alpha_min(k) * schedule.eps_min(k) - L * schedule.Delta(k);
}

Real eventual_strong_monotonicity_violation(
    const TykSchedule& schedule, std::int64_t k, Real L,
    const std::function<BlockVector(const BlockVector&)>& T,
    const BlockLayout& layout, int n_pairs, std::uint64_t seed) {
  RngStream rng(seed, 7);
  const Real sk = sigma_k(schedule, k, L);
  const int m = layout.num_blocks();
  Real worst = 0;
  auto H = [&](const BlockVector& x) {
    BlockVector Tx = T(x);
    for (int j = 0; j < m; ++j) {
      Tx.block(j) += schedule.eps(k, j) * x.block(j);
      Tx.block(j) *= schedule.alpha(k, j);
    }
    return Tx;
  };
  for (int p = 0; p < n_pairs; ++p) {
    BlockVector x = BlockVector::zero(layout), y = BlockVector::zero(layout);
    for (int j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < layout.block_dim(j); ++i) {
        x.block(j)[i] = rng.uniform(-3.0, 3.0);
        y.block(j)[i] = rng.uniform(-3.0, 3.0);
      }
    BlockVector d = y - x;
    Real lhs = (H(y) - H(x)).dot(d);
    Real gap = sk * d.squared_norm() - lhs;  // violation when positive
    worst = std::max(worst, gap);
  }
  return worst;
}

namespace {

struct TykTerms {
  Real H_k;      // 4[1 + tau beta_max (2 - beta_min)]
  Real q_k;      // q_{k,tau,mu}(L)
  Real am, amax, em, emax, Dk, Gk, Bk;
};

TykTerms terms_at(const TykRateConstants& c, const TykSchedule& s, std::int64_t k) {
  TykTerms t;
  t.am = s.alpha_min(k);
  t.amax = s.alpha_max(k);
  t.em = s.eps_min(k);
  t.emax = s.eps_max(k);
  t.Dk = s.Delta(k);
  t.Gk = s.Gamma(k);
  t.Bk = s.B(k);
  t.H_k = 4 * (1 + c.tau * s.beta_max(k) * (2 - s.beta_min(k)));
  t.q_k = 1 - 2 * (1 - c.mu) * t.am * t.em +
          t.H_k * (c.L * c.L + t.emax * t.emax) * t.amax * t.amax + 2 * c.L * t.Dk;
  return t;
}

}  // namespace

Real tyk_rate_bounds(const TykRateConstants& c, const TykSchedule& s,
                     std::int64_t k, TykBoundMode mode,
                     std::span<const Real> empirical_sq) {
  if (!(c.tau > 1)) throw UsageError("tyk_rate_bounds: tau > 1 (enters G_tau)");
  if (!(c.mu > 0 && c.mu < 1)) throw UsageError("tyk_rate_bounds: mu in (0,1)");
  const Real G = c.G_tau();

  Real Hbar = 0;
  for (std::int64_t i = 0; i <= k; ++i)
    Hbar = std::max(Hbar, terms_at(c, s, i).H_k);

  if (mode == TykBoundMode::Feasibility) {
    if (!(c.M_t >= 0) || !(c.B_t >= 0))
      throw UsageError("tyk_rate_bounds: M_t, B_t required");
    const Real I_t = c.B_t + c.eps0_max * c.M_t;
    const Real J_t = Hbar * (2 * c.B_t * c.B_t + c.eps0_max * c.eps0_max * c.M_t * c.M_t);
    Real sum_f = 0, sum_a2 = 0, sum_d = 0, sum_ab = 0, sum_g = 0, Z = 0;
    for (std::int64_t i = 0; i <= k; ++i) {
      auto t = terms_at(c, s, i);
      Real f_i = (i == 0) ? t.q_k * (1 + t.am * t.em) : t.q_k * (1 + t.am * t.em) - 1;
      Real e2 = (static_cast<size_t>(i) < empirical_sq.size())
                    ? empirical_sq[static_cast<size_t>(i)]
                    : 0.0;
      sum_f += std::max(f_i * e2, 0.0);
      sum_a2 += t.amax * t.amax;
      sum_d += t.Dk * t.Dk / (t.am * t.em);
      sum_ab += t.amax * t.amax / t.Bk;
      Real r = c.M_t * t.Gk / t.em;
      sum_g += t.q_k * r * r * (1 + 1 / (t.am * t.em));
      Z += t.Bk;
    }
    Real rhs = 2 * G * sum_f + 2 * G * J_t * sum_a2 + (G * I_t * I_t / c.mu) * sum_d +
               4 * G * G * I_t * I_t * sum_ab + 2 * G * sum_g;
    return rhs / Z;
  }

  // Gap mode (compact X).
  if (!(c.diam_X > 0)) throw UsageError("tyk_rate_bounds: diam_X required for gap mode");
  const Real I_X = c.B_X + c.eps0_max * c.M_X;
  const Real J_X = Hbar * (2 * c.L * c.L * c.diam_X * c.diam_X +
                           2 * c.B_xbar0 * c.B_xbar0 +
                           c.eps0_max * c.eps0_max * c.M_X * c.M_X);
  const Real K_X = 6 * c.L * c.L * c.diam_X * c.diam_X +
                   3 * c.sigma_xbar0 * c.sigma_xbar0;
  Real sum_h = 0, sum_a2 = 0, sum_ab = 0, sum_d = 0, sum_ae = 0, S = 0;
  for (std::int64_t i = 0; i <= k; ++i) {
    auto t = terms_at(c, s, i);
    Real h_i = (i == 0) ? t.q_k : t.q_k - 1;
    Real dist2 = (static_cast<size_t>(i) < empirical_sq.size())
                     ? empirical_sq[static_cast<size_t>(i)]
                     : 0.0;
    sum_h += std::max(h_i * (dist2 + c.diam_X * c.diam_X), 0.0);
    sum_a2 += t.amax * t.amax;
    sum_ab += t.amax * t.amax / t.Bk;
    sum_d += t.Dk * t.Dk / (t.am * t.em);
    sum_ae += t.amax * t.emax;
    S += t.amax;
  }
  const Real Ihat = I_X + 2 * c.L * c.diam_X;
  Real rhs = c.diam_X * c.diam_X + 2 * sum_h + (J_X + K_X) * sum_a2 +
             G * Ihat * Ihat * sum_ab + (I_X * I_X / (2 * c.mu)) * sum_d +
             2 * c.diam_X * c.M_X * sum_ae;
  return rhs / (2 * S);
}

}  // namespace svi
