#include <doctest.h>

#include <cmath>

#include "svi/oracles.hpp"
#include "svi/problems.hpp"
#include "svi/projections.hpp"
#include "svi/solver_ws.hpp"

using namespace svi;

namespace {

class FixedSample : public OperatorSample {
 public:
  FixedSample(std::function<Vector(int, const BlockVector&)> f, int m)
      : f_(std::move(f)), m_(m) {}
  Vector evaluate_block(int j, const BlockVector& x) const override {
    return f_(j, x);
  }
  int num_blocks() const override { return m_; }

 private:
  std::function<Vector(int, const BlockVector&)> f_;
  int m_;
};

// Deterministic problem with F(v, x) = f(x) (no randomness).
StochasticProblem deterministic_problem(BlockLayout layout,
                                        std::function<Vector(int, const BlockVector&)> f) {
  StochasticProblem p;
  p.layout = layout;
  const int m = layout.num_blocks();
  p.sample = [f, m](RngStream&) -> SamplePtr {
    return std::make_unique<FixedSample>(f, m);
  };
  p.sample_block = [f, m](int, RngStream&) -> SamplePtr {
    return std::make_unique<FixedSample>(f, m);
  };
  p.mean_operator = [f, m](const BlockVector& x) {
    std::vector<Vector> blocks;
    for (int j = 0; j < m; ++j) blocks.push_back(f(j, x));
    return BlockVector(std::move(blocks));
  };
  p.lipschitz_L = 1.0;
  return p;
}

FeasibleSpec free_spec(Eigen::Index n) {
  FeasibleSpec s;
  s.hard.push_back(HardSet::full_space(n));
  s.soft.emplace_back();
  return s;
}

}  // namespace

TEST_CASE("ws_step: null field fixes feasible points") {
  auto p = deterministic_problem(BlockLayout::single(2),
                                 [](int, const BlockVector&) { return Vector::Zero(2); });
  FeasibleSpec spec = free_spec(2);
  spec.soft[0].push_back(SoftConstraint::affine((Vector(2) << 1, 0).finished(), 1.0));
  auto control = ControlSequence::uniform(spec);
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  WsState st = WsState::init(BlockVector{0.2, 0.4}, 1);
  BlockVector x0 = st.x;
  ws_step(st, p, spec, sched, control);
  CHECK((st.x - x0).norm() == 0);
}

TEST_CASE("ws_step: F(v,x) = x contracts by (1 - theta)") {
  auto p = deterministic_problem(BlockLayout::single(3),
                                 [](int, const BlockVector& x) { return x.block(0); });
  FeasibleSpec spec = free_spec(3);
  auto control = ControlSequence::uniform(spec);
  const Real theta = 0.3;
  auto sched = WsSchedule::robust(theta, 2.0, 1.0);
  WsState st = WsState::init(BlockVector{1, -2, 0.5}, 7);
  BlockVector x0 = st.x;
  ws_step(st, p, spec, sched, control);
  CHECK((st.x - (1 - theta) * x0).norm() <= 1e-15);
}

TEST_CASE("ws trajectory matches the exact clip recursion in 1-D") {
  // T(x) = x - 1, X = [0,5] via one distance-kind soft constraint, beta = 1:
  // x^{k+1} = clip(x^k - alpha_k (x^k - 1)).
  auto p = deterministic_problem(BlockLayout::single(1), [](int, const BlockVector& x) {
    return Vector::Constant(1, x.block(0)[0] - 1.0);
  });
  FeasibleSpec spec = free_spec(1);
  spec.soft[0].push_back(SoftConstraint::distance(
      HardSet::box(Vector::Zero(1), Vector::Constant(1, 5.0))));
  auto control = ControlSequence::uniform(spec);
  auto sched = WsSchedule::robust(0.8, 2.0, 1.0);
  WsState st = WsState::init(BlockVector{4.7}, 3);
  Real ref = 4.7;
  for (std::int64_t k = 0; k < 60; ++k) {
    ws_step(st, p, spec, sched, control);
    ref = ref - sched.alpha(k) * (ref - 1.0);
    ref = std::min(std::max(ref, 0.0), 5.0);
    CHECK(st.x.block(0)[0] == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK(std::abs(st.x.block(0)[0] - 1.0) < 0.5);  // converging toward 1
}

TEST_CASE("run_ws: empty run, determinism, decreasing trend") {
  auto e = make_weak_sharp_lp(4, 8, 0.8, 6);
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  auto control = ControlSequence::uniform(e.spec);

  auto rec0 = run_ws(e.problem, e.spec, sched, control, 0, 5, e.x0);
  CHECK(rec0.grid == std::vector<std::int64_t>{0});

  auto r1 = run_ws(e.problem, e.spec, sched, control, 2000, 5, e.x0);
  auto r2 = run_ws(e.problem, e.spec, sched, control, 2000, 5, e.x0);
  CHECK(r1.grid == r2.grid);
  for (const auto& [name, vals] : r1.series)
    for (size_t i = 0; i < vals.size(); ++i) CHECK(vals[i] == r2.series.at(name)[i]);

  // trend toward the solution, and end closer than start
  const auto& ds = r1.series.at("dist_sol");
  CHECK(ds.back() < 0.5 * ds.front());

  // the extragradient oracle on the same instance lands on the catalog vertex
  Vector c = *e.affine_b;
  auto T = [&c](const Vector& x) -> Vector {
    (void)x;
    return c;
  };
  const auto& entry = e;
  auto proj = [&entry](const Vector& x) -> Vector {
    return (*entry.spec.exact_feasible_projection)(BlockVector(x)).block(0);
  };
  auto ora = extragradient_solve(T, proj, e.x0.block(0), 0.5, 1e-9);
  CHECK((ora.x - e.problem.known_solution_set->least_norm_solution->block(0)).norm() <=
        1e-6);
}

TEST_CASE("iterates stay in the hard set") {
  auto e = make_weak_sharp_lp(4, 8, 1.0, 9, /*hard_box_halfwidth=*/1.0);
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  auto control = ControlSequence::uniform(e.spec);
  WsState st = WsState::init(project_hard(e.spec, e.x0), 11);
  for (int k = 0; k < 500; ++k) {
    ws_step(st, e.problem, e.spec, sched, control);
    CHECK(e.spec.hard[0].contains(st.x.block(0), 1e-9));
  }
}

TEST_CASE("windowed averages") {
  auto p = deterministic_problem(BlockLayout::single(2),
                                 [](int, const BlockVector&) { return Vector::Zero(2); });
  FeasibleSpec spec = free_spec(2);
  auto control = ControlSequence::uniform(spec);
  auto sched = WsSchedule::constant(0.1, 1.0);

  // constant sequence: every window average equals the constant point
  WsState st = WsState::init(BlockVector{2, -1}, 1, /*keep_history=*/true);
  for (int k = 0; k < 10; ++k) ws_step(st, p, spec, sched, control);
  BlockVector w = windowed_average(st, 0.5);
  CHECK((w - st.x).norm() <= 1e-15);

  // drifting sequence with equal weights: mean of x^2, x^3, x^4 at k=4, r=0.5
  auto drift = deterministic_problem(BlockLayout::single(1), [](int, const BlockVector&) {
    return Vector::Constant(1, -1.0);  // x^{k+1} = x^k + alpha
  });
  WsState st2 = WsState::init(BlockVector{0.0}, 1, true);
  for (int k = 0; k < 4; ++k) ws_step(st2, p = drift, spec = free_spec(1), sched,
                                      control = ControlSequence::uniform(spec));
  ws_fold_averages(st2, sched);  // bring x^4 into the history
  // iterates: x^0..x^4 = 0, .1, .2, .3, .4
  BlockVector w2 = windowed_average(st2, 0.5);
  CHECK(w2.block(0)[0] == doctest::Approx((0.2 + 0.3 + 0.4) / 3).epsilon(1e-12));

  // the B-weighted window uses the feasibility weights; with beta = 1 both
  // weight families are constant and the two windows coincide
  BlockVector w3 = windowed_average(st2, 0.5, /*use_B_weights=*/true);
  CHECK(w3.block(0)[0] == doctest::Approx(w2.block(0)[0]).epsilon(1e-14));

  CHECK_THROWS_AS(windowed_average(st2, 0.4), UsageError);  // k < 2/r
}

TEST_CASE("compute_k0 examples") {
  CHECK(compute_k0(1.5, 1, 1, 1, 0.5, 2) == 11);
  // lambda -> inf: inner power -> 1, threshold -> e + 1
  CHECK(compute_k0(1.5, 1, 1, 1, 0.5, 1e6) == 4);
  // doubling theta: exp(sqrt(20)) + 1 in (88, 89]
  CHECK(compute_k0(1.5, 2, 1, 1, 0.5, 2) == 89);
  // L = 0: threshold collapses to 2
  CHECK(compute_k0(1.5, 1, 0, 1, 0.5, 2) == 2);
  CHECK_THROWS_AS(compute_k0(0.9, 1, 1, 1, 0.5, 2), UsageError);
}

TEST_CASE("ws_bounds formula agreement") {
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  WsRateConstants c;
  c.tau = 1.5;
  c.rho = 0.3;
  c.c = 12.0;
  c.C_g = 1.0;
  c.C_F = 0.7;
  WsXStarData d;
  d.dist_x0 = 1.4;

  SUBCASE("theorem bounded form equals an independent evaluation") {
    const std::int64_t k = 500;
    auto b = ws_bounds(c, d, k, WsBoundForm::TheoremBounded, sched);
    // spreadsheet-style re-evaluation
    Real S = 0, Z = 0, a2 = 0, bb = 0;
    for (std::int64_t i = 0; i <= k; ++i) {
      Real al = sched.alpha(i);
      S += al;
      Z += 1.0;
      a2 += al * al;
      bb += al * al;
    }
    Real G = 12.0 * 1.5 / 0.5, H = 5.0;
    Real rc = 0.3 + std::sqrt(2.0) * 0.7;
    Real Esol = (1 / (2 * 0.3)) * (1.4 * 1.4 + 1.0 * G * rc * rc * bb + H * 0.49 * a2);
    Real Efeas = (2 * G) * (1.4 * 1.4 + 2.0 * G * rc * rc * bb + H * 0.49 * a2);
    CHECK(b.solvability == doctest::Approx(Esol / S).epsilon(1e-12));
    CHECK(b.feasibility == doctest::Approx(Efeas / Z).epsilon(1e-12));
  }

  SUBCASE("tiny stepsizes reduce the bound to f R^2 / S") {
    auto tiny = WsSchedule::custom(std::vector<Real>(1000, 1e-12), 1.0);
    auto b = ws_bounds(c, d, 999, WsBoundForm::TheoremBounded, tiny);
    Real S = 1e-12 * 1000;
    CHECK(b.solvability ==
          doctest::Approx((1 / (2 * 0.3)) * 1.4 * 1.4 / S).epsilon(1e-6));
  }

  SUBCASE("constant-stepsize corollary form") {
    auto cs = WsSchedule::constant(0.05, 1.0);
    auto b = ws_bounds(c, d, 200, WsBoundForm::CorollaryConstant, cs);
    Real G = 12.0 * 1.5 / 0.5, H = 5.0;
    Real rc = 0.3 + std::sqrt(2.0) * 0.7;
    Real Jhat1 = H * 0.49 + 1.0 * G * rc * rc;
    Real expect = 1 / (2 * 0.3) * (1.4 * 1.4 / (0.05 * 201) + Jhat1 * 0.05);
    CHECK(b.solvability == doctest::Approx(expect).epsilon(1e-12));
    Real Jhat2 = H * 0.49 + 2.0 * G * rc * rc;
    Real expect_f = 2 * G * (1.4 * 1.4 / 201.0 + Jhat2 * 0.05 * 0.05);
    CHECK(b.feasibility == doctest::Approx(expect_f).epsilon(1e-12));
  }

  SUBCASE("parameter validation") {
    WsRateConstants bad = c;
    bad.tau = 1.0;
    CHECK_THROWS_AS(ws_bounds(bad, d, 10, WsBoundForm::TheoremBounded, sched),
                    UsageError);
  }
}

TEST_CASE("validate_ws_assumptions") {
  auto e = make_weak_sharp_lp(4, 8, 0.5, 21);
  auto control = ControlSequence::uniform(e.spec);

  auto robust = WsSchedule::robust(1.0, 1.0, 1.0);
  WsValidationInputs in;
  in.eta = 3.0;
  in.series_horizon = 100000;
  auto rep = validate_ws_assumptions(e.problem, e.spec, robust, control, in);
  REQUIRE(rep.series.size() == 3);
  CHECK_FALSE(rep.series[0].converges);  // sum alpha diverges
  CHECK(rep.series[1].converges);        // sum alpha^2 finite
  CHECK(rep.series[2].converges);
  CHECK(rep.asymptotics_applicable);
  CHECK(rep.control_lambda == doctest::Approx(1.0));
  // c = eta |I| / lambda = 3 * 8
  CHECK(*rep.c_from_eta == doctest::Approx(24.0));
  // the Monte Carlo estimate must respect the declared constant
  CHECK(rep.regularity_c_estimate <= *e.c_reg * 1.05);

  auto constant = WsSchedule::constant(0.1, 1.0);
  auto rep2 = validate_ws_assumptions(e.problem, e.spec, constant, control, in);
  CHECK_FALSE(rep2.asymptotics_applicable);
  CHECK_FALSE(rep2.warnings.empty());
}

TEST_CASE("weak-sharp recursion holds in the Monte Carlo mean") {
  auto e = make_weak_sharp_lp(3, 6, 0.5, 13);
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  auto control = ControlSequence::uniform(e.spec);
  const Real tau = 1.5;
  const Real rho = *e.rho;
  const Real sigma2 = 3 * 0.5 * 0.5 / 3.0;
  const Real Bstar = std::sqrt(e.affine_b->squaredNorm() + sigma2);
  const Real Cstar = rho + Bstar;
  const std::int64_t k = 5;
  const Real alpha = sched.alpha(k);
  const Real Bk = sched.B(k);
  const Real Ak = Bk * (tau - 1) / (*e.c_reg * tau);
  const auto& sol = *e.problem.known_solution_set;

  std::vector<Real> diffs;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    WsState st = WsState::init(project_hard(e.spec, e.x0), seed);
    for (std::int64_t i = 0; i < k; ++i) ws_step(st, e.problem, e.spec, sched, control);
    BlockVector xk = st.x;
    ws_step(st, e.problem, e.spec, sched, control);
    Real lhs = std::pow(sol.dist(st.x), 2);
    // L = 0 for the constant operator, so the contraction factor is 1
    Real rhs = std::pow(sol.dist(xk), 2) - 2 * rho * alpha * sol.dist(xk) +
               (Cstar * Cstar / Ak + 2 * (1 + Bk * tau) * Bstar * Bstar) * alpha * alpha;
    diffs.push_back(lhs - rhs);
  }
  Real mean = 0;
  for (Real d : diffs) mean += d;
  mean /= static_cast<Real>(diffs.size());
  Real var = 0;
  for (Real d : diffs) var += (d - mean) * (d - mean);
  Real se = std::sqrt(var / (diffs.size() * (diffs.size() - 1.0)));
  CHECK(mean <= 3 * se);
}

TEST_CASE("feasibility metric trends downward on the LP") {
  auto e = make_weak_sharp_lp(5, 10, 1.0, 2024);
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  auto control = ControlSequence::uniform(e.spec);
  std::vector<RunRecord> recs;
  for (std::uint64_t s = 1; s <= 5; ++s)
    recs.push_back(run_ws(e.problem, e.spec, sched, control, 5000, s, e.x0));
  auto ens = aggregate(recs);
  auto fit = fit_rate(ens, "feas_sq_erg", 100, 5000);
  CHECK(fit.slope < 0);
}
