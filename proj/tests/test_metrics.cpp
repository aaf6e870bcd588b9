#include <doctest.h>

#include <cmath>

#include "svi/metrics.hpp"
#include "svi/problems.hpp"

using namespace svi;

namespace {

EnsembleRecord synthetic(const std::function<Real(Real)>& f) {
  EnsembleRecord e;
  for (std::int64_t k = 1; k <= 100000; k *= 2) {
    e.grid.push_back(k);
    e.mean["y"].push_back(f(static_cast<Real>(k)));
    e.stderr_["y"].push_back(0);
  }
  e.n_seeds = 1;
  return e;
}

}  // namespace

TEST_CASE("fit_rate recovers exact power laws") {
  auto f1 = fit_rate(synthetic([](Real k) { return 10 / k; }), "y", 1, 100000);
  CHECK(f1.slope == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(f1.r2 == doctest::Approx(1.0));

  auto f2 = fit_rate(synthetic([](Real k) { return 3 / std::sqrt(k); }), "y", 1, 100000);
  CHECK(f2.slope == doctest::Approx(-0.5).epsilon(1e-10));

  // ln k / sqrt(k) lands between -0.5 and -0.35 over [1e2, 1e5]
  auto f3 = fit_rate(synthetic([](Real k) { return std::log(k) / std::sqrt(k); }), "y",
                     100, 100000);
  CHECK(f3.slope > -0.5);
  CHECK(f3.slope < -0.35);

  CHECK_THROWS_AS(fit_rate(synthetic([](Real) { return -1.0; }), "y", 1, 100000),
                  UsageError);
  CHECK_THROWS_AS(fit_rate(synthetic([](Real k) { return 1 / k; }), "z", 1, 100000),
                  UsageError);
  // too few points
  CHECK_THROWS_AS(fit_rate(synthetic([](Real k) { return 1 / k; }), "y", 1, 4),
                  UsageError);
}

TEST_CASE("aggregate: mean, stderr, permutation invariance") {
  RunRecord a, b;
  a.seed = 1;
  b.seed = 2;
  a.grid = b.grid = {0, 10, 100};
  a.series["m"] = {1.0, 2.0, 3.0};
  b.series["m"] = {3.0, 2.0, 1.0};

  auto e1 = aggregate({a, b});
  CHECK(e1.mean["m"][0] == doctest::Approx(2.0));
  CHECK(e1.mean["m"][1] == doctest::Approx(2.0));
  auto e2 = aggregate({b, a});
  // bitwise identical regardless of order
  for (size_t i = 0; i < 3; ++i) {
    CHECK(e1.mean["m"][i] == e2.mean["m"][i]);
    CHECK(e1.stderr_["m"][i] == e2.stderr_["m"][i]);
  }

  auto single = aggregate({a});
  CHECK(single.mean["m"][2] == 3.0);
  CHECK(single.stderr_["m"][2] == 0.0);

  RunRecord c = a;
  c.grid = {0, 10};
  c.series["m"] = {1.0, 2.0};
  CHECK_THROWS_AS(aggregate({a, c}), StructuralError);
}

TEST_CASE("dist_to_feasible_sq") {
  // halfspace x1 <= 0 from (2,0): squared distance 4
  FeasibleSpec spec;
  spec.hard.push_back(HardSet::full_space(2));
  spec.soft.emplace_back();
  spec.soft[0].push_back(SoftConstraint::affine((Vector(2) << 1, 0).finished(), 0.0));
  CHECK(dist_to_feasible_sq(spec, BlockVector{2, 0}) == doctest::Approx(4.0));
  CHECK(dist_to_feasible_sq(spec, BlockVector{-1, 3}) == doctest::Approx(0.0));

  // shipped problems: projection of a projected point has zero distance
  auto entry = make_weak_sharp_lp(4, 8, 0.5, 3);
  RngStream rng(1, 0);
  for (int t = 0; t < 50; ++t) {
    Vector raw(4);
    for (int i = 0; i < 4; ++i) raw[i] = rng.uniform(-3, 3);
    BlockVector p = (*entry.spec.exact_feasible_projection)(BlockVector(raw));
    CHECK(dist_to_feasible_sq(entry.spec, p) <= 1e-15);
  }
}

TEST_CASE("estimate_B_and_sigma") {
  // zero-noise problem: sigma = 0 and B = ||T(x)||
  auto det = make_segment_solution_affine(0.0, 1);
  BlockVector x{1.7, 0.4};
  auto est = estimate_B_and_sigma(det.problem, x, 1000);
  CHECK(est.sigma == doctest::Approx(0.0));
  BlockVector T = (*det.problem.mean_operator)(x);
  CHECK(est.B == doctest::Approx(T.norm()).epsilon(1e-12));

  // uniform coordinate noise of half-width h: sigma^2 = n h^2 / 3
  auto noisy = make_weak_sharp_lp(5, 10, 0.9, 7);
  auto e2 = estimate_B_and_sigma(noisy.problem, BlockVector(Vector::Zero(5)), 200000);
  Real sigma2 = 5 * 0.9 * 0.9 / 3.0;
  CHECK(e2.sigma * e2.sigma == doctest::Approx(sigma2).epsilon(0.02));
  // Jensen: B(x)^2 >= ||T(x)||^2
  BlockVector T2 = (*noisy.problem.mean_operator)(BlockVector(Vector::Zero(5)));
  CHECK(e2.B * e2.B >= T2.squared_norm() - 1e-12);

  CHECK_THROWS_AS(estimate_B_and_sigma(det.problem, x, 10), UsageError);
}

TEST_CASE("log grid") {
  auto g = log_grid(10000, 8);
  CHECK(g.front() == 0);
  CHECK(g.back() == 10000);
  for (size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  int in_window = 0;
  for (auto k : g)
    if (k >= 100 && k <= 10000) ++in_window;
  CHECK(in_window >= 10);
}
