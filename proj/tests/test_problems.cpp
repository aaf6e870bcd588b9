#include <doctest.h>

#include <Eigen/Dense>

#include "svi/metrics.hpp"
#include "svi/problems.hpp"

using namespace svi;

namespace {

// Uniform feasible sampler via the exact projection.
BlockVector random_feasible(const ProblemCatalogEntry& e, RngStream& rng) {
  Vector raw(e.problem.layout.total_dim());
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw[i] = rng.uniform(-3, 3);
  return (*e.spec.exact_feasible_projection)(
      BlockVector::from_flat(e.problem.layout, raw));
}

void check_entry_invariants(const ProblemCatalogEntry& e) {
  e.spec.validate();
  RngStream rng(404, 0);

  // Lipschitz check on sampled pairs (exact mean operator available).
  for (int t = 0; t < 200; ++t) {
    Vector a(e.problem.layout.total_dim()), b(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform(-3, 3);
      b[i] = rng.uniform(-3, 3);
    }
    BlockVector x = BlockVector::from_flat(e.problem.layout, a);
    BlockVector y = BlockVector::from_flat(e.problem.layout, b);
    BlockVector Tx = (*e.problem.mean_operator)(x);
    BlockVector Ty = (*e.problem.mean_operator)(y);
    CHECK((Ty - Tx).norm() <= e.L * (y - x).norm() + 1e-12);
  }

  // Regularity Monte Carlo: dist(x,X)^2 <= c * mean[g^+_omega(x)^2] * 1.05
  // over hard-feasible points, with the omega-mean exact per block.
  auto control = ControlSequence::uniform(e.spec);
  for (int t = 0; t < 100; ++t) {
    BlockVector x = random_feasible(e, rng);
    // push it off the feasible set but keep it in the hard set
    for (int j = 0; j < x.num_blocks(); ++j)
      for (Eigen::Index i = 0; i < x.block(j).size(); ++i)
        x.block(j)[i] += rng.uniform(-1.5, 1.5);
    x = project_blocks(e.spec.hard, x);
    Real total_d2 = 0, total_cg2 = 0;
    bool all_blocks_ok = true;
    for (int j = 0; j < e.spec.num_blocks(); ++j) {
      Real mean_g2 = 0;
      for (int i = 0; i < e.spec.num_soft(j); ++i) {
        Real g = e.spec.soft[static_cast<size_t>(j)][static_cast<size_t>(i)]
                     .positive_part(x.block(j));
        mean_g2 += control.blocks[static_cast<size_t>(j)].probs[i] * g * g;
      }
      Real cj = *e.spec.regularity_c[static_cast<size_t>(j)];
      total_cg2 += cj * mean_g2;
      (void)all_blocks_ok;
    }
    total_d2 = dist_to_feasible_sq(e.spec, x);
    CHECK(total_d2 <= total_cg2 * 1.05 + 1e-12);
  }

  // weak-sharpness sweep when rho is declared
  if (e.rho) {
    const auto& sol = *e.problem.known_solution_set;
    for (int t = 0; t < 1000; ++t) {
      BlockVector x = random_feasible(e, rng);
      BlockVector xs = sol.project_onto_solution_set(x);
      BlockVector Ts = (*e.problem.mean_operator)(xs);
      CHECK(Ts.dot(x - xs) >= *e.rho * (x - xs).norm() - 1e-10);
    }
  }
}

}  // namespace

TEST_CASE("weak-sharp LP catalog entry") {
  auto e = make_weak_sharp_lp(5, 10, 1.0, 2024);
  CHECK(e.problem.num_blocks() == 1);
  CHECK(e.spec.num_soft(0) == 10);
  CHECK(e.polytope_vertices.size() >= 6);
  CHECK(*e.rho > 0.05);
  CHECK(e.L == 0);
  check_entry_invariants(e);

  // determinism of generation
  auto e2 = make_weak_sharp_lp(5, 10, 1.0, 2024);
  CHECK((e.x0 - e2.x0).norm() == 0);
  CHECK(*e.rho == *e2.rho);
  for (size_t i = 0; i < e.polytope_vertices.size(); ++i)
    CHECK((e.polytope_vertices[i] - e2.polytope_vertices[i]).norm() == 0);

  // extra random cuts still produce a valid entry
  auto cut = make_weak_sharp_lp(3, 8, 0.5, 5);
  CHECK(cut.spec.num_soft(0) == 8);
  CHECK(*cut.rho > 0.05);
  CHECK(*cut.eta > 0);

  // closed-form rho of the rotated box equals the vertex-enumeration value
  Real rho_enum = std::numeric_limits<Real>::infinity();
  Vector c = *e.affine_b;
  size_t best = 0;
  for (size_t i = 0; i < e.polytope_vertices.size(); ++i)
    if (c.dot(e.polytope_vertices[i]) < c.dot(e.polytope_vertices[best])) best = i;
  for (size_t i = 0; i < e.polytope_vertices.size(); ++i) {
    if (i == best) continue;
    Real gap = c.dot(e.polytope_vertices[i] - e.polytope_vertices[best]);
    Real d = (e.polytope_vertices[i] - e.polytope_vertices[best]).norm();
    rho_enum = std::min(rho_enum, gap / d);
  }
  CHECK(*e.rho == doctest::Approx(rho_enum).epsilon(1e-12));
}

TEST_CASE("simplex LP: rho = 1/sqrt(2), solution e_1") {
  auto e = make_weak_sharp_simplex_lp(3, 0.0);
  CHECK(*e.rho == doctest::Approx(1.0 / std::sqrt(2.0)));
  const auto& sol = *e.problem.known_solution_set;
  BlockVector xs = sol.project_onto_solution_set(BlockVector{0.2, 0.5, 0.3});
  CHECK(xs.block(0)[0] == doctest::Approx(1));
  CHECK(xs.block(0)[1] == doctest::Approx(0));
  // zero noise: sigma(x) = 0 everywhere
  auto est = estimate_B_and_sigma(e.problem, e.x0, 500);
  CHECK(est.sigma == 0.0);
  check_entry_invariants(e);
}

TEST_CASE("rotation problem: skew operator, X* = {0}") {
  auto e = make_rotation_cartesian(0.5);
  CHECK(e.problem.num_blocks() == 2);
  BlockVector zero = BlockVector::zero(e.problem.layout);
  CHECK((*e.problem.mean_operator)(zero).norm() == 0.0);
  // skew symmetry: <T(x)-T(y), x-y> = 0 and L = 1
  RngStream rng(2, 0);
  for (int t = 0; t < 500; ++t) {
    BlockVector x = BlockVector::from_flat(e.problem.layout,
                                           (Vector(2) << rng.uniform(-2, 2),
                                            rng.uniform(-2, 2))
                                               .finished());
    BlockVector y = BlockVector::from_flat(e.problem.layout,
                                           (Vector(2) << rng.uniform(-2, 2),
                                            rng.uniform(-2, 2))
                                               .finished());
    BlockVector dT = (*e.problem.mean_operator)(x) - (*e.problem.mean_operator)(y);
    CHECK(std::abs(dT.dot(x - y)) <= 1e-12);
    CHECK(dT.norm() == doctest::Approx((x - y).norm()).epsilon(1e-12));
  }
  // gap closed form at (1,0) equals 1
  BlockVector p = BlockVector::from_flat(e.problem.layout, (Vector(2) << 1, 0).finished());
  CHECK(e.gap(p) == doctest::Approx(1.0));
  check_entry_invariants(e);
}

TEST_CASE("segment problem: least-norm point and spectrum") {
  for (int m : {1, 2}) {
    auto e = make_segment_solution_affine(0.1, m);
    const auto& sol = *e.problem.known_solution_set;
    // least-norm point has the smallest norm along the segment
    Real n0 = sol.least_norm_solution->norm();
    for (Real t : {1.2, 1.5, 2.0}) {
      Vector s(2);
      s << t, t;
      CHECK(n0 < BlockVector::from_flat(e.problem.layout, s).norm());
    }
    // eigenvalues {0, 2} -> L = 2
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*e.affine_A);
    CHECK(es.eigenvalues()[0] == doctest::Approx(0));
    CHECK(es.eigenvalues()[1] == doctest::Approx(2));
    CHECK(e.L == 2);
    check_entry_invariants(e);
  }
}

TEST_CASE("catalog lookup by name") {
  auto e = make_problem("rotation", {{"noise", "0.25"}});
  CHECK(e.name == "rotation");
  CHECK_THROWS_AS(make_problem("nope", {}), ConfigError);
}
