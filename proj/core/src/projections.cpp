#include "svi/projections.hpp"

#include "svi/errors.hpp"

namespace svi {

BlockVector project_hard(const FeasibleSpec& spec, const BlockVector& x) {
  return project_blocks(spec.hard, x);
}

Vector feasibility_step(const Vector& y, const SoftConstraint& g, Real beta,
                        const HardSet& hard) {
  if (!(beta > 0 && beta < 2)) throw UsageError("feasibility_step: beta in (0,2)");
  Real gplus = g.positive_part(y);
  if (gplus == 0) return y;
  Vector d = g.subgradient(y);
  Real dn2 = d.squaredNorm();
  if (dn2 == 0)
    throw std::logic_error("feasibility_step: zero subgradient at infeasible point");
  return hard.project(y - (beta * gplus / dn2) * d);
}

FeasStepCheck check_feasstep_inequality(const Vector& x1, const Vector& u,
                                        const Vector& x0, const SoftConstraint& g,
                                        Real alpha, Real beta, Real tau,
                                        const HardSet& hard) {
  if (!(alpha > 0)) throw UsageError("check_feasstep_inequality: alpha > 0");
  if (!(beta > 0 && beta < 2)) throw UsageError("check_feasstep_inequality: beta in (0,2)");
  if (!(tau > 1)) throw UsageError("check_feasstep_inequality: tau > 1");
  if (!hard.contains(x1, 1e-9) || !hard.contains(x0, 1e-9))
    throw UsageError("check_feasstep_inequality: x0, x1 must lie in the hard set");
  if (g.positive_part(x0) > 1e-12)
    throw UsageError("check_feasstep_inequality: g^+(x0) must vanish");

  Vector y = hard.project(x1 - alpha * u);
  Vector x2 = feasibility_step(y, g, beta, hard);

  Real B = beta * (2 - beta);
  Real Cg = g.subgrad_bound();
  Real gp1 = g.positive_part(x1);

  FeasStepCheck out;
  out.lhs = (x2 - x0).squaredNorm();
  out.rhs = (x1 - x0).squaredNorm() - 2 * alpha * (x1 - x0).dot(u) +
            (1 + tau * B) * alpha * alpha * u.squaredNorm() -
            (B / (Cg * Cg)) * (1 - 1 / tau) * gp1 * gp1;
  out.holds = out.lhs <= out.rhs + 1e-10 * (1 + std::abs(out.rhs));
  return out;
}

Vector dykstra_project(const std::vector<HardSet>& sets, const Vector& x,
                       const DykstraOptions& opts) {
  if (sets.empty()) throw UsageError("dykstra_project: no sets");
  if (!(opts.tol > 0)) throw UsageError("dykstra_project: tol > 0");
  const size_t p = sets.size();
  if (p == 1) return sets[0].project(x);

  Vector z = x;
  std::vector<Vector> incr(p, Vector::Zero(x.size()));
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    Real delta = 0;  // sum ||increment change||^2 over the sweep
    for (size_t i = 0; i < p; ++i) {
      Vector w = z + incr[i];
      Vector zn = sets[i].project(w);
      Vector incr_new = w - zn;
      delta += (incr_new - incr[i]).squaredNorm();
      incr[i] = std::move(incr_new);
      z = std::move(zn);
    }
    // Boyle–Dykstra: the increments stabilize iff z converges to Pi_X(x).
    if (std::sqrt(delta) <= opts.tol) {
      bool ok = true;
      for (const auto& s : sets)
        if (s.dist(z) > opts.tol * 10) ok = false;
      if (ok) return z;
    }
  }
  throw ConvergenceError((x - z).norm(),
                         "dykstra_project: sweep cap reached before tolerance");
}

std::vector<HardSet> block_sets(const FeasibleSpec& spec, int j) {
  std::vector<HardSet> sets;
  sets.push_back(spec.hard[static_cast<size_t>(j)]);
  for (const auto& g : spec.soft[static_cast<size_t>(j)]) sets.push_back(g.as_set());
  return sets;
}

}  // namespace svi
