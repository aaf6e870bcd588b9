#include "svi/oracles.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "svi/errors.hpp"

namespace svi {

ExtragradientResult extragradient_solve(const FlatOperator& T,
                                        const FlatProjector& project,
                                        Vector x0, Real alpha, Real tol, int cap) {
  if (!(alpha > 0)) throw UsageError("extragradient_solve: alpha > 0");
  Vector x = project(x0);
  ExtragradientResult out;
  for (int it = 0; it < cap; ++it) {
    Vector Tx = T(x);
    Real res = (x - project(x - Tx)).norm();
    if (res <= tol) {
      out.x = x;
      out.residual = res;
      out.iterations = it;
      return out;
    }
    Vector z = project(x - alpha * Tx);
    x = project(x - alpha * T(z));
  }
  Real res = (x - project(x - T(x))).norm();
  throw ConvergenceError(res, "extragradient_solve: iteration cap reached");
}

Real TykhonovPath::path_bound_violation(const TykSchedule& schedule) const {
  Real worst = 0;
  for (size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] != ks[i - 1] + 1) continue;  // bound links consecutive k only
    std::int64_t k = ks[i];
    Real lhs = (points[i] - points[i - 1]).norm();
    Real rhs = M_t * (schedule.eps_max(k - 1) - schedule.eps_min(k)) /
               schedule.eps_min(k);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

TykhonovPath tykhonov_path(const FlatOperator& T, const FlatProjector& project,
                           const BlockLayout& layout, const TykSchedule& schedule,
                           const std::vector<std::int64_t>& k_list, Real lipschitz_L,
                           const std::function<Real(const Vector&)>& B_eval,
                           Real tol) {
  TykhonovPath path;
  const Eigen::Index n = layout.total_dim();
  Vector warm = Vector::Zero(n);
  for (std::int64_t k : k_list) {
    // expand per-agent eps to coordinates
    Vector eps(n);
    Eigen::Index off = 0;
    for (int j = 0; j < layout.num_blocks(); ++j) {
      eps.segment(off, layout.block_dim(j)).setConstant(schedule.eps(k, j));
      off += layout.block_dim(j);
    }
    auto Treg = [&](const Vector& x) -> Vector {
      return T(x) + eps.cwiseProduct(x);
    };
    Real alpha = 0.9 / (lipschitz_L + eps.maxCoeff());
    auto res = extragradient_solve(Treg, project, warm, alpha, tol);
    warm = res.x;
    path.ks.push_back(k);
    path.eps_snapshots.push_back(eps);
    path.points.push_back(res.x);
    path.residuals.push_back(res.residual);
    path.M_t = std::max(path.M_t, res.x.norm());
    if (B_eval) path.B_t = std::max(path.B_t, B_eval(res.x));
  }
  return path;
}

GapDomain GapDomain::box(Vector lo, Vector hi) {
  GapDomain d;
  d.kind = Kind::Box;
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

GapDomain GapDomain::polytope(std::vector<Vector> vertices) {
  if (vertices.empty()) throw UsageError("GapDomain: empty vertex list");
  GapDomain d;
  d.kind = Kind::Vertices;
  d.vertices = std::move(vertices);
  return d;
}

namespace {

// sup over a box of a linear functional <w, y> + c.
Real box_linear_max(const Vector& w, Real c, const Vector& lo, const Vector& hi) {
  Real v = c;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    v += w[i] >= 0 ? w[i] * hi[i] : w[i] * lo[i];
  return v;
}

// Maximizes <q,y> - y^T M y over the box by enumerating the 3^n face
// patterns (each coordinate: at lo, at hi, or free) and solving the
// unconstrained critical-point system on the free coordinates.
Real box_concave_quadratic_max(const Eigen::MatrixXd& M, const Vector& q, Real c,
                               const Vector& lo, const Vector& hi) {
  const Eigen::Index n = q.size();
  if (n > 12) throw UsageError("gap_value: face enumeration limited to n <= 12");
  std::vector<int> pattern(static_cast<size_t>(n), 0);
  Real best = -std::numeric_limits<Real>::infinity();
  const std::int64_t total = static_cast<std::int64_t>(std::pow(3.0, static_cast<double>(n)));
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t t = code;
    std::vector<Eigen::Index> free_idx;
    Vector y = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      int p = static_cast<int>(t % 3);
      t /= 3;
      pattern[static_cast<size_t>(i)] = p;
      if (p == 0)
        y[i] = lo[i];
      else if (p == 1)
        y[i] = hi[i];
      else
        free_idx.push_back(i);
    }
    if (!free_idx.empty()) {
      const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Mff(f, f);
      Vector rhs(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        Real fixed_term = 0;
        for (Eigen::Index i = 0; i < n; ++i)
          if (pattern[static_cast<size_t>(i)] != 2)
            fixed_term += M(free_idx[static_cast<size_t>(a)], i) * y[i];
        rhs[a] = 0.5 * q[free_idx[static_cast<size_t>(a)]] - fixed_term;
        for (Eigen::Index b = 0; b < f; ++b)
          Mff(a, b) = M(free_idx[static_cast<size_t>(a)], free_idx[static_cast<size_t>(b)]);
      }
      // On a singular face the supremum is attained on its boundary, which
      // other patterns cover; a least-squares solve is enough here.
      Vector yf = Mff.completeOrthogonalDecomposition().solve(rhs);
      bool ok = true;
      for (Eigen::Index a = 0; a < f; ++a) {
        Eigen::Index i = free_idx[static_cast<size_t>(a)];
        if (yf[a] < lo[i] - 1e-12 || yf[a] > hi[i] + 1e-12) ok = false;
        y[i] = std::min(std::max(yf[a], lo[i]), hi[i]);
      }
      if (!ok) continue;
    }
    Real val = q.dot(y) - y.dot(M * y) + c;
    best = std::max(best, val);
  }
  return best;
}

}  // namespace

Real gap_value(const Eigen::MatrixXd& A, const Vector& b, const GapDomain& X,
               const Vector& x) {
  // objective in y: <A y + b, x - y> = <A^T x - b, y> - y^T M y + <b, x>
  // with M = (A + A^T)/2.
  Eigen::MatrixXd M = 0.5 * (A + A.transpose());
  Vector q = A.transpose() * x - b;
  Real c = b.dot(x);
  const bool linear = M.cwiseAbs().maxCoeff() < 1e-14;

  if (X.kind == GapDomain::Kind::Vertices) {
    if (!linear)
      throw UsageError("gap_value: vertex domains support skew/constant operators only");
    Real best = -std::numeric_limits<Real>::infinity();
    for (const auto& v : X.vertices) best = std::max(best, q.dot(v) + c);
    return best;
  }
  if (linear) return box_linear_max(q, c, X.lo, X.hi);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw UsageError("gap_value: operator must be monotone (PSD symmetric part)");
  return box_concave_quadratic_max(M, q, c, X.lo, X.hi);
}

IdentificationResult identification_check(const StochasticProblem& problem,
                                          const std::vector<Vector>& vertices,
                                          const BlockVector& x_hat, int n_samples,
                                          const SolutionSpec& solution,
                                          std::uint64_t seed) {
  if (vertices.empty()) throw UsageError("identification_check: no vertices");
  IdentificationResult out;
  BlockVector cvec = BlockVector::zero(x_hat.layout());
  if (n_samples == 0) {
    if (!problem.mean_operator)
      throw UsageError("identification_check: exact mode needs mean_operator");
    cvec = (*problem.mean_operator)(x_hat);
  } else {
    RngStream rng(seed, 11);
    for (int i = 0; i < n_samples; ++i) {
      auto s = problem.sample(rng);
      cvec += s->evaluate(x_hat);
    }
    cvec *= 1.0 / n_samples;
  }
  out.objective = cvec.to_flat();

  Real best = std::numeric_limits<Real>::infinity();
  std::vector<Real> vals;
  vals.reserve(vertices.size());
  for (const auto& v : vertices) {
    Real val = out.objective.dot(v);
    vals.push_back(val);
    best = std::min(best, val);
  }
  const Real tie_tol = 1e-12 * (1 + std::abs(best));
  out.in_solution_set = true;
  for (size_t i = 0; i < vertices.size(); ++i) {
    if (vals[i] <= best + tie_tol) {
      out.minimizers.push_back(vertices[i]);
      BlockVector v = BlockVector::from_flat(x_hat.layout(), vertices[i]);
      if (solution.dist(v) > 1e-8) out.in_solution_set = false;
    }
  }
  return out;
}

}  // namespace svi
