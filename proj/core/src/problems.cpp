#include "svi/problems.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "svi/errors.hpp"
#include "svi/metrics.hpp"
#include "svi/projections.hpp"

namespace svi {

namespace {

Real parse_real(const std::map<std::string, std::string>& m, const std::string& key,
                Real dflt) {
  auto it = m.find(key);
  return it == m.end() ? dflt : std::stod(it->second);
}
std::int64_t parse_int(const std::map<std::string, std::string>& m,
                       const std::string& key, std::int64_t dflt) {
  auto it = m.find(key);
  return it == m.end() ? dflt : std::stoll(it->second);
}

// Additive-noise operator sample: F_j(v_j, x) = T_j(x) + w_j with w the
// per-coordinate uniform draw. Only the sampled blocks are valid.
class AdditiveSample : public OperatorSample {
 public:
  AdditiveSample(std::function<Vector(int, const BlockVector&)> mean_block,
                 std::vector<Vector> noise, int m)
      : mean_block_(std::move(mean_block)), noise_(std::move(noise)), m_(m) {}

  Vector evaluate_block(int j, const BlockVector& x) const override {
    const Vector& w = noise_[static_cast<size_t>(j)];
    if (w.size() == 0)
      throw UsageError("AdditiveSample: block was not sampled");
    return mean_block_(j, x) + w;
  }
  int num_blocks() const override { return m_; }

 private:
  std::function<Vector(int, const BlockVector&)> mean_block_;
  std::vector<Vector> noise_;
  int m_;
};

// Wires a StochasticProblem around T and uniform [-h, h] coordinate noise.
// sample() draws every block's coordinates in block order from one stream, so
// for m = 1 it consumes the stream exactly like sample_block(0, .).
StochasticProblem make_additive_problem(
    BlockLayout layout, std::function<Vector(int, const BlockVector&)> mean_block,
    std::function<BlockVector(const BlockVector&)> mean_full, Real noise_halfwidth) {
  StochasticProblem p;
  p.layout = layout;
  const int m = layout.num_blocks();
  auto draw_block = [layout, noise_halfwidth](int j, RngStream& rng) {
    Vector w(layout.block_dim(j));
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.symmetric(noise_halfwidth);
    return w;
  };
  p.sample = [mean_block, draw_block, m](RngStream& rng) -> SamplePtr {
    std::vector<Vector> noise;
    noise.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) noise.push_back(draw_block(j, rng));
    return std::make_unique<AdditiveSample>(mean_block, std::move(noise), m);
  };
  p.sample_block = [mean_block, draw_block, m](int j, RngStream& rng) -> SamplePtr {
    std::vector<Vector> noise(static_cast<size_t>(m));
    noise[static_cast<size_t>(j)] = draw_block(j, rng);
    return std::make_unique<AdditiveSample>(mean_block, std::move(noise), m);
  };
  p.mean_operator = std::move(mean_full);
  return p;
}

Vector gaussian_vector(RngStream& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Real u1 = std::max(rng.uniform01(), 1e-300);
    Real u2 = rng.uniform01();
    v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return v;
}

// Vertices of { x : <a_i, x> <= b_i } by enumerating n-subsets of the rows.
std::vector<Vector> enumerate_vertices(const Eigen::MatrixXd& A, const Vector& b) {
  const Eigen::Index K = A.rows(), n = A.cols();
  std::vector<Vector> verts;
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start,
                                                            Eigen::Index depth) {
    if (depth == n) {
      Eigen::MatrixXd S(n, n);
      Vector rhs(n);
      for (Eigen::Index r = 0; r < n; ++r) {
        S.row(r) = A.row(idx[static_cast<size_t>(r)]);
        rhs[r] = b[idx[static_cast<size_t>(r)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
      if (!lu.isInvertible()) return;
      Vector x = lu.solve(rhs);
      if (((A * x - b).array() <= 1e-9).all()) {
        for (const auto& v : verts)
          if ((v - x).norm() < 1e-9) return;
        verts.push_back(x);
      }
      return;
    }
    for (Eigen::Index i = start; i <= K - (n - depth); ++i) {
      idx[static_cast<size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return verts;
}

Real rho_from_vertices(const std::vector<Vector>& verts, const Vector& c,
                       Eigen::Index* argmin) {
  Real best = std::numeric_limits<Real>::infinity();
  Eigen::Index bi = 0;
  for (size_t i = 0; i < verts.size(); ++i) {
    Real v = c.dot(verts[i]);
    if (v < best) {
      best = v;
      bi = static_cast<Eigen::Index>(i);
    }
  }
  *argmin = bi;
  Real rho = std::numeric_limits<Real>::infinity();
  for (size_t i = 0; i < verts.size(); ++i) {
    if (static_cast<Eigen::Index>(i) == bi) continue;
    Real gap = c.dot(verts[i]) - best;
    Real d = (verts[i] - verts[static_cast<size_t>(bi)]).norm();
    if (d > 1e-12) rho = std::min(rho, gap / d);
  }
  return rho;
}

}  // namespace

ProblemCatalogEntry make_weak_sharp_lp(int n, int num_halfspaces, Real noise_level,
                                       std::uint64_t seed, Real hard_box_halfwidth) {
  if (n < 2) throw UsageError("make_weak_sharp_lp: n >= 2");
  if (num_halfspaces < 2 * n)
    throw UsageError("make_weak_sharp_lp: need at least 2n halfspaces");
  if (noise_level < 0) throw UsageError("make_weak_sharp_lp: noise_level >= 0");

  for (int attempt = 0; attempt < 100; ++attempt) {
    RngStream grng(seed + static_cast<std::uint64_t>(attempt), 100);
    // rotated box: orthonormal q_1..q_n, facets <q_j, x> in [lo_j, hi_j]
    Eigen::MatrixXd G(n, n);
    for (int j = 0; j < n; ++j) G.col(j) = gaussian_vector(grng, n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);

    Vector lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
      lo[j] = -grng.uniform(0.5, 1.5);
      hi[j] = grng.uniform(0.5, 1.5);
    }
    Eigen::MatrixXd A(num_halfspaces, n);
    Vector b(num_halfspaces);
    for (int j = 0; j < n; ++j) {
      A.row(j) = Q.col(j).transpose();
      b[j] = hi[j];
      A.row(n + j) = -Q.col(j).transpose();
      b[n + j] = -lo[j];
    }
    const bool pure_box = num_halfspaces == 2 * n;
    const bool enumerable = n <= 12;  // shipped polytopes keep <= 2^12 vertices
    if (!pure_box && !enumerable)
      throw UsageError("make_weak_sharp_lp: cut polytopes need n <= 12");

    std::vector<Vector> box_verts;
    if (enumerable) {
      // the 2^n sign combinations in the rotated frame
      for (std::int64_t code = 0; code < (std::int64_t{1} << n); ++code) {
        Vector u(n);
        for (int j = 0; j < n; ++j) u[j] = (code >> j) & 1 ? hi[j] : lo[j];
        box_verts.push_back(Q * u);
      }
    }
    if (!pure_box) {
      // random supporting cuts, shrunk to actually slice corners off
      for (int i = 2 * n; i < num_halfspaces; ++i) {
        Vector a = gaussian_vector(grng, n);
        a.normalize();
        Real support = -std::numeric_limits<Real>::infinity();
        for (const auto& v : box_verts) support = std::max(support, a.dot(v));
        A.row(i) = a.transpose();
        b[i] = (1.0 - 0.1 * grng.uniform01()) * support;
      }
    }

    std::vector<Vector> verts;
    if (pure_box)
      verts = box_verts;  // possibly empty for n > 12
    else
      verts = enumerate_vertices(A, b);
    if (enumerable && verts.size() < static_cast<size_t>(n) + 1) continue;

    Vector c = gaussian_vector(grng, n);
    c.normalize();
    Real rho;
    Vector xstar;
    if (pure_box) {
      // closed forms in the rotated frame: the optimal vertex picks the
      // bound opposing c, and the normalized gap over any vertex flip set S
      // is sum_S |c_u| w / sqrt(sum_S w^2) >= min_j |c_u[j]|, attained by a
      // single flip.
      Vector cu = Q.transpose() * c;
      Vector ustar(n);
      for (int j = 0; j < n; ++j) ustar[j] = cu[j] > 0 ? lo[j] : hi[j];
      xstar = Q * ustar;
      rho = cu.cwiseAbs().minCoeff();
    } else {
      Eigen::Index argmin = 0;
      rho = rho_from_vertices(verts, c, &argmin);
      xstar = verts[static_cast<size_t>(argmin)];
    }
    if (!(rho > 0.05)) continue;  // unique, well-separated optimal vertex

    ProblemCatalogEntry e;
    e.name = "weak_sharp_lp";
    e.tags = {"weak-sharp", "plain-monotone", "bounded-operator"};
    if (hard_box_halfwidth <= 0) e.tags.push_back("unbounded-set");
    e.noise_model = "uniform";

    BlockLayout layout = BlockLayout::single(n);
    Vector cc = c;
    e.problem = make_additive_problem(
        layout,
        [cc](int, const BlockVector&) { return cc; },
        [cc](const BlockVector& x) {
          BlockVector r = BlockVector::zero(x.layout());
          r.block(0) = cc;
          return r;
        },
        noise_level);
    e.problem.lipschitz_L = 0.0;
    const Real sigma2 = static_cast<Real>(n) * noise_level * noise_level / 3.0;
    e.C_F = std::sqrt((c.squaredNorm() + sigma2) / 2.0);
    e.problem.variance_bound = e.C_F;
    e.L = 0;
    e.C_g = 1;

    SolutionSpec sol;
    BlockVector xs(xstar);
    sol.project_onto_solution_set = [xs](const BlockVector& x) {
      (void)x;
      return xs;
    };
    sol.least_norm_solution = xs;
    sol.sharpness_rho = rho;
    e.problem.known_solution_set = sol;
    e.rho = rho;

    if (hard_box_halfwidth > 0) {
      Real w = hard_box_halfwidth;
      for (const auto& v : verts) w = std::max(w, v.cwiseAbs().maxCoeff() * 2);
      e.spec.hard.push_back(
          HardSet::box(Vector::Constant(n, -w), Vector::Constant(n, w)));
    } else {
      e.spec.hard.push_back(HardSet::full_space(n));
    }
    e.spec.soft.emplace_back();
    for (int i = 0; i < num_halfspaces; ++i)
      e.spec.soft[0].push_back(SoftConstraint::affine(A.row(i).transpose(), b[i]));

    if (pure_box) {
      Eigen::MatrixXd Qm = Q;
      Vector lov = lo, hiv = hi;
      e.spec.exact_feasible_projection = [Qm, lov, hiv](const BlockVector& x) {
        Vector u = Qm.transpose() * x.block(0);
        u = u.cwiseMax(lov).cwiseMin(hiv);
        return BlockVector(Vector(Qm * u));
      };
      // separable in the rotated frame, so eta = n exactly
      e.eta = static_cast<Real>(n);
    } else {
      // Hoffman constant estimated by sampling
      RngStream srng(seed, 101);
      Real worst = 0;
      for (int p = 0; p < 100; ++p) {
        Vector x = gaussian_vector(srng, n) * 2.0;
        Real maxg = 0;
        for (int i = 0; i < num_halfspaces; ++i)
          maxg = std::max(maxg, std::max(A.row(i).dot(x) - b[i], 0.0));
        if (maxg < 1e-12) continue;
        Real d2 = dist_to_feasible_sq(e.spec, BlockVector(x));
        worst = std::max(worst, d2 / (maxg * maxg));
      }
      e.eta = worst;
    }
    e.c_reg = *e.eta * static_cast<Real>(num_halfspaces);  // uniform control
    e.spec.regularity_c.push_back(e.c_reg);

    e.x0 = BlockVector(Vector(xstar - 2.0 * c));
    e.polytope_vertices = verts;
    e.affine_A = Eigen::MatrixXd::Zero(n, n);
    e.affine_b = c;
    if (!verts.empty()) {
      e.gap_domain = GapDomain::polytope(verts);
      Real diam = 0;
      Real mx = 0;
      for (const auto& v : verts) {
        mx = std::max(mx, v.norm());
        for (const auto& w2 : verts) diam = std::max(diam, (v - w2).norm());
      }
      e.diam_X = diam;
      e.M_X = mx;
    } else {
      e.diam_X = (hi - lo).norm();
      Real m2 = 0;
      for (int j = 0; j < n; ++j) m2 += std::max(lo[j] * lo[j], hi[j] * hi[j]);
      e.M_X = std::sqrt(m2);
    }
    e.B_X = std::sqrt(c.squaredNorm() + sigma2);
    return e;
  }
  throw ConfigError("make_weak_sharp_lp: no nondegenerate polytope in 100 draws");
}

ProblemCatalogEntry make_weak_sharp_simplex_lp(int n, Real noise_level) {
  if (n < 2) throw UsageError("make_weak_sharp_simplex_lp: n >= 2");
  ProblemCatalogEntry e;
  e.name = "weak_sharp_simplex_lp";
  e.tags = {"weak-sharp", "bounded-operator"};
  e.noise_model = "uniform";

  Vector c = Vector::Ones(n);
  c[0] = 0;
  BlockLayout layout = BlockLayout::single(n);
  e.problem = make_additive_problem(
      layout, [c](int, const BlockVector&) { return c; },
      [c](const BlockVector& x) {
        BlockVector r = BlockVector::zero(x.layout());
        r.block(0) = c;
        return r;
      },
      noise_level);
  e.problem.lipschitz_L = 0.0;
  e.L = 0;
  const Real sigma2 = static_cast<Real>(n) * noise_level * noise_level / 3.0;
  e.C_F = std::sqrt((c.squaredNorm() + sigma2) / 2.0);
  e.problem.variance_bound = e.C_F;

  // X_0: probability hyperplane; soft: the n nonnegativity halfspaces
  e.spec.hard.push_back(
      HardSet::affine(Eigen::MatrixXd::Ones(1, n), Vector::Ones(1)));
  e.spec.soft.emplace_back();
  for (int i = 0; i < n; ++i) {
    Vector a = Vector::Zero(n);
    a[i] = -1;
    e.spec.soft[0].push_back(SoftConstraint::affine(a, 0.0));
  }
  e.spec.exact_feasible_projection = [n](const BlockVector& x) {
    return BlockVector(HardSet::simplex(n).project(x.block(0)));
  };
  e.C_g = 1;

  Vector xstar = Vector::Zero(n);
  xstar[0] = 1;
  SolutionSpec sol;
  BlockVector xs(xstar);
  sol.project_onto_solution_set = [xs](const BlockVector&) { return xs; };
  sol.least_norm_solution = xs;
  sol.sharpness_rho = 1.0 / std::sqrt(2.0);
  e.problem.known_solution_set = sol;
  e.rho = sol.sharpness_rho;

  for (int i = 0; i < n; ++i) {
    Vector v = Vector::Zero(n);
    v[i] = 1;
    e.polytope_vertices.push_back(v);
  }
  // eta by sampling over the hyperplane
  RngStream srng(5, 102);
  Real worst = 0;
  for (int p = 0; p < 100; ++p) {
    Vector x = gaussian_vector(srng, n);
    x = e.spec.hard[0].project(x);
    Real maxg = std::max(0.0, -x.minCoeff());
    if (maxg < 1e-12) continue;
    Real d2 = (x - HardSet::simplex(n).project(x)).squaredNorm();
    worst = std::max(worst, d2 / (maxg * maxg));
  }
  e.eta = worst;
  e.c_reg = worst * static_cast<Real>(n);
  e.spec.regularity_c.push_back(e.c_reg);

  Vector x0 = Vector::Constant(n, 1.0 / n);
  e.x0 = BlockVector(x0);
  e.affine_A = Eigen::MatrixXd::Zero(n, n);
  e.affine_b = c;
  e.gap_domain = GapDomain::polytope(e.polytope_vertices);
  e.diam_X = std::sqrt(2.0);
  e.M_X = 1.0;
  e.B_X = std::sqrt(c.squaredNorm() + sigma2);
  return e;
}

ProblemCatalogEntry make_rotation_cartesian(Real noise_level) {
  ProblemCatalogEntry e;
  e.name = "rotation";
  e.tags = {"plain-monotone", "cartesian(2)"};
  e.noise_model = "uniform";

  BlockLayout layout({1, 1});
  auto mean_block = [](int j, const BlockVector& x) {
    Vector r(1);
    r[0] = (j == 0) ? -x.block(1)[0] : x.block(0)[0];
    return r;
  };
  auto mean_full = [mean_block](const BlockVector& x) {
    return BlockVector(std::vector<Vector>{mean_block(0, x), mean_block(1, x)});
  };
  e.problem = make_additive_problem(layout, mean_block, mean_full, noise_level);
  e.problem.lipschitz_L = 1.0;
  e.L = 1;
  e.C_g = 1;

  for (int j = 0; j < 2; ++j) {
    e.spec.hard.push_back(HardSet::full_space(1));
    e.spec.soft.emplace_back();
    Vector plus = Vector::Ones(1), minus = -Vector::Ones(1);
    e.spec.soft[static_cast<size_t>(j)].push_back(SoftConstraint::affine(plus, 1.0));
    e.spec.soft[static_cast<size_t>(j)].push_back(SoftConstraint::affine(minus, 1.0));
    e.spec.regularity_c.push_back(2.0);  // eta = 1, |I_j| = 2, uniform control
  }
  e.eta = 1.0;
  e.c_reg = 2.0;
  e.spec.exact_feasible_projection = [](const BlockVector& x) {
    BlockVector y = x;
    for (int j = 0; j < 2; ++j)
      y.block(j)[0] = std::min(std::max(x.block(j)[0], -1.0), 1.0);
    return y;
  };

  SolutionSpec sol;
  BlockVector zero = BlockVector::zero(layout);
  sol.project_onto_solution_set = [zero](const BlockVector&) { return zero; };
  sol.least_norm_solution = zero;
  e.problem.known_solution_set = sol;

  e.x0 = BlockVector(std::vector<Vector>{Vector::Constant(1, 0.7), Vector::Constant(1, -0.4)});
  Eigen::MatrixXd A(2, 2);
  A << 0, -1, 1, 0;
  e.affine_A = A;
  e.affine_b = Vector::Zero(2);
  e.gap_domain = GapDomain::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  const Real sigma2 = 2 * noise_level * noise_level / 3.0;
  e.diam_X = 2 * std::sqrt(2.0);
  e.M_X = std::sqrt(2.0);
  e.B_X = std::sqrt(2.0 + sigma2);
  return e;
}

ProblemCatalogEntry make_segment_solution_affine(Real noise_level, int m) {
  if (m != 1 && m != 2) throw UsageError("make_segment_solution_affine: m in {1,2}");
  ProblemCatalogEntry e;
  e.name = "segment";
  e.tags = {"paramonotone", m == 2 ? "cartesian(2)" : "cartesian(1)"};
  e.noise_model = "uniform";

  BlockLayout layout = m == 1 ? BlockLayout::single(2) : BlockLayout({1, 1});
  auto coord = [](const BlockVector& x, int i) {
    return x.num_blocks() == 1 ? x.block(0)[i] : x.block(i)[0];
  };
  auto mean_block = [coord, m](int j, const BlockVector& x) {
    Real t0 = coord(x, 0) - coord(x, 1);
    if (m == 1) {
      Vector r(2);
      r << t0, -t0;
      return r;
    }
    Vector r(1);
    r[0] = (j == 0) ? t0 : -t0;
    return r;
  };
  auto mean_full = [mean_block, m](const BlockVector& x) {
    if (m == 1) return BlockVector(mean_block(0, x));
    return BlockVector(std::vector<Vector>{mean_block(0, x), mean_block(1, x)});
  };
  e.problem = make_additive_problem(layout, mean_block, mean_full, noise_level);
  e.problem.lipschitz_L = 2.0;
  e.L = 2;
  e.C_g = 1;

  const Real lo[2] = {1.0, -2.0}, hi[2] = {2.0, 2.0};
  if (m == 1) {
    e.spec.hard.push_back(HardSet::full_space(2));
    e.spec.soft.emplace_back();
    for (int i = 0; i < 2; ++i) {
      Vector a = Vector::Zero(2);
      a[i] = 1;
      e.spec.soft[0].push_back(SoftConstraint::affine(a, hi[i]));
      a[i] = -1;
      e.spec.soft[0].push_back(SoftConstraint::affine(a, -lo[i]));
    }
    e.eta = 2.0;
    e.c_reg = 8.0;  // eta |I| / lambda with |I| = 4, uniform
    e.spec.regularity_c.push_back(e.c_reg);
  } else {
    for (int j = 0; j < 2; ++j) {
      e.spec.hard.push_back(HardSet::full_space(1));
      e.spec.soft.emplace_back();
      Vector plus = Vector::Ones(1), minus = -Vector::Ones(1);
      e.spec.soft[static_cast<size_t>(j)].push_back(
          SoftConstraint::affine(plus, hi[j]));
      e.spec.soft[static_cast<size_t>(j)].push_back(
          SoftConstraint::affine(minus, -lo[j]));
      e.spec.regularity_c.push_back(2.0);
    }
    e.eta = 1.0;
    e.c_reg = 2.0;
  }
  e.spec.exact_feasible_projection = [layout, lo, hi](const BlockVector& x) {
    Vector f = x.to_flat();
    for (int i = 0; i < 2; ++i) f[i] = std::min(std::max(f[i], lo[i]), hi[i]);
    return BlockVector::from_flat(layout, f);
  };

  SolutionSpec sol;
  sol.project_onto_solution_set = [layout](const BlockVector& x) {
    Vector f = x.to_flat();
    Real t = 0.5 * (f[0] + f[1]);
    t = std::min(std::max(t, 1.0), 2.0);
    Vector s(2);
    s << t, t;
    return BlockVector::from_flat(layout, s);
  };
  Vector ln(2);
  ln << 1, 1;
  sol.least_norm_solution = BlockVector::from_flat(layout, ln);
  e.problem.known_solution_set = sol;

  Vector x0(2);
  x0 << 2, 0;
  e.x0 = BlockVector::from_flat(layout, x0);
  Eigen::MatrixXd A(2, 2);
  A << 1, -1, -1, 1;
  e.affine_A = A;
  e.affine_b = Vector::Zero(2);
  Vector blo(2), bhi(2);
  blo << lo[0], lo[1];
  bhi << hi[0], hi[1];
  e.gap_domain = GapDomain::box(blo, bhi);
  const Real sigma2 = 2 * noise_level * noise_level / 3.0;
  e.diam_X = std::sqrt(17.0);
  e.M_X = 2 * std::sqrt(2.0);
  e.B_X = std::sqrt(32.0 + sigma2);
  return e;
}

ProblemCatalogEntry make_problem(const std::string& name,
                                 const std::map<std::string, std::string>& params) {
  if (name == "weak_sharp_lp")
    return make_weak_sharp_lp(static_cast<int>(parse_int(params, "n", 5)),
                              static_cast<int>(parse_int(params, "halfspaces", 10)),
                              parse_real(params, "noise", 1.0),
                              static_cast<std::uint64_t>(parse_int(params, "gen_seed", 2024)),
                              parse_real(params, "hard_box", 0.0));
  if (name == "weak_sharp_simplex_lp")
    return make_weak_sharp_simplex_lp(static_cast<int>(parse_int(params, "n", 3)),
                                      parse_real(params, "noise", 0.5));
  if (name == "rotation")
    return make_rotation_cartesian(parse_real(params, "noise", 0.5));
  if (name == "segment")
    return make_segment_solution_affine(parse_real(params, "noise", 0.1),
                                        static_cast<int>(parse_int(params, "m", 1)));
  throw ConfigError("unknown problem: " + name);
}

}  // namespace svi
