#pragma once

// Test-only exact projection oracle for small polyhedra { x : A x <= b },
// independent of the Dykstra implementation it checks. Enumerates active
// sets and verifies the KKT conditions of min ||x - z||^2.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "svi/block_vector.hpp"

namespace svi::testing {

inline std::optional<Vector> qp_project(const Eigen::MatrixXd& A, const Vector& b,
                                        const Vector& z) {
  const Eigen::Index K = A.rows(), n = A.cols();
  auto feasible = [&](const Vector& x) {
    return ((A * x - b).array() <= 1e-9).all();
  };
  if (feasible(z)) return z;

  Vector best;
  Real best_d = std::numeric_limits<Real>::infinity();
  std::vector<Eigen::Index> subset;
  std::function<void(Eigen::Index)> rec = [&](Eigen::Index start) {
    if (!subset.empty()) {
      const Eigen::Index s = static_cast<Eigen::Index>(subset.size());
      Eigen::MatrixXd As(s, n);
      Vector bs(s);
      for (Eigen::Index i = 0; i < s; ++i) {
        As.row(i) = A.row(subset[static_cast<size_t>(i)]);
        bs[i] = b[subset[static_cast<size_t>(i)]];
      }
      Eigen::MatrixXd AAt = As * As.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(AAt);
      if (lu.isInvertible()) {
        // projection onto the active affine set + multiplier signs
        Vector lambda = lu.solve(As * z - bs);
        Vector x = z - As.transpose() * lambda;
        if ((lambda.array() >= -1e-9).all() && feasible(x)) {
          Real d = (x - z).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = x;
          }
        }
      }
    }
    if (static_cast<Eigen::Index>(subset.size()) == std::min(K, n)) return;
    for (Eigen::Index i = start; i < K; ++i) {
      subset.push_back(i);
      rec(i + 1);
      subset.pop_back();
    }
  };
  rec(0);
  if (best_d == std::numeric_limits<Real>::infinity()) return std::nullopt;
  return best;
}

// Exact VI(T, box) solution for affine T(x) = A x + b by enumerating the
// 3^n active-face patterns and checking the KKT sign conditions.
inline std::optional<Vector> box_vi_solve(const Eigen::MatrixXd& A, const Vector& b,
                                          const Vector& lo, const Vector& hi) {
  const Eigen::Index n = b.size();
  const std::int64_t total =
      static_cast<std::int64_t>(std::pow(3.0, static_cast<double>(n)));
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t t = code;
    std::vector<int> pat(static_cast<size_t>(n));
    std::vector<Eigen::Index> free_idx;
    Vector x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      pat[static_cast<size_t>(i)] = static_cast<int>(t % 3);
      t /= 3;
      if (pat[static_cast<size_t>(i)] == 0)
        x[i] = lo[i];
      else if (pat[static_cast<size_t>(i)] == 1)
        x[i] = hi[i];
      else
        free_idx.push_back(i);
    }
    if (!free_idx.empty()) {
      const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Aff(f, f);
      Vector rhs(f);
      for (Eigen::Index r = 0; r < f; ++r) {
        Real fixed = b[free_idx[static_cast<size_t>(r)]];
        for (Eigen::Index i = 0; i < n; ++i)
          if (pat[static_cast<size_t>(i)] != 2)
            fixed += A(free_idx[static_cast<size_t>(r)], i) * x[i];
        rhs[r] = -fixed;
        for (Eigen::Index cix = 0; cix < f; ++cix)
          Aff(r, cix) = A(free_idx[static_cast<size_t>(r)], free_idx[static_cast<size_t>(cix)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Aff);
      if (!lu.isInvertible()) continue;
      Vector xf = lu.solve(rhs);
      bool in = true;
      for (Eigen::Index r = 0; r < f; ++r) {
        Eigen::Index i = free_idx[static_cast<size_t>(r)];
        if (xf[r] < lo[i] - 1e-9 || xf[r] > hi[i] + 1e-9) in = false;
        x[i] = xf[r];
      }
      if (!in) continue;
    }
    Vector Tx = A * x + b;
    bool kkt = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pat[static_cast<size_t>(i)] == 0 && Tx[i] < -1e-9) kkt = false;   // at lo: T_i >= 0
      if (pat[static_cast<size_t>(i)] == 1 && Tx[i] > 1e-9) kkt = false;    // at hi: T_i <= 0
      if (pat[static_cast<size_t>(i)] == 2 && std::abs(Tx[i]) > 1e-9) kkt = false;
    }
    if (kkt) return x;
  }
  return std::nullopt;
}

}  // namespace svi::testing
