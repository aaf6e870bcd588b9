#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "svi/block_vector.hpp"

namespace svi {

// Stepsize schedule for the centralized weak-sharp method.
//
// robust(theta, lambda):  alpha_0 = alpha_1 = theta,
//                         alpha_k = theta / sqrt(k (ln k)^{1+lambda}), k >= 2
// constant(alpha):        alpha_k = alpha
// horizon(theta, K):      alpha_k = theta / sqrt(K+1)
// custom(values):         explicit sequence
class WsSchedule {
 public:
  enum class Kind { Robust, Constant, Horizon, Custom };

  static WsSchedule robust(Real theta, Real lambda, Real beta = 1.0);
  static WsSchedule constant(Real alpha, Real beta = 1.0);
  static WsSchedule horizon(Real theta, std::int64_t k_max, Real beta = 1.0);
  static WsSchedule custom(std::vector<Real> alphas, Real beta = 1.0);

  Kind kind() const { return kind_; }
  Real alpha(std::int64_t k) const;
  Real beta(std::int64_t) const { return beta_; }
  Real B(std::int64_t k) const { return beta(k) * (2 - beta(k)); }

  Real theta() const { return theta_; }
  Real lambda() const { return lambda_; }
  std::string descriptor() const;

  // Partial sums S_0^k, Z_0^k, a_0^k = sum alpha^2, b_0^k = sum alpha^2/B.
  struct Sums {
    Real S = 0, Z = 0, a = 0, b = 0;
  };
  Sums sums_to(std::int64_t k) const;

 private:
  WsSchedule(Kind k) : kind_(k) {}
  Kind kind_;
  Real theta_ = 1, lambda_ = 1, beta_ = 1, const_alpha_ = 0;
  std::int64_t horizon_k_ = 0;
  std::vector<Real> custom_;
};

struct SeriesVerdict {
  std::string name;
  Real partial_sum = 0;       // value at the probe horizon
  bool converges = false;     // verdict
  bool analytic = false;      // verdict from closed-form knowledge vs numeric trend
};

struct WsValidationReport {
  std::vector<SeriesVerdict> series;     // sum alpha, sum alpha^2, sum alpha^2/B
  Real control_min_prob = 0;
  Real control_lambda = 0;
  Real regularity_c_estimate = 0;        // Monte Carlo estimate (max ratio)
  std::optional<Real> c_from_eta;        // eta |I| / lambda when eta supplied
  std::vector<std::string> warnings;
  bool asymptotics_applicable = true;    // false flags error-bound-only mode
};

// Per-agent stepsizes/regularization for the distributed regularized method.
//
// asynchronous(delta, C_j, D_j, beta_j, s_alpha, s_eps):
//   alpha_{k,j} = s_alpha / (k + C_j)^{1/2+delta}
//   eps_{k,j}   = s_eps   / (k + D_j)^{1/2-delta},  delta in (0, 1/2)
// The formal eps_{-1,j} term equals eps_{0,j}.
class TykSchedule {
 public:
  enum class Kind { Asynchronous, Custom };

  static TykSchedule asynchronous(int m, Real delta, std::vector<Real> C,
                                  std::vector<Real> D, std::vector<Real> beta,
                                  Real s_alpha = 1.0, Real s_eps = 1.0);
  // Explicit per-agent functions; eps must be positive decreasing to zero.
  static TykSchedule custom(int m, std::function<Real(std::int64_t, int)> alpha,
                            std::function<Real(std::int64_t, int)> beta,
                            std::function<Real(std::int64_t, int)> eps,
                            std::string descriptor = "custom");

  Kind kind() const { return kind_; }
  int num_agents() const { return m_; }
  Real delta() const { return delta_; }

  Real alpha(std::int64_t k, int j) const;
  Real beta(std::int64_t k, int j) const;
  // eps(k, j); k = -1 returns the formal initial term eps_{0,j}.
  Real eps(std::int64_t k, int j) const;

  Real alpha_min(std::int64_t k) const;
  Real alpha_max(std::int64_t k) const;
  Real eps_min(std::int64_t k) const;
  Real eps_max(std::int64_t k) const;
  Real beta_min(std::int64_t k) const;
  Real beta_max(std::int64_t k) const;
  // Delta_k = alpha_max - alpha_min
  Real Delta(std::int64_t k) const { return alpha_max(k) - alpha_min(k); }
  // Gamma_k = eps_{k-1,max} - eps_{k,min}
  Real Gamma(std::int64_t k) const { return eps_max(k - 1) - eps_min(k); }
  // B_k = beta_min (2 - beta_max)
  Real B(std::int64_t k) const { return beta_min(k) * (2 - beta_max(k)); }

  std::string descriptor() const { return descriptor_; }

 private:
  TykSchedule(Kind k, int m) : kind_(k), m_(m) {}
  Kind kind_;
  int m_;
  Real delta_ = 0.25, s_alpha_ = 1, s_eps_ = 1;
  std::vector<Real> C_, D_, betas_;
  std::function<Real(std::int64_t, int)> alpha_fn_, beta_fn_, eps_fn_;
  std::string descriptor_;
};

struct TykValidationItem {
  std::string name;
  Real value_at_horizon = 0;  // last term or partial sum
  bool pass = false;
  std::string note;
};

struct TykValidationReport {
  std::vector<TykValidationItem> items;
  // limsup eps_max/eps_min classification for the convergence theorem.
  Real eps_ratio_limsup = 0;
  bool eps_ratio_finite = false;
  bool eps_ratio_le_one = false;
  bool all_pass = false;
};

// Numeric verdicts for every limit/series of the partial-coordination
// assumption, probed up to `horizon` (>= 1e3).
TykValidationReport validate_tyk_assumptions(const TykSchedule& s, std::int64_t horizon);

}  // namespace svi
