#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "svi/feasible_spec.hpp"
#include "svi/operator.hpp"

namespace svi {

// Per-run metric series on a strictly increasing iteration grid.
struct RunRecord {
  std::uint64_t seed = 0;
  std::string schedule_descriptor;
  std::vector<std::int64_t> grid;
  // metric name -> one value per grid index
  std::map<std::string, std::vector<Real>> series;
  // ergodic-average points saved at grid iterations (flat coordinates),
  // consumed by the offline gap oracle
  std::vector<std::pair<std::int64_t, Vector>> points;
  Real wall_time_sec = 0;

  void push(std::int64_t k) { grid.push_back(k); }
  void set(const std::string& metric, Real value) {
    series[metric].push_back(value);
  }
  void validate() const;
};

// Pointwise mean/stderr over seeds. All records must share grid and schedule.
struct EnsembleRecord {
  std::string schedule_descriptor;
  std::vector<std::int64_t> grid;
  std::map<std::string, std::vector<Real>> mean;
  std::map<std::string, std::vector<Real>> stderr_;
  int n_seeds = 0;
};

EnsembleRecord aggregate(std::vector<RunRecord> records);

// ||x - Pi_X(x)||^2 blockwise: exact projection when the feasible spec
// carries one, Dykstra at tol 1e-10 otherwise.
Real dist_to_feasible_sq(const FeasibleSpec& spec, const BlockVector& x);

struct BSigmaEstimate {
  Real B = 0;        // sqrt(mean ||F||^2)
  Real sigma = 0;    // sqrt(mean ||F - T||^2)
  Real B_stderr = 0;
  Real sigma_stderr = 0;
};

// Monte Carlo estimate of B(x) = sqrt(E||F(v,x)||^2) and sigma(x). Uses the
// exact mean operator if the problem exposes one, else the sample mean.
BSigmaEstimate estimate_B_and_sigma(const StochasticProblem& problem,
                                    const BlockVector& x, int n_samples,
                                    std::uint64_t seed = 20240901);

struct RateFit {
  Real slope = 0;
  Real intercept = 0;
  Real r2 = 0;
  int n_points = 0;
};

// Least-squares fit of log(mean metric) against log k over grid points in
// [k_min, k_max]. Requires >= 5 points and positive means.
RateFit fit_rate(const EnsembleRecord& ens, const std::string& metric,
                 std::int64_t k_min, std::int64_t k_max);

// Geometric iteration grid: ~points_per_decade log-spaced integers plus the
// endpoints {0, k_max}.
std::vector<std::int64_t> log_grid(std::int64_t k_max, int points_per_decade = 8);

}  // namespace svi
