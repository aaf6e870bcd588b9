#include "svi/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "svi/errors.hpp"
#include "svi/projections.hpp"

namespace svi {

void RunRecord::validate() const {
  for (size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw StructuralError("RunRecord: grid must be strictly increasing");
  for (const auto& [name, vals] : series) {
    if (vals.size() != grid.size())
      throw StructuralError("RunRecord: series '" + name + "' length != grid");
    for (Real v : vals)
      if (!std::isfinite(v)) throw StructuralError("RunRecord: non-finite value in " + name);
  }
}

EnsembleRecord aggregate(std::vector<RunRecord> records) {
  if (records.empty()) throw UsageError("aggregate: no records");
  // Fixed reduction order regardless of input permutation.
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
  const auto& ref = records.front();
  for (const auto& r : records) {
    if (r.grid != ref.grid) throw StructuralError("aggregate: grid mismatch");
    if (r.schedule_descriptor != ref.schedule_descriptor)
      throw StructuralError("aggregate: schedule mismatch");
  }
  EnsembleRecord ens;
  ens.schedule_descriptor = ref.schedule_descriptor;
  ens.grid = ref.grid;
  ens.n_seeds = static_cast<int>(records.size());
  const size_t n = ref.grid.size();
  const Real cnt = static_cast<Real>(records.size());
  for (const auto& [name, _] : ref.series) {
    std::vector<Real> mean(n, 0.0), se(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      Real s = 0;
      for (const auto& r : records) s += r.series.at(name)[i];
      Real m = s / cnt;
      Real var = 0;
      for (const auto& r : records) {
        Real d = r.series.at(name)[i] - m;
        var += d * d;
      }
      mean[i] = m;
      se[i] = records.size() > 1 ? std::sqrt(var / (cnt * (cnt - 1))) : 0.0;
    }
    ens.mean[name] = std::move(mean);
    ens.stderr_[name] = std::move(se);
  }
  return ens;
}

Real dist_to_feasible_sq(const FeasibleSpec& spec, const BlockVector& x) {
  if (spec.exact_feasible_projection) {
    BlockVector p = (*spec.exact_feasible_projection)(x);
    return (x - p).squared_norm();
  }
  Real total = 0;
  for (int j = 0; j < spec.num_blocks(); ++j) {
    Vector p = dykstra_project(block_sets(spec, j), x.block(j));
    total += (x.block(j) - p).squaredNorm();
  }
  return total;
}

BSigmaEstimate estimate_B_and_sigma(const StochasticProblem& problem,
                                    const BlockVector& x, int n_samples,
                                    std::uint64_t seed) {
  if (n_samples < 100) throw UsageError("estimate_B_and_sigma: n_samples >= 100");
  RngStream rng(seed, 900);
  std::vector<BlockVector> values;
  values.reserve(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    auto s = problem.sample(rng);
    values.push_back(s->evaluate(x));
  }
  BlockVector mean = BlockVector::zero(x.layout());
  for (const auto& v : values) mean += v;
  mean *= 1.0 / n_samples;
  const BlockVector center =
      problem.mean_operator ? (*problem.mean_operator)(x) : mean;

  Real sum_n2 = 0, sum_n4 = 0, sum_d2 = 0, sum_d4 = 0;
  for (const auto& v : values) {
    Real n2 = v.squared_norm();
    Real d2 = (v - center).squared_norm();
    sum_n2 += n2;
    sum_n4 += n2 * n2;
    sum_d2 += d2;
    sum_d4 += d2 * d2;
  }
  const Real N = static_cast<Real>(n_samples);
  BSigmaEstimate out;
  Real m2 = sum_n2 / N, md = sum_d2 / N;
  out.B = std::sqrt(m2);
  out.sigma = std::sqrt(md);
  Real var_m2 = (sum_n4 / N - m2 * m2) / N;
  Real var_md = (sum_d4 / N - md * md) / N;
  // delta method for the square roots
  out.B_stderr = out.B > 0 ? 0.5 * std::sqrt(std::max(var_m2, 0.0)) / out.B : 0;
  out.sigma_stderr = out.sigma > 0 ? 0.5 * std::sqrt(std::max(var_md, 0.0)) / out.sigma : 0;
  return out;
}

RateFit fit_rate(const EnsembleRecord& ens, const std::string& metric,
                 std::int64_t k_min, std::int64_t k_max) {
  auto it = ens.mean.find(metric);
  if (it == ens.mean.end()) throw UsageError("fit_rate: unknown metric " + metric);
  std::vector<Real> lx, ly;
  for (size_t i = 0; i < ens.grid.size(); ++i) {
    std::int64_t k = ens.grid[i];
    if (k < k_min || k > k_max || k < 1) continue;
    Real y = it->second[i];
    if (!(y > 0))
      throw UsageError("fit_rate: nonpositive mean for metric " + metric);
    lx.push_back(std::log(static_cast<Real>(k)));
    ly.push_back(std::log(y));
  }
  if (lx.size() < 5) throw UsageError("fit_rate: need >= 5 grid points in range");
  const Real n = static_cast<Real>(lx.size());
  Real sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  RateFit f;
  f.n_points = static_cast<int>(lx.size());
  Real denom = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  Real ss_tot = syy - sy * sy / n;
  Real ss_res = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    Real e = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += e * e;
  }
  f.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
  return f;
}

std::vector<std::int64_t> log_grid(std::int64_t k_max, int points_per_decade) {
  std::vector<std::int64_t> g;
  g.push_back(0);
  if (k_max >= 1) g.push_back(1);
  Real step = std::pow(10.0, 1.0 / points_per_decade);
  Real v = 1;
  while (true) {
    v *= step;
    std::int64_t k = static_cast<std::int64_t>(std::llround(v));
    if (k >= k_max) break;
    if (k > g.back()) g.push_back(k);
  }
  if (k_max > g.back()) g.push_back(k_max);
  return g;
}

}  // namespace svi
