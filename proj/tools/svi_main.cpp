#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "svi/acceptance.hpp"
#include "svi/errors.hpp"
#include "svi/experiment.hpp"

namespace {

using namespace svi;

int cmd_run(const std::string& config_path, std::optional<std::int64_t> seed_base,
            std::optional<int> seeds, std::optional<std::string> out) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  if (seed_base) cfg.sections["run"]["seed_base"] = std::to_string(*seed_base);
  if (seeds) cfg.sections["run"]["seeds"] = std::to_string(*seeds);
  if (out) cfg.sections["output"]["path"] = *out;
  std::string path = cfg.get_or("output", "path", "out/experiment");

  ExperimentResult res = run_experiment(cfg);
  write_experiment_outputs(cfg, res, path);
  if (res.divergence) {
    std::cerr << "divergence: " << *res.divergence << " (partial output written)\n";
    return 3;
  }
  std::cout << "wrote " << path << "_ensemble.csv (" << res.records.size()
            << " seeds)\n";
  return 0;
}

int cmd_rates(const std::string& csv_path, const std::string& metric,
              std::int64_t kmin, std::int64_t kmax, double delta) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open CSV: " + csv_path);
  std::string header;
  if (!std::getline(in, header) || header != "k,metric,mean,stderr,n_seeds")
    throw ConfigError("malformed ensemble CSV (bad header)");
  std::map<std::int64_t, Real> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string kf, mf, meanf;
    if (!std::getline(ss, kf, ',') || !std::getline(ss, mf, ',') ||
        !std::getline(ss, meanf, ','))
      throw ConfigError("malformed ensemble CSV row: " + line);
    if (mf != metric) continue;
    rows[std::stoll(kf)] = std::stod(meanf);
  }
  if (rows.empty()) throw ConfigError("metric not present in CSV: " + metric);

  EnsembleRecord ens;
  for (const auto& [k, v] : rows) {
    ens.grid.push_back(k);
    ens.mean[metric].push_back(v);
    ens.stderr_[metric].push_back(0);
  }
  ens.n_seeds = 1;
  RateFit fit = fit_rate(ens, metric, kmin, kmax);

  double expected;
  if (metric == "feas_sq_erg")
    expected = -1.0;
  else if (metric == "dist_sol_erg" || metric == "dist_sol")
    expected = -0.5;
  else if (metric == "gap")
    expected = -(0.5 - delta);
  else
    expected = 0.0;
  const double slack = 0.2;
  bool pass = expected != 0.0 && fit.slope <= expected + slack;
  std::cout << "metric " << metric << " over k in [" << kmin << ", " << kmax << "]\n"
            << "  slope     " << fit.slope << "\n"
            << "  intercept " << fit.intercept << "\n"
            << "  r^2       " << fit.r2 << "  (" << fit.n_points << " points)\n";
  if (expected != 0.0)
    std::cout << "  theoretical exponent " << expected << "  -> "
              << (pass ? "PASS" : "FAIL") << " (slope <= " << expected + slack
              << ")\n";
  else
    std::cout << "  no declared exponent for this metric\n";
  return 0;
}

int cmd_gap(const std::string& config_path) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  ProblemCatalogEntry entry =
      make_problem(cfg.get("problem", "name"), cfg.sections.at("problem"));
  if (!entry.affine_A || !entry.gap_domain)
    throw ConfigError("gap: problem does not support the gap oracle");
  std::string base = cfg.get_or("output", "path", "out/experiment");
  std::ifstream in(base + "_points.csv");
  if (!in) throw ConfigError("gap: missing points file " + base + "_points.csv");
  std::string line;
  std::getline(in, line);  // header
  std::cout << "seed,k,gap\n";
  const Eigen::Index n = entry.problem.layout.total_dim();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    std::string seed = tok;
    std::getline(ss, tok, ',');
    std::string k = tok;
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::getline(ss, tok, ',')) throw ConfigError("gap: malformed points row");
      x[i] = std::stod(tok);
    }
    Real g = entry.gap(BlockVector::from_flat(entry.problem.layout, x));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", g);
    std::cout << seed << "," << k << "," << buf << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver harness for monotone stochastic variational inequalities"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a configured experiment ensemble");
  std::string run_config;
  std::optional<std::int64_t> seed_base;
  std::optional<int> seeds;
  std::optional<std::string> out;
  run->add_option("config", run_config)->required();
  run->add_option("--seed-base", seed_base);
  run->add_option("--seeds", seeds);
  run->add_option("--out", out);

  auto* rates = app.add_subcommand("rates", "fit a log-log rate from an ensemble CSV");
  std::string rates_csv, rates_metric = "feas_sq_erg";
  std::int64_t kmin = 100, kmax = 10000;
  double rates_delta = 0.1;
  rates->add_option("csv", rates_csv)->required();
  rates->add_option("--metric", rates_metric);
  rates->add_option("--kmin", kmin);
  rates->add_option("--kmax", kmax);
  rates->add_option("--delta", rates_delta);

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  int criterion = 0;
  verify->add_option("--criterion", criterion, "single criterion 1..12 (0 = all)");

  auto* gap = app.add_subcommand("gap", "evaluate the dual gap of saved iterates");
  std::string gap_config;
  gap->add_option("config", gap_config)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_config, seed_base, seeds, out);
    if (*rates) return cmd_rates(rates_csv, rates_metric, kmin, kmax, rates_delta);
    if (*gap) return cmd_gap(gap_config);
    if (*verify) {
      if (criterion > 0) {
        auto r = svi::acceptance::run_criterion(criterion, std::cout);
        return r.pass ? 0 : 1;
      }
      auto all = svi::acceptance::run_all(std::cout);
      bool ok = true;
      for (const auto& r : all) ok = ok && r.pass;
      return ok ? 0 : 1;
    }
  } catch (const svi::DivergenceError& e) {
    std::cerr << "divergence at iteration " << e.iteration << ": " << e.what() << "\n";
    return 3;
  } catch (const svi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
