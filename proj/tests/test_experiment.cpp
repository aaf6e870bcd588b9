#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "svi/experiment.hpp"

using namespace svi;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "[problem]\n"
    "name = weak_sharp_lp\n"
    "n = 4\n"
    "halfspaces = 8\n"
    "noise = 0.8\n"
    "gen_seed = 12\n"
    "[solver]\n"
    "method = ws\n"
    "[schedule]\n"
    "kind = robust\n"
    "theta = 1\n"
    "lambda = 2\n"
    "beta = 1\n"
    "[run]\n"
    "kmax = 400\n"
    "seeds = 3\n"
    "seed_base = 1\n"
    "[output]\n"
    "path = unused\n";

}  // namespace

TEST_CASE("config parsing round-trips and rejects unknown keys") {
  auto cfg = ExperimentConfig::parse(kSmallConfig);
  CHECK(cfg.get("problem", "name") == "weak_sharp_lp");
  CHECK(cfg.get_or("schedule", "lambda", "?") == "2");

  auto again = ExperimentConfig::parse(cfg.serialize());
  CHECK(again == cfg);
  // serialization is canonical: a second round trip is byte-stable
  CHECK(again.serialize() == cfg.serialize());

  CHECK_THROWS_AS(ExperimentConfig::parse("[problem]\nwhat = 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[problem]\nname = a\nname = b\n"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("name = lp\n"), ConfigError);
  // missing required sections
  CHECK_THROWS_AS(ExperimentConfig::parse("[problem]\nname = rotation\n"), ConfigError);
}

TEST_CASE("config round-trip is stable under random perturbations") {
  RngStream rng(99, 0);
  for (int t = 0; t < 50; ++t) {
    ExperimentConfig cfg = ExperimentConfig::parse(kSmallConfig);
    cfg.sections["run"]["kmax"] = std::to_string(1 + rng.uniform_int(100000));
    cfg.sections["schedule"]["theta"] = std::to_string(rng.uniform(0.01, 10.0));
    auto back = ExperimentConfig::parse(cfg.serialize());
    CHECK(back == cfg);
  }
}

TEST_CASE("run_experiment produces the CSV schema and is byte-deterministic") {
  auto cfg = ExperimentConfig::parse(kSmallConfig);
  fs::path tmp = fs::temp_directory_path() / "svi_test_experiment";
  fs::create_directories(tmp);

  auto res1 = run_experiment(cfg);
  REQUIRE(res1.ensemble.has_value());
  CHECK(res1.records.size() == 3);
  write_experiment_outputs(cfg, res1, (tmp / "one").string());
  auto res2 = run_experiment(cfg);
  write_experiment_outputs(cfg, res2, (tmp / "two").string());

  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  for (const char* suffix : {"_ensemble.csv", "_seeds.csv", "_points.csv"}) {
    std::string a = slurp(tmp / ("one" + std::string(suffix)));
    CHECK(!a.empty());
    CHECK(a == slurp(tmp / ("two" + std::string(suffix))));
  }

  std::string ens = slurp(tmp / "one_ensemble.csv");
  CHECK(ens.rfind("k,metric,mean,stderr,n_seeds\n", 0) == 0);
  CHECK(ens.find("feas_sq_erg") != std::string::npos);
  CHECK(ens.find("dist_sol_erg") != std::string::npos);
  std::string seeds = slurp(tmp / "one_seeds.csv");
  CHECK(seeds.rfind("seed,k,metric,value\n", 0) == 0);

  // 17-significant-digit formatting round-trips doubles exactly
  Real v = 1.0 / 3.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  CHECK(std::stod(buf) == v);
}

TEST_CASE("tyk experiment path records the gap") {
  std::string text =
      "[problem]\nname = rotation\nnoise = 0.5\n[solver]\nmethod = tyk\n"
      "[schedule]\nkind = asynchronous\ndelta = 0.1\n[run]\nkmax = 300\nseeds = 2\n"
      "seed_base = 1\n";
  auto cfg = ExperimentConfig::parse(text);
  auto res = run_experiment(cfg);
  REQUIRE(res.ensemble.has_value());
  CHECK(res.ensemble->mean.count("gap") == 1);
  CHECK(res.ensemble->mean.count("dist_lnorm") == 1);
}

TEST_CASE("kmax = 0 produces a CSV with only the initial rows") {
  auto cfg = ExperimentConfig::parse(kSmallConfig);
  cfg.sections["run"]["kmax"] = "0";
  cfg.sections["run"]["seeds"] = "2";
  auto res = run_experiment(cfg);
  REQUIRE(res.ensemble.has_value());
  CHECK(res.ensemble->grid == std::vector<std::int64_t>{0});
}

TEST_CASE("invalid configs are rejected up front") {
  auto cfg = ExperimentConfig::parse(kSmallConfig);
  cfg.sections["solver"]["method"] = "nope";
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

  auto cfg2 = ExperimentConfig::parse(kSmallConfig);
  cfg2.sections["run"]["x0"] = "1,2,3";  // wrong dimension (n = 4)
  CHECK_THROWS_AS(run_experiment(cfg2), ConfigError);
}
