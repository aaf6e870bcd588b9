#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "svi/metrics.hpp"
#include "svi/problems.hpp"
#include "svi/schedule.hpp"

namespace svi {

// Declarative experiment description: sectioned key/value text. Unknown
// sections or keys are rejected; values round-trip losslessly through
// parse/serialize.
struct ExperimentConfig {
  // section -> key -> value, canonical (sorted) order
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& file);
  std::string serialize() const;

  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& dflt) const;
  bool operator==(const ExperimentConfig& o) const { return sections == o.sections; }
};

struct ExperimentResult {
  ProblemCatalogEntry entry;
  std::vector<RunRecord> records;           // completed seeds, ascending
  std::optional<EnsembleRecord> ensemble;   // when >= 1 record completed
  std::optional<std::string> divergence;    // message when a seed diverged
  std::string solver;                       // "ws" | "tyk"
  std::string schedule_descriptor;
};

// Runs the configured ensemble. Seeds run in parallel up to SVI_THREADS;
// aggregation and output stay deterministic regardless of thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes <path>_ensemble.csv, <path>_seeds.csv, <path>_config.json and,
// when the problem supports the gap oracle, <path>_points.csv with the
// logged ergodic-average points. CSV: '.' decimal, '\n' endings, 17
// significant digits.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                              const std::filesystem::path& out_base);

// Builders shared with the CLI and tests.
WsSchedule ws_schedule_from_config(const ExperimentConfig& cfg);
TykSchedule tyk_schedule_from_config(const ExperimentConfig& cfg, int m);

int env_thread_count();

}  // namespace svi
