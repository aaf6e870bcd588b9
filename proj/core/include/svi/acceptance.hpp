#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "svi/block_vector.hpp"

namespace svi::acceptance {

inline constexpr int kNumCriteria = 12;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  Real seconds = 0;
};

// Runs acceptance criterion `id` (1..12) and prints one pass/fail line.
CriterionResult run_criterion(int id, std::ostream& log);

// Runs every criterion; returns all results.
std::vector<CriterionResult> run_all(std::ostream& log);

}  // namespace svi::acceptance
