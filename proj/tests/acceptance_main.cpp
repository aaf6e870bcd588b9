// Acceptance suite driver: one criterion per invocation (argv[1] = 1..12),
// or every criterion when run without arguments. Exit status reflects the
// pass/fail outcome so each criterion registers as its own ctest entry.

#include <cstdlib>
#include <iostream>

#include "svi/acceptance.hpp"

int main(int argc, char** argv) {
  if (argc > 1) {
    int id = std::atoi(argv[1]);
    auto r = svi::acceptance::run_criterion(id, std::cout);
    return r.pass ? 0 : 1;
  }
  auto all = svi::acceptance::run_all(std::cout);
  bool ok = true;
  for (const auto& r : all) ok = ok && r.pass;
  return ok ? 0 : 1;
}
