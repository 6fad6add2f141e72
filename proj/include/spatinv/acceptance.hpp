#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spatinv {

/// Outcome of one verification criterion from the built-in suite.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;   // measured values / first failure
  double seconds = 0.0;
};

/// Runs the full verification suite against the built-in model gallery.
/// Deterministic; touches no files or network. When progress is non-null,
/// one PASS/FAIL line per criterion is streamed as it completes.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace spatinv
