#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mbump {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// scalar-1d (criteria 1-8 and 10), system-1d (criterion 9) or all.
  std::string suite = "all";
  int jobs = 1;
  std::uint64_t seed = 1;
  int restarts = 4;
};

/// Criterion ids of a suite; throws InvalidArgument for an unknown name.
std::vector<int> suite_criteria(const std::string& suite);

/// Runs the acceptance criteria of the suite in id order. A criterion that
/// throws is reported as failed with the error message as detail.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& options);

/// Fixed-width pass/fail table, one line per criterion.
std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace mbump
