#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctcsum {

struct SelfcheckOptions {
  std::uint64_t seed = 20170820;
  std::size_t ctc_instances = 500;
  std::size_t gradient_instances = 100;
  std::size_t beam_instances = 200;
  std::size_t lcs_instances = 1000;
  std::size_t model_instances = 2;
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t instances = 0;
  /// Seed of the first failing instance; rerun with it to reproduce.
  std::optional<std::uint64_t> failing_seed;
  std::string detail;
  double seconds = 0.0;
};

/// Runs every embedded oracle suite on seeded random instances:
/// ctc-oracle (forward recursion vs path enumeration), ctc-gradient
/// (analytic vs central differences of the enumerated loss), beam-exhaustive
/// (prefix beam vs exhaustive collapsed-sequence argmax), lcs-oracle (DP vs
/// memoized recursion) and model-gradient (BPTT vs central differences).
std::vector<SuiteResult> run_selfcheck(const SelfcheckOptions& opts = {});

std::string format_selfcheck(const std::vector<SuiteResult>& results);

}  // namespace ctcsum
