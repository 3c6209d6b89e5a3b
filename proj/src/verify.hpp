#pragma once

// Verification suites: each runs the library against an independent oracle
// and reports named checks with a measured value and a threshold.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rng.hpp"

namespace vardiss::verify {

struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string anchor;  ///< the relation this check embodies
};

struct SuiteResult {
  std::string id;
  std::vector<Check> checks;
  bool passed = false;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = kDefaultSeed;
  /// Harness mutation fixture: the eq3-equivalence pipeline residual is
  /// assembled with the dissipative force negated.
  bool flip_q = false;
};

struct Report {
  std::vector<SuiteResult> suites;
  bool passed = false;
  std::uint64_t seed = kDefaultSeed;
  std::string rng = "splitmix64-counter";
  bool flip_q = false;
};

const std::vector<std::string>& suite_ids();
bool is_known_suite(std::string_view id);

/// Throws Error(unknown_suite) for an unknown id.
SuiteResult run_suite(std::string_view id, const Options& options = {});

/// Runs the given suites in order; all suites when `ids` is empty. Unknown
/// ids are rejected before anything runs.
Report run(std::span<const std::string> ids, const Options& options = {});

}  // namespace vardiss::verify
