#pragma once

// Exact-equality checks over the whole library (no Monte Carlo), run by
// `syrlab selftest`.

#include <string>
#include <vector>

namespace syrlab {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;

  bool passed() const;
  std::vector<std::string> failures() const;
};

struct SelftestOptions {
  unsigned threads = 1;
  /// Test mode: move mass in the level-2 table onto a multiple of 3 before
  /// checking it, so the table invariants must fail.
  bool corrupt_dist = false;
};

SelftestReport run_selftest(const SelftestOptions& options = {});

}  // namespace syrlab
