#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mret {

/// Binomial sanity band p +/- 3 sigma for `trials` draws at success rate p.
struct ChanceBand {
  double expected = 0.0;
  double low = 0.0;
  double high = 0.0;

  bool contains(double rate) const noexcept { return rate >= low && rate <= high; }
};
ChanceBand chance_band(double p, std::size_t trials);

struct SelftestOptions {
  std::uint64_t seed = 7;
  std::size_t threads = 1;
  /// Scratch directory for generated feature files; created if missing.
  std::filesystem::path work_dir;
  /// Test hook: evaluates the mean-only config where the full one is expected.
  bool fault_inject = false;
};

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestResult {
  std::vector<SelftestCheck> checks;

  bool passed() const noexcept;
  /// One `PASS|FAIL name: detail` line per check; contains no paths or timings.
  std::string log() const;
};

/// Generates planted datasets and runs the end-to-end checks.
SelftestResult run_selftest(const SelftestOptions& options);

}  // namespace mret
