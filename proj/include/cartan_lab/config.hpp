#pragma once

#include <cstddef>
#include <cstdint>

namespace cartan_lab {

/// Size limits for the exhaustive enumerations.  Exceeding one raises
/// guard_exceeded instead of running for hours.
struct Guards {
  /// Wide-subgroupoid enumeration refuses groupoids with more non-unit arrows.
  std::size_t max_nonunit_arrows = 24;
  /// Maximum number of algebra elements any brute-force scan may visit.
  std::uint64_t max_scan = 3'000'000;
  /// Maximum number of normalizers held in a structured catalog.
  std::uint64_t max_normalizers = 2'000'000;
  /// Maximum subspace dimension for exhaustive subspace enumeration.
  std::size_t max_subspace_dim = 9;
  /// Maximum number of distinct generators for singly-generated scans.
  std::uint64_t max_generators = 3'000'000;
};

}  // namespace cartan_lab
