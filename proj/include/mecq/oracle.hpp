#pragma once

#include <cstdint>
#include <vector>

#include "mecq/action_space.hpp"
#include "mecq/net_model.hpp"

namespace mecq {

struct OracleOptions {
  std::uint64_t cap = 10'000'000;  // joint combinations
  std::uint64_t catalog_cap = kDefaultCatalogCap;
  int threads = 0;  // 0 = hardware concurrency
};

struct OracleResult {
  GlobalAllocation best_allocation;
  double best_max_delay = 0.0;
  std::vector<ActionId> best_ids;  // per BS
  std::uint64_t evaluated_count = 0;
  std::uint64_t skipped_count = 0;  // combinations breaking the cross-BS rule
};

// Exact minimum of the maximal delay over the product of the per-BS catalogs.
// Combinations where a user holds one subcarrier at two BSs are skipped. Ties
// go to the lexicographically smallest joint id (BS 0 most significant).
// Throws std::length_error when the product exceeds opts.cap.
OracleResult solve_exhaustive(const NetworkScenario& s, const OracleOptions& opts = {});

}  // namespace mecq
