#pragma once

// Test-only oracle: exhaustive search over all one-to-one slot->MSD
// assignments. Exponential; keep graphs small.

#include <cstdint>
#include <vector>

#include "morphnoise/slotmap.hpp"

namespace morphnoise::testing {

inline std::int64_t brute_force_best(const SlotMsdGraph& g, std::size_t slot_idx, std::vector<char>& msd_used) {
  if (slot_idx == g.slots.size()) return 0;
  // slot unmatched
  std::int64_t best = brute_force_best(g, slot_idx + 1, msd_used);
  for (std::size_t j = 0; j < g.msds.size(); ++j) {
    if (msd_used[j]) continue;
    const std::int64_t w = g.weight_at(slot_idx, j);
    if (w <= 0) continue;
    msd_used[j] = 1;
    best = std::max(best, w + brute_force_best(g, slot_idx + 1, msd_used));
    msd_used[j] = 0;
  }
  return best;
}

inline std::int64_t brute_force_max_weight(const SlotMsdGraph& g) {
  std::vector<char> used(g.msds.size(), 0);
  return brute_force_best(g, 0, used);
}

}  // namespace morphnoise::testing
