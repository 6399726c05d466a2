#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "morphnoise/types.hpp"

namespace morphnoise {

// Bipartite graph between opaque slots and MSDs. An edge's weight counts the
// distinct target word types carrying that slot whose gold MSD set contains
// that MSD; absent edges weigh 0.
struct SlotMsdGraph {
  std::vector<std::int64_t> slots;  // sorted unique
  std::vector<Msd> msds;            // sorted unique (canonical order)
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> weights;  // (slot idx, msd idx) -> count >= 1

  std::int64_t weight_at(std::size_t slot_idx, std::size_t msd_idx) const {
    auto it = weights.find({slot_idx, msd_idx});
    return it == weights.end() ? 0 : it->second;
  }
};

// gold: target surface -> set of MSDs mapped from its analyses. Types with an
// empty gold set contribute no edges; token frequency is ignored.
SlotMsdGraph build_graph(const std::vector<InflectionPair>& pairs,
                         const std::map<std::string, std::vector<Msd>>& gold);

// One-to-one partial assignment slot -> MSD.
struct SlotMapping {
  struct Entry {
    Msd msd;
    std::int64_t weight = 0;
  };
  std::map<std::int64_t, Entry> assignment;
  std::int64_t total_weight = 0;

  const Msd* lookup(std::int64_t slot) const {
    auto it = assignment.find(slot);
    return it == assignment.end() ? nullptr : &it->second.msd;
  }
};

// Exact maximum-weight bipartite matching (assignment problem, O(n^3)
// Hungarian core). Among equally heavy optima the result is canonical:
// slots are processed in ascending id order and each receives the
// lexicographically smallest MSD consistent with optimality.
SlotMapping max_matching(const SlotMsdGraph& g);

// Matched pairs receive the slot's MSD as predicted_msd; pairs whose slot is
// unmatched are marked Filtered(UNMATCHED_SLOT).
void apply_mapping(std::vector<InflectionPair>& pairs, const SlotMapping& mapping);

// TSV `slot \t msd \t weight` plus a trailing `# total_weight <N>` line.
std::string serialize_slot_mapping(const SlotMapping& mapping);
SlotMapping parse_slot_mapping_text(std::string_view text, std::string_view filename = "<string>");
SlotMapping parse_slot_mapping(const std::filesystem::path& path);

}  // namespace morphnoise
