#include "morphnoise/slotmap.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

#include "morphnoise/corpus.hpp"

namespace morphnoise {

SlotMsdGraph build_graph(const std::vector<InflectionPair>& pairs,
                         const std::map<std::string, std::vector<Msd>>& gold) {
  // Slot semantics attach to the inflected form, so only target types count.
  std::set<std::pair<std::int64_t, std::string>> seen;
  for (const auto& p : pairs) seen.insert({p.slot, p.target.surface});

  std::map<std::pair<std::int64_t, Msd>, std::int64_t> counts;
  for (const auto& [slot, surface] : seen) {
    auto it = gold.find(surface);
    if (it == gold.end()) continue;
    for (const auto& m : it->second) ++counts[{slot, m}];
  }

  SlotMsdGraph g;
  std::set<std::int64_t> slot_set;
  std::set<Msd> msd_set;
  for (const auto& [key, w] : counts) {
    (void)w;
    slot_set.insert(key.first);
    msd_set.insert(key.second);
  }
  g.slots.assign(slot_set.begin(), slot_set.end());
  g.msds.assign(msd_set.begin(), msd_set.end());

  auto slot_idx = [&](std::int64_t s) {
    return static_cast<std::size_t>(std::lower_bound(g.slots.begin(), g.slots.end(), s) - g.slots.begin());
  };
  auto msd_idx = [&](const Msd& m) {
    return static_cast<std::size_t>(std::lower_bound(g.msds.begin(), g.msds.end(), m) - g.msds.begin());
  };
  for (const auto& [key, w] : counts) g.weights[{slot_idx(key.first), msd_idx(key.second)}] = w;
  return g;
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Hungarian algorithm with potentials; minimizes cost over a perfect matching
// of rows into columns (requires rows <= cols). 1-indexed internally.
std::int64_t solve_assignment(const std::vector<std::vector<std::int64_t>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return 0;
  const int m = static_cast<int>(cost[0].size());
  std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      std::int64_t delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::int64_t total = 0;
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) total += cost[p[j] - 1][j - 1];
  }
  return total;
}

// Maximum matching weight over the graph restricted to non-removed rows and
// columns. Unmatched slots cost nothing (absent edges weigh 0).
std::int64_t max_weight_subset(const SlotMsdGraph& g, const std::vector<char>& slot_removed,
                               const std::vector<char>& msd_removed) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < g.slots.size(); ++i)
    if (!slot_removed[i]) rows.push_back(i);
  for (std::size_t j = 0; j < g.msds.size(); ++j)
    if (!msd_removed[j]) cols.push_back(j);
  if (rows.empty() || cols.empty()) return 0;

  // Pad columns so every row can be assigned; padded cells weigh 0.
  const std::size_t m = std::max(rows.size(), cols.size());
  std::vector<std::vector<std::int64_t>> cost(rows.size(), std::vector<std::int64_t>(m, 0));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) cost[a][b] = -g.weight_at(rows[a], cols[b]);
  }
  return -solve_assignment(cost);
}

}  // namespace

SlotMapping max_matching(const SlotMsdGraph& g) {
  SlotMapping out;
  const std::size_t ns = g.slots.size(), nm = g.msds.size();
  std::vector<char> slot_removed(ns, 0), msd_removed(nm, 0);
  const std::int64_t opt = max_weight_subset(g, slot_removed, msd_removed);

  // Fix assignments slot by slot in ascending id order, giving each slot the
  // lexicographically smallest MSD that still permits a total of `opt`.
  std::int64_t fixed_weight = 0;
  for (std::size_t i = 0; i < ns; ++i) {
    slot_removed[i] = 1;
    bool matched = false;
    for (std::size_t j = 0; j < nm && !matched; ++j) {
      if (msd_removed[j]) continue;
      const std::int64_t w = g.weight_at(i, j);
      if (w <= 0) continue;
      msd_removed[j] = 1;
      const std::int64_t rest = max_weight_subset(g, slot_removed, msd_removed);
      if (fixed_weight + w + rest == opt) {
        out.assignment[g.slots[i]] = {g.msds[j], w};
        fixed_weight += w;
        matched = true;
      } else {
        msd_removed[j] = 0;
      }
    }
    // If no edge of this slot is consistent with optimality, every optimal
    // matching leaves it unmatched.
  }
  out.total_weight = fixed_weight;
  return out;
}

void apply_mapping(std::vector<InflectionPair>& pairs, const SlotMapping& mapping) {
  for (auto& p : pairs) {
    if (const Msd* m = mapping.lookup(p.slot)) {
      p.predicted_msd = *m;
    } else {
      p.predicted_msd.reset();
      p.annotation = AnnotationResult::filtered(FilterReason::UnmatchedSlot);
    }
  }
}

std::string serialize_slot_mapping(const SlotMapping& mapping) {
  std::string out;
  for (const auto& [slot, entry] : mapping.assignment) {
    out += std::to_string(slot);
    out += '\t';
    out += entry.msd.canonical();
    out += '\t';
    out += std::to_string(entry.weight);
    out += '\n';
  }
  out += "# total_weight ";
  out += std::to_string(mapping.total_weight);
  out += '\n';
  return out;
}

SlotMapping parse_slot_mapping_text(std::string_view text, std::string_view filename) {
  SlotMapping out;
  const std::string file(filename);
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    if (line.starts_with("#")) continue;  // summary / comment lines
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(file, lineno, "expected 3 tab-separated fields");
    std::int64_t slot = 0;
    auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), slot);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || slot < 0)
      throw ParseError(file, lineno, "bad slot id '" + fields[0] + "'");
    std::int64_t w = 0;
    auto [ptr2, ec2] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), w);
    if (ec2 != std::errc() || ptr2 != fields[2].data() + fields[2].size())
      throw ParseError(file, lineno, "bad weight '" + fields[2] + "'");
    Msd msd;
    try {
      msd = Msd::parse(fields[1]);
    } catch (const Error& e) {
      throw ParseError(file, lineno, e.what());
    }
    if (out.assignment.count(slot)) throw ParseError(file, lineno, "duplicate slot " + fields[0]);
    out.assignment[slot] = {std::move(msd), w};
    out.total_weight += w;
  }
  // The mapping must stay injective.
  std::set<std::string> seen;
  for (const auto& [slot, e] : out.assignment) {
    (void)slot;
    if (!seen.insert(e.msd.canonical()).second)
      throw Error("slot mapping assigns MSD '" + e.msd.canonical() + "' to two slots");
  }
  return out;
}

SlotMapping parse_slot_mapping(const std::filesystem::path& path) {
  return parse_slot_mapping_text(read_file(path), path.string());
}

}  // namespace morphnoise
