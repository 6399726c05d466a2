#include "morphnoise/datasets.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "morphnoise/corpus.hpp"
#include "morphnoise/rng.hpp"
#include "nlohmann/json.hpp"

namespace morphnoise {

using json = nlohmann::ordered_json;

std::pair<Dataset, Dataset> split_correct_noisy(const std::vector<InflectionPair>& pairs) {
  Dataset correct{"correct", 0, {}};
  Dataset noisy{"noisy", 0, {}};
  for (const auto& p : pairs) {
    if (!p.annotation) throw Error("split_correct_noisy: pair lacks an annotation");
    if (p.annotation->is_filtered()) continue;
    if (!p.predicted_msd) throw Error("split_correct_noisy: non-filtered pair lacks a predicted MSD");
    Sample s;
    s.source = p.source.surface;
    s.target = p.target.surface;
    s.msd = *p.predicted_msd;
    if (p.annotation->is_correct()) {
      s.provenance = Provenance::Correct;
      correct.samples.push_back(std::move(s));
    } else {
      s.provenance = Provenance::Noisy;
      s.flags = p.annotation->flags;
      noisy.samples.push_back(std::move(s));
    }
  }
  return {std::move(correct), std::move(noisy)};
}

std::vector<std::size_t> PartitionPlan::partition_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

PartitionPlan partition_noise(std::size_t noisy_count, int k, std::uint64_t seed) {
  if (k < 1) throw Error("partition_noise: k must be >= 1");
  PartitionPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::vector<std::size_t> perm(noisy_count);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0x70617274));  // "part"
  rng.shuffle(perm);
  plan.assignment.resize(noisy_count);
  for (std::size_t i = 0; i < noisy_count; ++i)
    plan.assignment[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return plan;
}

std::vector<Dataset> cumulative_datasets(const Dataset& correct, const Dataset& noisy,
                                         const PartitionPlan& plan, const std::string& name_prefix) {
  if (plan.assignment.size() != noisy.samples.size())
    throw Error("cumulative_datasets: plan does not cover the noisy dataset");
  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(plan.k) + 1);
  for (int i = 0; i <= plan.k; ++i) {
    Dataset d;
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_p%02d", i);
    d.name = name_prefix + suffix;
    d.seed = plan.seed;
    d.samples = correct.samples;
    for (std::size_t j = 0; j < noisy.samples.size(); ++j) {
      if (plan.assignment[j] < i) d.samples.push_back(noisy.samples[j]);
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::map<FlagSet, Dataset> add_one_in(const Dataset& correct, const Dataset& noisy) {
  std::map<FlagSet, Dataset> out;
  for (const auto& s : noisy.samples) {
    auto [it, inserted] = out.try_emplace(s.flags);
    if (inserted) {
      it->second.name = "addone_" + s.flags.to_string();
      it->second.samples = correct.samples;
    }
    it->second.samples.push_back(s);
  }
  return out;
}

namespace {

std::size_t codepoint_length(const std::string& s) { return utf8_decode(s).size(); }

struct Pool {
  // Row indices into the table, split by eval-lemma overlap; shuffled once.
  std::vector<std::size_t> overlap;
  std::vector<std::size_t> other;
  std::size_t used_overlap = 0;
  std::size_t used_other = 0;
};

struct DrawContext {
  const std::vector<EvalInstance>* table;
  ResampleReport* report;
};

// Draws without replacement while rows remain, then cycles with replacement.
std::size_t draw(std::vector<std::size_t>& rows, std::size_t& used, ResampleReport* report) {
  if (used < rows.size()) return rows[used++];
  const std::size_t idx = rows[used % rows.size()];
  ++used;
  if (report) ++report->replacement_draws;
  return idx;
}

}  // namespace

Dataset resample_unimorph(const Dataset& correct, const std::vector<EvalInstance>& table,
                          const std::vector<EvalInstance>& eval_set, std::uint64_t seed,
                          ResampleReport* report) {
  std::set<std::string> eval_lemmas;
  for (const auto& e : eval_set) eval_lemmas.insert(e.lemma.surface);

  std::map<Msd, long> need;
  long target_overlap = 0;
  for (const auto& s : correct.samples) {
    ++need[s.msd];
    if (eval_lemmas.count(s.source)) ++target_overlap;
  }
  ResampleReport local;
  ResampleReport& rep = report ? *report : local;
  rep = ResampleReport{};
  rep.target_overlap = target_overlap;

  // Per-MSD pools, shuffled under a per-MSD stream so map order is irrelevant.
  std::map<Msd, Pool> pools;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    if (!need.count(row.msd)) continue;
    auto& pool = pools[row.msd];
    (eval_lemmas.count(row.lemma.surface) ? pool.overlap : pool.other).push_back(i);
  }
  std::size_t msd_index = 0;
  for (auto& [msd, pool] : pools) {
    (void)msd;
    Rng rng(mix_seed(seed, 0x7265736100ULL + msd_index++));
    rng.shuffle(pool.overlap);
    rng.shuffle(pool.other);
  }
  for (const auto& [msd, n] : need) {
    (void)n;
    if (!pools.count(msd)) throw Error("resample: table has no entry for MSD " + msd.canonical());
  }

  // Allocate overlap draws: forced ones first (no non-overlap rows), then
  // fill the quota from unique overlap rows, then with replacement.
  std::map<Msd, long> overlap_alloc;
  long quota = target_overlap;
  for (const auto& [msd, n] : need) {
    const auto& pool = pools.at(msd);
    long forced = pool.other.empty() ? n : 0;
    overlap_alloc[msd] = forced;
    quota -= forced;
  }
  if (quota < 0) {
    rep.notes.push_back("overlap overshoot: table forces more eval-lemma rows than the original had");
  }
  for (int pass = 0; pass < 2 && quota > 0; ++pass) {
    for (const auto& [msd, n] : need) {
      if (quota <= 0) break;
      const auto& pool = pools.at(msd);
      if (pool.overlap.empty()) continue;
      long cap = pass == 0 ? std::min<long>(n, static_cast<long>(pool.overlap.size())) : n;
      long extra = std::min(quota, cap - overlap_alloc[msd]);
      if (extra > 0) {
        overlap_alloc[msd] += extra;
        quota -= extra;
      }
    }
  }
  if (quota > 0) rep.notes.push_back("overlap shortfall: table lacks eval-lemma rows for " + std::to_string(quota) + " draws");

  Dataset out;
  out.name = correct.name + "_resampled";
  out.seed = seed;
  for (const auto& [msd, n] : need) {
    auto& pool = pools.at(msd);
    long from_overlap = overlap_alloc[msd];
    for (long i = 0; i < n; ++i) {
      std::size_t row_idx;
      if (i < from_overlap) {
        row_idx = draw(pool.overlap, pool.used_overlap, &rep);
      } else if (!pool.other.empty()) {
        row_idx = draw(pool.other, pool.used_other, &rep);
      } else {
        row_idx = draw(pool.overlap, pool.used_overlap, &rep);
      }
      const auto& row = table[row_idx];
      Sample s;
      s.source = row.lemma.surface;
      s.target = row.target.surface;
      s.msd = row.msd;
      s.provenance = Provenance::Resampled;
      if (eval_lemmas.count(s.source)) ++rep.achieved_overlap;
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

Dataset length_matched_resample(const Dataset& correct, const std::vector<EvalInstance>& table,
                                const std::vector<EvalInstance>& eval_set, std::uint64_t seed,
                                ResampleReport* report) {
  std::set<std::string> eval_lemmas;
  for (const auto& e : eval_set) eval_lemmas.insert(e.lemma.surface);

  ResampleReport local;
  ResampleReport& rep = report ? *report : local;
  rep = ResampleReport{};
  for (const auto& s : correct.samples) {
    if (eval_lemmas.count(s.source)) ++rep.target_overlap;
  }

  // Pools keyed by (MSD, target length); rows inside each bucket shuffled,
  // overlap rows first so the quota drains preferentially.
  std::map<Msd, std::map<std::size_t, std::vector<std::size_t>>> buckets;
  std::map<Msd, bool> msd_present;
  for (std::size_t i = 0; i < table.size(); ++i) {
    buckets[table[i].msd][codepoint_length(table[i].target.surface)].push_back(i);
    msd_present[table[i].msd] = true;
  }
  std::size_t stream = 0;
  for (auto& [msd, by_len] : buckets) {
    (void)msd;
    for (auto& [len, rows] : by_len) {
      (void)len;
      Rng rng(mix_seed(seed, 0x6c656e00ULL + stream++));
      rng.shuffle(rows);
    }
  }

  std::map<Msd, std::vector<std::size_t>> wants;  // per-MSD desired lengths, sorted
  for (const auto& s : correct.samples) wants[s.msd].push_back(codepoint_length(s.target));
  for (auto& [msd, lens] : wants) {
    if (!msd_present.count(msd)) throw Error("resample: table has no entry for MSD " + msd.canonical());
    std::sort(lens.begin(), lens.end());
  }

  std::map<std::size_t, std::size_t> used;  // row index -> times drawn
  long quota = rep.target_overlap;
  Dataset out;
  out.name = correct.name + "_resampled_lenmatch";
  out.seed = seed;
  for (const auto& [msd, lens] : wants) {
    auto& by_len = buckets.at(msd);
    for (std::size_t want_len : lens) {
      // Nearest bucket with rows left; ties prefer the shorter length.
      std::size_t best_len = 0;
      long best_dist = -1;
      bool best_fresh = false;
      for (const auto& [len, rows] : by_len) {
        const bool fresh = std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return !used.count(r); });
        const long dist = std::abs(static_cast<long>(len) - static_cast<long>(want_len));
        if (best_dist < 0 || (fresh && !best_fresh) || (fresh == best_fresh && dist < best_dist)) {
          best_len = len;
          best_dist = dist;
          best_fresh = fresh;
        }
      }
      auto& rows = by_len.at(best_len);
      if (best_len != want_len) ++rep.length_deviations;

      // Within the bucket prefer an unused row honoring the overlap quota.
      auto pick = [&](auto pred) -> long {
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (!used.count(rows[r]) && pred(rows[r])) return static_cast<long>(r);
        }
        return -1;
      };
      auto is_overlap = [&](std::size_t r) { return eval_lemmas.count(table[r].lemma.surface) > 0; };
      long at = quota > 0 ? pick(is_overlap) : pick([&](std::size_t r) { return !is_overlap(r); });
      if (at < 0) at = pick([](std::size_t) { return true; });
      std::size_t row_idx;
      if (at >= 0) {
        row_idx = rows[static_cast<std::size_t>(at)];
      } else {
        row_idx = rows[used[rows[0]] % rows.size()];  // bucket exhausted
        ++rep.replacement_draws;
      }
      ++used[row_idx];

      const auto& row = table[row_idx];
      Sample s;
      s.source = row.lemma.surface;
      s.target = row.target.surface;
      s.msd = row.msd;
      s.provenance = Provenance::Resampled;
      if (is_overlap(row_idx)) {
        ++rep.achieved_overlap;
        --quota;
      }
      out.samples.push_back(std::move(s));
    }
  }
  if (rep.achieved_overlap != rep.target_overlap)
    rep.notes.push_back("overlap achieved " + std::to_string(rep.achieved_overlap) + " of " +
                        std::to_string(rep.target_overlap));
  if (rep.length_deviations > 0)
    rep.notes.push_back(std::to_string(rep.length_deviations) + " draws used a nearest length bucket");
  return out;
}

namespace {

std::string provenance_string(const Sample& s) {
  switch (s.provenance) {
    case Provenance::Correct:
      return "correct";
    case Provenance::Noisy:
      return "noisy:" + s.flags.to_string();
    case Provenance::Resampled:
      return "resampled";
  }
  return "";
}

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) {
    out += s.source;
    out += '\t';
    out += s.target;
    out += '\t';
    out += s.msd.canonical();
    out += '\t';
    out += provenance_string(s);
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_text(std::string_view text, std::string_view name, std::string_view filename) {
  Dataset ds;
  ds.name = std::string(name);
  const std::string file(filename);
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4) throw ParseError(file, lineno, "expected 4 tab-separated fields");
    Sample s;
    if (fields[0].empty() || fields[1].empty()) throw ParseError(file, lineno, "empty source or target");
    s.source = nfc(fields[0]);
    s.target = nfc(fields[1]);
    try {
      s.msd = Msd::parse(fields[2]);
    } catch (const Error& e) {
      throw ParseError(file, lineno, e.what());
    }
    if (fields[3] == "correct") {
      s.provenance = Provenance::Correct;
    } else if (fields[3] == "resampled") {
      s.provenance = Provenance::Resampled;
    } else if (fields[3].starts_with("noisy:")) {
      s.provenance = Provenance::Noisy;
      s.flags = FlagSet::from_string(std::string_view(fields[3]).substr(6));
    } else {
      throw ParseError(file, lineno, "unknown provenance '" + fields[3] + "'");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset parse_dataset(const std::filesystem::path& path, std::string_view name) {
  return parse_dataset_text(read_file(path), name.empty() ? path.stem().string() : std::string(name), path.string());
}

std::string dataset_manifest(const Dataset& ds, const ResampleReport* report) {
  json j;
  j["name"] = ds.name;
  j["seed"] = ds.seed;
  j["size"] = ds.samples.size();
  long correct = 0, noisy = 0, resampled = 0;
  for (const auto& s : ds.samples) {
    if (s.provenance == Provenance::Correct) ++correct;
    if (s.provenance == Provenance::Noisy) ++noisy;
    if (s.provenance == Provenance::Resampled) ++resampled;
  }
  j["correct"] = correct;
  j["noisy"] = noisy;
  j["resampled"] = resampled;
  if (report) {
    j["resample"]["target_overlap"] = report->target_overlap;
    j["resample"]["achieved_overlap"] = report->achieved_overlap;
    j["resample"]["replacement_draws"] = report->replacement_draws;
    j["resample"]["length_deviations"] = report->length_deviations;
    j["resample"]["notes"] = report->notes;
  }
  return j.dump(2) + "\n";
}

}  // namespace morphnoise
