#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "morphnoise/types.hpp"

namespace morphnoise {

enum class Provenance : std::uint8_t { Correct, Noisy, Resampled };

struct Sample {
  std::string source;
  std::string target;
  Msd msd;
  Provenance provenance = Provenance::Correct;
  FlagSet flags;  // set only for Noisy samples
};

// An ordered collection of training triples; `name` identifies the
// construction and `seed` the randomness that produced it.
struct Dataset {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

// Correct / noisy split over an annotated corpus; filtered pairs drop out
// entirely. Both datasets preserve input order.
std::pair<Dataset, Dataset> split_correct_noisy(const std::vector<InflectionPair>& pairs);

// Round-robin slicing of a seeded uniform permutation: partition sizes
// differ by at most one. assignment[i] is the partition of noisy sample i.
struct PartitionPlan {
  int k = 1;
  std::uint64_t seed = 0;
  std::vector<int> assignment;

  std::vector<std::size_t> partition_sizes() const;
};

PartitionPlan partition_noise(std::size_t noisy_count, int k, std::uint64_t seed);

// D_0 = correct, D_i = D_{i-1} plus partition i-1; k+1 nested datasets.
std::vector<Dataset> cumulative_datasets(const Dataset& correct, const Dataset& noisy,
                                         const PartitionPlan& plan, const std::string& name_prefix = "cum");

// One dataset per distinct flag combination: correct data plus exactly the
// noisy samples carrying that combination.
std::map<FlagSet, Dataset> add_one_in(const Dataset& correct, const Dataset& noisy);

struct ResampleReport {
  long target_overlap = 0;    // eval-lemma-overlapping samples in the original
  long achieved_overlap = 0;  // ... in the resampled output
  long replacement_draws = 0; // draws made with replacement after a pool ran dry
  long length_deviations = 0; // draws that fell back to a nearest length bucket
  std::vector<std::string> notes;
};

// Replaces correct samples by UniMorph rows with the identical MSD multiset,
// matching the eval-lemma overlap count as closely as the table permits.
Dataset resample_unimorph(const Dataset& correct, const std::vector<EvalInstance>& table,
                          const std::vector<EvalInstance>& eval_set, std::uint64_t seed,
                          ResampleReport* report = nullptr);

// As resample_unimorph, additionally stratified so the target-word length
// histogram follows the original; infeasible buckets fall back to the
// nearest available length.
Dataset length_matched_resample(const Dataset& correct, const std::vector<EvalInstance>& table,
                                const std::vector<EvalInstance>& eval_set, std::uint64_t seed,
                                ResampleReport* report = nullptr);

// TSV `source \t target \t msd \t provenance` where provenance is
// `correct`, `noisy:FLAG[+FLAG...]` or `resampled`.
std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset_text(std::string_view text, std::string_view name = "", std::string_view filename = "<string>");
Dataset parse_dataset(const std::filesystem::path& path, std::string_view name = "");

// JSON manifest with name, seed, sizes and achieved constraint values.
std::string dataset_manifest(const Dataset& ds, const ResampleReport* report = nullptr);

}  // namespace morphnoise
