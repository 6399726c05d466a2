#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "morphnoise/cmlm.hpp"
#include "morphnoise/neural.hpp"

namespace morphnoise {

// One experiment = a grid of (model kind, dataset, seed, pretrained) cells.
// Kinds:
//   noise-quantity  correct-only baseline plus cumulative noise partitions
//   noise-type      correct-only baseline plus one dataset per annotation
//   cmlm-compare    noise-quantity with and without CMLM pretraining
//   full            correct, full, and (when a table is given) resampled sets
struct ExperimentConfig {
  std::string kind = "noise-quantity";
  std::string language = "und";
  std::vector<ModelKind> models{ModelKind::EncDec, ModelKind::PtrGen};
  std::vector<std::uint64_t> seeds{13, 21, 34, 55, 89};
  std::vector<bool> pretrain_variants{false};
  int partitions = 10;
  std::uint64_t dataset_seed = 7;
  bool lowercase_lexicon = false;

  std::filesystem::path pairs, analyses, lexicon, valid_pos, tagmap, rewrites, eval;
  std::filesystem::path slot_map;  // optional; empty -> infer via matching
  std::filesystem::path unimorph;  // optional; enables resampled datasets

  int hidden = 128;
  int embed = 64;
  TrainConfig train;
  PretrainConfig pretrain_cfg;

  static ExperimentConfig load(const std::filesystem::path& config_path);
  void validate() const;
};

struct RunStats {
  int executed = 0;
  int skipped = 0;
  int failed = 0;
  int total = 0;
};

// Runs (or resumes) the experiment into out_dir. Completed cells, identified
// by their result file under out_dir/cells/, are never re-trained. Output
// files are identical for any jobs setting; wall-clock seconds are the only
// non-reproducible values and live in the `seconds` fields alone.
RunStats run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1);

// Tidy plot-data CSVs (curves, per-annotation bars with dataset sizes,
// pretraining percent change) from a results directory.
void write_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir);

}  // namespace morphnoise
