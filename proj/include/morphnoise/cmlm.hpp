#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morphnoise/datasets.hpp"
#include "morphnoise/neural.hpp"
#include "morphnoise/rng.hpp"

namespace morphnoise {

// Character masking policy: each character is selected independently with
// mask_prob; selected positions become MASK / a random character / stay
// unchanged with the given action split.
struct MaskPolicy {
  double mask_prob = 0.2;
  double p_mask = 0.8;
  double p_random = 0.1;
  double p_keep = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MaskedSample {
  std::vector<int> input;  // BOS + (possibly substituted) character ids + EOS
  std::string target;      // the untouched original word
};

// Counters for empirical verification of the policy.
struct MaskStats {
  long positions = 0;
  long selected = 0;
  long to_mask = 0;
  long to_random = 0;
  long to_keep = 0;
};

// Every unique surface (sources and targets, no MSDs), sorted.
std::vector<std::string> build_pretrain_set(const Dataset& train);

MaskedSample mask_word(const std::string& word, const Vocabulary& vocab, const MaskPolicy& policy, Rng& rng,
                       MaskStats* stats = nullptr);

struct PretrainConfig {
  TrainConfig train;  // epochs default mirrors the recurrent-model setting
  MaskPolicy policy;

  PretrainConfig() { train.epochs = 40; }
};

// Denoising pretraining over word types; masks are regenerated for every
// sample at every epoch.
TrainLog pretrain(Model& model, const std::vector<std::string>& types, const PretrainConfig& cfg);

// Pretrains (when pretrain epochs > 0), then runs the standard training loop
// on `train_set` starting from the pretrained parameters. Pointer-generator
// pretraining falls back to an inverse-square-root warm-up schedule when none
// is configured, to keep the gate from locking onto pure copying.
Model pretrain_then_finetune(ModelKind kind, int hidden, int embed, const Dataset& train_set,
                             const PretrainConfig& pretrain_cfg, const TrainConfig& finetune_cfg,
                             TrainLog* pretrain_log = nullptr, TrainLog* finetune_log = nullptr);

}  // namespace morphnoise
