#include "morphnoise/cmlm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace morphnoise {

void MaskPolicy::validate() const {
  if (mask_prob < 0.0 || mask_prob > 1.0) throw Error("mask_prob must be in [0,1]");
  if (p_mask < 0 || p_random < 0 || p_keep < 0 || std::abs(p_mask + p_random + p_keep - 1.0) > 1e-9)
    throw Error("mask action split must be non-negative and sum to 1");
}

std::vector<std::string> build_pretrain_set(const Dataset& train) {
  if (train.samples.empty()) throw Error("build_pretrain_set: empty dataset");
  std::set<std::string> types;
  for (const auto& s : train.samples) {
    types.insert(s.source);
    types.insert(s.target);
  }
  return {types.begin(), types.end()};
}

MaskedSample mask_word(const std::string& word, const Vocabulary& vocab, const MaskPolicy& policy, Rng& rng,
                       MaskStats* stats) {
  if (word.empty()) throw Error("mask_word: empty word");
  policy.validate();
  const std::vector<int> chars = vocab.char_ids();
  MaskedSample out;
  out.target = word;
  out.input.push_back(Vocabulary::kBos);
  for (char32_t c : utf8_decode(word)) {
    int id = vocab.char_id(utf8_encode(c));
    if (stats) ++stats->positions;
    if (rng.bernoulli(policy.mask_prob)) {
      if (stats) ++stats->selected;
      const double action = rng.uniform();
      if (action < policy.p_mask) {
        id = Vocabulary::kMask;
        if (stats) ++stats->to_mask;
      } else if (action < policy.p_mask + policy.p_random) {
        if (!chars.empty()) id = chars[rng.index(chars.size())];
        if (stats) ++stats->to_random;
      } else {
        if (stats) ++stats->to_keep;
      }
    }
    out.input.push_back(id);
  }
  out.input.push_back(Vocabulary::kEos);
  return out;
}

TrainLog pretrain(Model& model, const std::vector<std::string>& types, const PretrainConfig& cfg) {
  if (types.empty()) throw Error("pretrain: empty type set");
  cfg.policy.validate();
  const Vocabulary& vocab = model.vocab;
  auto provider = [&](int epoch) {
    Rng rng(mix_seed(cfg.policy.seed, 0x6d61736bULL + static_cast<std::uint64_t>(epoch)));
    std::vector<EncodedSample> out;
    out.reserve(types.size());
    for (const auto& w : types) {
      MaskedSample ms = mask_word(w, vocab, cfg.policy, rng);
      out.push_back({std::move(ms.input), vocab.encode_target(w)});
    }
    return out;
  };
  return train_with_provider(model, provider, cfg.train);
}

Model pretrain_then_finetune(ModelKind kind, int hidden, int embed, const Dataset& train_set,
                             const PretrainConfig& pretrain_cfg, const TrainConfig& finetune_cfg,
                             TrainLog* pretrain_log, TrainLog* finetune_log) {
  Vocabulary vocab = Vocabulary::build(train_set);
  Model model = init_model(kind, hidden, embed, vocab, finetune_cfg.seed);
  if (pretrain_cfg.train.epochs > 0) {
    PretrainConfig pc = pretrain_cfg;
    if (kind == ModelKind::PtrGen && pc.train.scheduler == "none") {
      pc.train.scheduler = "inv_sqrt";
      if (pc.train.warmup_steps < 1) pc.train.warmup_steps = 100;
    }
    TrainLog log = pretrain(model, build_pretrain_set(train_set), pc);
    if (pretrain_log) *pretrain_log = std::move(log);
  } else if (pretrain_log) {
    *pretrain_log = {};
  }
  TrainLog log = train(model, encode_dataset(vocab, train_set), finetune_cfg);
  if (finetune_log) *finetune_log = std::move(log);
  return model;
}

}  // namespace morphnoise
