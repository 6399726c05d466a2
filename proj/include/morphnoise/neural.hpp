#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "morphnoise/datasets.hpp"
#include "morphnoise/rng.hpp"
#include "morphnoise/types.hpp"

namespace morphnoise {

enum class SymbolKind : std::uint8_t { Special, Tag, Char };

struct Symbol {
  SymbolKind kind;
  std::string text;
  auto operator<=>(const Symbol&) const = default;
};

// Symbol inventory: five fixed specials, then MSD tag symbols, then character
// symbols, both sorted. Built from training data only; anything unseen at
// encode time maps to UNK.
class Vocabulary {
 public:
  static constexpr int kPad = 0, kBos = 1, kEos = 2, kUnk = 3, kMask = 4;
  static constexpr int kNumSpecials = 5;

  Vocabulary() = default;
  static Vocabulary build(const Dataset& train);
  static Vocabulary from_symbols(std::vector<Symbol> symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const Symbol& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  int find(const Symbol& s) const;
  int char_id(const std::string& codepoint) const;  // kUnk when absent
  int tag_id(const std::string& tag) const;         // kUnk when absent
  std::vector<int> char_ids() const;

  // [BOS] + MSD tag symbols (canonical order) + source characters + [EOS].
  // Pass nullptr for tag-free sequences (pretraining).
  std::vector<int> encode_input(const std::string& source, const Msd* msd) const;
  // target characters + [EOS]
  std::vector<int> encode_target(const std::string& target) const;

  std::string render(std::span<const int> ids) const;

 private:
  std::vector<Symbol> symbols_;
  std::map<Symbol, int> index_;
};

enum class ModelKind : std::uint8_t { EncDec, PtrGen };

std::string_view model_kind_name(ModelKind k);
ModelKind model_kind_from_name(std::string_view name);

// Parameter blocks, laid out contiguously in one flat vector.
enum Block : int {
  kEmb = 0,
  kEncFWz, kEncFWr, kEncFWh, kEncFUz, kEncFUr, kEncFUh, kEncFBz, kEncFBr, kEncFBh,
  kEncBWz, kEncBWr, kEncBWh, kEncBUz, kEncBUr, kEncBUh, kEncBBz, kEncBBr, kEncBBh,
  kDecWz, kDecWr, kDecWh, kDecUz, kDecUr, kDecUh, kDecBz, kDecBr, kDecBh,
  kInitW, kInitB,
  kAttW,
  kOutW, kOutB,
  kGateW, kGateB,
  kNumBlocks
};

struct BlockSpec {
  int rows = 0;
  int cols = 0;
  std::ptrdiff_t offset = 0;
  bool present = false;
};

class ParamLayout {
 public:
  ParamLayout() = default;
  static ParamLayout make(ModelKind kind, int vocab, int embed, int hidden);
  const BlockSpec& spec(Block b) const { return specs_[static_cast<std::size_t>(b)]; }
  std::ptrdiff_t total() const { return total_; }
  static std::string_view block_name(Block b);

 private:
  std::array<BlockSpec, kNumBlocks> specs_{};
  std::ptrdiff_t total_ = 0;
};

// A character-level inflection model: bidirectional GRU encoder, GRU decoder
// with bilinear attention, and (for PtrGen) a generation gate mixing the
// vocabulary distribution with attention-weighted copying of input symbols.
struct Model {
  ModelKind kind = ModelKind::EncDec;
  int hidden = 128;
  int embed = 64;
  Vocabulary vocab;
  ParamLayout layout;
  Eigen::VectorXd theta;

  std::size_t param_count() const { return static_cast<std::size_t>(theta.size()); }
};

Model init_model(ModelKind kind, int hidden, int embed, const Vocabulary& vocab, std::uint64_t seed);

struct EncodedSample {
  std::vector<int> input;
  std::vector<int> gold;
};

std::vector<EncodedSample> encode_dataset(const Vocabulary& vocab, const Dataset& ds);

struct ForwardResult {
  double loss = 0;  // mean per-symbol negative log-likelihood
  std::vector<Eigen::VectorXd> step_dists;
};

ForwardResult forward(const Model& model, std::span<const int> input, std::span<const int> gold);

// final(v) = p_gen * vocab_dist(v) + (1 - p_gen) * sum of attention weights
// over input positions holding symbol v.
Eigen::VectorXd pointer_mix(double p_gen, const Eigen::VectorXd& vocab_dist, const Eigen::VectorXd& attention,
                            std::span<const int> input_ids, int vocab_size);

enum class GradNorm : std::uint8_t { Mean, Sum };

// Batch gradient of the loss w.r.t. every parameter; throws if any block
// goes non-finite, naming the block.
Eigen::VectorXd gradients(const Model& model, std::span<const EncodedSample> batch,
                          GradNorm norm = GradNorm::Mean, double* loss_out = nullptr);

struct TrainConfig {
  int epochs = 60;
  int batch_size = 32;
  std::string optimizer = "adam";  // adam | adadelta
  double lr = 1e-3;
  std::string scheduler = "none";  // none | inv_sqrt
  int warmup_steps = 0;
  std::uint64_t seed = 13;
  int max_decode_len = 64;
};

struct TrainLog {
  std::vector<double> epoch_loss;
};

using EpochProvider = std::function<std::vector<EncodedSample>(int epoch)>;

TrainLog train(Model& model, const std::vector<EncodedSample>& data, const TrainConfig& cfg);
TrainLog train_with_provider(Model& model, const EpochProvider& provider, const TrainConfig& cfg);

struct DecodeResult {
  std::string text;
  bool truncated = false;
};

DecodeResult decode_greedy(const Model& model, std::span<const int> input, int max_len);

std::uint64_t param_hash(const Model& model);

// Self-describing JSON checkpoint: vocabulary, hyperparameters, parameters.
void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& metadata = {});
Model load_checkpoint(const std::filesystem::path& path, std::map<std::string, std::string>* metadata = nullptr);

std::string loss_log_csv(const TrainLog& log);

}  // namespace morphnoise
