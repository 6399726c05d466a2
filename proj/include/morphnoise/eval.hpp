#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morphnoise/neural.hpp"
#include "morphnoise/types.hpp"

namespace morphnoise {

// Fraction of positions with exact surface equality after NFC.
double exact_match(std::span<const std::string> predictions, std::span<const std::string> references);

struct Aggregate {
  double mean = 0;
  std::optional<double> stddev;  // sample standard deviation; defined for n >= 2
  int n = 0;
};

Aggregate aggregate(std::span<const double> values);

// 100 * (treatment - baseline) / baseline; requires baseline > 0.
double percent_change(double baseline, double treatment);

struct RunResult {
  std::string language;
  std::string model;
  std::string dataset;
  int partition = -1;  // -1 when not a cumulative-partition run
  bool pretrained = false;
  std::uint64_t seed = 0;
  double accuracy = 0;
  double seconds = 0;
};

// Greedy-decodes every instance (lemma + target MSD as input) and scores
// exact match against the reference forms.
double evaluate_model(const Model& model, const std::vector<EvalInstance>& eval_set, int max_decode_len);

}  // namespace morphnoise
