#include "morphnoise/eval.hpp"

#include <cmath>

namespace morphnoise {

double exact_match(std::span<const std::string> predictions, std::span<const std::string> references) {
  if (predictions.size() != references.size()) throw Error("exact_match: length mismatch");
  if (predictions.empty()) throw Error("exact_match: empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (nfc(predictions[i]) == nfc(references[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw Error("aggregate: no values");
  Aggregate a;
  a.n = static_cast<int>(values.size());
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  return a;
}

double percent_change(double baseline, double treatment) {
  if (baseline <= 0) throw Error("percent_change: baseline must be positive");
  return 100.0 * (treatment - baseline) / baseline;
}

double evaluate_model(const Model& model, const std::vector<EvalInstance>& eval_set, int max_decode_len) {
  if (eval_set.empty()) throw Error("evaluate_model: empty evaluation set");
  std::vector<std::string> predictions, references;
  predictions.reserve(eval_set.size());
  references.reserve(eval_set.size());
  for (const auto& e : eval_set) {
    const std::vector<int> input = model.vocab.encode_input(e.lemma.surface, &e.msd);
    predictions.push_back(decode_greedy(model, input, max_decode_len).text);
    references.push_back(e.target.surface);
  }
  return exact_match(predictions, references);
}

}  // namespace morphnoise
