#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "morphnoise/datasets.hpp"
#include "morphnoise/slotmap.hpp"
#include "morphnoise/tagmap.hpp"
#include "morphnoise/types.hpp"

namespace morphnoise {

// Everything the noise detectors consult. `lexicon` is the union of the
// standard-vocabulary word lists; `analyses` should cover all pair surfaces
// (missing surfaces count as unanalyzable).
struct AnnotationResources {
  std::set<std::string> lexicon;
  std::map<std::string, AnalysisSet> analyses;
  std::set<std::string> valid_pos;
  TagMap tagmap;
  SlotMapping slot_mapping;

  // Case-insensitive lexicon lookups are opt-in; folding happens once here.
  void set_case_folding(bool enabled);
  bool case_folding() const { return fold_case_lexicon_; }

  bool in_lexicon(const std::string& surface) const;
  const AnalysisSet* analysis_set(const std::string& surface) const;

 private:
  bool fold_case_lexicon_ = false;
  std::set<std::string> folded_lexicon_;
};

// Individual detectors. Each returns the flag or nullopt; preconditions are
// the caller's job (annotate_pair skips detectors whose inputs are missing).
std::optional<NoiseFlag> detect_lexicon_noise(const std::string& surface, const AnnotationResources& res);
std::optional<NoiseFlag> detect_pos_noise(const AnalysisSet& as, const std::set<std::string>& valid_pos);
std::optional<NoiseFlag> detect_pos_pair_noise(const AnalysisSet& src, const AnalysisSet& tgt);
std::optional<NoiseFlag> detect_paradigm_noise(const AnalysisSet& src, const AnalysisSet& tgt);
std::optional<NoiseFlag> detect_slot_noise(const Msd& predicted, const std::vector<Msd>& target_gold);

// Runs the full pipeline on one pair:
//   1. any analysis of either word unmappable       -> Filtered(UNMAPPABLE)
//   2. no predicted MSD (slot left unmatched)       -> Filtered(UNMATCHED_SLOT)
//   3. detectors in order LEX, POS, POS_PAIR, PDGM, SLOT; analysis-dependent
//      detectors are skipped for unanalyzable words
//   4. any flag                                     -> Noisy(flags)
//   5. every detector decidable                     -> Correct
//   6. otherwise (in-lexicon but unanalyzable word) -> Filtered(UNANNOTATABLE)
AnnotationResult annotate_pair(const InflectionPair& pair, const AnnotationResources& res);

void annotate_corpus(std::vector<InflectionPair>& pairs, const AnnotationResources& res);

// Corpus-level bookkeeping. Primary labels assign each noisy pair its
// highest-priority flag (LEX > POS > POS_PAIR > PDGM > SLOT) so the
// percentages over non-filtered pairs sum to 100; full combinations are kept
// separately and partition the noisy pairs exactly.
struct Distribution {
  long total = 0;
  long annotated = 0;  // correct + noisy
  std::map<std::string, long> filtered_counts;     // reason -> count
  std::map<std::string, long> primary_counts;      // "C","LEX","PDGM","POS","POS_PAIR","SLOT"
  std::map<std::string, double> primary_pct;       // over annotated pairs
  std::map<std::string, long> combination_counts;  // flag-set string -> count
};

Distribution annotation_distribution(const std::vector<InflectionPair>& pairs);

struct OverlapStats {
  double lemma_pct = 0;
  double msd_pct = 0;
  double tag_pct = 0;
};

// Share of eval lemma / MSD / tag types attested in the training data.
OverlapStats overlap_stats(const Dataset& train, const std::vector<EvalInstance>& eval_set);

// TSV `source \t target \t slot \t predicted_msd \t status \t flags`.
std::string serialize_annotated(const std::vector<InflectionPair>& pairs);
std::vector<InflectionPair> parse_annotated_text(std::string_view text, std::string_view language = "und",
                                                 std::string_view filename = "<string>");
std::vector<InflectionPair> parse_annotated(const std::filesystem::path& path, std::string_view language = "und");

// JSON stats sidecar (distribution plus optional overlap block).
std::string stats_json(const Distribution& dist, const OverlapStats* overlap = nullptr);

}  // namespace morphnoise
