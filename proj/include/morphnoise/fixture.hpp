#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "morphnoise/annotator.hpp"
#include "morphnoise/datasets.hpp"
#include "morphnoise/slotmap.hpp"
#include "morphnoise/tagmap.hpp"
#include "morphnoise/types.hpp"

namespace morphnoise {

// Recipe rates are fractions of the final pair count; their sum must stay
// within 1. Each rate injects pairs whose annotation is known by
// construction:
//   lex       garbage word on one side                  -> {LEX}
//   pos       non-inflecting word self-paired, own slot -> {POS}
//   pos_slot  non-inflecting word, inflection slot      -> {POS, SLOT}
//   pos_pair  cross-POS pair, correct target slot       -> {POS_PAIR}
//   pdgm      same-POS cross-paradigm pair              -> {PDGM}
//   slot      in-paradigm pair, detectably wrong slot   -> {SLOT}
struct FixtureSpec {
  int stems = 40;
  int conj_words = 6;
  int eval_stems = 10;
  int eval_instances = 40;  // 0 keeps every held-out instance
  int max_pairs = 0;        // 0 keeps every generated pair
  double irregular_fraction = 0.0;
  double lex_rate = 0;
  double pos_rate = 0;
  double pos_slot_rate = 0;
  double pos_pair_rate = 0;
  double pdgm_rate = 0;
  double slot_rate = 0;
  std::uint64_t seed = 1;
  std::string language = "fix";

  // Syllable inventory: stems are CV syllable strings over these alphabets.
  std::string consonants = "ptkmnslr";
  std::string vowels = "aeiou";
  int min_syllables = 2;
  int max_syllables = 3;

  // Suffix rules per slot, [regular class, irregular class]. Empty means the
  // built-in tables (6 verb slots, 4 noun slots); when given, the counts must
  // match those tables since slot ids and MSDs are fixed.
  std::vector<std::pair<std::string, std::string>> verb_suffixes;
  std::vector<std::pair<std::string, std::string>> noun_suffixes;

  void validate() const;
  static FixtureSpec from_json_text(std::string_view text);
  std::string to_json_text() const;
};

// A fully generated synthetic corpus plus its ground truth.
struct Fixture {
  FixtureSpec spec;
  std::vector<InflectionPair> pairs;
  std::vector<AnnotationResult> gold;  // aligned with pairs
  std::map<std::string, AnalysisSet> analyses;
  std::set<std::string> lexicon;
  std::set<std::string> valid_pos;
  TagMap tagmap;
  SlotMapping true_mapping;  // the grammar's slot -> MSD table
  std::vector<EvalInstance> eval_set;
  std::vector<EvalInstance> unimorph;  // lemma/form/MSD table incl. held-out paradigms

  AnnotationResources resources() const;

  // Training triples derived from the gold labels and the true mapping;
  // noisy samples keep their flag sets.
  Dataset to_dataset(const std::string& name = "fixture") const;
  Dataset correct_dataset(const std::string& name = "fixture_correct") const;
};

Fixture gen_fixture(const FixtureSpec& spec);

// Writes pairs.tsv, analyses.tsv, lexicon.txt, valid_pos.txt, tagmap.tsv,
// rewrites.jsonl, slot_map.tsv, eval.tsv, unimorph.tsv and gold_labels.tsv.
void write_fixture(const Fixture& fx, const std::filesystem::path& dir);

std::string serialize_gold_labels(const Fixture& fx);
std::vector<AnnotationResult> parse_gold_labels_text(std::string_view text,
                                                     std::string_view filename = "<string>");
std::vector<AnnotationResult> parse_gold_labels(const std::filesystem::path& path);

}  // namespace morphnoise
