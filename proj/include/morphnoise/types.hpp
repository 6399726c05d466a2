#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphnoise/text.hpp"

namespace morphnoise {

// A surface form. NFC-normalized on construction; never empty, never contains
// tab or newline.
struct WordForm {
  std::string surface;
  std::string language;  // ISO 639-3

  static WordForm make(std::string_view surface, std::string_view language = "und");

  auto operator<=>(const WordForm&) const = default;
};

// A morpho-syntactic description: POS plus feature tags, held in a fixed
// canonical dimension order so that equal bundles render identically.
class Msd {
 public:
  Msd() = default;
  Msd(std::string pos, std::vector<std::string> features);

  // Parses ";"-joined tags, POS first. Throws Error on empty tags.
  static Msd parse(std::string_view text);

  const std::string& pos() const { return pos_; }
  const std::vector<std::string>& features() const { return features_; }
  const std::string& canonical() const { return canonical_; }
  std::vector<std::string> tags() const;  // pos + features
  bool empty() const { return pos_.empty(); }

  bool operator==(const Msd& o) const { return canonical_ == o.canonical_; }
  auto operator<=>(const Msd& o) const { return canonical_ <=> o.canonical_; }

 private:
  std::string pos_;
  std::vector<std::string> features_;
  std::string canonical_;
};

// Dimension rank used for canonical feature ordering; unknown tags sort last,
// lexicographically.
int msd_dimension_rank(std::string_view tag);

// One analyzer reading of a surface form: lemma plus analyzer tag names, the
// first of which is the analyzer's POS tag.
struct Analysis {
  WordForm lemma;
  std::vector<std::string> tags;

  const std::string& pos_tag() const { return tags.front(); }
  auto operator<=>(const Analysis&) const = default;
};

// All analyzer readings of one surface form. Empty means unanalyzable.
struct AnalysisSet {
  WordForm surface;
  std::vector<Analysis> analyses;  // sorted, unique

  bool unanalyzable() const { return analyses.empty(); }
  void insert(Analysis a);
};

enum class NoiseFlag : std::uint8_t { Lex = 0, Pos = 1, PosPair = 2, Pdgm = 3, Slot = 4 };

std::string_view noise_flag_name(NoiseFlag f);
std::optional<NoiseFlag> noise_flag_from_name(std::string_view name);

// A set of noise flags. Ordered by priority Lex > Pos > PosPair > Pdgm > Slot
// both for primary-label selection and for rendering.
class FlagSet {
 public:
  FlagSet() = default;
  explicit FlagSet(std::initializer_list<NoiseFlag> flags) {
    for (auto f : flags) set(f);
  }

  void set(NoiseFlag f) { bits_ |= mask(f); }
  bool test(NoiseFlag f) const { return bits_ & mask(f); }
  bool empty() const { return bits_ == 0; }
  int count() const;
  NoiseFlag primary() const;  // highest-priority flag; requires non-empty

  // e.g. "POS+SLOT" (names are separator-free, so any one-char separator is
  // unambiguous); empty set renders as "".
  std::string to_string(char sep = '+') const;
  static FlagSet from_string(std::string_view text);  // accepts '+' or ','

  auto operator<=>(const FlagSet&) const = default;

 private:
  static std::uint8_t mask(NoiseFlag f) { return static_cast<std::uint8_t>(1u << static_cast<int>(f)); }
  std::uint8_t bits_ = 0;
};

enum class FilterReason : std::uint8_t { Unannotatable, Unmappable, UnmatchedSlot };

std::string_view filter_reason_name(FilterReason r);
std::optional<FilterReason> filter_reason_from_name(std::string_view name);

// Every annotated pair ends in exactly one of Correct / Noisy / Filtered.
struct AnnotationResult {
  enum class Status : std::uint8_t { Correct, Noisy, Filtered };

  Status status = Status::Correct;
  FlagSet flags;                       // non-empty iff Noisy
  std::optional<FilterReason> reason;  // set iff Filtered

  static AnnotationResult correct() { return {}; }
  static AnnotationResult noisy(FlagSet f);
  static AnnotationResult filtered(FilterReason r);

  bool is_correct() const { return status == Status::Correct; }
  bool is_noisy() const { return status == Status::Noisy; }
  bool is_filtered() const { return status == Status::Filtered; }

  std::string status_string() const;  // "correct" | "noisy" | "filtered:REASON"
  static AnnotationResult from_strings(std::string_view status, std::string_view flags);

  auto operator<=>(const AnnotationResult&) const = default;
};

// One training sample from the paradigm-completion output: a word pair plus
// the opaque slot id of the target form.
struct InflectionPair {
  WordForm source;
  WordForm target;
  std::int64_t slot = 0;
  std::optional<Msd> predicted_msd;
  std::optional<AnnotationResult> annotation;
};

// One evaluation item: inflect `lemma` into `target` under `msd`.
struct EvalInstance {
  WordForm lemma;
  WordForm target;
  Msd msd;
};

}  // namespace morphnoise
