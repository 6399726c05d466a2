#include "morphnoise/annotator.hpp"

#include <algorithm>
#include <charconv>

#include "morphnoise/corpus.hpp"
#include "nlohmann/json.hpp"

namespace morphnoise {

using json = nlohmann::ordered_json;

void AnnotationResources::set_case_folding(bool enabled) {
  fold_case_lexicon_ = enabled;
  folded_lexicon_.clear();
  if (enabled) {
    for (const auto& w : lexicon) folded_lexicon_.insert(fold_case(w));
  }
}

bool AnnotationResources::in_lexicon(const std::string& surface) const {
  if (!fold_case_lexicon_) return lexicon.count(surface) > 0;
  return folded_lexicon_.count(fold_case(surface)) > 0;
}

const AnalysisSet* AnnotationResources::analysis_set(const std::string& surface) const {
  auto it = analyses.find(surface);
  return it == analyses.end() ? nullptr : &it->second;
}

std::optional<NoiseFlag> detect_lexicon_noise(const std::string& surface, const AnnotationResources& res) {
  if (res.in_lexicon(surface)) return std::nullopt;
  return NoiseFlag::Lex;
}

std::optional<NoiseFlag> detect_pos_noise(const AnalysisSet& as, const std::set<std::string>& valid_pos) {
  for (const auto& a : as.analyses) {
    if (valid_pos.count(a.pos_tag())) return std::nullopt;  // one inflecting POS suffices
  }
  return NoiseFlag::Pos;
}

namespace {

std::set<std::string> pos_set(const AnalysisSet& as) {
  std::set<std::string> out;
  for (const auto& a : as.analyses) out.insert(a.pos_tag());
  return out;
}

std::set<std::pair<std::string, std::string>> lemma_pos_set(const AnalysisSet& as) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& a : as.analyses) out.insert({a.lemma.surface, a.pos_tag()});
  return out;
}

template <typename T>
bool disjoint(const std::set<T>& a, const std::set<T>& b) {
  for (const auto& x : a) {
    if (b.count(x)) return false;
  }
  return true;
}

}  // namespace

std::optional<NoiseFlag> detect_pos_pair_noise(const AnalysisSet& src, const AnalysisSet& tgt) {
  if (disjoint(pos_set(src), pos_set(tgt))) return NoiseFlag::PosPair;
  return std::nullopt;
}

std::optional<NoiseFlag> detect_paradigm_noise(const AnalysisSet& src, const AnalysisSet& tgt) {
  if (disjoint(lemma_pos_set(src), lemma_pos_set(tgt))) return NoiseFlag::Pdgm;
  return std::nullopt;
}

std::optional<NoiseFlag> detect_slot_noise(const Msd& predicted, const std::vector<Msd>& target_gold) {
  if (std::find(target_gold.begin(), target_gold.end(), predicted) != target_gold.end()) return std::nullopt;
  return NoiseFlag::Slot;
}

AnnotationResult annotate_pair(const InflectionPair& pair, const AnnotationResources& res) {
  static const AnalysisSet kEmpty{};
  const AnalysisSet* src_as = res.analysis_set(pair.source.surface);
  const AnalysisSet* tgt_as = res.analysis_set(pair.target.surface);
  if (!src_as) src_as = &kEmpty;
  if (!tgt_as) tgt_as = &kEmpty;

  const MappedSet src_gold = map_analysis_set(*src_as, res.tagmap);
  const MappedSet tgt_gold = map_analysis_set(*tgt_as, res.tagmap);
  if (src_gold.unmappable_count > 0 || tgt_gold.unmappable_count > 0)
    return AnnotationResult::filtered(FilterReason::Unmappable);
  if (!pair.predicted_msd) return AnnotationResult::filtered(FilterReason::UnmatchedSlot);

  const bool src_analyzable = !src_as->unanalyzable();
  const bool tgt_analyzable = !tgt_as->unanalyzable();

  FlagSet flags;
  if (detect_lexicon_noise(pair.source.surface, res)) flags.set(NoiseFlag::Lex);
  if (detect_lexicon_noise(pair.target.surface, res)) flags.set(NoiseFlag::Lex);

  if (src_analyzable && detect_pos_noise(*src_as, res.valid_pos)) flags.set(NoiseFlag::Pos);
  if (tgt_analyzable && detect_pos_noise(*tgt_as, res.valid_pos)) flags.set(NoiseFlag::Pos);

  bool pos_pair_fired = false;
  if (src_analyzable && tgt_analyzable) {
    if (detect_pos_pair_noise(*src_as, *tgt_as)) {
      flags.set(NoiseFlag::PosPair);
      pos_pair_fired = true;
    }
    // Paradigm membership is only meaningful for pairs sharing a POS.
    if (!pos_pair_fired && detect_paradigm_noise(*src_as, *tgt_as)) flags.set(NoiseFlag::Pdgm);
  }

  const bool slot_decidable = !tgt_gold.msds.empty();
  if (slot_decidable && detect_slot_noise(*pair.predicted_msd, tgt_gold.msds)) flags.set(NoiseFlag::Slot);

  if (!flags.empty()) return AnnotationResult::noisy(flags);
  if (src_analyzable && tgt_analyzable && slot_decidable) return AnnotationResult::correct();
  return AnnotationResult::filtered(FilterReason::Unannotatable);
}

void annotate_corpus(std::vector<InflectionPair>& pairs, const AnnotationResources& res) {
  for (auto& p : pairs) p.annotation = annotate_pair(p, res);
}

Distribution annotation_distribution(const std::vector<InflectionPair>& pairs) {
  Distribution d;
  d.total = static_cast<long>(pairs.size());
  for (const auto& p : pairs) {
    if (!p.annotation) throw Error("annotation_distribution: pair lacks an annotation");
    const auto& a = *p.annotation;
    if (a.is_filtered()) {
      ++d.filtered_counts[std::string(filter_reason_name(*a.reason))];
      continue;
    }
    ++d.annotated;
    if (a.is_correct()) {
      ++d.primary_counts["C"];
    } else {
      ++d.primary_counts[std::string(noise_flag_name(a.flags.primary()))];
      ++d.combination_counts[a.flags.to_string()];
    }
  }
  if (d.annotated > 0) {
    for (const auto& [label, count] : d.primary_counts)
      d.primary_pct[label] = 100.0 * static_cast<double>(count) / static_cast<double>(d.annotated);
  }
  return d;
}

OverlapStats overlap_stats(const Dataset& train, const std::vector<EvalInstance>& eval_set) {
  if (eval_set.empty()) throw Error("overlap_stats: empty evaluation set");
  if (train.samples.empty()) throw Error("overlap_stats: empty training set");

  std::set<std::string> train_words, train_msds, train_tags;
  for (const auto& s : train.samples) {
    train_words.insert(s.source);
    train_words.insert(s.target);
    train_msds.insert(s.msd.canonical());
    for (const auto& t : s.msd.tags()) train_tags.insert(t);
  }

  std::set<std::string> eval_lemmas, eval_msds, eval_tags;
  for (const auto& e : eval_set) {
    eval_lemmas.insert(e.lemma.surface);
    eval_msds.insert(e.msd.canonical());
    for (const auto& t : e.msd.tags()) eval_tags.insert(t);
  }

  auto pct = [](const std::set<std::string>& eval_types, const std::set<std::string>& train_types) {
    long hit = 0;
    for (const auto& t : eval_types) {
      if (train_types.count(t)) ++hit;
    }
    return 100.0 * static_cast<double>(hit) / static_cast<double>(eval_types.size());
  };
  return OverlapStats{pct(eval_lemmas, train_words), pct(eval_msds, train_msds), pct(eval_tags, train_tags)};
}

std::string serialize_annotated(const std::vector<InflectionPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += p.source.surface;
    out += '\t';
    out += p.target.surface;
    out += '\t';
    out += std::to_string(p.slot);
    out += '\t';
    if (p.predicted_msd) out += p.predicted_msd->canonical();
    out += '\t';
    out += p.annotation ? p.annotation->status_string() : "";
    out += '\t';
    if (p.annotation && p.annotation->is_noisy()) out += p.annotation->flags.to_string(',');
    out += '\n';
  }
  return out;
}

std::vector<InflectionPair> parse_annotated_text(std::string_view text, std::string_view language,
                                                 std::string_view filename) {
  std::vector<InflectionPair> out;
  const std::string file(filename);
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 6) throw ParseError(file, lineno, "expected 6 tab-separated fields");
    InflectionPair p;
    try {
      p.source = WordForm::make(fields[0], language);
      p.target = WordForm::make(fields[1], language);
      std::int64_t slot = 0;
      auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), slot);
      if (ec != std::errc() || ptr != fields[2].data() + fields[2].size() || slot < 0)
        throw Error("bad slot '" + fields[2] + "'");
      p.slot = slot;
      if (!fields[3].empty()) p.predicted_msd = Msd::parse(fields[3]);
      if (!fields[4].empty()) p.annotation = AnnotationResult::from_strings(fields[4], fields[5]);
    } catch (const Error& e) {
      throw ParseError(file, lineno, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<InflectionPair> parse_annotated(const std::filesystem::path& path, std::string_view language) {
  return parse_annotated_text(read_file(path), language, path.string());
}

std::string stats_json(const Distribution& dist, const OverlapStats* overlap) {
  json j;
  j["total"] = dist.total;
  j["annotated"] = dist.annotated;
  j["filtered"] = dist.filtered_counts;
  j["primary_counts"] = dist.primary_counts;
  j["primary_pct"] = dist.primary_pct;
  j["combinations"] = dist.combination_counts;
  if (overlap) {
    j["overlap"]["lemma_pct"] = overlap->lemma_pct;
    j["overlap"]["msd_pct"] = overlap->msd_pct;
    j["overlap"]["tag_pct"] = overlap->tag_pct;
  }
  return j.dump(2) + "\n";
}

}  // namespace morphnoise
