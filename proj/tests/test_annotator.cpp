#include "doctest.h"
#include "morphnoise/annotator.hpp"
#include "morphnoise/corpus.hpp"

using namespace morphnoise;

namespace {

// Hand-built resources mirroring the running warp/cry/och examples.
AnnotationResources english_fragment() {
  AnnotationResources res;
  res.lexicon = {"warp", "wraps", "cry", "cried", "och", "blob", "tal"};
  res.analyses = parse_analyses_text(
      "warp\twarp<verb><inf>\n"
      "wraps\twrap<verb><pri><p3><sg>\n"
      "cry\tcry<verb><inf>\n"
      "cried\tcry<verb><past>\n"
      "och\toch<cnjcoo>\n"
      "blob\t\n"
      "tal\ttal<numeral>\n"
      "zzqx\t\n");
  res.valid_pos = {"verb", "adjective", "noun"};
  res.tagmap = TagMap::parse(
      "verb\tV\n"
      "inf\tNFIN\n"
      "pri\tIND,PRS\n"
      "p3\t3\n"
      "sg\tSG\n"
      "past\tPST\n"
      "cnjcoo\tCONJ\n"
      "numeral\tNUM\n",
      "");
  res.slot_mapping.assignment[0] = {Msd::parse("V;NFIN"), 1};
  res.slot_mapping.assignment[1] = {Msd::parse("V;PST"), 1};
  res.slot_mapping.assignment[2] = {Msd::parse("V;IND;PRS;3;SG"), 1};
  res.slot_mapping.total_weight = 3;
  return res;
}

InflectionPair pair(const char* src, const char* tgt, std::int64_t slot) {
  InflectionPair p;
  p.source = WordForm::make(src);
  p.target = WordForm::make(tgt);
  p.slot = slot;
  return p;
}

InflectionPair mapped(const AnnotationResources& res, const char* src, const char* tgt, std::int64_t slot) {
  InflectionPair p = pair(src, tgt, slot);
  if (const Msd* m = res.slot_mapping.lookup(slot)) p.predicted_msd = *m;
  return p;
}

}  // namespace

TEST_CASE("lexicon detector is plain set membership") {
  AnnotationResources res = english_fragment();
  CHECK(detect_lexicon_noise("zzqx", res) == NoiseFlag::Lex);
  CHECK_FALSE(detect_lexicon_noise("warp", res).has_value());
  // case-preserving policy: a case mismatch is lexicon noise
  CHECK(detect_lexicon_noise("Warp", res) == NoiseFlag::Lex);
  // with folding enabled it is not
  res.set_case_folding(true);
  CHECK_FALSE(detect_lexicon_noise("Warp", res).has_value());
}

TEST_CASE("pos detector needs one inflecting reading") {
  const AnnotationResources res = english_fragment();
  CHECK(detect_pos_noise(res.analyses.at("och"), res.valid_pos) == NoiseFlag::Pos);
  CHECK_FALSE(detect_pos_noise(res.analyses.at("warp"), res.valid_pos).has_value());

  // one valid POS among several readings suffices
  auto both = parse_analyses_text("x\tx<noun><sg>;x<cnjcoo>\n");
  CHECK_FALSE(detect_pos_noise(both.at("x"), res.valid_pos).has_value());

  // Russian-style list accepts numerals
  const std::set<std::string> rus{"verb", "adjective", "noun", "prn", "numeral"};
  CHECK_FALSE(detect_pos_noise(res.analyses.at("tal"), rus).has_value());
  CHECK(detect_pos_noise(res.analyses.at("tal"), res.valid_pos) == NoiseFlag::Pos);
}

TEST_CASE("pos-pair detector wants a shared POS") {
  auto an = parse_analyses_text(
      "a\ta<noun><sg>\n"
      "b\tb<verb><inf>\n"
      "c\tc<noun><sg>;c<verb><inf>\n");
  CHECK(detect_pos_pair_noise(an.at("a"), an.at("b")) == NoiseFlag::PosPair);
  CHECK_FALSE(detect_pos_pair_noise(an.at("c"), an.at("b")).has_value());
  CHECK_FALSE(detect_pos_pair_noise(an.at("a"), an.at("a")).has_value());
}

TEST_CASE("paradigm detector compares lemma-POS sets") {
  auto an = parse_analyses_text(
      "warp\twarp<verb><inf>\n"
      "wraps\twrap<verb><pri><p3><sg>\n"
      "geht\tgehen<verb><pri><p3><sg>\n"
      "gehen\tgehen<verb><inf>\n"
      "bank\tbank<noun><sg>\n"
      "banks\tbank<noun><pl>;banka<noun><sg>\n");
  CHECK(detect_paradigm_noise(an.at("warp"), an.at("wraps")) == NoiseFlag::Pdgm);
  CHECK_FALSE(detect_paradigm_noise(an.at("geht"), an.at("gehen")).has_value());
  CHECK_FALSE(detect_paradigm_noise(an.at("bank"), an.at("banks")).has_value());
}

TEST_CASE("slot detector checks membership of the predicted MSD") {
  const std::vector<Msd> gold1 = {Msd::parse("V;PST")};
  CHECK(detect_slot_noise(Msd::parse("V;IND;PRS;3;SG"), gold1) == NoiseFlag::Slot);
  const std::vector<Msd> gold2 = {Msd::parse("V;PST"), Msd::parse("V.PTCP;PST")};
  CHECK_FALSE(detect_slot_noise(Msd::parse("V;PST"), gold2).has_value());
}

TEST_CASE("annotate_pair composes the pipeline") {
  const AnnotationResources res = english_fragment();

  // fully regular pair with the correct slot
  const auto ok = annotate_pair(mapped(res, "cry", "cried", 1), res);
  CHECK(ok.is_correct());

  // conjunction self-pair under an inflection slot: POS plus SLOT
  const auto conj = annotate_pair(mapped(res, "och", "och", 1), res);
  REQUIRE(conj.is_noisy());
  CHECK(conj.flags == FlagSet{NoiseFlag::Pos, NoiseFlag::Slot});

  // in-lexicon but unanalyzable word, nothing else wrong: filtered
  const auto blob = annotate_pair(mapped(res, "cry", "blob", 0), res);
  REQUIRE(blob.is_filtered());
  CHECK(*blob.reason == FilterReason::Unannotatable);

  // garbage word: lexicon noise even though unanalyzable
  const auto garbage = annotate_pair(mapped(res, "cry", "zzqx", 0), res);
  REQUIRE(garbage.is_noisy());
  CHECK(garbage.flags == FlagSet{NoiseFlag::Lex});

  // unmatched slot
  const auto unmatched = annotate_pair(pair("cry", "cried", 9), res);
  REQUIRE(unmatched.is_filtered());
  CHECK(*unmatched.reason == FilterReason::UnmatchedSlot);

  // wrong slot on a real pair
  const auto slot = annotate_pair(mapped(res, "cry", "cried", 2), res);
  REQUIRE(slot.is_noisy());
  CHECK(slot.flags == FlagSet{NoiseFlag::Slot});

  // cross-paradigm, same POS
  const auto pdgm = annotate_pair(mapped(res, "warp", "wraps", 2), res);
  REQUIRE(pdgm.is_noisy());
  CHECK(pdgm.flags.test(NoiseFlag::Pdgm));
  CHECK_FALSE(pdgm.flags.test(NoiseFlag::PosPair));
}

TEST_CASE("unmappable analyses filter the pair before anything else") {
  AnnotationResources res = english_fragment();
  res.analyses = parse_analyses_text("odd\todd<verb><weird>\ncry\tcry<verb><inf>\n");
  const auto r = annotate_pair(mapped(res, "cry", "odd", 0), res);
  REQUIRE(r.is_filtered());
  CHECK(*r.reason == FilterReason::Unmappable);
}

TEST_CASE("every pair lands in exactly one state") {
  const AnnotationResources res = english_fragment();
  const std::vector<InflectionPair> probes = {
      mapped(res, "cry", "cried", 1), mapped(res, "och", "och", 1),   mapped(res, "cry", "blob", 0),
      mapped(res, "cry", "zzqx", 0),  pair("cry", "cried", 9),        mapped(res, "warp", "wraps", 2),
  };
  for (const auto& p : probes) {
    const auto r = annotate_pair(p, res);
    const int states = (r.is_correct() ? 1 : 0) + (r.is_noisy() ? 1 : 0) + (r.is_filtered() ? 1 : 0);
    CHECK(states == 1);
    if (r.is_noisy()) CHECK_FALSE(r.flags.empty());
    if (r.is_filtered()) CHECK(r.reason.has_value());
    // paradigm and pos-pair flags are mutually exclusive
    const bool both = r.flags.test(NoiseFlag::Pdgm) && r.flags.test(NoiseFlag::PosPair);
    CHECK_FALSE(both);
  }
}

TEST_CASE("annotation distribution bookkeeping") {
  std::vector<InflectionPair> pairs;
  auto push = [&](AnnotationResult r, int count) {
    for (int i = 0; i < count; ++i) {
      InflectionPair p = pair("a", "b", 0);
      p.annotation = r;
      pairs.push_back(std::move(p));
    }
  };
  push(AnnotationResult::correct(), 50);
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::Slot}), 50);
  Distribution d = annotation_distribution(pairs);
  CHECK(d.annotated == 100);
  CHECK(d.primary_pct.at("C") == doctest::Approx(50.0));
  CHECK(d.primary_pct.at("SLOT") == doctest::Approx(50.0));

  // shape of the reference table: six labels, percentages summing to 100
  pairs.clear();
  push(AnnotationResult::correct(), 6137);
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::Lex}), 152);
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::Pdgm}), 68);
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::Pos}), 807);
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::PosPair}), 860);
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::Slot}), 1975);
  push(AnnotationResult::filtered(FilterReason::Unannotatable), 123);
  d = annotation_distribution(pairs);
  CHECK(d.annotated == 9999);
  CHECK(d.filtered_counts.at("UNANNOTATABLE") == 123);
  double sum = 0;
  for (const auto& [label, pct] : d.primary_pct) sum += pct;
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(d.primary_pct.at("C") == doctest::Approx(100.0 * 6137 / 9999));

  // priority: a {POS, SLOT} pair counts under POS, and combinations
  // partition the noisy set
  push(AnnotationResult::noisy(FlagSet{NoiseFlag::Pos, NoiseFlag::Slot}), 10);
  d = annotation_distribution(pairs);
  CHECK(d.primary_counts.at("POS") == 817);
  CHECK(d.combination_counts.at("POS+SLOT") == 10);
  long combo_total = 0;
  for (const auto& [combo, n] : d.combination_counts) combo_total += n;
  long noisy_total = 0;
  for (const auto& [label, n] : d.primary_counts) {
    if (label != "C") noisy_total += n;
  }
  CHECK(combo_total == noisy_total);
}

TEST_CASE("overlap statistics") {
  Dataset train{"t", 0, {}};
  train.samples.push_back({"gehen", "geht", Msd::parse("V;IND;PRS;3;SG"), Provenance::Correct, {}});
  train.samples.push_back({"laufen", "lief", Msd::parse("V;PST"), Provenance::Correct, {}});

  std::vector<EvalInstance> eval_set;
  eval_set.push_back({WordForm::make("gehen"), WordForm::make("ging"), Msd::parse("V;PST")});

  const OverlapStats full = overlap_stats(train, eval_set);
  CHECK(full.lemma_pct == doctest::Approx(100.0));
  CHECK(full.msd_pct == doctest::Approx(100.0));
  CHECK(full.tag_pct == doctest::Approx(100.0));

  eval_set.push_back({WordForm::make("singen"), WordForm::make("sang"), Msd::parse("N;ACC;PL")});
  const OverlapStats half = overlap_stats(train, eval_set);
  CHECK(half.lemma_pct == doctest::Approx(50.0));
  CHECK(half.msd_pct == doctest::Approx(50.0));
  // eval tags: V,PST,N,ACC,PL -> V,PST attested
  CHECK(half.tag_pct == doctest::Approx(40.0));

  CHECK_THROWS_AS(overlap_stats(train, {}), Error);
}

TEST_CASE("annotated TSV round trips") {
  const AnnotationResources res = english_fragment();
  std::vector<InflectionPair> pairs = {mapped(res, "cry", "cried", 1), mapped(res, "och", "och", 1),
                                       pair("cry", "cried", 9)};
  annotate_corpus(pairs, res);
  const std::string text = serialize_annotated(pairs);
  const auto back = parse_annotated_text(text);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].annotation == pairs[i].annotation);
    CHECK(back[i].predicted_msd == pairs[i].predicted_msd);
    CHECK(back[i].slot == pairs[i].slot);
  }
  CHECK(serialize_annotated(back) == text);
}
