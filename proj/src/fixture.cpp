#include "morphnoise/fixture.hpp"

#include <algorithm>
#include <cmath>

#include "morphnoise/corpus.hpp"
#include "morphnoise/rng.hpp"
#include "nlohmann/json.hpp"

namespace morphnoise {

using json = nlohmann::ordered_json;

void FixtureSpec::validate() const {
  if (stems < 4) throw Error("fixture: need at least 4 stems");
  if (eval_stems < 1) throw Error("fixture: need at least 1 eval stem");
  const double rates[] = {lex_rate, pos_rate, pos_slot_rate, pos_pair_rate, pdgm_rate, slot_rate};
  double sum = 0;
  for (double r : rates) {
    if (r < 0.0 || r > 1.0) throw Error("fixture: injection rates must be in [0,1]");
    sum += r;
  }
  if (sum > 1.0 + 1e-9) throw Error("fixture: injection rates sum to more than 1");
  if ((pos_rate > 0 || pos_slot_rate > 0) && conj_words < 1)
    throw Error("fixture: POS injection needs at least one non-inflecting word");
  if (irregular_fraction < 0.0 || irregular_fraction > 1.0)
    throw Error("fixture: irregular_fraction must be in [0,1]");
  if (consonants.empty() || vowels.empty()) throw Error("fixture: empty syllable inventory");
  if (min_syllables < 1 || max_syllables < min_syllables)
    throw Error("fixture: bad syllable count range");
  if (!verb_suffixes.empty() && verb_suffixes.size() != 6)
    throw Error("fixture: verb_suffixes must list 6 slots");
  if (!noun_suffixes.empty() && noun_suffixes.size() != 4)
    throw Error("fixture: noun_suffixes must list 4 slots");
}

FixtureSpec FixtureSpec::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("bad fixture spec JSON: ") + e.what());
  }
  FixtureSpec s;
  s.stems = j.value("stems", s.stems);
  s.conj_words = j.value("conj_words", s.conj_words);
  s.eval_stems = j.value("eval_stems", s.eval_stems);
  s.eval_instances = j.value("eval_instances", s.eval_instances);
  s.max_pairs = j.value("max_pairs", s.max_pairs);
  s.irregular_fraction = j.value("irregular_fraction", s.irregular_fraction);
  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    s.lex_rate = r.value("lex", 0.0);
    s.pos_rate = r.value("pos", 0.0);
    s.pos_slot_rate = r.value("pos_slot", 0.0);
    s.pos_pair_rate = r.value("pos_pair", 0.0);
    s.pdgm_rate = r.value("pdgm", 0.0);
    s.slot_rate = r.value("slot", 0.0);
  }
  s.seed = j.value("seed", s.seed);
  s.language = j.value("language", s.language);
  s.consonants = j.value("consonants", s.consonants);
  s.vowels = j.value("vowels", s.vowels);
  s.min_syllables = j.value("min_syllables", s.min_syllables);
  s.max_syllables = j.value("max_syllables", s.max_syllables);
  auto read_suffixes = [&](const char* key, std::vector<std::pair<std::string, std::string>>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& entry : j.at(key)) {
      if (!entry.is_array() || entry.size() != 2)
        throw Error(std::string("fixture: ") + key + " entries must be [regular, irregular] pairs");
      out.emplace_back(entry[0].get<std::string>(), entry[1].get<std::string>());
    }
  };
  read_suffixes("verb_suffixes", s.verb_suffixes);
  read_suffixes("noun_suffixes", s.noun_suffixes);
  s.validate();
  return s;
}

std::string FixtureSpec::to_json_text() const {
  json j;
  j["stems"] = stems;
  j["conj_words"] = conj_words;
  j["eval_stems"] = eval_stems;
  j["eval_instances"] = eval_instances;
  j["max_pairs"] = max_pairs;
  j["irregular_fraction"] = irregular_fraction;
  j["rates"] = {{"lex", lex_rate},   {"pos", pos_rate},   {"pos_slot", pos_slot_rate},
                {"pos_pair", pos_pair_rate}, {"pdgm", pdgm_rate}, {"slot", slot_rate}};
  j["seed"] = seed;
  j["language"] = language;
  j["consonants"] = consonants;
  j["vowels"] = vowels;
  j["min_syllables"] = min_syllables;
  j["max_syllables"] = max_syllables;
  auto write_suffixes = [&](const char* key, const std::vector<std::pair<std::string, std::string>>& v) {
    if (v.empty()) return;
    json arr = json::array();
    for (const auto& [reg, irr] : v) arr.push_back(json::array({reg, irr}));
    j[key] = std::move(arr);
  };
  write_suffixes("verb_suffixes", verb_suffixes);
  write_suffixes("noun_suffixes", noun_suffixes);
  return j.dump(2) + "\n";
}

namespace {

struct SlotDef {
  std::int64_t id;
  const char* pos_tag;
  std::vector<std::string> feat_tags;
  std::string suffix;      // regular class
  std::string irr_suffix;  // irregular class
};

const std::vector<SlotDef>& verb_slots() {
  static const std::vector<SlotDef> v = {
      {0, "vrb", {"nfin"}, "u", "ir"},
      {1, "vrb", {"prs", "p1", "sg"}, "ami", "emi"},
      {2, "vrb", {"prs", "p2", "pl"}, "ite", "ete"},
      {3, "vrb", {"pst", "p3", "sg"}, "oka", "uku"},
      {4, "vrb", {"pst", "p3", "pl"}, "osa", "usu"},
      {5, "vrb", {"imp", "p2", "sg"}, "e", "ai"},
  };
  return v;
}

const std::vector<SlotDef>& noun_slots() {
  static const std::vector<SlotDef> v = {
      {6, "nn", {"nom", "sg"}, "", "o"},
      {7, "nn", {"nom", "pl"}, "it", "ur"},
      {8, "nn", {"acc", "sg"}, "am", "em"},
      {9, "nn", {"acc", "pl"}, "ima", "uma"},
  };
  return v;
}

constexpr std::int64_t kConjSlot = 10;

TagMap fixture_tagmap() {
  std::map<std::string, std::vector<std::string>> entries = {
      {"vrb", {"V"}},  {"nn", {"N"}},    {"cnj", {"CONJ"}},
      {"nfin", {"NFIN"}},
      {"prs", {"IND", "PRS"}}, {"pst", {"IND", "PST"}}, {"imp", {"IMP"}},
      {"p1", {"1"}},   {"p2", {"2"}},    {"p3", {"3"}},
      {"sg", {"SG"}},  {"pl", {"PL"}},
      {"nom", {"NOM"}}, {"acc", {"ACC"}},
  };
  return TagMap(std::move(entries), {});
}

Msd slot_msd(const SlotDef& s) {
  std::vector<std::string> feats;
  if (std::string(s.pos_tag) == "vrb") {
    for (const auto& t : s.feat_tags) {
      if (t == "nfin") feats.push_back("NFIN");
      if (t == "prs") { feats.push_back("IND"); feats.push_back("PRS"); }
      if (t == "pst") { feats.push_back("IND"); feats.push_back("PST"); }
      if (t == "imp") feats.push_back("IMP");
      if (t == "p1") feats.push_back("1");
      if (t == "p2") feats.push_back("2");
      if (t == "p3") feats.push_back("3");
      if (t == "sg") feats.push_back("SG");
      if (t == "pl") feats.push_back("PL");
    }
    return Msd("V", std::move(feats));
  }
  for (const auto& t : s.feat_tags) {
    if (t == "nom") feats.push_back("NOM");
    if (t == "acc") feats.push_back("ACC");
    if (t == "sg") feats.push_back("SG");
    if (t == "pl") feats.push_back("PL");
  }
  return Msd("N", std::move(feats));
}

struct Paradigm {
  std::string stem;
  bool is_verb = true;
  bool irregular = false;
  std::map<std::int64_t, std::string> forms;  // slot id -> surface
  std::string lemma;                          // citation form (first slot)
};

std::vector<SlotDef> with_suffixes(std::vector<SlotDef> base,
                                   const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (std::size_t i = 0; i < overrides.size() && i < base.size(); ++i) {
    base[i].suffix = overrides[i].first;
    base[i].irr_suffix = overrides[i].second;
  }
  return base;
}

std::string make_word(const FixtureSpec& spec, Rng& rng, int min_syll, int max_syll) {
  const int n = min_syll + static_cast<int>(rng.index(static_cast<std::size_t>(max_syll - min_syll + 1)));
  std::string w;
  for (int i = 0; i < n; ++i) {
    w += spec.consonants[rng.index(spec.consonants.size())];
    w += spec.vowels[rng.index(spec.vowels.size())];
  }
  return w;
}

Paradigm make_paradigm(std::string stem, bool is_verb, bool irregular, const std::vector<SlotDef>& slots) {
  Paradigm p;
  p.stem = std::move(stem);
  p.is_verb = is_verb;
  p.irregular = irregular;
  for (const auto& s : slots) p.forms[s.id] = p.stem + (irregular ? s.irr_suffix : s.suffix);
  p.lemma = p.forms.at(slots.front().id);
  return p;
}

}  // namespace

AnnotationResources Fixture::resources() const {
  AnnotationResources res;
  res.lexicon = lexicon;
  res.analyses = analyses;
  res.valid_pos = valid_pos;
  res.tagmap = tagmap;
  res.slot_mapping = true_mapping;
  return res;
}

Dataset Fixture::to_dataset(const std::string& name) const {
  Dataset ds;
  ds.name = name;
  ds.seed = spec.seed;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (gold[i].is_filtered()) continue;
    const Msd* msd = true_mapping.lookup(pairs[i].slot);
    if (!msd) continue;
    Sample s;
    s.source = pairs[i].source.surface;
    s.target = pairs[i].target.surface;
    s.msd = *msd;
    if (gold[i].is_noisy()) {
      s.provenance = Provenance::Noisy;
      s.flags = gold[i].flags;
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset Fixture::correct_dataset(const std::string& name) const {
  Dataset ds = to_dataset(name);
  std::erase_if(ds.samples, [](const Sample& s) { return s.provenance != Provenance::Correct; });
  return ds;
}

Fixture gen_fixture(const FixtureSpec& spec) {
  spec.validate();
  Fixture fx;
  fx.spec = spec;
  fx.tagmap = fixture_tagmap();
  fx.valid_pos = {"vrb", "nn"};

  // Distinct stems for training, evaluation, and extra UniMorph-only rows.
  Rng stem_rng(mix_seed(spec.seed, 0x5374656dULL));
  std::set<std::string> stem_set;
  auto draw_stems = [&](int count) {
    std::vector<std::string> out;
    int guard = 0;
    while (static_cast<int>(out.size()) < count) {
      std::string s = make_word(spec, stem_rng, spec.min_syllables, spec.max_syllables);
      if (stem_set.insert(s).second) out.push_back(std::move(s));
      if (++guard > count * 1000) throw Error("fixture: stem inventory exhausted");
    }
    return out;
  };
  const std::vector<std::string> train_stems = draw_stems(spec.stems);
  const std::vector<std::string> eval_stems = draw_stems(spec.eval_stems);
  const std::vector<std::string> extra_stems = draw_stems(std::max(spec.eval_stems, spec.stems / 2));

  const std::vector<SlotDef> vslots = with_suffixes(verb_slots(), spec.verb_suffixes);
  const std::vector<SlotDef> nslots = with_suffixes(noun_slots(), spec.noun_suffixes);
  auto slots_of = [&](const Paradigm& p) -> const std::vector<SlotDef>& { return p.is_verb ? vslots : nslots; };

  Rng class_rng(mix_seed(spec.seed, 0x636c617373ULL));
  std::vector<Paradigm> train_par, eval_par, extra_par;
  for (std::size_t i = 0; i < train_stems.size(); ++i) {
    const bool verb = i % 2 == 0;
    train_par.push_back(make_paradigm(train_stems[i], verb, class_rng.bernoulli(spec.irregular_fraction),
                                      verb ? vslots : nslots));
  }
  for (std::size_t i = 0; i < eval_stems.size(); ++i) {
    const bool verb = i % 2 == 0;
    eval_par.push_back(make_paradigm(eval_stems[i], verb, false, verb ? vslots : nslots));
  }
  for (std::size_t i = 0; i < extra_stems.size(); ++i) {
    const bool verb = i % 2 == 0;
    extra_par.push_back(make_paradigm(extra_stems[i], verb, false, verb ? vslots : nslots));
  }

  // Conjunction-like words (a POS that does not inflect) and the analyzer
  // output over every training surface.
  std::set<std::string> all_surfaces;
  for (const auto& p : train_par)
    for (const auto& [slot, form] : p.forms) {
      (void)slot;
      all_surfaces.insert(form);
    }
  Rng conj_rng(mix_seed(spec.seed, 0x636f6e6aULL));
  std::vector<std::string> conj;
  {
    int guard = 0;
    while (static_cast<int>(conj.size()) < spec.conj_words) {
      std::string w = make_word(spec, conj_rng, 1, std::max(1, spec.min_syllables - 1) + 1);
      if (!all_surfaces.count(w) && !stem_set.count(w) &&
          std::find(conj.begin(), conj.end(), w) == conj.end())
        conj.push_back(std::move(w));
      if (++guard > spec.conj_words * 1000) throw Error("fixture: conj inventory exhausted");
    }
  }
  for (const auto& w : conj) all_surfaces.insert(w);

  const std::string& lang = spec.language;
  auto add_analysis = [&](const std::string& surface, const std::string& lemma,
                          const std::string& pos_tag, const std::vector<std::string>& feats) {
    auto [it, inserted] = fx.analyses.try_emplace(surface, AnalysisSet{WordForm::make(surface, lang), {}});
    (void)inserted;
    Analysis a;
    a.lemma = WordForm::make(lemma, lang);
    a.tags.push_back(pos_tag);
    for (const auto& f : feats) a.tags.push_back(f);
    it->second.insert(std::move(a));
  };
  for (const auto& p : train_par) {
    for (const auto& s : slots_of(p)) add_analysis(p.forms.at(s.id), p.lemma, s.pos_tag, s.feat_tags);
  }
  for (const auto& w : conj) add_analysis(w, w, "cnj", {});

  fx.lexicon = all_surfaces;

  // The grammar's slot -> MSD table. Edge weights are filled in afterwards
  // from the generated pairs.
  std::map<std::int64_t, Msd> slot_to_msd;
  for (const auto& s : vslots) slot_to_msd[s.id] = slot_msd(s);
  for (const auto& s : nslots) slot_to_msd[s.id] = slot_msd(s);
  slot_to_msd[kConjSlot] = Msd("CONJ", {});

  // Gold MSD set of a surface over all its readings (collisions included).
  auto gold_msds = [&](const std::string& surface) {
    std::set<Msd> out;
    auto it = fx.analyses.find(surface);
    if (it == fx.analyses.end()) return out;
    for (const auto& a : it->second.analyses) {
      if (a.pos_tag() == "cnj") {
        out.insert(slot_to_msd.at(kConjSlot));
        continue;
      }
      const auto& defs = a.pos_tag() == "vrb" ? vslots : nslots;
      for (const auto& s : defs) {
        if (std::vector<std::string>(a.tags.begin() + 1, a.tags.end()) == s.feat_tags)
          out.insert(slot_to_msd.at(s.id));
      }
    }
    return out;
  };
  auto pos_tags_of = [&](const std::string& surface) {
    std::set<std::string> out;
    auto it = fx.analyses.find(surface);
    if (it != fx.analyses.end())
      for (const auto& a : it->second.analyses) out.insert(a.pos_tag());
    return out;
  };
  auto lemma_pos_of = [&](const std::string& surface) {
    std::set<std::pair<std::string, std::string>> out;
    auto it = fx.analyses.find(surface);
    if (it != fx.analyses.end())
      for (const auto& a : it->second.analyses) out.insert({a.lemma.surface, a.pos_tag()});
    return out;
  };

  // All in-paradigm ordered pairs, shuffled, optionally truncated.
  struct RawPair {
    std::string source, target;
    std::int64_t slot;
    std::size_t paradigm;
  };
  std::vector<RawPair> raw;
  for (std::size_t pi = 0; pi < train_par.size(); ++pi) {
    const auto& p = train_par[pi];
    for (const auto& si : slots_of(p)) {
      for (const auto& sj : slots_of(p)) {
        if (si.id == sj.id) continue;
        raw.push_back({p.forms.at(si.id), p.forms.at(sj.id), sj.id, pi});
      }
    }
  }
  Rng pair_rng(mix_seed(spec.seed, 0x7061697273ULL));
  pair_rng.shuffle(raw);
  if (spec.max_pairs > 0 && raw.size() > static_cast<std::size_t>(spec.max_pairs))
    raw.resize(static_cast<std::size_t>(spec.max_pairs));
  const std::size_t n = raw.size();
  if (n == 0) throw Error("fixture: no pairs generated");

  auto quota = [&](double rate) { return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))); };
  std::size_t k_lex = quota(spec.lex_rate), k_pos = quota(spec.pos_rate), k_pos_slot = quota(spec.pos_slot_rate),
              k_pos_pair = quota(spec.pos_pair_rate), k_pdgm = quota(spec.pdgm_rate), k_slot = quota(spec.slot_rate);
  while (k_lex + k_pos + k_pos_slot + k_pos_pair + k_pdgm + k_slot > n) --k_slot;  // rounding overflow

  Rng noise_rng(mix_seed(spec.seed, 0x6e6f697365ULL));
  std::set<std::string> garbage_seen;
  auto make_garbage = [&]() {
    for (int guard = 0; guard < 10000; ++guard) {
      std::string w = make_word(spec, noise_rng, spec.min_syllables, spec.max_syllables + 1);
      if (!all_surfaces.count(w) && !garbage_seen.count(w)) {
        garbage_seen.insert(w);
        fx.analyses.try_emplace(w, AnalysisSet{WordForm::make(w, lang), {}});  // unanalyzable
        return w;
      }
    }
    throw Error("fixture: garbage inventory exhausted");
  };
  auto random_inflection_slot = [&]() {
    const std::size_t at = noise_rng.index(vslots.size() + nslots.size());
    return at < vslots.size() ? vslots[at].id : nslots[at - vslots.size()].id;
  };
  auto random_form = [&](bool verb) {
    for (int guard = 0; guard < 10000; ++guard) {
      const auto& p = train_par[noise_rng.index(train_par.size())];
      if (p.is_verb != verb) continue;
      const auto& defs = slots_of(p);
      const auto& s = defs[noise_rng.index(defs.size())];
      return std::make_pair(p.forms.at(s.id), s.id);
    }
    throw Error("fixture: needs both verb and noun paradigms");
  };

  std::vector<InflectionPair> pairs(n);
  std::vector<AnnotationResult> gold(n);
  for (std::size_t i = 0; i < n; ++i) {
    RawPair rp = raw[i];
    AnnotationResult ann = AnnotationResult::correct();

    if (i < k_lex) {
      // Garbage on alternating sides; the analyzable side stays clean.
      if (i % 2 == 0) {
        rp.target = make_garbage();
      } else {
        rp.source = make_garbage();
      }
      ann = AnnotationResult::noisy(FlagSet{NoiseFlag::Lex});
    } else if (i < k_lex + k_pos) {
      const std::string& c = conj[noise_rng.index(conj.size())];
      rp = {c, c, kConjSlot, rp.paradigm};
      ann = AnnotationResult::noisy(FlagSet{NoiseFlag::Pos});
    } else if (i < k_lex + k_pos + k_pos_slot) {
      const std::string& c = conj[noise_rng.index(conj.size())];
      rp = {c, c, random_inflection_slot(), rp.paradigm};
      ann = AnnotationResult::noisy(FlagSet{NoiseFlag::Pos, NoiseFlag::Slot});
    } else if (i < k_lex + k_pos + k_pos_slot + k_pos_pair) {
      bool ok = false;
      for (int guard = 0; guard < 1000 && !ok; ++guard) {
        const bool src_verb = (i + static_cast<std::size_t>(guard)) % 2 == 0;
        auto [src, sslot] = random_form(src_verb);
        (void)sslot;
        auto [tgt, tslot] = random_form(!src_verb);
        std::set<std::string> sp = pos_tags_of(src), tp = pos_tags_of(tgt);
        bool disjoint = true;
        for (const auto& t : sp)
          if (tp.count(t)) disjoint = false;
        if (!disjoint) continue;  // a surface collision bridges the POS sets
        rp = {src, tgt, tslot, rp.paradigm};
        ok = true;
      }
      if (!ok) throw Error("fixture: could not build a POS-pair injection");
      ann = AnnotationResult::noisy(FlagSet{NoiseFlag::PosPair});
    } else if (i < k_lex + k_pos + k_pos_slot + k_pos_pair + k_pdgm) {
      bool ok = false;
      for (int guard = 0; guard < 1000 && !ok; ++guard) {
        const auto& pa = train_par[noise_rng.index(train_par.size())];
        const auto& pb = train_par[noise_rng.index(train_par.size())];
        if (&pa == &pb || pa.is_verb != pb.is_verb) continue;
        const auto& da = slots_of(pa);
        const auto& db = slots_of(pb);
        const auto& sa = da[noise_rng.index(da.size())];
        const auto& sb = db[noise_rng.index(db.size())];
        const std::string& src = pa.forms.at(sa.id);
        const std::string& tgt = pb.forms.at(sb.id);
        auto lps = lemma_pos_of(src), lpt = lemma_pos_of(tgt);
        bool disjoint = true;
        for (const auto& lp : lps)
          if (lpt.count(lp)) disjoint = false;
        if (!disjoint) continue;
        bool share_pos = false;
        for (const auto& t : pos_tags_of(src))
          if (pos_tags_of(tgt).count(t)) share_pos = true;
        if (!share_pos) continue;
        rp = {src, tgt, sb.id, rp.paradigm};
        ok = true;
      }
      if (!ok) throw Error("fixture: could not build a paradigm injection");
      ann = AnnotationResult::noisy(FlagSet{NoiseFlag::Pdgm});
    } else if (i < k_lex + k_pos + k_pos_slot + k_pos_pair + k_pdgm + k_slot) {
      // Swap to a same-POS slot whose MSD is outside the target's gold set.
      const auto& p = train_par[rp.paradigm];
      const auto& defs = slots_of(p);
      const std::set<Msd> tg = gold_msds(rp.target);
      std::vector<std::int64_t> candidates;
      for (const auto& s : defs) {
        if (s.id != rp.slot && !tg.count(slot_to_msd.at(s.id))) candidates.push_back(s.id);
      }
      if (candidates.empty()) throw Error("fixture: no detectable slot swap available");
      rp.slot = candidates[noise_rng.index(candidates.size())];
      ann = AnnotationResult::noisy(FlagSet{NoiseFlag::Slot});
    }

    InflectionPair ip;
    ip.source = WordForm::make(rp.source, lang);
    ip.target = WordForm::make(rp.target, lang);
    ip.slot = rp.slot;
    pairs[i] = std::move(ip);
    gold[i] = ann;
  }

  // Mix injected and clean pairs through the file.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng order_rng(mix_seed(spec.seed, 0x6f72646572ULL));
  order_rng.shuffle(order);
  fx.pairs.reserve(n);
  fx.gold.reserve(n);
  for (std::size_t i : order) {
    fx.pairs.push_back(std::move(pairs[i]));
    fx.gold.push_back(gold[i]);
  }

  // True mapping, with informational type-count weights from the final pairs.
  std::map<std::int64_t, std::set<std::string>> slot_targets;
  for (const auto& p : fx.pairs) slot_targets[p.slot].insert(p.target.surface);
  for (const auto& [slot, msd] : slot_to_msd) {
    const auto it = slot_targets.find(slot);
    const std::int64_t w = it == slot_targets.end() ? 0 : static_cast<std::int64_t>(it->second.size());
    fx.true_mapping.assignment[slot] = {msd, w};
    fx.true_mapping.total_weight += w;
  }
  apply_mapping(fx.pairs, fx.true_mapping);

  // Held-out evaluation instances over unseen regular stems.
  std::vector<EvalInstance> eval_all;
  for (const auto& p : eval_par) {
    const auto& defs = slots_of(p);
    for (std::size_t k = 1; k < defs.size(); ++k) {  // skip the citation slot
      EvalInstance e;
      e.lemma = WordForm::make(p.lemma, lang);
      e.target = WordForm::make(p.forms.at(defs[k].id), lang);
      e.msd = slot_to_msd.at(defs[k].id);
      eval_all.push_back(std::move(e));
    }
  }
  Rng eval_rng(mix_seed(spec.seed, 0x6576616cULL));
  eval_rng.shuffle(eval_all);
  if (spec.eval_instances > 0 && eval_all.size() > static_cast<std::size_t>(spec.eval_instances))
    eval_all.resize(static_cast<std::size_t>(spec.eval_instances));
  fx.eval_set = std::move(eval_all);

  // UniMorph-style table over training, held-out and extra paradigms.
  for (const auto* group : {&train_par, &eval_par, &extra_par}) {
    for (const auto& p : *group) {
      for (const auto& s : slots_of(p)) {
        EvalInstance row;
        row.lemma = WordForm::make(p.lemma, lang);
        row.target = WordForm::make(p.forms.at(s.id), lang);
        row.msd = slot_to_msd.at(s.id);
        fx.unimorph.push_back(std::move(row));
      }
    }
  }
  return fx;
}

void write_fixture(const Fixture& fx, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "pairs.tsv", serialize_pairs(fx.pairs));
  write_file(dir / "analyses.tsv", serialize_analyses(fx.analyses));
  write_file(dir / "lexicon.txt", serialize_wordlist(fx.lexicon));
  write_file(dir / "valid_pos.txt", serialize_wordlist(fx.valid_pos));
  write_file(dir / "tagmap.tsv", fx.tagmap.serialize_entries());
  write_file(dir / "rewrites.jsonl", fx.tagmap.serialize_rewrites());
  write_file(dir / "slot_map.tsv", serialize_slot_mapping(fx.true_mapping));
  write_file(dir / "eval.tsv", serialize_unimorph(fx.eval_set));
  write_file(dir / "unimorph.tsv", serialize_unimorph(fx.unimorph));
  write_file(dir / "gold_labels.tsv", serialize_gold_labels(fx));
  write_file(dir / "spec.json", fx.spec.to_json_text());
}

std::string serialize_gold_labels(const Fixture& fx) {
  std::string out;
  for (std::size_t i = 0; i < fx.pairs.size(); ++i) {
    const auto& p = fx.pairs[i];
    const auto& g = fx.gold[i];
    out += p.source.surface;
    out += '\t';
    out += p.target.surface;
    out += '\t';
    out += std::to_string(p.slot);
    out += '\t';
    out += g.status_string();
    out += '\t';
    if (g.is_noisy()) out += g.flags.to_string(',');
    out += '\n';
  }
  return out;
}

std::vector<AnnotationResult> parse_gold_labels_text(std::string_view text, std::string_view filename) {
  std::vector<AnnotationResult> out;
  const std::string file(filename);
  int lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 5) throw ParseError(file, lineno, "expected 5 tab-separated fields");
    try {
      out.push_back(AnnotationResult::from_strings(fields[3], fields[4]));
    } catch (const Error& e) {
      throw ParseError(file, lineno, e.what());
    }
  }
  return out;
}

std::vector<AnnotationResult> parse_gold_labels(const std::filesystem::path& path) {
  return parse_gold_labels_text(read_file(path), path.string());
}

}  // namespace morphnoise
