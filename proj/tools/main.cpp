#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "morphnoise/annotator.hpp"
#include "morphnoise/cmlm.hpp"
#include "morphnoise/corpus.hpp"
#include "morphnoise/eval.hpp"
#include "morphnoise/experiment.hpp"
#include "morphnoise/fixture.hpp"
#include "morphnoise/neural.hpp"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;
using namespace morphnoise;

namespace {

struct ResourceArgs {
  std::string pairs, analyses, lexicon, valid_pos, tagmap, rewrites, slot_map;
  std::string language = "und";
  bool lowercase = false;
};

void add_resource_options(CLI::App* cmd, ResourceArgs& a, bool need_lexicon) {
  cmd->add_option("--pairs", a.pairs, "pairs TSV (source\\ttarget\\tslot)")->required();
  cmd->add_option("--analyses", a.analyses, "analyses TSV")->required();
  cmd->add_option("--tagmap", a.tagmap, "tag map TSV")->required();
  cmd->add_option("--rewrites", a.rewrites, "rewrite rules (one JSON object per line)");
  cmd->add_option("--language", a.language, "ISO 639-3 code for parsed words");
  if (need_lexicon) {
    cmd->add_option("--lexicon", a.lexicon, "lexicon word list")->required();
    cmd->add_option("--valid-pos", a.valid_pos, "inflecting POS list")->required();
    cmd->add_option("--slot-map", a.slot_map, "slot mapping TSV; omitted -> inferred by matching");
    cmd->add_flag("--lowercase-lexicon", a.lowercase, "case-fold lexicon lookups");
  }
}

TagMap load_tagmap(const ResourceArgs& a) {
  return a.rewrites.empty() ? TagMap::load(a.tagmap) : TagMap::load(a.tagmap, a.rewrites);
}

SlotMapping infer_or_load_mapping(const ResourceArgs& a, const std::vector<InflectionPair>& pairs,
                                  const std::map<std::string, AnalysisSet>& analyses, const TagMap& tm) {
  if (!a.slot_map.empty()) return parse_slot_mapping(a.slot_map);
  std::map<std::string, std::vector<Msd>> gold;
  for (const auto& p : pairs) {
    if (gold.count(p.target.surface)) continue;
    auto it = analyses.find(p.target.surface);
    if (it != analyses.end()) gold[p.target.surface] = map_analysis_set(it->second, tm).msds;
  }
  return max_matching(build_graph(pairs, gold));
}

TrainConfig train_options(CLI::App* cmd, TrainConfig defaults = {}) {
  static thread_local TrainConfig cfg;
  cfg = defaults;
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "batch size");
  cmd->add_option("--optimizer", cfg.optimizer, "adam | adadelta");
  cmd->add_option("--lr", cfg.lr, "learning rate");
  cmd->add_option("--scheduler", cfg.scheduler, "none | inv_sqrt");
  cmd->add_option("--warmup", cfg.warmup_steps, "warm-up steps for inv_sqrt");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--max-decode-len", cfg.max_decode_len, "decode length cap");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morphnoise: noise annotation and desk-scale inflection experiments"};
  app.require_subcommand(1);

  // ---- annotate ----
  ResourceArgs ann_args;
  std::string ann_out = "annotated.tsv";
  std::string ann_eval;
  auto* annotate_cmd = app.add_subcommand("annotate", "annotate pairs with the noise taxonomy");
  add_resource_options(annotate_cmd, ann_args, true);
  annotate_cmd->add_option("--eval", ann_eval, "eval TSV for overlap stats");
  annotate_cmd->add_option("--out", ann_out, "output TSV (stats go to <out>.stats.json)");

  // ---- map-slots ----
  ResourceArgs map_args;
  std::string map_out;
  auto* map_cmd = app.add_subcommand("map-slots", "align slots to MSDs by maximum-weight matching");
  add_resource_options(map_cmd, map_args, false);
  map_cmd->add_option("--out", map_out, "output TSV (stdout when omitted)");

  // ---- gen-fixture ----
  std::string fx_spec, fx_out = "fixture";
  std::uint64_t fx_seed = 0;
  auto* fx_cmd = app.add_subcommand("gen-fixture", "generate a synthetic corpus with gold noise labels");
  fx_cmd->add_option("--spec", fx_spec, "fixture spec JSON file (defaults used when omitted)");
  fx_cmd->add_option("--seed", fx_seed, "override the spec seed");
  fx_cmd->add_option("--out", fx_out, "output directory")->required();

  // ---- build-dataset ----
  std::string bd_annotated, bd_kind = "cumulative", bd_out = "datasets", bd_unimorph, bd_eval;
  int bd_k = 10;
  std::uint64_t bd_seed = 7;
  auto* bd_cmd = app.add_subcommand("build-dataset", "construct training-set variants from annotated pairs");
  bd_cmd->add_option("--annotated", bd_annotated, "annotated TSV from `annotate`")->required();
  bd_cmd->add_option("--kind", bd_kind, "correct | full | cumulative | add-one-in | resample | resample-length");
  bd_cmd->add_option("--unimorph", bd_unimorph, "UniMorph-style table (resample kinds)");
  bd_cmd->add_option("--eval", bd_eval, "eval TSV (resample kinds)");
  bd_cmd->add_option("--k", bd_k, "partition count for cumulative");
  bd_cmd->add_option("--seed", bd_seed, "dataset seed");
  bd_cmd->add_option("--out", bd_out, "output directory");

  // ---- train / pretrain ----
  std::string tr_dataset, tr_model = "encdec", tr_out = "model.ckpt.json";
  int tr_hidden = 128, tr_embed = 64;
  auto* tr_cmd = app.add_subcommand("train", "train an inflection model on a dataset TSV");
  tr_cmd->add_option("--dataset", tr_dataset, "dataset TSV")->required();
  tr_cmd->add_option("--model", tr_model, "encdec | ptrgen");
  tr_cmd->add_option("--hidden", tr_hidden, "hidden size");
  tr_cmd->add_option("--embed", tr_embed, "embedding size");
  tr_cmd->add_option("--out", tr_out, "checkpoint path");
  TrainConfig tr_cfg = train_options(tr_cmd);

  std::string pt_dataset, pt_model = "encdec", pt_out = "model.ckpt.json";
  int pt_hidden = 128, pt_embed = 64, pt_epochs = 40, pt_warmup = 0;
  double pt_mask_prob = 0.2;
  std::string pt_scheduler = "none";
  std::uint64_t pt_mask_seed = 0;
  auto* pt_cmd = app.add_subcommand("pretrain", "CMLM-pretrain then finetune on a dataset TSV");
  pt_cmd->add_option("--dataset", pt_dataset, "dataset TSV")->required();
  pt_cmd->add_option("--model", pt_model, "encdec | ptrgen");
  pt_cmd->add_option("--hidden", pt_hidden, "hidden size");
  pt_cmd->add_option("--embed", pt_embed, "embedding size");
  pt_cmd->add_option("--pretrain-epochs", pt_epochs, "pretraining epochs");
  pt_cmd->add_option("--pretrain-scheduler", pt_scheduler, "none | inv_sqrt");
  pt_cmd->add_option("--pretrain-warmup", pt_warmup, "pretraining warm-up steps");
  pt_cmd->add_option("--mask-prob", pt_mask_prob, "character mask probability");
  pt_cmd->add_option("--mask-seed", pt_mask_seed, "mask stream seed");
  pt_cmd->add_option("--out", pt_out, "checkpoint path");
  TrainConfig pt_cfg = train_options(pt_cmd);

  // ---- evaluate ----
  std::string ev_ckpt, ev_eval, ev_out;
  int ev_max_len = 64;
  auto* ev_cmd = app.add_subcommand("evaluate", "exact-match accuracy of a checkpoint on an eval TSV");
  ev_cmd->add_option("--ckpt", ev_ckpt, "checkpoint path")->required();
  ev_cmd->add_option("--eval", ev_eval, "eval TSV (lemma\\tform\\tMSD)")->required();
  ev_cmd->add_option("--max-decode-len", ev_max_len, "decode length cap");
  ev_cmd->add_option("--out", ev_out, "write predictions TSV here");

  // ---- experiment ----
  auto* exp_cmd = app.add_subcommand("experiment", "run a configured experiment grid");
  std::string exp_config, exp_out = "results";
  int exp_jobs = 1;
  auto* exp_run = exp_cmd->add_subcommand("run", "run (or resume) an experiment");
  exp_run->add_option("config", exp_config, "experiment config JSON")->required();
  exp_run->add_option("--out", exp_out, "output directory");
  exp_run->add_option("--jobs", exp_jobs, "parallel training jobs");

  // ---- report ----
  std::string rp_results, rp_out = "report";
  auto* rp_cmd = app.add_subcommand("report", "emit plot-data CSVs from experiment results");
  rp_cmd->add_option("--results", rp_results, "experiment output directory")->required();
  rp_cmd->add_option("--out", rp_out, "report output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*annotate_cmd) {
      auto pairs = parse_pairs(ann_args.pairs, ann_args.language);
      AnnotationResources res;
      res.lexicon = parse_lexicon(ann_args.lexicon);
      res.analyses = parse_analyses(ann_args.analyses, ann_args.language);
      res.valid_pos = parse_valid_pos(ann_args.valid_pos);
      res.tagmap = load_tagmap(ann_args);
      if (ann_args.lowercase) res.set_case_folding(true);
      res.slot_mapping = infer_or_load_mapping(ann_args, pairs, res.analyses, res.tagmap);
      apply_mapping(pairs, res.slot_mapping);
      annotate_corpus(pairs, res);
      write_file(ann_out, serialize_annotated(pairs));
      const Distribution dist = annotation_distribution(pairs);
      if (!ann_eval.empty()) {
        auto [c, n] = split_correct_noisy(pairs);
        Dataset all = c;
        all.samples.insert(all.samples.end(), n.samples.begin(), n.samples.end());
        const auto eval_set = parse_unimorph(ann_eval, ann_args.language);
        const OverlapStats ov = overlap_stats(all, eval_set);
        write_file(ann_out + ".stats.json", stats_json(dist, &ov));
      } else {
        write_file(ann_out + ".stats.json", stats_json(dist));
      }
      std::printf("annotated %zu pairs -> %s\n", pairs.size(), ann_out.c_str());
    } else if (*map_cmd) {
      auto pairs = parse_pairs(map_args.pairs, map_args.language);
      auto analyses = parse_analyses(map_args.analyses, map_args.language);
      const TagMap tm = load_tagmap(map_args);
      ResourceArgs no_map = map_args;
      no_map.slot_map.clear();
      const SlotMapping mapping = infer_or_load_mapping(no_map, pairs, analyses, tm);
      const std::string text = serialize_slot_mapping(mapping);
      if (map_out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        write_file(map_out, text);
      }
    } else if (*fx_cmd) {
      FixtureSpec spec;
      if (!fx_spec.empty()) spec = FixtureSpec::from_json_text(read_file(fx_spec));
      if (fx_cmd->count("--seed")) spec.seed = fx_seed;
      const Fixture fx = gen_fixture(spec);
      write_fixture(fx, fx_out);
      std::printf("fixture: %zu pairs, %zu eval instances -> %s\n", fx.pairs.size(), fx.eval_set.size(),
                  fx_out.c_str());
    } else if (*bd_cmd) {
      auto pairs = parse_annotated(bd_annotated);
      auto [correct_ds, noisy_ds] = split_correct_noisy(pairs);
      const fs::path out(bd_out);
      fs::create_directories(out);
      auto emit = [&](const Dataset& d, const ResampleReport* rep = nullptr) {
        write_file(out / (d.name + ".tsv"), serialize_dataset(d));
        write_file(out / (d.name + ".manifest.json"), dataset_manifest(d, rep));
        std::printf("dataset %s: %zu samples\n", d.name.c_str(), d.samples.size());
      };
      if (bd_kind == "correct") {
        emit(correct_ds);
      } else if (bd_kind == "full") {
        Dataset full = correct_ds;
        full.name = "full";
        full.samples.insert(full.samples.end(), noisy_ds.samples.begin(), noisy_ds.samples.end());
        emit(full);
      } else if (bd_kind == "cumulative") {
        const PartitionPlan plan = partition_noise(noisy_ds.samples.size(), bd_k, bd_seed);
        for (const auto& d : cumulative_datasets(correct_ds, noisy_ds, plan)) emit(d);
      } else if (bd_kind == "add-one-in") {
        Dataset base = correct_ds;
        base.name = "addone_correct";
        emit(base);
        for (const auto& [flags, d] : add_one_in(correct_ds, noisy_ds)) {
          (void)flags;
          emit(d);
        }
      } else if (bd_kind == "resample" || bd_kind == "resample-length") {
        if (bd_unimorph.empty() || bd_eval.empty())
          throw Error("resample kinds need --unimorph and --eval");
        const auto table = parse_unimorph(bd_unimorph);
        const auto eval_set = parse_unimorph(bd_eval);
        ResampleReport rep;
        Dataset d = bd_kind == "resample" ? resample_unimorph(correct_ds, table, eval_set, bd_seed, &rep)
                                          : length_matched_resample(correct_ds, table, eval_set, bd_seed, &rep);
        emit(d, &rep);
        for (const auto& note : rep.notes) std::printf("note: %s\n", note.c_str());
      } else {
        throw Error("unknown dataset kind '" + bd_kind + "'");
      }
    } else if (*tr_cmd) {
      const Dataset ds = parse_dataset(tr_dataset);
      const Vocabulary vocab = Vocabulary::build(ds);
      Model model = init_model(model_kind_from_name(tr_model), tr_hidden, tr_embed, vocab, tr_cfg.seed);
      const TrainLog log = train(model, encode_dataset(vocab, ds), tr_cfg);
      save_checkpoint(model, tr_out, {{"dataset", ds.name}, {"pretrained", "false"}});
      write_file(tr_out + ".loss.csv", loss_log_csv(log));
      std::printf("trained %s on %zu samples, final loss %.6f -> %s\n", tr_model.c_str(), ds.samples.size(),
                  log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back(), tr_out.c_str());
    } else if (*pt_cmd) {
      const Dataset ds = parse_dataset(pt_dataset);
      PretrainConfig pc;
      pc.train = pt_cfg;
      pc.train.epochs = pt_epochs;
      pc.train.scheduler = pt_scheduler;
      pc.train.warmup_steps = pt_warmup;
      pc.policy.mask_prob = pt_mask_prob;
      pc.policy.seed = pt_mask_seed;
      TrainLog pre_log, fine_log;
      Model model = pretrain_then_finetune(model_kind_from_name(pt_model), pt_hidden, pt_embed, ds, pc, pt_cfg,
                                           &pre_log, &fine_log);
      save_checkpoint(model, pt_out, {{"dataset", ds.name}, {"pretrained", "true"}});
      write_file(pt_out + ".loss.csv", loss_log_csv(fine_log));
      write_file(pt_out + ".pretrain_loss.csv", loss_log_csv(pre_log));
      std::printf("pretrained+finetuned %s -> %s\n", pt_model.c_str(), pt_out.c_str());
    } else if (*ev_cmd) {
      const Model model = load_checkpoint(ev_ckpt);
      const auto eval_set = parse_unimorph(ev_eval);
      if (!ev_out.empty()) {
        std::string tsv;
        std::vector<std::string> preds, refs;
        for (const auto& e : eval_set) {
          const auto input = model.vocab.encode_input(e.lemma.surface, &e.msd);
          const DecodeResult d = decode_greedy(model, input, ev_max_len);
          preds.push_back(d.text);
          refs.push_back(e.target.surface);
          tsv += e.lemma.surface + "\t" + e.msd.canonical() + "\t" + e.target.surface + "\t" + d.text +
                 (d.truncated ? "\ttruncated" : "\t") + "\n";
        }
        write_file(ev_out, tsv);
        std::printf("accuracy %.6f\n", exact_match(preds, refs));
      } else {
        std::printf("accuracy %.6f\n", evaluate_model(model, eval_set, ev_max_len));
      }
    } else if (*exp_cmd) {
      if (!*exp_run) throw Error("usage: experiment run <config.json>");
      const ExperimentConfig cfg = ExperimentConfig::load(exp_config);
      const RunStats stats = run_experiment(cfg, exp_out, exp_jobs);
      std::printf("cells: %d total, %d executed, %d skipped, %d failed\n", stats.total, stats.executed,
                  stats.skipped, stats.failed);
      if (stats.failed > 0) return 1;
    } else if (*rp_cmd) {
      write_report(rp_results, rp_out);
      std::printf("report -> %s\n", rp_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
