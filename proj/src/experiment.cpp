#include "morphnoise/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <set>
#include <thread>

#include "morphnoise/annotator.hpp"
#include "morphnoise/corpus.hpp"
#include "morphnoise/eval.hpp"
#include "nlohmann/json.hpp"

namespace morphnoise {

using json = nlohmann::ordered_json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
  if (rel.empty()) return {};
  std::filesystem::path p(rel);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& config_path) {
  json j;
  try {
    j = json::parse(read_file(config_path));
  } catch (const json::exception& e) {
    throw Error("bad experiment config " + config_path.string() + ": " + e.what());
  }
  ExperimentConfig c;
  c.kind = j.value("experiment", c.kind);
  c.language = j.value("language", c.language);
  if (j.contains("models")) {
    c.models.clear();
    for (const auto& m : j.at("models")) c.models.push_back(model_kind_from_name(m.get<std::string>()));
  }
  if (j.contains("seeds")) {
    c.seeds.clear();
    for (const auto& s : j.at("seeds")) c.seeds.push_back(s.get<std::uint64_t>());
  }
  if (j.contains("pretrain")) {
    c.pretrain_variants.clear();
    for (const auto& p : j.at("pretrain")) c.pretrain_variants.push_back(p.get<bool>());
  }
  c.partitions = j.value("partitions", c.partitions);
  c.dataset_seed = j.value("dataset_seed", c.dataset_seed);
  c.lowercase_lexicon = j.value("lowercase_lexicon", false);

  const auto base = config_path.has_parent_path() ? config_path.parent_path() : std::filesystem::path(".");
  const auto& d = j.at("data");
  c.pairs = resolve(base, d.at("pairs").get<std::string>());
  c.analyses = resolve(base, d.at("analyses").get<std::string>());
  c.lexicon = resolve(base, d.at("lexicon").get<std::string>());
  c.valid_pos = resolve(base, d.at("valid_pos").get<std::string>());
  c.tagmap = resolve(base, d.at("tagmap").get<std::string>());
  c.rewrites = resolve(base, d.value("rewrites", std::string()));
  c.eval = resolve(base, d.at("eval").get<std::string>());
  c.slot_map = resolve(base, d.value("slot_map", std::string()));
  c.unimorph = resolve(base, d.value("unimorph", std::string()));

  if (j.contains("model")) {
    c.hidden = j.at("model").value("hidden", c.hidden);
    c.embed = j.at("model").value("embed", c.embed);
  }
  auto read_train = [](const json& t, TrainConfig& cfg) {
    cfg.epochs = t.value("epochs", cfg.epochs);
    cfg.batch_size = t.value("batch_size", cfg.batch_size);
    cfg.optimizer = t.value("optimizer", cfg.optimizer);
    cfg.lr = t.value("lr", cfg.lr);
    cfg.scheduler = t.value("scheduler", cfg.scheduler);
    cfg.warmup_steps = t.value("warmup_steps", cfg.warmup_steps);
    cfg.max_decode_len = t.value("max_decode_len", cfg.max_decode_len);
  };
  if (j.contains("train")) read_train(j.at("train"), c.train);
  if (j.contains("pretrain_train")) read_train(j.at("pretrain_train"), c.pretrain_cfg.train);
  if (j.contains("mask")) {
    const auto& m = j.at("mask");
    c.pretrain_cfg.policy.mask_prob = m.value("mask_prob", c.pretrain_cfg.policy.mask_prob);
    c.pretrain_cfg.policy.p_mask = m.value("p_mask", c.pretrain_cfg.policy.p_mask);
    c.pretrain_cfg.policy.p_random = m.value("p_random", c.pretrain_cfg.policy.p_random);
    c.pretrain_cfg.policy.p_keep = m.value("p_keep", c.pretrain_cfg.policy.p_keep);
    c.pretrain_cfg.policy.seed = m.value("seed", c.pretrain_cfg.policy.seed);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kKinds{"noise-quantity", "noise-type", "cmlm-compare", "full"};
  if (!kKinds.count(kind)) throw Error("unknown experiment kind '" + kind + "'");
  if (models.empty()) throw Error("experiment: no models configured");
  if (seeds.empty()) throw Error("experiment: no seeds configured");
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw Error("experiment: seeds must be distinct");
  if (partitions < 1) throw Error("experiment: partitions must be >= 1");
  for (const auto* p : {&pairs, &analyses, &lexicon, &valid_pos, &tagmap, &eval}) {
    if (p->empty()) throw Error("experiment: missing required data path");
    if (!std::filesystem::exists(*p)) throw Error("experiment: no such file " + p->string());
  }
  pretrain_cfg.policy.validate();
}

namespace {

struct Cell {
  ModelKind model;
  std::string dataset;
  int partition = -1;  // cumulative partition index, -1 otherwise
  bool pretrained = false;
  std::uint64_t seed = 0;
};

std::string cell_id(const Cell& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s__%s__s%llu__pre%d", std::string(model_kind_name(c.model)).c_str(),
                c.dataset.c_str(), static_cast<unsigned long long>(c.seed), c.pretrained ? 1 : 0);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int partition_of(const std::string& dataset_name) {
  const auto at = dataset_name.rfind("_p");
  if (at == std::string::npos) return -1;
  const std::string digits = dataset_name.substr(at + 2);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return -1;
  return std::stoi(digits);
}

struct CellResult {
  Cell cell;
  double accuracy = 0;
  double seconds = 0;
  double final_loss = 0;
  std::uint64_t hash = 0;
};

CellResult run_cell(const ExperimentConfig& cfg, const Cell& cell, const Dataset& ds,
                    const std::vector<EvalInstance>& eval_set) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainConfig tc = cfg.train;
  tc.seed = cell.seed;
  Model model;
  TrainLog log;
  if (cell.pretrained) {
    PretrainConfig pc = cfg.pretrain_cfg;
    pc.policy.seed = mix_seed(cell.seed, pc.policy.seed);
    pc.train.seed = cell.seed;
    model = pretrain_then_finetune(cell.model, cfg.hidden, cfg.embed, ds, pc, tc, nullptr, &log);
  } else {
    Vocabulary vocab = Vocabulary::build(ds);
    model = init_model(cell.model, cfg.hidden, cfg.embed, vocab, tc.seed);
    log = train(model, encode_dataset(vocab, ds), tc);
  }
  CellResult r;
  r.cell = cell;
  r.accuracy = evaluate_model(model, eval_set, cfg.train.max_decode_len);
  r.final_loss = log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back();
  r.hash = param_hash(model);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

json cell_json(const ExperimentConfig& cfg, const CellResult& r) {
  json j;
  j["id"] = cell_id(r.cell);
  j["language"] = cfg.language;
  j["model"] = std::string(model_kind_name(r.cell.model));
  j["dataset"] = r.cell.dataset;
  j["partition"] = r.cell.partition;
  j["pretrained"] = r.cell.pretrained;
  j["seed"] = r.cell.seed;
  j["accuracy"] = r.accuracy;
  j["final_loss"] = r.final_loss;
  j["param_hash"] = r.hash;
  j["seconds"] = r.seconds;
  return j;
}

}  // namespace

RunStats run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs) {
  cfg.validate();
  if (jobs < 1) jobs = 1;
  std::filesystem::create_directories(out_dir / "cells");
  std::filesystem::create_directories(out_dir / "datasets");

  // --- corpus, mapping, annotation ---
  std::vector<InflectionPair> pairs = parse_pairs(cfg.pairs, cfg.language);
  AnnotationResources res;
  res.lexicon = parse_lexicon(cfg.lexicon);
  res.analyses = parse_analyses(cfg.analyses, cfg.language);
  res.valid_pos = parse_valid_pos(cfg.valid_pos);
  res.tagmap = cfg.rewrites.empty() ? TagMap::load(cfg.tagmap) : TagMap::load(cfg.tagmap, cfg.rewrites);
  if (cfg.lowercase_lexicon) res.set_case_folding(true);

  if (!cfg.slot_map.empty()) {
    res.slot_mapping = parse_slot_mapping(cfg.slot_map);
  } else {
    std::map<std::string, std::vector<Msd>> gold;
    for (const auto& p : pairs) {
      if (gold.count(p.target.surface)) continue;
      const AnalysisSet* as = res.analysis_set(p.target.surface);
      if (as) gold[p.target.surface] = map_analysis_set(*as, res.tagmap).msds;
    }
    res.slot_mapping = max_matching(build_graph(pairs, gold));
  }
  apply_mapping(pairs, res.slot_mapping);
  annotate_corpus(pairs, res);

  const std::vector<EvalInstance> eval_set = parse_unimorph(cfg.eval, cfg.language);
  write_file(out_dir / "slot_map.tsv", serialize_slot_mapping(res.slot_mapping));
  write_file(out_dir / "annotated.tsv", serialize_annotated(pairs));
  {
    const Distribution dist = annotation_distribution(pairs);
    auto [correct_ds, noisy_ds] = split_correct_noisy(pairs);
    Dataset all = correct_ds;
    all.samples.insert(all.samples.end(), noisy_ds.samples.begin(), noisy_ds.samples.end());
    if (!all.samples.empty()) {
      const OverlapStats ov = overlap_stats(all, eval_set);
      write_file(out_dir / "annotated.stats.json", stats_json(dist, &ov));
    } else {
      write_file(out_dir / "annotated.stats.json", stats_json(dist));
    }
  }

  // --- datasets ---
  auto [correct_ds, noisy_ds] = split_correct_noisy(pairs);
  std::map<std::string, Dataset> datasets;
  auto add_dataset = [&](Dataset d) {
    const std::string name = d.name;
    datasets.emplace(name, std::move(d));
  };
  if (cfg.kind == "noise-quantity" || cfg.kind == "cmlm-compare") {
    const PartitionPlan plan = partition_noise(noisy_ds.samples.size(), cfg.partitions, cfg.dataset_seed);
    for (auto& d : cumulative_datasets(correct_ds, noisy_ds, plan)) add_dataset(std::move(d));
  } else if (cfg.kind == "noise-type") {
    Dataset base = correct_ds;
    base.name = "addone_correct";
    add_dataset(std::move(base));
    for (auto& [flags, d] : add_one_in(correct_ds, noisy_ds)) {
      (void)flags;
      add_dataset(std::move(d));
    }
  } else {  // full
    Dataset c = correct_ds;
    c.name = "correct";
    add_dataset(std::move(c));
    Dataset full = correct_ds;
    full.name = "full";
    full.samples.insert(full.samples.end(), noisy_ds.samples.begin(), noisy_ds.samples.end());
    add_dataset(std::move(full));
    if (!cfg.unimorph.empty()) {
      const std::vector<EvalInstance> table = parse_unimorph(cfg.unimorph, cfg.language);
      ResampleReport rep;
      Dataset r = resample_unimorph(correct_ds, table, eval_set, cfg.dataset_seed, &rep);
      r.name = "resampled";
      write_file(out_dir / "datasets" / "resampled.manifest.json", dataset_manifest(r, &rep));
      add_dataset(std::move(r));
      Dataset rl = length_matched_resample(correct_ds, table, eval_set, cfg.dataset_seed, &rep);
      rl.name = "resampled_len";
      write_file(out_dir / "datasets" / "resampled_len.manifest.json", dataset_manifest(rl, &rep));
      add_dataset(std::move(rl));
    }
  }
  for (const auto& [name, d] : datasets) {
    write_file(out_dir / "datasets" / (name + ".tsv"), serialize_dataset(d));
    const auto manifest = out_dir / "datasets" / (name + ".manifest.json");
    if (!std::filesystem::exists(manifest)) write_file(manifest, dataset_manifest(d));
  }

  // --- cells ---
  const std::vector<bool> variants =
      cfg.kind == "cmlm-compare" ? std::vector<bool>{false, true} : cfg.pretrain_variants;
  std::vector<Cell> cells;
  for (const auto& model : cfg.models) {
    for (const auto& [name, d] : datasets) {
      (void)d;
      for (bool pre : variants) {
        for (auto seed : cfg.seeds) cells.push_back({model, name, partition_of(name), pre, seed});
      }
    }
  }

  RunStats stats;
  stats.total = static_cast<int>(cells.size());
  std::vector<const Cell*> todo;
  for (const auto& c : cells) {
    if (std::filesystem::exists(out_dir / "cells" / (cell_id(c) + ".json"))) {
      ++stats.skipped;
    } else {
      todo.push_back(&c);
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> executed{0}, failed{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const Cell& c = *todo[i];
      try {
        const CellResult r = run_cell(cfg, c, datasets.at(c.dataset), eval_set);
        write_file(out_dir / "cells" / (cell_id(c) + ".json"), cell_json(cfg, r).dump(2) + "\n");
        ++executed;
        std::lock_guard<std::mutex> lock(io_mutex);
        std::fprintf(stderr, "[cell] %s accuracy=%.4f (%.1fs)\n", cell_id(c).c_str(), r.accuracy, r.seconds);
      } catch (const std::exception& e) {
        write_file(out_dir / "cells" / (cell_id(c) + ".error.json"),
                   json{{"id", cell_id(c)}, {"error", e.what()}}.dump(2) + "\n");
        ++failed;
        std::lock_guard<std::mutex> lock(io_mutex);
        std::fprintf(stderr, "[cell] %s FAILED: %s\n", cell_id(c).c_str(), e.what());
      }
    }
  };
  if (jobs == 1 || todo.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(jobs, static_cast<int>(todo.size()));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  stats.executed = executed;
  stats.failed = failed;

  // --- assemble CSVs from cell files, in deterministic order ---
  std::string results = "language,model,dataset,partition,pretrained,seed,accuracy,seconds\n";
  struct Key {
    std::string model, dataset;
    bool pre;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<double>> groups;
  std::map<Key, int> group_partition;
  for (const auto& c : cells) {
    const auto path = out_dir / "cells" / (cell_id(c) + ".json");
    if (!std::filesystem::exists(path)) continue;
    const json j = json::parse(read_file(path));
    results += cfg.language + "," + std::string(model_kind_name(c.model)) + "," + c.dataset + "," +
               (c.partition >= 0 ? std::to_string(c.partition) : "NA") + "," + (c.pretrained ? "1" : "0") + "," +
               std::to_string(c.seed) + "," + fmt(j.at("accuracy").get<double>()) + "," +
               fmt(j.at("seconds").get<double>()) + "\n";
    const Key k{std::string(model_kind_name(c.model)), c.dataset, c.pretrained};
    groups[k].push_back(j.at("accuracy").get<double>());
    group_partition[k] = c.partition;
  }
  write_file(out_dir / "results.csv", results);

  std::string summary = "language,model,dataset,partition,pretrained,n,mean_accuracy,std_accuracy\n";
  for (const auto& [k, accs] : groups) {
    const Aggregate a = aggregate(accs);
    const int part = group_partition.at(k);
    summary += cfg.language + "," + k.model + "," + k.dataset + "," +
               (part >= 0 ? std::to_string(part) : "NA") + "," + (k.pre ? "1" : "0") + "," + std::to_string(a.n) +
               "," + fmt(a.mean) + "," + (a.stddev ? fmt(*a.stddev) : std::string("NA")) + "\n";
  }
  write_file(out_dir / "summary.csv", summary);

  // Machine-readable manifest of the grid (no volatile values).
  json manifest;
  manifest["experiment"] = cfg.kind;
  manifest["language"] = cfg.language;
  manifest["partitions"] = cfg.partitions;
  manifest["dataset_seed"] = cfg.dataset_seed;
  json ds_json = json::object();
  for (const auto& [name, d] : datasets) ds_json[name] = d.samples.size();
  manifest["datasets"] = std::move(ds_json);
  json cell_list = json::array();
  for (const auto& c : cells) cell_list.push_back(cell_id(c));
  manifest["cells"] = std::move(cell_list);
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return stats;
}

void write_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir) {
  const auto cells_dir = results_dir / "cells";
  if (!std::filesystem::exists(cells_dir)) throw Error("no cells directory under " + results_dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(cells_dir)) {
    if (e.path().extension() == ".json" && e.path().string().find(".error.") == std::string::npos)
      files.push_back(e.path());
  }
  if (files.empty()) throw Error("no completed cells under " + results_dir.string());
  std::sort(files.begin(), files.end());

  struct Row {
    std::string language, model, dataset;
    int partition;
    bool pretrained;
    double accuracy;
  };
  std::vector<Row> rows;
  for (const auto& f : files) {
    const json j = json::parse(read_file(f));
    rows.push_back({j.at("language").get<std::string>(), j.at("model").get<std::string>(),
                    j.at("dataset").get<std::string>(), j.at("partition").get<int>(),
                    j.at("pretrained").get<bool>(), j.at("accuracy").get<double>()});
  }

  auto dataset_size = [&](const std::string& name) -> long {
    const auto p = results_dir / "datasets" / (name + ".manifest.json");
    if (!std::filesystem::exists(p)) return -1;
    return json::parse(read_file(p)).value("size", -1);
  };

  struct Key {
    std::string language, model, dataset;
    int partition;
    bool pre;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.language, r.model, r.dataset, r.partition, r.pretrained}].push_back(r.accuracy);

  std::filesystem::create_directories(out_dir);

  // accuracy-vs-partition curves; absent points become NA rows
  int max_part = -1;
  for (const auto& [k, v] : groups) {
    (void)v;
    max_part = std::max(max_part, k.partition);
  }
  std::string curves = "language,model,pretrained,partition,n,mean_accuracy\n";
  if (max_part >= 0) {
    std::set<std::tuple<std::string, std::string, bool>> series;
    for (const auto& [k, v] : groups) {
      (void)v;
      if (k.partition >= 0) series.insert({k.language, k.model, k.pre});
    }
    for (const auto& [lang, model, pre] : series) {
      for (int p = 0; p <= max_part; ++p) {
        const Key probe{lang, model, "", p, pre};
        // datasets with this partition under this series
        const std::vector<double>* accs = nullptr;
        for (const auto& [k, v] : groups) {
          if (k.language == lang && k.model == model && k.pre == pre && k.partition == p) accs = &v;
        }
        (void)probe;
        curves += lang + "," + model + "," + (pre ? "1" : "0") + "," + std::to_string(p) + ",";
        if (accs) {
          const Aggregate a = aggregate(*accs);
          curves += std::to_string(a.n) + "," + fmt(a.mean) + "\n";
        } else {
          curves += "0,NA\n";
        }
      }
    }
  }
  write_file(out_dir / "curves.csv", curves);

  // per-annotation add-one-in bars with dataset sizes
  std::string bars = "language,model,pretrained,annotation,n,mean_accuracy,pct_change,dataset_size\n";
  for (const auto& [k, v] : groups) {
    if (!k.dataset.starts_with("addone_")) continue;
    const std::string annotation = k.dataset.substr(7);
    if (annotation == "correct") continue;
    const Aggregate a = aggregate(v);
    std::string pct = "NA";
    auto base = groups.find({k.language, k.model, "addone_correct", -1, k.pre});
    if (base != groups.end()) {
      const Aggregate b = aggregate(base->second);
      if (b.mean > 0) pct = fmt(percent_change(b.mean, a.mean));
    }
    const long size = dataset_size(k.dataset);
    bars += k.language + "," + k.model + "," + (k.pre ? "1" : "0") + "," + annotation + "," + std::to_string(a.n) +
            "," + fmt(a.mean) + "," + pct + "," + (size >= 0 ? std::to_string(size) : "NA") + "\n";
  }
  write_file(out_dir / "noise_type.csv", bars);

  // pretraining effect per dataset
  std::string effect = "language,model,dataset,partition,n,mean_plain,mean_pretrained,pct_change\n";
  std::set<std::tuple<std::string, std::string, std::string, int>> combos;
  for (const auto& [k, v] : groups) {
    (void)v;
    combos.insert({k.language, k.model, k.dataset, k.partition});
  }
  for (const auto& [lang, model, dataset, part] : combos) {
    auto plain = groups.find({lang, model, dataset, part, false});
    auto pre = groups.find({lang, model, dataset, part, true});
    if (plain == groups.end() || pre == groups.end()) continue;
    const Aggregate ap = aggregate(plain->second);
    const Aggregate aq = aggregate(pre->second);
    const std::string pct = ap.mean > 0 ? fmt(percent_change(ap.mean, aq.mean)) : "NA";
    effect += lang + "," + model + "," + dataset + "," + (part >= 0 ? std::to_string(part) : "NA") + "," +
              std::to_string(ap.n) + "," + fmt(ap.mean) + "," + fmt(aq.mean) + "," + pct + "\n";
  }
  write_file(out_dir / "pretrain_effect.csv", effect);
}

}  // namespace morphnoise
