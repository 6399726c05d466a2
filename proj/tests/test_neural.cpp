#include <cmath>
#include <set>

#include "doctest.h"
#include "morphnoise/neural.hpp"
#include "morphnoise/rng.hpp"

using namespace morphnoise;

namespace {

Dataset tiny_dataset() {
  Dataset ds{"tiny", 0, {}};
  auto add = [&](const char* s, const char* t, const char* m) {
    ds.samples.push_back({s, t, Msd::parse(m), Provenance::Correct, {}});
  };
  add("cry", "cried", "V;PST");
  add("walk", "walked", "V;PST");
  add("cry", "cries", "V;IND;PRS;3;SG");
  add("walk", "walks", "V;IND;PRS;3;SG");
  return ds;
}

// Central finite differences against the analytic gradient on a batch.
double max_rel_err(Model& model, const std::vector<EncodedSample>& batch, int coords, std::uint64_t seed) {
  const Eigen::VectorXd grad = gradients(model, batch, GradNorm::Mean);
  Rng rng(seed);
  const double h = 1e-5;
  double worst = 0;
  int checked = 0;
  int guard = 0;
  while (checked < coords && ++guard < 100000) {
    const Eigen::Index i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(model.theta.size())));
    if (std::abs(grad[i]) < 1e-4) continue;  // below finite-difference resolution at this step size
    const double orig = model.theta[i];
    model.theta[i] = orig + h;
    double lp = 0;
    for (const auto& s : batch) lp += forward(model, s.input, s.gold).loss;
    model.theta[i] = orig - h;
    double lm = 0;
    for (const auto& s : batch) lm += forward(model, s.input, s.gold).loss;
    model.theta[i] = orig;
    const double fd = (lp - lm) / (2 * h * static_cast<double>(batch.size()));
    const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
    worst = std::max(worst, rel);
    ++checked;
  }
  REQUIRE(checked == coords);
  return worst;
}

}  // namespace

TEST_CASE("vocabulary layout and encoding") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  CHECK(v.symbol(Vocabulary::kPad).text == "PAD");
  CHECK(v.symbol(Vocabulary::kMask).text == "MASK");

  // (cry, V;PST) -> [BOS, V, PST, c, r, y, EOS]
  const Msd m = Msd::parse("V;PST");
  const auto ids = v.encode_input("cry", &m);
  REQUIRE(ids.size() == 7);
  CHECK(ids.front() == Vocabulary::kBos);
  CHECK(ids.back() == Vocabulary::kEos);
  CHECK(v.symbol(ids[1]).kind == SymbolKind::Tag);
  CHECK(v.symbol(ids[1]).text == "V");
  CHECK(v.symbol(ids[2]).text == "PST");
  CHECK(v.symbol(ids[3]).text == "c");

  // no MSD (pretraining encoding)
  CHECK(v.encode_input("cry", nullptr).size() == 5);

  // unseen character maps to UNK
  const auto unk = v.encode_input("cr\xC3\x9F", &m);
  CHECK(unk[5] == Vocabulary::kUnk);

  // targets end with EOS
  const auto tgt = v.encode_target("cried");
  CHECK(tgt.size() == 6);
  CHECK(tgt.back() == Vocabulary::kEos);
}

TEST_CASE("forward emits normalized distributions") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  for (ModelKind kind : {ModelKind::EncDec, ModelKind::PtrGen}) {
    Model model = init_model(kind, 12, 6, v, 99);
    const auto enc = encode_dataset(v, ds);
    const ForwardResult r = forward(model, enc[0].input, enc[0].gold);
    CHECK(r.loss >= 0);
    for (const auto& dist : r.step_dists) {
      CHECK(dist.sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(dist.minCoeff() >= 0);
    }
  }
}

TEST_CASE("loss near ln|V| under tiny random parameters") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  Model model = init_model(ModelKind::EncDec, 12, 6, v, 5);
  model.theta *= 1e-3;  // squash towards the uniform distribution
  const auto enc = encode_dataset(v, ds);
  const double expected = std::log(static_cast<double>(v.size()));
  for (const auto& s : enc) {
    CHECK(forward(model, s.input, s.gold).loss == doctest::Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("pointer_mix arithmetic") {
  Eigen::VectorXd pv(4);
  pv << 0.1, 0.2, 0.3, 0.4;
  Eigen::VectorXd attn(3);
  attn << 0.5, 0.25, 0.25;
  const std::vector<int> src = {2, 3, 2};

  // p_gen = 1: vocabulary distribution unchanged
  CHECK((pointer_mix(1.0, pv, attn, src, 4) - pv).norm() == doctest::Approx(0));

  // p_gen = 0: all mass on source symbols
  const Eigen::VectorXd copy = pointer_mix(0.0, pv, attn, src, 4);
  CHECK(copy[0] == doctest::Approx(0));
  CHECK(copy[1] == doctest::Approx(0));
  CHECK(copy[2] == doctest::Approx(0.75));
  CHECK(copy[3] == doctest::Approx(0.25));

  // p_gen = 0.5: hand-computed mixture
  const Eigen::VectorXd half = pointer_mix(0.5, pv, attn, src, 4);
  CHECK(half[0] == doctest::Approx(0.05));
  CHECK(half[1] == doctest::Approx(0.10));
  CHECK(half[2] == doctest::Approx(0.15 + 0.375));
  CHECK(half[3] == doctest::Approx(0.20 + 0.125));
  CHECK(half.sum() == doctest::Approx(1.0));
}

TEST_CASE("gradients agree with finite differences") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  const auto enc = encode_dataset(v, ds);
  const std::vector<EncodedSample> batch(enc.begin(), enc.begin() + 2);
  for (ModelKind kind : {ModelKind::EncDec, ModelKind::PtrGen}) {
    Model model = init_model(kind, 8, 5, v, 17);
    CHECK(max_rel_err(model, batch, 20, 31) < 1e-4);
  }
}

TEST_CASE("batch gradient linearity") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  const auto enc = encode_dataset(v, ds);
  Model model = init_model(ModelKind::EncDec, 10, 6, v, 3);

  const std::vector<EncodedSample> one = {enc[0]};
  const std::vector<EncodedSample> two = {enc[0], enc[0]};
  const Eigen::VectorXd g1_sum = gradients(model, one, GradNorm::Sum);
  const Eigen::VectorXd g2_sum = gradients(model, two, GradNorm::Sum);
  CHECK((g2_sum - 2.0 * g1_sum).lpNorm<Eigen::Infinity>() < 1e-12);

  const Eigen::VectorXd g1_mean = gradients(model, one, GradNorm::Mean);
  const Eigen::VectorXd g2_mean = gradients(model, two, GradNorm::Mean);
  CHECK((g2_mean - g1_mean).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("training is deterministic and can overfit a tiny set") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  const auto enc = encode_dataset(v, ds);
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 2;
  cfg.seed = 21;
  cfg.max_decode_len = 16;

  Model a = init_model(ModelKind::EncDec, 24, 12, v, cfg.seed);
  const TrainLog log_a = train(a, enc, cfg);
  Model b = init_model(ModelKind::EncDec, 24, 12, v, cfg.seed);
  const TrainLog log_b = train(b, enc, cfg);
  CHECK(param_hash(a) == param_hash(b));
  CHECK(log_a.epoch_loss == log_b.epoch_loss);
  CHECK(log_a.epoch_loss.size() == 150);

  // loss should have dropped massively, and decoding reproduces the data
  CHECK(log_a.epoch_loss.back() < 0.05);
  int correct = 0;
  for (std::size_t i = 0; i < enc.size(); ++i) {
    const DecodeResult d = decode_greedy(a, enc[i].input, cfg.max_decode_len);
    if (d.text == ds.samples[i].target) ++correct;
  }
  CHECK(correct == 4);

  // a converged model truncates cleanly at max_len
  const DecodeResult capped = decode_greedy(a, enc[0].input, 3);
  CHECK(capped.truncated);
  CHECK(capped.text == "cri");
}

TEST_CASE("decode with max_len zero is empty and flagged truncated") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  Model model = init_model(ModelKind::EncDec, 8, 4, v, 2);
  const Msd m = Msd::parse("V;PST");
  const auto input = v.encode_input("cry", &m);

  const DecodeResult none = decode_greedy(model, input, 0);
  CHECK(none.text.empty());
  CHECK(none.truncated);
}

TEST_CASE("scheduler validation and divergence reporting") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  const auto enc = encode_dataset(v, ds);
  Model model = init_model(ModelKind::EncDec, 8, 4, v, 2);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.scheduler = "bogus";
  CHECK_THROWS_AS(train(model, enc, cfg), Error);
  cfg.scheduler = "none";
  cfg.lr = 0;
  CHECK_THROWS_AS(train(model, enc, cfg), Error);
}

TEST_CASE("checkpoint round trip is exact") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  Model model = init_model(ModelKind::PtrGen, 9, 5, v, 77);
  const auto path = std::filesystem::temp_directory_path() / "morphnoise_test_ckpt.json";
  save_checkpoint(model, path, {{"pretrained", "false"}});
  std::map<std::string, std::string> meta;
  const Model back = load_checkpoint(path, &meta);
  CHECK(back.kind == ModelKind::PtrGen);
  CHECK(back.theta == model.theta);
  CHECK(param_hash(back) == param_hash(model));
  CHECK(meta.at("pretrained") == "false");
  std::filesystem::remove(path);
}

TEST_CASE("adadelta optimizer also trains") {
  const Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  const auto enc = encode_dataset(v, ds);
  Model model = init_model(ModelKind::EncDec, 16, 8, v, 4);
  TrainConfig cfg;
  cfg.optimizer = "adadelta";
  cfg.lr = 1.0;
  cfg.epochs = 40;
  cfg.batch_size = 2;
  const TrainLog log = train(model, enc, cfg);
  CHECK(log.epoch_loss.back() < log.epoch_loss.front());
}

TEST_CASE("parameter count at reference dimensions") {
  // the default-size recurrent model sits in the mid-hundreds of thousands
  Dataset ds = tiny_dataset();
  const Vocabulary v = Vocabulary::build(ds);
  Model model = init_model(ModelKind::EncDec, 128, 64, v, 1);
  CHECK(model.param_count() > 300000);
  CHECK(model.param_count() < 500000);
}
