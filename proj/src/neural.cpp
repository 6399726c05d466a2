#include "morphnoise/neural.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "morphnoise/corpus.hpp"
#include "nlohmann/json.hpp"

namespace morphnoise {

using json = nlohmann::ordered_json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::build(const Dataset& train) {
  std::set<std::string> tags, chars;
  for (const auto& s : train.samples) {
    for (const auto& t : s.msd.tags()) tags.insert(t);
    for (char32_t c : utf8_decode(s.source)) chars.insert(utf8_encode(c));
    for (char32_t c : utf8_decode(s.target)) chars.insert(utf8_encode(c));
  }
  std::vector<Symbol> symbols;
  for (const char* name : {"PAD", "BOS", "EOS", "UNK", "MASK"})
    symbols.push_back({SymbolKind::Special, name});
  for (const auto& t : tags) symbols.push_back({SymbolKind::Tag, t});
  for (const auto& c : chars) symbols.push_back({SymbolKind::Char, c});
  return from_symbols(std::move(symbols));
}

Vocabulary Vocabulary::from_symbols(std::vector<Symbol> symbols) {
  if (symbols.size() < kNumSpecials) throw Error("vocabulary lacks the special symbols");
  static const char* kSpecials[] = {"PAD", "BOS", "EOS", "UNK", "MASK"};
  for (int i = 0; i < kNumSpecials; ++i) {
    if (symbols[static_cast<std::size_t>(i)].kind != SymbolKind::Special ||
        symbols[static_cast<std::size_t>(i)].text != kSpecials[i])
      throw Error("vocabulary specials must occupy the first indices in fixed order");
  }
  Vocabulary v;
  v.symbols_ = std::move(symbols);
  for (std::size_t i = 0; i < v.symbols_.size(); ++i) {
    if (!v.index_.emplace(v.symbols_[i], static_cast<int>(i)).second)
      throw Error("duplicate vocabulary symbol '" + v.symbols_[i].text + "'");
  }
  return v;
}

int Vocabulary::find(const Symbol& s) const {
  auto it = index_.find(s);
  return it == index_.end() ? -1 : it->second;
}

int Vocabulary::char_id(const std::string& codepoint) const {
  const int id = find({SymbolKind::Char, codepoint});
  return id < 0 ? kUnk : id;
}

int Vocabulary::tag_id(const std::string& tag) const {
  const int id = find({SymbolKind::Tag, tag});
  return id < 0 ? kUnk : id;
}

std::vector<int> Vocabulary::char_ids() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].kind == SymbolKind::Char) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> Vocabulary::encode_input(const std::string& source, const Msd* msd) const {
  std::vector<int> out;
  out.push_back(kBos);
  if (msd) {
    for (const auto& t : msd->tags()) out.push_back(tag_id(t));
  }
  for (char32_t c : utf8_decode(source)) out.push_back(char_id(utf8_encode(c)));
  out.push_back(kEos);
  return out;
}

std::vector<int> Vocabulary::encode_target(const std::string& target) const {
  std::vector<int> out;
  for (char32_t c : utf8_decode(target)) out.push_back(char_id(utf8_encode(c)));
  out.push_back(kEos);
  return out;
}

std::string Vocabulary::render(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    const Symbol& s = symbol(id);
    switch (s.kind) {
      case SymbolKind::Char:
        out += s.text;
        break;
      case SymbolKind::Tag:
        out += "<" + s.text + ">";
        break;
      case SymbolKind::Special:
        if (id == kUnk) out += "\xEF\xBF\xBD";  // U+FFFD
        break;
    }
  }
  return out;
}

std::vector<EncodedSample> encode_dataset(const Vocabulary& vocab, const Dataset& ds) {
  std::vector<EncodedSample> out;
  out.reserve(ds.samples.size());
  for (const auto& s : ds.samples)
    out.push_back({vocab.encode_input(s.source, &s.msd), vocab.encode_target(s.target)});
  return out;
}

// ---------------------------------------------------------------------------
// Parameter layout

std::string_view model_kind_name(ModelKind k) { return k == ModelKind::EncDec ? "encdec" : "ptrgen"; }

ModelKind model_kind_from_name(std::string_view name) {
  if (name == "encdec") return ModelKind::EncDec;
  if (name == "ptrgen") return ModelKind::PtrGen;
  throw Error("unknown model kind '" + std::string(name) + "'");
}

namespace {
constexpr const char* kBlockNames[kNumBlocks] = {
    "emb",
    "enc_f_wz", "enc_f_wr", "enc_f_wh", "enc_f_uz", "enc_f_ur", "enc_f_uh", "enc_f_bz", "enc_f_br", "enc_f_bh",
    "enc_b_wz", "enc_b_wr", "enc_b_wh", "enc_b_uz", "enc_b_ur", "enc_b_uh", "enc_b_bz", "enc_b_br", "enc_b_bh",
    "dec_wz", "dec_wr", "dec_wh", "dec_uz", "dec_ur", "dec_uh", "dec_bz", "dec_br", "dec_bh",
    "init_w", "init_b",
    "att_w",
    "out_w", "out_b",
    "gate_w", "gate_b",
};
}  // namespace

std::string_view ParamLayout::block_name(Block b) { return kBlockNames[b]; }

ParamLayout ParamLayout::make(ModelKind kind, int vocab, int embed, int hidden) {
  const int v = vocab, e = embed, h = hidden;
  const int d = e + 2 * h;  // decoder input: previous embedding + context
  ParamLayout L;
  auto add = [&](Block b, int rows, int cols) {
    auto& s = L.specs_[static_cast<std::size_t>(b)];
    s.rows = rows;
    s.cols = cols;
    s.offset = L.total_;
    s.present = true;
    L.total_ += static_cast<std::ptrdiff_t>(rows) * cols;
  };
  add(kEmb, v, e);
  for (int base : {kEncFWz, kEncBWz}) {
    add(static_cast<Block>(base + 0), h, e);
    add(static_cast<Block>(base + 1), h, e);
    add(static_cast<Block>(base + 2), h, e);
    add(static_cast<Block>(base + 3), h, h);
    add(static_cast<Block>(base + 4), h, h);
    add(static_cast<Block>(base + 5), h, h);
    add(static_cast<Block>(base + 6), h, 1);
    add(static_cast<Block>(base + 7), h, 1);
    add(static_cast<Block>(base + 8), h, 1);
  }
  add(kDecWz, h, d);
  add(kDecWr, h, d);
  add(kDecWh, h, d);
  add(kDecUz, h, h);
  add(kDecUr, h, h);
  add(kDecUh, h, h);
  add(kDecBz, h, 1);
  add(kDecBr, h, 1);
  add(kDecBh, h, 1);
  add(kInitW, h, 2 * h);
  add(kInitB, h, 1);
  add(kAttW, h, 2 * h);
  add(kOutW, v, 3 * h);
  add(kOutB, v, 1);
  if (kind == ModelKind::PtrGen) {
    add(kGateW, 3 * h + e, 1);
    add(kGateB, 1, 1);
  }
  return L;
}

namespace {

using CMat = Eigen::Map<const MatrixXd>;
using CVec = Eigen::Map<const VectorXd>;
using MMat = Eigen::Map<MatrixXd>;
using MVec = Eigen::Map<VectorXd>;

CMat cmat(const VectorXd& theta, const ParamLayout& L, Block b) {
  const auto& s = L.spec(b);
  return CMat(theta.data() + s.offset, s.rows, s.cols);
}

CVec cvec(const VectorXd& theta, const ParamLayout& L, Block b) {
  const auto& s = L.spec(b);
  return CVec(theta.data() + s.offset, s.rows);
}

MMat mmat(VectorXd& g, const ParamLayout& L, Block b) {
  const auto& s = L.spec(b);
  return MMat(g.data() + s.offset, s.rows, s.cols);
}

MVec mvec(VectorXd& g, const ParamLayout& L, Block b) {
  const auto& s = L.spec(b);
  return MVec(g.data() + s.offset, s.rows);
}

struct GruW {
  CMat wz, wr, wh, uz, ur, uh;
  CVec bz, br, bh;
};

GruW gru_w(const VectorXd& th, const ParamLayout& L, int base) {
  auto B = [&](int i) { return static_cast<Block>(base + i); };
  return {cmat(th, L, B(0)), cmat(th, L, B(1)), cmat(th, L, B(2)),
          cmat(th, L, B(3)), cmat(th, L, B(4)), cmat(th, L, B(5)),
          cvec(th, L, B(6)), cvec(th, L, B(7)), cvec(th, L, B(8))};
}

struct GruG {
  MMat wz, wr, wh, uz, ur, uh;
  MVec bz, br, bh;
};

GruG gru_g(VectorXd& g, const ParamLayout& L, int base) {
  auto B = [&](int i) { return static_cast<Block>(base + i); };
  return {mmat(g, L, B(0)), mmat(g, L, B(1)), mmat(g, L, B(2)),
          mmat(g, L, B(3)), mmat(g, L, B(4)), mmat(g, L, B(5)),
          mvec(g, L, B(6)), mvec(g, L, B(7)), mvec(g, L, B(8))};
}

inline VectorXd sigmoid(const VectorXd& v) { return 1.0 / (1.0 + (-v.array()).exp()); }

inline VectorXd softmax(const VectorXd& v) {
  Eigen::ArrayXd e = (v.array() - v.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

struct GruCache {
  VectorXd x, h_prev, z, r, hc, h;
};

void gru_step(const GruW& w, VectorXd x, const VectorXd& h_prev, GruCache& c) {
  c.x = std::move(x);
  c.h_prev = h_prev;
  c.z = sigmoid(w.wz * c.x + w.uz * h_prev + w.bz);
  c.r = sigmoid(w.wr * c.x + w.ur * h_prev + w.br);
  c.hc = (w.wh * c.x + w.uh * (c.r.array() * h_prev.array()).matrix() + w.bh).array().tanh();
  c.h = ((1.0 - c.z.array()) * h_prev.array() + c.z.array() * c.hc.array()).matrix();
}

// Accumulates parameter grads and dh_prev; writes dx.
void gru_back(const GruW& w, const GruCache& c, const VectorXd& dh, GruG& g, VectorXd& dx, VectorXd& dh_prev) {
  const VectorXd dhc = (dh.array() * c.z.array()).matrix();
  const VectorXd dz = (dh.array() * (c.hc - c.h_prev).array()).matrix();
  dh_prev += (dh.array() * (1.0 - c.z.array())).matrix();

  const VectorXd dhc_pre = (dhc.array() * (1.0 - c.hc.array().square())).matrix();
  g.wh.noalias() += dhc_pre * c.x.transpose();
  const VectorXd rh = (c.r.array() * c.h_prev.array()).matrix();
  g.uh.noalias() += dhc_pre * rh.transpose();
  g.bh += dhc_pre;
  const VectorXd drh = w.uh.transpose() * dhc_pre;
  const VectorXd dr = (drh.array() * c.h_prev.array()).matrix();
  dh_prev += (drh.array() * c.r.array()).matrix();
  dx.noalias() = w.wh.transpose() * dhc_pre;

  const VectorXd dz_pre = (dz.array() * c.z.array() * (1.0 - c.z.array())).matrix();
  g.wz.noalias() += dz_pre * c.x.transpose();
  g.uz.noalias() += dz_pre * c.h_prev.transpose();
  g.bz += dz_pre;
  dx.noalias() += w.wz.transpose() * dz_pre;
  dh_prev.noalias() += w.uz.transpose() * dz_pre;

  const VectorXd dr_pre = (dr.array() * c.r.array() * (1.0 - c.r.array())).matrix();
  g.wr.noalias() += dr_pre * c.x.transpose();
  g.ur.noalias() += dr_pre * c.h_prev.transpose();
  g.br += dr_pre;
  dx.noalias() += w.wr.transpose() * dr_pre;
  dh_prev.noalias() += w.ur.transpose() * dr_pre;
}

struct StepCache {
  int prev_id = 0;
  GruCache gru;
  VectorXd alpha;    // attention weights over input positions
  VectorXd ctx;      // 2H
  VectorXd sc;       // [s; ctx]
  VectorXd pvocab;   // V
  VectorXd pfinal;   // V
  double gate = 1.0;
  VectorXd gate_in;  // [s; ctx; emb(prev)] (ptr only)
};

struct Trace {
  std::vector<GruCache> enc_f, enc_b;
  MatrixXd enc_states;  // 2H x L
  MatrixXd att_proj;    // H x L, att_w * enc_states
  VectorXd init_in, s0; // 2H / H
  std::vector<StepCache> steps;
  double loss = 0;
};

void run_forward(const Model& model, std::span<const int> input, std::span<const int> gold, Trace& tr) {
  if (input.empty() || gold.empty()) throw Error("forward: sequences must be non-empty");
  const auto& L = model.layout;
  const auto& th = model.theta;
  const int H = model.hidden;
  const auto emb = cmat(th, L, kEmb);
  const GruW ef = gru_w(th, L, kEncFWz);
  const GruW eb = gru_w(th, L, kEncBWz);
  const GruW dec = gru_w(th, L, kDecWz);
  const auto w_init = cmat(th, L, kInitW);
  const auto b_init = cvec(th, L, kInitB);
  const auto w_att = cmat(th, L, kAttW);
  const auto w_out = cmat(th, L, kOutW);
  const auto b_out = cvec(th, L, kOutB);
  const std::size_t n = input.size();

  tr.enc_f.assign(n, {});
  tr.enc_b.assign(n, {});
  VectorXd h = VectorXd::Zero(H);
  for (std::size_t t = 0; t < n; ++t) {
    gru_step(ef, emb.row(input[t]).transpose(), h, tr.enc_f[t]);
    h = tr.enc_f[t].h;
  }
  h.setZero();
  for (std::size_t t = n; t-- > 0;) {
    gru_step(eb, emb.row(input[t]).transpose(), h, tr.enc_b[t]);
    h = tr.enc_b[t].h;
  }
  tr.enc_states.resize(2 * H, static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    tr.enc_states.col(static_cast<Eigen::Index>(t)).head(H) = tr.enc_f[t].h;
    tr.enc_states.col(static_cast<Eigen::Index>(t)).tail(H) = tr.enc_b[t].h;
  }
  tr.att_proj.noalias() = w_att * tr.enc_states;

  tr.init_in.resize(2 * H);
  tr.init_in.head(H) = tr.enc_f[n - 1].h;
  tr.init_in.tail(H) = tr.enc_b[0].h;
  tr.s0 = (w_init * tr.init_in + b_init).array().tanh();

  tr.steps.assign(gold.size(), {});
  VectorXd s = tr.s0;
  VectorXd ctx = VectorXd::Zero(2 * H);
  double loss = 0;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    StepCache& sc = tr.steps[t];
    sc.prev_id = t == 0 ? Vocabulary::kBos : gold[t - 1];
    VectorXd x(model.embed + 2 * H);
    x.head(model.embed) = emb.row(sc.prev_id).transpose();
    x.tail(2 * H) = ctx;
    gru_step(dec, std::move(x), s, sc.gru);
    s = sc.gru.h;

    sc.alpha = softmax(tr.att_proj.transpose() * s);
    sc.ctx.noalias() = tr.enc_states * sc.alpha;
    ctx = sc.ctx;

    sc.sc.resize(3 * H);
    sc.sc.head(H) = s;
    sc.sc.tail(2 * H) = sc.ctx;
    sc.pvocab = softmax(w_out * sc.sc + b_out);

    if (model.kind == ModelKind::PtrGen) {
      const auto w_gate = cvec(th, L, kGateW);
      const double b_gate = th[L.spec(kGateB).offset];
      sc.gate_in.resize(3 * H + model.embed);
      sc.gate_in.head(3 * H) = sc.sc;
      sc.gate_in.tail(model.embed) = emb.row(sc.prev_id).transpose();
      sc.gate = 1.0 / (1.0 + std::exp(-(w_gate.dot(sc.gate_in) + b_gate)));
      sc.pfinal = pointer_mix(sc.gate, sc.pvocab, sc.alpha, input, model.vocab.size());
    } else {
      sc.pfinal = sc.pvocab;
    }
    loss -= std::log(sc.pfinal[gold[t]]);
  }
  tr.loss = loss / static_cast<double>(gold.size());
}

// Accumulates d(scale * sample_loss)/d(theta) into grad.
void run_backward(const Model& model, std::span<const int> input, std::span<const int> gold, const Trace& tr,
                  double scale, VectorXd& grad) {
  const auto& L = model.layout;
  const auto& th = model.theta;
  const int H = model.hidden, E = model.embed;
  const std::size_t n = input.size();
  const GruW ef = gru_w(th, L, kEncFWz);
  const GruW eb = gru_w(th, L, kEncBWz);
  const GruW dec = gru_w(th, L, kDecWz);
  const auto w_init = cmat(th, L, kInitW);
  const auto w_att = cmat(th, L, kAttW);
  const auto w_out = cmat(th, L, kOutW);

  auto g_emb = mmat(grad, L, kEmb);
  GruG g_ef = gru_g(grad, L, kEncFWz);
  GruG g_eb = gru_g(grad, L, kEncBWz);
  GruG g_dec = gru_g(grad, L, kDecWz);
  auto g_w_init = mmat(grad, L, kInitW);
  auto g_b_init = mvec(grad, L, kInitB);
  auto g_w_att = mmat(grad, L, kAttW);
  auto g_w_out = mmat(grad, L, kOutW);
  auto g_b_out = mvec(grad, L, kOutB);

  MatrixXd d_enc = MatrixXd::Zero(2 * H, static_cast<Eigen::Index>(n));
  VectorXd ds_rec = VectorXd::Zero(H);   // into s_t from step t+1
  VectorXd dc_next = VectorXd::Zero(2 * H);  // into c_t from step t+1's input
  const double step_scale = scale / static_cast<double>(gold.size());

  for (std::size_t t = gold.size(); t-- > 0;) {
    const StepCache& sc = tr.steps[t];
    const int y = gold[t];
    VectorXd ds = ds_rec;
    VectorXd dc = dc_next;
    VectorXd dalpha = VectorXd::Zero(static_cast<Eigen::Index>(n));

    const double dpy = -step_scale / sc.pfinal[y];
    VectorXd dpv = VectorXd::Zero(model.vocab.size());
    if (model.kind == ModelKind::PtrGen) {
      const auto w_gate = cvec(th, L, kGateW);
      double copy_y = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (input[j] == y) copy_y += sc.alpha[static_cast<Eigen::Index>(j)];
      }
      const double dgate = dpy * (sc.pvocab[y] - copy_y);
      dpv[y] = sc.gate * dpy;
      for (std::size_t j = 0; j < n; ++j) {
        if (input[j] == y) dalpha[static_cast<Eigen::Index>(j)] += (1.0 - sc.gate) * dpy;
      }
      const double dgate_pre = dgate * sc.gate * (1.0 - sc.gate);
      mvec(grad, L, kGateW).noalias() += dgate_pre * sc.gate_in;
      grad[L.spec(kGateB).offset] += dgate_pre;
      ds += dgate_pre * w_gate.head(H);
      dc += dgate_pre * w_gate.segment(H, 2 * H);
      g_emb.row(sc.prev_id) += dgate_pre * w_gate.tail(E).transpose();
    } else {
      dpv[y] = dpy;
    }

    // softmax backward for the vocabulary distribution
    const double dot = dpv.dot(sc.pvocab);
    const VectorXd dlogits = (sc.pvocab.array() * (dpv.array() - dot)).matrix();
    g_w_out.noalias() += dlogits * sc.sc.transpose();
    g_b_out += dlogits;
    const VectorXd dsc = w_out.transpose() * dlogits;
    ds += dsc.head(H);
    dc += dsc.tail(2 * H);

    // context: c_t = enc_states * alpha
    dalpha.noalias() += tr.enc_states.transpose() * dc;
    d_enc.noalias() += dc * sc.alpha.transpose();

    // attention softmax + bilinear score backward
    const double adot = dalpha.dot(sc.alpha);
    const VectorXd dscores = (sc.alpha.array() * (dalpha.array() - adot)).matrix();
    ds.noalias() += tr.att_proj * dscores;
    g_w_att.noalias() += sc.gru.h * (tr.enc_states * dscores).transpose();
    d_enc.noalias() += (w_att.transpose() * sc.gru.h) * dscores.transpose();

    // decoder GRU
    VectorXd dx(E + 2 * H), ds_prev = VectorXd::Zero(H);
    gru_back(dec, sc.gru, ds, g_dec, dx, ds_prev);
    g_emb.row(sc.prev_id) += dx.head(E).transpose();
    dc_next = dx.tail(2 * H);
    ds_rec = ds_prev;
  }

  // initial decoder state
  const VectorXd ds0_pre = (ds_rec.array() * (1.0 - tr.s0.array().square())).matrix();
  g_w_init.noalias() += ds0_pre * tr.init_in.transpose();
  g_b_init += ds0_pre;
  const VectorXd dinit = w_init.transpose() * ds0_pre;
  d_enc.col(static_cast<Eigen::Index>(n) - 1).head(H) += dinit.head(H);
  d_enc.col(0).tail(H) += dinit.tail(H);

  // encoder, forward direction: states feed d_enc top halves
  VectorXd dh = VectorXd::Zero(H);
  VectorXd dx_enc(E);
  for (std::size_t t = n; t-- > 0;) {
    VectorXd dh_total = dh + d_enc.col(static_cast<Eigen::Index>(t)).head(H);
    dh.setZero();
    gru_back(ef, tr.enc_f[t], dh_total, g_ef, dx_enc, dh);
    g_emb.row(input[t]) += dx_enc.transpose();
  }
  // backward direction: computed from the end, so reverse-mode walks forward
  dh.setZero();
  for (std::size_t t = 0; t < n; ++t) {
    VectorXd dh_total = dh + d_enc.col(static_cast<Eigen::Index>(t)).tail(H);
    dh.setZero();
    gru_back(eb, tr.enc_b[t], dh_total, g_eb, dx_enc, dh);
    g_emb.row(input[t]) += dx_enc.transpose();
  }
}

}  // namespace

Eigen::VectorXd pointer_mix(double p_gen, const VectorXd& vocab_dist, const VectorXd& attention,
                            std::span<const int> input_ids, int vocab_size) {
  if (static_cast<std::size_t>(attention.size()) != input_ids.size())
    throw Error("pointer_mix: attention length does not match input length");
  if (vocab_dist.size() != vocab_size) throw Error("pointer_mix: vocabulary size mismatch");
  VectorXd out = p_gen * vocab_dist;
  for (std::size_t j = 0; j < input_ids.size(); ++j)
    out[input_ids[j]] += (1.0 - p_gen) * attention[static_cast<Eigen::Index>(j)];
  return out;
}

ForwardResult forward(const Model& model, std::span<const int> input, std::span<const int> gold) {
  Trace tr;
  run_forward(model, input, gold, tr);
  ForwardResult r;
  r.loss = tr.loss;
  r.step_dists.reserve(tr.steps.size());
  for (auto& s : tr.steps) r.step_dists.push_back(std::move(s.pfinal));
  return r;
}

Eigen::VectorXd gradients(const Model& model, std::span<const EncodedSample> batch, GradNorm norm,
                          double* loss_out) {
  if (batch.empty()) throw Error("gradients: empty batch");
  VectorXd grad = VectorXd::Zero(model.theta.size());
  const double scale = norm == GradNorm::Mean ? 1.0 / static_cast<double>(batch.size()) : 1.0;
  double loss_sum = 0;
  Trace tr;
  for (const auto& s : batch) {
    run_forward(model, s.input, s.gold, tr);
    loss_sum += tr.loss;
    run_backward(model, s.input, s.gold, tr, scale, grad);
  }
  for (int b = 0; b < kNumBlocks; ++b) {
    const auto& spec = model.layout.spec(static_cast<Block>(b));
    if (!spec.present) continue;
    if (!grad.segment(spec.offset, static_cast<Eigen::Index>(spec.rows) * spec.cols).allFinite())
      throw Error("non-finite gradient in block " + std::string(ParamLayout::block_name(static_cast<Block>(b))));
  }
  if (loss_out) *loss_out = norm == GradNorm::Mean ? loss_sum / static_cast<double>(batch.size()) : loss_sum;
  return grad;
}

Model init_model(ModelKind kind, int hidden, int embed, const Vocabulary& vocab, std::uint64_t seed) {
  if (hidden < 1 || embed < 1) throw Error("model dimensions must be positive");
  Model m;
  m.kind = kind;
  m.hidden = hidden;
  m.embed = embed;
  m.vocab = vocab;
  m.layout = ParamLayout::make(kind, vocab.size(), embed, hidden);
  m.theta = VectorXd::Zero(m.layout.total());
  for (int b = 0; b < kNumBlocks; ++b) {
    const auto& spec = m.layout.spec(static_cast<Block>(b));
    if (!spec.present || spec.cols == 1) continue;  // biases stay zero
    Rng rng(mix_seed(seed, 0x1e171000ULL + static_cast<std::uint64_t>(b)));
    const double limit = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
    auto seg = m.theta.segment(spec.offset, static_cast<Eigen::Index>(spec.rows) * spec.cols);
    for (Eigen::Index i = 0; i < seg.size(); ++i) seg[i] = rng.uniform(-limit, limit);
  }
  return m;
}

namespace {

double scheduler_factor(const TrainConfig& cfg, long step) {
  if (cfg.scheduler == "none") return 1.0;
  if (cfg.scheduler == "inv_sqrt") {
    const double w = std::max(1, cfg.warmup_steps);
    const double s = static_cast<double>(step);
    return std::min(s / w, std::sqrt(w / s));
  }
  throw Error("unknown scheduler '" + cfg.scheduler + "'");
}

}  // namespace

TrainLog train_with_provider(Model& model, const EpochProvider& provider, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw Error("train: epochs must be >= 0");
  if (cfg.lr <= 0) throw Error("train: learning rate must be positive");
  if (cfg.batch_size < 1) throw Error("train: batch size must be >= 1");
  const bool adam = cfg.optimizer == "adam";
  if (!adam && cfg.optimizer != "adadelta") throw Error("unknown optimizer '" + cfg.optimizer + "'");

  const Eigen::Index np = model.theta.size();
  VectorXd m1 = VectorXd::Zero(np), m2 = VectorXd::Zero(np);  // adam moments / adadelta accumulators
  long step = 0;
  TrainLog log;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<EncodedSample> data = provider(epoch);
    if (data.empty()) throw Error("train: provider returned an empty dataset");
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(cfg.seed, 0xe70c0000ULL + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double loss_sum = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      std::vector<EncodedSample> batch;
      batch.reserve(end - at);
      for (std::size_t i = at; i < end; ++i) batch.push_back(data[order[i]]);
      double batch_loss = 0;
      VectorXd grad = gradients(model, batch, GradNorm::Mean, &batch_loss);
      loss_sum += batch_loss * static_cast<double>(batch.size());

      ++step;
      const double lr = cfg.lr * scheduler_factor(cfg, step);
      if (adam) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m1 = b1 * m1 + (1.0 - b1) * grad;
        m2 = (b2 * m2.array() + (1.0 - b2) * grad.array().square()).matrix();
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        model.theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
      } else {
        constexpr double rho = 0.95, eps = 1e-6;
        m1 = (rho * m1.array() + (1.0 - rho) * grad.array().square()).matrix();
        const Eigen::ArrayXd delta =
            -((m2.array() + eps).sqrt() / (m1.array() + eps).sqrt()) * grad.array();
        m2 = (rho * m2.array() + (1.0 - rho) * delta.square()).matrix();
        model.theta.array() += lr * delta;
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) throw Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
    log.epoch_loss.push_back(epoch_loss);
  }
  return log;
}

TrainLog train(Model& model, const std::vector<EncodedSample>& data, const TrainConfig& cfg) {
  if (data.empty()) throw Error("train: empty dataset");
  return train_with_provider(model, [&data](int) { return data; }, cfg);
}

DecodeResult decode_greedy(const Model& model, std::span<const int> input, int max_len) {
  if (input.empty()) throw Error("decode: empty input");
  const auto& L = model.layout;
  const auto& th = model.theta;
  const int H = model.hidden, E = model.embed;
  const auto emb = cmat(th, L, kEmb);
  const GruW dec = gru_w(th, L, kDecWz);
  const auto w_out = cmat(th, L, kOutW);
  const auto b_out = cvec(th, L, kOutB);

  // encoder (no caches needed)
  const GruW ef = gru_w(th, L, kEncFWz);
  const GruW eb = gru_w(th, L, kEncBWz);
  const std::size_t n = input.size();
  MatrixXd enc(2 * H, static_cast<Eigen::Index>(n));
  GruCache c;
  VectorXd h = VectorXd::Zero(H);
  for (std::size_t t = 0; t < n; ++t) {
    gru_step(ef, emb.row(input[t]).transpose(), h, c);
    h = c.h;
    enc.col(static_cast<Eigen::Index>(t)).head(H) = h;
  }
  h.setZero();
  for (std::size_t t = n; t-- > 0;) {
    gru_step(eb, emb.row(input[t]).transpose(), h, c);
    h = c.h;
    enc.col(static_cast<Eigen::Index>(t)).tail(H) = h;
  }
  const MatrixXd att_proj = cmat(th, L, kAttW) * enc;

  VectorXd init_in(2 * H);
  init_in.head(H) = enc.col(static_cast<Eigen::Index>(n) - 1).head(H);
  init_in.tail(H) = enc.col(0).tail(H);
  VectorXd s = (cmat(th, L, kInitW) * init_in + cvec(th, L, kInitB)).array().tanh();
  VectorXd ctx = VectorXd::Zero(2 * H);

  std::vector<int> out_ids;
  int prev = Vocabulary::kBos;
  bool truncated = true;
  for (int i = 0; i < max_len; ++i) {
    VectorXd x(E + 2 * H);
    x.head(E) = emb.row(prev).transpose();
    x.tail(2 * H) = ctx;
    gru_step(dec, std::move(x), s, c);
    s = c.h;
    const VectorXd alpha = softmax(att_proj.transpose() * s);
    ctx.noalias() = enc * alpha;
    VectorXd sc(3 * H);
    sc.head(H) = s;
    sc.tail(2 * H) = ctx;
    VectorXd p = softmax(w_out * sc + b_out);
    if (model.kind == ModelKind::PtrGen) {
      const auto w_gate = cvec(th, L, kGateW);
      VectorXd gate_in(3 * H + E);
      gate_in.head(3 * H) = sc;
      gate_in.tail(E) = emb.row(prev).transpose();
      const double gate = 1.0 / (1.0 + std::exp(-(w_gate.dot(gate_in) + th[L.spec(kGateB).offset])));
      p = pointer_mix(gate, p, alpha, input, model.vocab.size());
    }
    // argmax; ties resolve to the lowest symbol index
    int best = 0;
    for (int v = 1; v < model.vocab.size(); ++v) {
      if (p[v] > p[best]) best = v;
    }
    if (best == Vocabulary::kEos) {
      truncated = false;
      break;
    }
    out_ids.push_back(best);
    prev = best;
  }
  return {model.vocab.render(out_ids), truncated};
}

std::uint64_t param_hash(const Model& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : model.vocab.symbols()) mix(s.text.data(), s.text.size());
  mix(model.theta.data(), static_cast<std::size_t>(model.theta.size()) * sizeof(double));
  return h;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& metadata) {
  json j;
  j["format"] = "morphnoise-checkpoint-v1";
  j["kind"] = std::string(model_kind_name(model.kind));
  j["hidden"] = model.hidden;
  j["embed"] = model.embed;
  j["param_count"] = model.param_count();
  json vocab = json::array();
  for (const auto& s : model.vocab.symbols()) {
    const char* kind = s.kind == SymbolKind::Special ? "special" : (s.kind == SymbolKind::Tag ? "tag" : "char");
    vocab.push_back(json{{"kind", kind}, {"text", s.text}});
  }
  j["vocab"] = std::move(vocab);
  j["meta"] = metadata;
  std::vector<double> theta(model.theta.data(), model.theta.data() + model.theta.size());
  j["theta"] = std::move(theta);
  write_file(path, j.dump() + "\n");
}

Model load_checkpoint(const std::filesystem::path& path, std::map<std::string, std::string>* metadata) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("bad checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "morphnoise-checkpoint-v1") throw Error("unrecognized checkpoint format");
  std::vector<Symbol> symbols;
  for (const auto& s : j.at("vocab")) {
    const std::string kind = s.at("kind").get<std::string>();
    SymbolKind k = kind == "special" ? SymbolKind::Special : (kind == "tag" ? SymbolKind::Tag : SymbolKind::Char);
    symbols.push_back({k, s.at("text").get<std::string>()});
  }
  Model m;
  m.kind = model_kind_from_name(j.at("kind").get<std::string>());
  m.hidden = j.at("hidden").get<int>();
  m.embed = j.at("embed").get<int>();
  m.vocab = Vocabulary::from_symbols(std::move(symbols));
  m.layout = ParamLayout::make(m.kind, m.vocab.size(), m.embed, m.hidden);
  const auto& theta = j.at("theta");
  if (static_cast<std::ptrdiff_t>(theta.size()) != m.layout.total())
    throw Error("checkpoint parameter count mismatch");
  m.theta.resize(m.layout.total());
  for (Eigen::Index i = 0; i < m.theta.size(); ++i)
    m.theta[i] = theta[static_cast<std::size_t>(i)].get<double>();
  if (metadata) {
    metadata->clear();
    const json meta = j.value("meta", json::object());
    for (const auto& [k, v] : meta.items()) (*metadata)[k] = v.get<std::string>();
  }
  return m;
}

std::string loss_log_csv(const TrainLog& log) {
  std::string out = "epoch,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < log.epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, log.epoch_loss[i]);
    out += buf;
  }
  return out;
}

}  // namespace morphnoise
