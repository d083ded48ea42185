#include "quesim/gru.hpp"

#include <algorithm>
#include <cmath>

#include "quesim/errors.hpp"

namespace quesim {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.flat()) v = rng.uniform(-bound, bound);
  return m;
}

GruCellParams init_cell(std::size_t d_in, std::size_t d_h, Rng& rng) {
  GruCellParams p;
  p.Wz = glorot(d_h, d_in, rng);
  p.Wr = glorot(d_h, d_in, rng);
  p.Wh = glorot(d_h, d_in, rng);
  p.Uz = glorot(d_h, d_h, rng);
  p.Ur = glorot(d_h, d_h, rng);
  p.Uh = glorot(d_h, d_h, rng);
  p.bz.assign(d_h, 0.0);
  p.br.assign(d_h, 0.0);
  p.bh.assign(d_h, 0.0);
  return p;
}

GruCellParams zero_cell(const GruCellParams& like) {
  GruCellParams p;
  p.Wz = Matrix(like.Wz.rows(), like.Wz.cols());
  p.Wr = Matrix(like.Wr.rows(), like.Wr.cols());
  p.Wh = Matrix(like.Wh.rows(), like.Wh.cols());
  p.Uz = Matrix(like.Uz.rows(), like.Uz.cols());
  p.Ur = Matrix(like.Ur.rows(), like.Ur.cols());
  p.Uh = Matrix(like.Uh.rows(), like.Uh.cols());
  p.bz.assign(like.bz.size(), 0.0);
  p.br.assign(like.br.size(), 0.0);
  p.bh.assign(like.bh.size(), 0.0);
  return p;
}

void cell_tensors(GruCellParams& p, const std::string& prefix,
                  std::vector<TensorRef>& out) {
  auto mat = [&](const char* n, Matrix& m) {
    out.push_back({prefix + n, m.flat(), m.rows(), m.cols()});
  };
  auto vec = [&](const char* n, Vec& v) {
    out.push_back({prefix + n, {v.data(), v.size()}, v.size(), 1});
  };
  mat("Wz", p.Wz); mat("Wr", p.Wr); mat("Wh", p.Wh);
  mat("Uz", p.Uz); mat("Ur", p.Ur); mat("Uh", p.Uh);
  vec("bz", p.bz); vec("br", p.br); vec("bh", p.bh);
}

}  // namespace

std::string ModelConfig::nomenclature() const {
  return "GRU_" + std::to_string(hidden_sizes.size()) + "_" +
         std::to_string(head_hidden.size());
}

ModelConfig gru_config(std::size_t stacked_layers, std::size_t fc_layers) {
  if (stacked_layers < 1 || stacked_layers > 3 || fc_layers < 1 || fc_layers > 2)
    throw ConfigError("gru_config: supported variants are GRU_{1..3}_{1..2}");
  ModelConfig cfg;
  const std::vector<std::size_t> all_hidden = {250, 500, 250};
  const std::vector<std::size_t> all_head = {1000, 1024};
  cfg.hidden_sizes.assign(all_hidden.begin(), all_hidden.begin() + stacked_layers);
  cfg.head_hidden.assign(all_head.begin(), all_head.begin() + fc_layers);
  return cfg;
}

SiameseModel SiameseModel::init(const ModelConfig& cfg,
                                const EmbeddingStore& store,
                                std::uint64_t seed) {
  if (cfg.hidden_sizes.empty())
    throw ConfigError("model: need at least one GRU layer");
  if (cfg.head_hidden.empty())
    throw ConfigError("model: need at least one head hidden layer");
  if (cfg.keep_prob <= 0.0 || cfg.keep_prob > 1.0)
    throw ConfigError("model: keep_prob must be in (0, 1]");
  if (store.dim != cfg.embed_dim)
    throw ConfigError("model: embedding store dim " + std::to_string(store.dim) +
                      " != config embed_dim " + std::to_string(cfg.embed_dim));

  SiameseModel m;
  m.cfg = cfg;
  m.vocab = store.vocab;
  m.embedding = store.values;

  Rng rng(seed);
  std::size_t d_in = cfg.embed_dim;
  for (std::size_t d_h : cfg.hidden_sizes) {
    BiGruLayer layer;
    layer.fwd = init_cell(d_in, d_h, rng);
    layer.bwd = init_cell(d_in, d_h, rng);
    m.layers.push_back(std::move(layer));
    d_in = 2 * d_h;
  }

  std::size_t prev = m.joint_dim();
  for (std::size_t width : cfg.head_hidden) {
    AffineLayer l;
    l.W = glorot(width, prev, rng);
    l.b.assign(width, 0.0);
    m.head.push_back(std::move(l));
    prev = width;
  }
  AffineLayer out;
  out.W = glorot(1, prev, rng);
  out.b.assign(1, 0.0);
  m.head.push_back(std::move(out));
  return m;
}

SiameseModel SiameseModel::zeros_like() const {
  SiameseModel z;
  z.cfg = cfg;
  z.vocab = vocab;
  z.embedding = Matrix(embedding.rows(), embedding.cols());
  for (const auto& layer : layers)
    z.layers.push_back({zero_cell(layer.fwd), zero_cell(layer.bwd)});
  for (const auto& l : head) {
    AffineLayer zl;
    zl.W = Matrix(l.W.rows(), l.W.cols());
    zl.b.assign(l.b.size(), 0.0);
    z.head.push_back(std::move(zl));
  }
  return z;
}

std::vector<TensorRef> SiameseModel::tensors() {
  std::vector<TensorRef> out;
  out.push_back({"embedding", embedding.flat(), embedding.rows(), embedding.cols()});
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string base = "layer" + std::to_string(k) + ".";
    cell_tensors(layers[k].fwd, base + "fwd.", out);
    cell_tensors(layers[k].bwd, base + "bwd.", out);
  }
  for (std::size_t j = 0; j < head.size(); ++j) {
    const std::string base = "head" + std::to_string(j) + ".";
    out.push_back({base + "W", head[j].W.flat(), head[j].W.rows(), head[j].W.cols()});
    out.push_back({base + "b", {head[j].b.data(), head[j].b.size()},
                   head[j].b.size(), 1});
  }
  return out;
}

std::size_t SiameseModel::param_count() const {
  std::size_t n = 0;
  for (auto& t : const_cast<SiameseModel*>(this)->tensors()) n += t.data.size();
  return n;
}

void gru_cell_forward(const GruCellParams& p, std::span<const double> x,
                      std::span<const double> h_prev, GruStep& out) {
  const std::size_t d = p.bz.size();
  out.z = p.bz;
  out.r = p.br;
  matvec_add(p.Wz, x, out.z);
  matvec_add(p.Uz, h_prev, out.z);
  matvec_add(p.Wr, x, out.r);
  matvec_add(p.Ur, h_prev, out.r);
  for (std::size_t i = 0; i < d; ++i) {
    out.z[i] = sigmoid(out.z[i]);
    out.r[i] = sigmoid(out.r[i]);
  }
  out.hh = p.bh;
  matvec_add(p.Wh, x, out.hh);
  Vec rh(d);
  for (std::size_t i = 0; i < d; ++i) rh[i] = out.r[i] * h_prev[i];
  matvec_add(p.Uh, rh, out.hh);
  out.h.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.hh[i] = std::tanh(out.hh[i]);
    out.h[i] = (1.0 - out.z[i]) * h_prev[i] + out.z[i] * out.hh[i];
  }
}

EncodeCache encode_question(const SiameseModel& m, const IdSeq& ids) {
  if (ids.size() != m.cfg.max_len)
    throw ConfigError("encode_question: id sequence length " +
                      std::to_string(ids.size()) + " != max_len " +
                      std::to_string(m.cfg.max_len));
  const std::size_t L = ids.size();
  const std::size_t K = m.layers.size();

  EncodeCache c;
  c.ids = ids;
  c.inputs.resize(K);
  c.fwd.resize(K);
  c.bwd.resize(K);

  // layer 0 inputs: embedding rows (PAD -> zero vector)
  c.inputs[0].resize(L);
  for (std::size_t t = 0; t < L; ++t) {
    const auto id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= m.embedding.rows())
      throw DataError("encode_question: id " + std::to_string(id) +
                      " out of vocabulary range");
    const auto r = m.embedding.row(static_cast<std::size_t>(id));
    c.inputs[0][t].assign(r.begin(), r.end());
  }

  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t d = m.cfg.hidden_sizes[k];
    c.fwd[k].resize(L);
    c.bwd[k].resize(L);
    const Vec zero(d, 0.0);
    // forward sweep t = 0..L-1
    for (std::size_t t = 0; t < L; ++t) {
      const Vec& h_prev = t == 0 ? zero : c.fwd[k][t - 1].h;
      gru_cell_forward(m.layers[k].fwd, c.inputs[k][t], h_prev, c.fwd[k][t]);
    }
    // backward sweep t = L-1..0
    for (std::size_t tt = L; tt-- > 0;) {
      const Vec& h_prev = tt + 1 == L ? zero : c.bwd[k][tt + 1].h;
      gru_cell_forward(m.layers[k].bwd, c.inputs[k][tt], h_prev, c.bwd[k][tt]);
    }
    if (k + 1 < K) {
      c.inputs[k + 1].resize(L);
      for (std::size_t t = 0; t < L; ++t) {
        Vec& v = c.inputs[k + 1][t];
        v.resize(2 * d);
        std::copy(c.fwd[k][t].h.begin(), c.fwd[k][t].h.end(), v.begin());
        std::copy(c.bwd[k][t].h.begin(), c.bwd[k][t].h.end(), v.begin() + d);
      }
    }
  }

  const std::size_t d_top = m.cfg.hidden_sizes.back();
  c.g.resize(2 * d_top);
  std::copy(c.fwd[K - 1][L - 1].h.begin(), c.fwd[K - 1][L - 1].h.end(),
            c.g.begin());
  std::copy(c.bwd[K - 1][0].h.begin(), c.bwd[K - 1][0].h.end(),
            c.g.begin() + d_top);
  return c;
}

void apply_inverted_dropout(Vec& a, double keep_prob, Rng& rng, Vec& mask_out) {
  mask_out.assign(a.size(), 1.0);
  if (keep_prob >= 1.0) return;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (rng.uniform() < keep_prob) {
      a[i] /= keep_prob;
    } else {
      a[i] = 0.0;
      mask_out[i] = 0.0;
    }
  }
}

PairCache forward_pair(const SiameseModel& m, const IdSeq& ids1,
                       const IdSeq& ids2, bool train_mode, Rng* rng) {
  PairCache c;
  c.enc1 = encode_question(m, ids1);
  c.enc2 = encode_question(m, ids2);
  const Vec& g1 = c.enc1.g;
  const Vec& g2 = c.enc2.g;
  const std::size_t G = g1.size();

  c.joint.resize(m.joint_dim());
  std::copy(g1.begin(), g1.end(), c.joint.begin());
  std::copy(g2.begin(), g2.end(), c.joint.begin() + G);
  if (m.cfg.join_diff_prod) {
    for (std::size_t i = 0; i < G; ++i) {
      c.joint[2 * G + i] = std::abs(g1[i] - g2[i]);
      c.joint[3 * G + i] = g1[i] * g2[i];
    }
  }

  const std::size_t hidden_layers = m.head.size() - 1;
  c.head_pre.resize(m.head.size());
  c.head_act.resize(hidden_layers);
  const Vec* prev = &c.joint;
  for (std::size_t j = 0; j < hidden_layers; ++j) {
    const auto& l = m.head[j];
    c.head_pre[j] = l.b;
    matvec_add(l.W, *prev, c.head_pre[j]);
    c.head_act[j].resize(c.head_pre[j].size());
    for (std::size_t i = 0; i < c.head_pre[j].size(); ++i)
      c.head_act[j][i] = std::max(0.0, c.head_pre[j][i]);
    if (j == 0 && train_mode && m.cfg.keep_prob < 1.0) {
      if (!rng)
        throw ConfigError("forward_pair: train_mode dropout needs an rng");
      c.keep_prob = m.cfg.keep_prob;
      apply_inverted_dropout(c.head_act[j], c.keep_prob, *rng, c.dropout_mask);
    }
    prev = &c.head_act[j];
  }

  const auto& out = m.head.back();
  c.head_pre.back() = out.b;
  matvec_add(out.W, *prev, c.head_pre.back());
  c.logit = c.head_pre.back()[0];
  c.y_hat = sigmoid(c.logit);
  if (!std::isfinite(c.y_hat))
    throw NumericError("forward_pair: non-finite output (exploding values)");
  return c;
}

double bce_loss(double y_hat, int y) {
  const double p = std::clamp(y_hat, 1e-12, 1.0 - 1e-12);
  return -(y * std::log(p) + (1 - y) * std::log(1.0 - p));
}

namespace {

// One direction of one layer, reverse-mode. `steps` are indexed by time t;
// `forward_dir` tells which temporal order the sweep ran in.
void gru_dir_backward(const GruCellParams& p, const std::vector<Vec>& xs,
                      const std::vector<GruStep>& steps, bool forward_dir,
                      const std::vector<Vec>& d_h_out, GruCellParams& gp,
                      std::vector<Vec>& dxs) {
  const std::size_t L = steps.size();
  const std::size_t d = p.bz.size();
  const Vec zero(d, 0.0);
  Vec dh_carry(d, 0.0);

  Vec dh(d), dz(d), dhh(d), dah(d), tmp(d), dr(d), dar(d), daz(d), rh(d);
  for (std::size_t step = 0; step < L; ++step) {
    // iterate opposite to the sweep's temporal order
    const std::size_t t = forward_dir ? L - 1 - step : step;
    const Vec& h_prev =
        forward_dir ? (t == 0 ? zero : steps[t - 1].h)
                    : (t + 1 == L ? zero : steps[t + 1].h);
    const GruStep& s = steps[t];

    for (std::size_t i = 0; i < d; ++i)
      dh[i] = d_h_out[t][i] + dh_carry[i];

    for (std::size_t i = 0; i < d; ++i) {
      dz[i] = dh[i] * (s.hh[i] - h_prev[i]);
      dhh[i] = dh[i] * s.z[i];
      dh_carry[i] = dh[i] * (1.0 - s.z[i]);  // becomes dh_prev
      dah[i] = dhh[i] * (1.0 - s.hh[i] * s.hh[i]);
    }
    std::fill(tmp.begin(), tmp.end(), 0.0);
    matvec_t_add(p.Uh, dah, tmp);  // d(r . h_prev)
    for (std::size_t i = 0; i < d; ++i) {
      dr[i] = tmp[i] * h_prev[i];
      dh_carry[i] += tmp[i] * s.r[i];
      dar[i] = dr[i] * s.r[i] * (1.0 - s.r[i]);
      daz[i] = dz[i] * s.z[i] * (1.0 - s.z[i]);
      rh[i] = s.r[i] * h_prev[i];
    }

    outer_add(gp.Wz, daz, xs[t]);
    outer_add(gp.Wr, dar, xs[t]);
    outer_add(gp.Wh, dah, xs[t]);
    outer_add(gp.Uz, daz, h_prev);
    outer_add(gp.Ur, dar, h_prev);
    outer_add(gp.Uh, dah, rh);
    for (std::size_t i = 0; i < d; ++i) {
      gp.bz[i] += daz[i];
      gp.br[i] += dar[i];
      gp.bh[i] += dah[i];
    }

    matvec_t_add(p.Wz, daz, dxs[t]);
    matvec_t_add(p.Wr, dar, dxs[t]);
    matvec_t_add(p.Wh, dah, dxs[t]);
    matvec_t_add(p.Uz, daz, dh_carry);
    matvec_t_add(p.Ur, dar, dh_carry);
  }
}

void encode_backward(const SiameseModel& m, const EncodeCache& c,
                     const Vec& dg, SiameseModel& grads) {
  const std::size_t K = m.layers.size();
  const std::size_t L = m.cfg.max_len;
  const std::size_t d_top = m.cfg.hidden_sizes.back();

  // d_out[t]: gradient wrt layer k's per-step output concat(h_fwd, h_bwd)
  std::vector<Vec> d_out(L);
  for (std::size_t t = 0; t < L; ++t)
    d_out[t].assign(2 * d_top, 0.0);
  for (std::size_t i = 0; i < d_top; ++i) {
    d_out[L - 1][i] += dg[i];           // final forward state
    d_out[0][d_top + i] += dg[d_top + i];  // final backward state
  }

  for (std::size_t k = K; k-- > 0;) {
    const std::size_t d = m.cfg.hidden_sizes[k];
    const std::size_t d_in = k == 0 ? m.cfg.embed_dim
                                    : 2 * m.cfg.hidden_sizes[k - 1];
    std::vector<Vec> dxs(L, Vec(d_in, 0.0));
    std::vector<Vec> d_fwd(L), d_bwd(L);
    for (std::size_t t = 0; t < L; ++t) {
      d_fwd[t].assign(d_out[t].begin(), d_out[t].begin() + d);
      d_bwd[t].assign(d_out[t].begin() + d, d_out[t].end());
    }
    gru_dir_backward(m.layers[k].fwd, c.inputs[k], c.fwd[k], true, d_fwd,
                     grads.layers[k].fwd, dxs);
    gru_dir_backward(m.layers[k].bwd, c.inputs[k], c.bwd[k], false, d_bwd,
                     grads.layers[k].bwd, dxs);
    if (k > 0) {
      d_out = std::move(dxs);
    } else if (!m.cfg.freeze_embeddings) {
      for (std::size_t t = 0; t < L; ++t) {
        const auto id = c.ids[t];
        if (id == kPadId) continue;  // PAD row stays frozen
        auto row = grads.embedding.row(static_cast<std::size_t>(id));
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += dxs[t][j];
      }
    }
  }
}

}  // namespace

void accumulate_gradients(const SiameseModel& m, const PairCache& c, int y,
                          SiameseModel& grads) {
  const std::size_t hidden_layers = m.head.size() - 1;
  const std::size_t G = m.sentence_vec_dim();

  // output layer: dL/dlogit = y_hat - y for sigmoid + BCE
  Vec d{c.y_hat - static_cast<double>(y)};
  const Vec* below = hidden_layers > 0 ? &c.head_act[hidden_layers - 1] : &c.joint;
  outer_add(grads.head.back().W, d, *below);
  grads.head.back().b[0] += d[0];
  Vec da(below->size(), 0.0);
  matvec_t_add(m.head.back().W, d, da);

  for (std::size_t j = hidden_layers; j-- > 0;) {
    // undo dropout scaling, then gate by ReLU
    if (j == 0 && !c.dropout_mask.empty()) {
      for (std::size_t i = 0; i < da.size(); ++i)
        da[i] *= c.dropout_mask[i] / c.keep_prob;
    }
    for (std::size_t i = 0; i < da.size(); ++i)
      if (c.head_pre[j][i] <= 0.0) da[i] = 0.0;

    const Vec* input = j == 0 ? &c.joint : &c.head_act[j - 1];
    outer_add(grads.head[j].W, da, *input);
    for (std::size_t i = 0; i < da.size(); ++i) grads.head[j].b[i] += da[i];
    Vec da_prev(input->size(), 0.0);
    matvec_t_add(m.head[j].W, da, da_prev);
    da = std::move(da_prev);
  }

  // split joint gradient into the two sentence vectors
  const Vec& g1 = c.enc1.g;
  const Vec& g2 = c.enc2.g;
  Vec dg1(G, 0.0), dg2(G, 0.0);
  for (std::size_t i = 0; i < G; ++i) {
    dg1[i] = da[i];
    dg2[i] = da[G + i];
  }
  if (m.cfg.join_diff_prod) {
    for (std::size_t i = 0; i < G; ++i) {
      const double diff = g1[i] - g2[i];
      const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      dg1[i] += da[2 * G + i] * sgn + da[3 * G + i] * g2[i];
      dg2[i] += -da[2 * G + i] * sgn + da[3 * G + i] * g1[i];
    }
  }

  encode_backward(m, c.enc1, dg1, grads);
  encode_backward(m, c.enc2, dg2, grads);
}

}  // namespace quesim
