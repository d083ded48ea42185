#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quesim/embedding.hpp"
#include "quesim/matrix.hpp"
#include "quesim/rng.hpp"
#include "quesim/types.hpp"

namespace quesim {

struct ModelConfig {
  std::size_t embed_dim = 50;
  std::size_t max_len = 40;
  // Per-direction hidden sizes of the stacked bidirectional layers.
  std::vector<std::size_t> hidden_sizes = {250, 500, 250};
  // Hidden layer widths of the feed-forward head (the 1-unit sigmoid output
  // layer is implicit).
  std::vector<std::size_t> head_hidden = {1000, 1024};
  double keep_prob = 0.8;  // inverted dropout on the first head layer
  // true: head input is concat(g1, g2, |g1-g2|, g1*g2); false: concat(g1, g2)
  bool join_diff_prod = true;
  bool freeze_embeddings = false;

  // "GRU_a_b": a stacked GRU layers, b fully-connected hidden layers.
  std::string nomenclature() const;
};

/// Config for the GRU_a_b family (a in 1..3 selecting from 250/500/250,
/// b in 1..2 selecting from 1000/1024).
ModelConfig gru_config(std::size_t stacked_layers, std::size_t fc_layers);

struct GruCellParams {
  Matrix Wz, Wr, Wh;  // d_h x d_in
  Matrix Uz, Ur, Uh;  // d_h x d_h
  Vec bz, br, bh;     // d_h
};

struct BiGruLayer {
  GruCellParams fwd, bwd;
};

struct AffineLayer {
  Matrix W;
  Vec b;
};

struct TensorRef {
  std::string name;
  std::span<double> data;
  std::size_t rows = 0, cols = 0;
};

// The single shared parameter set of the Siamese network: embedding matrix,
// stacked bidirectional GRU layers, feed-forward head. Both question arms
// read the same instance.
struct SiameseModel {
  ModelConfig cfg;
  Vocabulary vocab;
  Matrix embedding;                // n_w x embed_dim; row 0 (PAD) frozen at 0
  std::vector<BiGruLayer> layers;
  std::vector<AffineLayer> head;   // cfg.head_hidden layers plus 1-unit output

  static SiameseModel init(const ModelConfig& cfg, const EmbeddingStore& store,
                           std::uint64_t seed);

  // Same shapes, all values zero. Used as a gradient accumulator.
  SiameseModel zeros_like() const;

  // Every trainable tensor in a fixed order (embedding first). The order is
  // the pairing contract between a model and its gradient accumulator.
  std::vector<TensorRef> tensors();
  std::size_t param_count() const;

  std::size_t sentence_vec_dim() const { return 2 * cfg.hidden_sizes.back(); }
  std::size_t joint_dim() const {
    return (cfg.join_diff_prod ? 4 : 2) * sentence_vec_dim();
  }
};

// Per-timestep intermediates retained for backpropagation.
struct GruStep {
  Vec z, r, hh, h;
};

struct EncodeCache {
  IdSeq ids;
  std::vector<std::vector<Vec>> inputs;   // [layer][t], input vector at t
  std::vector<std::vector<GruStep>> fwd;  // [layer][t], forward sweep
  std::vector<std::vector<GruStep>> bwd;  // [layer][t], backward sweep
  Vec g;  // concat(final forward state, final backward state) of top layer
};

struct PairCache {
  EncodeCache enc1, enc2;
  Vec joint;
  std::vector<Vec> head_pre;  // preactivation per head layer (incl. output)
  std::vector<Vec> head_act;  // post-activation / post-dropout per hidden layer
  Vec dropout_mask;           // kept/dropped per unit of first hidden layer
  double keep_prob = 1.0;     // as applied in this pass
  double logit = 0.0;
  double y_hat = 0.5;
};

/// One GRU step: z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
/// hh = tanh(Wh x + Uh (r.h) + bh), h' = (1-z).h + z.hh.
void gru_cell_forward(const GruCellParams& p, std::span<const double> x,
                      std::span<const double> h_prev, GruStep& out);

/// Runs the stacked bidirectional encoder over a fixed-length id sequence.
EncodeCache encode_question(const SiameseModel& m, const IdSeq& ids);

/// Full Siamese forward pass. `rng` is required when train_mode is on and
/// keep_prob < 1 (dropout mask source). Throws NumericError on non-finite
/// activations.
PairCache forward_pair(const SiameseModel& m, const IdSeq& ids1,
                       const IdSeq& ids2, bool train_mode, Rng* rng);

/// Binary cross entropy; y_hat clipped to [1e-12, 1-1e-12].
double bce_loss(double y_hat, int y);

/// Accumulates exact dLoss/dTheta for one example into `grads`
/// (a zeros_like-shaped model). PAD embedding gradients stay zero.
void accumulate_gradients(const SiameseModel& m, const PairCache& cache, int y,
                          SiameseModel& grads);

/// In-place inverted dropout: zero each unit with prob (1-keep_prob), scale
/// survivors by 1/keep_prob. mask_out records survivors as 1.0/0.0.
void apply_inverted_dropout(Vec& a, double keep_prob, Rng& rng, Vec& mask_out);

}  // namespace quesim
