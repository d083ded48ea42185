#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quesim/augment.hpp"
#include "quesim/gru.hpp"

namespace quesim {

struct AdamState {
  Vec m, v;              // first/second moment, flattened over all tensors
  std::uint64_t t = 0;   // step counter
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_model(SiameseModel& model, double lr);
};

/// One Adam update. `params` and `grads` must come from tensors() of a model
/// and its gradient accumulator (same order, same shapes).
void adam_step(std::vector<TensorRef>& params, std::vector<TensorRef>& grads,
               AdamState& state);

/// Scales all gradients so the global L2 norm is at most `max_norm`.
/// Returns the pre-clip norm.
double clip_global_norm(std::vector<TensorRef>& grads, double max_norm);

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  double keep_prob = 0.8;
  double clip_norm = 5.0;
  double dev_fraction = 0.1;
};

struct TrainingExample {
  IdSeq ids1, ids2;
  int label = 0;
};

/// Tokenizes and encodes pairs against the model vocabulary.
std::vector<TrainingExample> encode_pairs(const std::vector<QuestionPair>& pairs,
                                          const Vocabulary& vocab,
                                          std::size_t max_len);

struct EpochStats {
  double train_loss = 0.0;
  double dev_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;  // epoch whose model was kept
};

/// Seeded mini-batch Adam training; splits off cfg.dev_fraction for dev
/// scoring and leaves the best-dev parameters in `model`. Deterministic for
/// a given seed.
TrainResult train(SiameseModel& model, const std::vector<TrainingExample>& data,
                  const TrainConfig& cfg);

/// Mean BCE of the frozen model over a set of examples.
double evaluate_loss(const SiameseModel& model,
                     const std::vector<TrainingExample>& data);

}  // namespace quesim
