#include "quesim/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quesim/errors.hpp"
#include "quesim/text_prep.hpp"

namespace quesim {

AdamState AdamState::for_model(SiameseModel& model, double lr) {
  AdamState s;
  s.lr = lr;
  std::size_t total = 0;
  for (auto& t : model.tensors()) total += t.data.size();
  s.m.assign(total, 0.0);
  s.v.assign(total, 0.0);
  return s;
}

void adam_step(std::vector<TensorRef>& params, std::vector<TensorRef>& grads,
               AdamState& state) {
  if (params.size() != grads.size())
    throw ConfigError("adam_step: tensor list mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  std::size_t off = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data;
    auto g = grads[k].data;
    if (p.size() != g.size())
      throw ConfigError("adam_step: shape mismatch at " + params[k].name);
    for (std::size_t i = 0; i < p.size(); ++i, ++off) {
      state.m[off] = state.beta1 * state.m[off] + (1.0 - state.beta1) * g[i];
      state.v[off] = state.beta2 * state.v[off] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = state.m[off] / bc1;
      const double vhat = state.v[off] / bc2;
      p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double clip_global_norm(std::vector<TensorRef>& grads, double max_norm) {
  double sq = 0.0;
  for (auto& t : grads)
    for (double g : t.data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& t : grads)
      for (double& g : t.data) g *= scale;
  }
  return norm;
}

std::vector<TrainingExample> encode_pairs(const std::vector<QuestionPair>& pairs,
                                          const Vocabulary& vocab,
                                          std::size_t max_len) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    TrainingExample e;
    e.ids1 = encode(tokenize(p.q1_text), vocab, max_len);
    e.ids2 = encode(tokenize(p.q2_text), vocab, max_len);
    e.label = p.label.value_or(0);
    out.push_back(std::move(e));
  }
  return out;
}

double evaluate_loss(const SiameseModel& model,
                     const std::vector<TrainingExample>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : data) {
    const auto c = forward_pair(model, e.ids1, e.ids2, false, nullptr);
    total += bce_loss(c.y_hat, e.label);
  }
  return total / static_cast<double>(data.size());
}

namespace {

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.below(i)]);
}

void zero_all(SiameseModel& grads) {
  for (auto& t : grads.tensors()) std::fill(t.data.begin(), t.data.end(), 0.0);
}

}  // namespace

TrainResult train(SiameseModel& model, const std::vector<TrainingExample>& data,
                  const TrainConfig& cfg) {
  if (data.empty()) throw DataError("train: empty dataset");
  if (cfg.batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (cfg.dev_fraction < 0.0 || cfg.dev_fraction >= 1.0)
    throw ConfigError("train: dev_fraction must be in [0, 1)");

  model.cfg.keep_prob = cfg.keep_prob;

  Rng split_rng(splitmix64_once(cfg.seed, 0x5e11));
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  shuffle(idx, split_rng);
  const std::size_t dev_n =
      static_cast<std::size_t>(cfg.dev_fraction * static_cast<double>(data.size()));
  std::vector<TrainingExample> dev, tr;
  for (std::size_t i = 0; i < idx.size(); ++i)
    (i < dev_n ? dev : tr).push_back(data[idx[i]]);
  if (tr.empty()) throw DataError("train: no training examples after dev split");

  Rng rng(splitmix64_once(cfg.seed, 0x7247));
  auto grads = model.zeros_like();
  auto params_refs = model.tensors();
  auto grads_refs = grads.tensors();
  AdamState adam = AdamState::for_model(model, cfg.lr);

  TrainResult result;
  SiameseModel best = model;
  double best_score = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(tr.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      const double inv_n = 1.0 / static_cast<double>(end - start);
      zero_all(grads);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& e = tr[order[i]];
        const auto cache = forward_pair(model, e.ids1, e.ids2, true, &rng);
        batch_loss += bce_loss(cache.y_hat, e.label);
        accumulate_gradients(model, cache, e.label, grads);
      }
      batch_loss *= inv_n;
      if (!std::isfinite(batch_loss))
        throw NumericError("train: non-finite loss in epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      for (auto& t : grads_refs)
        for (double& g : t.data) g *= inv_n;
      clip_global_norm(grads_refs, cfg.clip_norm);
      adam_step(params_refs, grads_refs, adam);
      epoch_loss += batch_loss * static_cast<double>(end - start);
    }
    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(tr.size());
    stats.dev_loss = dev.empty() ? stats.train_loss : evaluate_loss(model, dev);
    result.history.push_back(stats);
    const double score = dev.empty() ? stats.train_loss : stats.dev_loss;
    if (score < best_score) {
      best_score = score;
      best = model;
      result.best_epoch = epoch;
    }
  }
  if (!result.history.empty()) model = best;
  return result;
}

}  // namespace quesim
