#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "quesim/gru.hpp"
#include "quesim/train.hpp"

#include "helpers.hpp"

using namespace quesim;

namespace {

GruCellParams zero_cell(std::size_t d_in, std::size_t d_h) {
  GruCellParams p;
  p.Wz = Matrix(d_h, d_in);
  p.Wr = Matrix(d_h, d_in);
  p.Wh = Matrix(d_h, d_in);
  p.Uz = Matrix(d_h, d_h);
  p.Ur = Matrix(d_h, d_h);
  p.Uh = Matrix(d_h, d_h);
  p.bz = Vec(d_h, 0.0);
  p.br = Vec(d_h, 0.0);
  p.bh = Vec(d_h, 0.0);
  return p;
}

}  // namespace

TEST_CASE("gru cell with zero parameters keeps a zero state") {
  const auto p = zero_cell(3, 2);
  const Vec x = {0.7, -1.2, 4.0};
  const Vec h_prev = {0.0, 0.0};
  GruStep step;
  gru_cell_forward(p, x, h_prev, step);
  for (const double h : step.h) CHECK(h == 0.0);
  for (const double z : step.z) CHECK(z == 0.5);
}

TEST_CASE("gru cell scalar case matches hand evaluation") {
  // W_z = W_r = W_h = 1, U = 0, b = 0, h_prev = 0, x = 1:
  // z = sigmoid(1), r = sigmoid(1), hh = tanh(1), h = z * hh
  auto p = zero_cell(1, 1);
  p.Wz(0, 0) = p.Wr(0, 0) = p.Wh(0, 0) = 1.0;
  const Vec x = {1.0};
  const Vec h_prev = {0.0};
  GruStep step;
  gru_cell_forward(p, x, h_prev, step);
  const double sig1 = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(step.h[0] == doctest::Approx(sig1 * std::tanh(1.0)).epsilon(1e-12));
  CHECK(step.h[0] == doctest::Approx(0.55675).epsilon(1e-4));
}

TEST_CASE("gru cell carries state when the update gate is closed") {
  auto p = zero_cell(1, 1);
  p.Wz(0, 0) = p.Wr(0, 0) = p.Wh(0, 0) = 1.0;
  p.bz[0] = -50.0;  // z ~ 0 regardless of input
  const Vec h_prev = {0.37};
  GruStep step;
  for (const double xv : {-3.0, 0.0, 5.0}) {
    const Vec x = {xv};
    gru_cell_forward(p, x, h_prev, step);
    CHECK(step.h[0] == doctest::Approx(0.37).epsilon(1e-12));
  }
}

TEST_CASE("encoding an all-PAD input with zero recurrent weights gives g = 0") {
  const auto store = testutil::make_store(testutil::word_pool(3), 4, 2);
  const auto cfg = testutil::tiny_config();
  auto model = SiameseModel::init(cfg, store, 3);
  for (auto& layer : model.layers)
    for (auto* cell : {&layer.fwd, &layer.bwd}) {
      cell->Wz.fill(0.0);
      cell->Wr.fill(0.0);
      cell->Wh.fill(0.0);
      cell->Uz.fill(0.0);
      cell->Ur.fill(0.0);
      cell->Uh.fill(0.0);
    }
  const IdSeq pad(cfg.max_len, kPadId);
  const auto enc = encode_question(model, pad);
  for (const double v : enc.g) CHECK(v == 0.0);
}

TEST_CASE("both Siamese arms share one parameter set") {
  const auto store = testutil::make_store(testutil::word_pool(6), 4, 8);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 4);
  const IdSeq ids = {0, 0, 2, 3, 4};
  const auto c = forward_pair(model, ids, ids, false, nullptr);
  // identical questions meet identical encoders: bit-equal sentence vectors
  REQUIRE(c.enc1.g.size() == c.enc2.g.size());
  for (std::size_t i = 0; i < c.enc1.g.size(); ++i)
    CHECK(c.enc1.g[i] == c.enc2.g[i]);
  // and the |g1-g2| block of the joint vector is exactly zero
  const std::size_t d = c.enc1.g.size();
  for (std::size_t i = 0; i < d; ++i) CHECK(c.joint[2 * d + i] == 0.0);
}

TEST_CASE("reversing a sequence changes the encoding") {
  const auto store = testutil::make_store(testutil::word_pool(6), 4, 15);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 6);
  const IdSeq ids = {0, 2, 3, 4, 5};
  IdSeq rev(ids.rbegin(), ids.rend());
  const auto a = encode_question(model, ids);
  const auto b = encode_question(model, rev);
  bool differs = false;
  for (std::size_t i = 0; i < a.g.size(); ++i) differs |= a.g[i] != b.g[i];
  CHECK(differs);
}

TEST_CASE("zero head weights give y_hat exactly 0.5") {
  const auto store = testutil::make_store(testutil::word_pool(4), 4, 6);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 7);
  for (auto& layer : model.head) {
    layer.W.fill(0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  const auto c = forward_pair(model, {0, 0, 2, 3, 2}, {0, 2, 3, 2, 3}, false,
                              nullptr);
  CHECK(c.y_hat == 0.5);
}

TEST_CASE("y_hat stays inside (0,1)") {
  const auto store = testutil::make_store(testutil::word_pool(8), 4, 19);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 20);
  Rng rng(5);
  for (int it = 0; it < 20; ++it) {
    IdSeq a(5), b(5);
    for (auto& id : a) id = static_cast<std::int32_t>(rng.below(10));
    for (auto& id : b) id = static_cast<std::int32_t>(rng.below(10));
    const auto c = forward_pair(model, a, b, false, nullptr);
    CHECK(c.y_hat > 0.0);
    CHECK(c.y_hat < 1.0);
    CHECK(bce_loss(c.y_hat, 1) >= 0.0);
  }
}

TEST_CASE("bce_loss analytic values") {
  CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_loss(0.9, 0) == doctest::Approx(-std::log(0.1)).epsilon(1e-10));
  CHECK(bce_loss(1.0 - 1e-12, 1) == doctest::Approx(0.0).epsilon(1e-9));
  // clipping keeps the loss finite at the boundary
  CHECK(std::isfinite(bce_loss(0.0, 1)));
  CHECK(std::isfinite(bce_loss(1.0, 0)));
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
  const auto store = testutil::make_store(testutil::word_pool(3), 4, 1);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 2);
  auto grads = model.zeros_like();
  auto state = AdamState::for_model(model, 1e-3);

  std::vector<double> before;
  auto params = model.tensors();
  for (const auto& t : params)
    before.insert(before.end(), t.data.begin(), t.data.end());

  auto g = grads.tensors();
  adam_step(params, g, state);
  CHECK(state.t == 1);

  std::size_t k = 0;
  for (const auto& t : params)
    for (const double v : t.data) CHECK(v == before[k++]);
}

TEST_CASE("adam single-step magnitude and sign") {
  // scalar parameter at 0 with constant gradient 1: one step moves it to
  // -lr * 1 / (1 + eps/…) ~ -lr
  Vec theta = {0.0};
  Vec grad = {1.0};
  std::vector<TensorRef> params = {{"theta", theta, 1, 1}};
  std::vector<TensorRef> grads = {{"theta", grad, 1, 1}};
  AdamState state;
  state.m = Vec(1, 0.0);
  state.v = Vec(1, 0.0);
  state.lr = 1e-3;
  adam_step(params, grads, state);
  CHECK(theta[0] == doctest::Approx(-1e-3).epsilon(1e-6));

  // sign property across a random tensor at t=1
  Vec th(16, 0.0), gr(16);
  Rng rng(44);
  for (auto& g : gr) g = rng.uniform(-2.0, 2.0);
  std::vector<TensorRef> p2 = {{"t", th, 4, 4}};
  std::vector<TensorRef> g2 = {{"t", gr, 4, 4}};
  AdamState s2;
  s2.m = Vec(16, 0.0);
  s2.v = Vec(16, 0.0);
  adam_step(p2, g2, s2);
  for (std::size_t i = 0; i < 16; ++i) {
    if (gr[i] > 0) CHECK(th[i] < 0);
    if (gr[i] < 0) CHECK(th[i] > 0);
  }
}

TEST_CASE("global norm clipping") {
  Vec a = {3.0, 0.0};
  Vec b = {0.0, 4.0};
  std::vector<TensorRef> grads = {{"a", a, 1, 2}, {"b", b, 1, 2}};
  const double norm = clip_global_norm(grads, 2.5);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(a[0] == doctest::Approx(1.5));
  CHECK(b[1] == doctest::Approx(2.0));

  // under the threshold nothing changes
  Vec c = {0.3, 0.4};
  std::vector<TensorRef> g2 = {{"c", c, 1, 2}};
  clip_global_norm(g2, 5.0);
  CHECK(c[0] == 0.3);
  CHECK(c[1] == 0.4);
}

TEST_CASE("inverted dropout preserves the expected activation") {
  // averaging over many masks approximates the undropped activation
  const double keep_prob = 0.8;
  const std::size_t width = 64;
  Vec base(width);
  Rng init(3);
  for (auto& v : base) v = init.uniform(0.5, 1.5);

  Vec mean(width, 0.0);
  Rng rng(17);
  const int n_masks = 20000;
  Vec mask;
  for (int it = 0; it < n_masks; ++it) {
    Vec a = base;
    apply_inverted_dropout(a, keep_prob, rng, mask);
    for (std::size_t i = 0; i < width; ++i) mean[i] += a[i];
  }
  for (std::size_t i = 0; i < width; ++i) {
    mean[i] /= n_masks;
    CHECK(std::abs(mean[i] - base[i]) / base[i] < 0.02);
  }
}

TEST_CASE("dropout mask scales survivors by 1/keep_prob") {
  Vec a(32, 1.0);
  Vec mask;
  Rng rng(9);
  apply_inverted_dropout(a, 0.5, rng, mask);
  REQUIRE(mask.size() == 32);
  for (std::size_t i = 0; i < 32; ++i) {
    if (mask[i] == 1.0)
      CHECK(a[i] == doctest::Approx(2.0));
    else
      CHECK(a[i] == 0.0);
  }
}

TEST_CASE("nomenclature reflects layer counts") {
  CHECK(gru_config(1, 1).nomenclature() == "GRU_1_1");
  CHECK(gru_config(3, 1).nomenclature() == "GRU_3_1");
  CHECK(gru_config(3, 2).nomenclature() == "GRU_3_2");
  CHECK(gru_config(3, 2).hidden_sizes == std::vector<std::size_t>{250, 500, 250});
  CHECK(gru_config(3, 2).head_hidden == std::vector<std::size_t>{1000, 1024});
  CHECK(gru_config(1, 1).hidden_sizes == std::vector<std::size_t>{250});
  CHECK(gru_config(1, 1).head_hidden == std::vector<std::size_t>{1000});
}

TEST_CASE("PAD embedding row and its gradient stay zero") {
  const auto store = testutil::make_store(testutil::word_pool(4), 4, 13);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 31);
  auto grads = model.zeros_like();
  const auto cache =
      forward_pair(model, {0, 0, 2, 3, 4}, {0, 2, 3, 4, 2}, false, nullptr);
  accumulate_gradients(model, cache, 1, grads);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(model.embedding(0, j) == 0.0);
    CHECK(grads.embedding(0, j) == 0.0);
  }
}

TEST_CASE("batch gradient is the sum of per-example gradients") {
  const auto store = testutil::make_store(testutil::word_pool(6), 4, 23);
  auto model = SiameseModel::init(testutil::tiny_config(), store, 29);
  const IdSeq a1 = {0, 0, 2, 3, 4}, a2 = {0, 2, 3, 4, 5};
  const IdSeq b1 = {0, 0, 0, 5, 2}, b2 = {0, 0, 3, 2, 4};

  auto sum = model.zeros_like();
  accumulate_gradients(model, forward_pair(model, a1, a2, false, nullptr), 1,
                       sum);
  accumulate_gradients(model, forward_pair(model, b1, b2, false, nullptr), 0,
                       sum);

  auto ga = model.zeros_like();
  accumulate_gradients(model, forward_pair(model, a1, a2, false, nullptr), 1,
                       ga);
  auto gb = model.zeros_like();
  accumulate_gradients(model, forward_pair(model, b1, b2, false, nullptr), 0,
                       gb);

  auto ts = sum.tensors();
  auto t1 = ga.tensors();
  auto t2 = gb.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts[i].data.size(); ++j)
      CHECK(ts[i].data[j] ==
            doctest::Approx(t1[i].data[j] + t2[i].data[j]).epsilon(1e-12));
}
