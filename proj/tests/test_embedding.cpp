#include <doctest.h>

#include <sstream>

#include "quesim/embedding.hpp"
#include "quesim/errors.hpp"
#include "quesim/gru.hpp"
#include "quesim/serialize.hpp"
#include "quesim/train.hpp"

#include "helpers.hpp"

using namespace quesim;

TEST_CASE("vocabulary reserves PAD and UNK") {
  Vocabulary vocab;
  CHECK(vocab.size() == 2);
  CHECK(vocab.word_of(kPadId) == kPadToken);
  CHECK(vocab.word_of(kUnkId) == kUnkToken);
  CHECK(vocab.add("alpha") == 2);
  CHECK(vocab.id_of("alpha") == 2);
  CHECK(vocab.id_of("missing") == kUnkId);
  CHECK(vocab.contains("alpha"));
  CHECK(!vocab.contains("missing"));
}

TEST_CASE("load_glove intersects corpus and file, UNK is the mean row") {
  std::istringstream in("a 1.0 2.0\nb 3.0 4.0\n");
  const auto store = load_glove(in, 2, {"a", "b", "c"});
  CHECK(store.vocab.size() == 4);
  CHECK(store.dim == 2);
  CHECK(!store.vocab.contains("c"));

  const auto ra = store.values.row(store.vocab.id_of("a"));
  CHECK(ra[0] == 1.0);
  CHECK(ra[1] == 2.0);
  const auto rb = store.values.row(store.vocab.id_of("b"));
  CHECK(rb[0] == 3.0);
  CHECK(rb[1] == 4.0);
  // hand mean of the two loaded rows
  const auto unk = store.values.row(kUnkId);
  CHECK(unk[0] == doctest::Approx(2.0));
  CHECK(unk[1] == doctest::Approx(3.0));
  // PAD row stays zero
  const auto pad = store.values.row(kPadId);
  CHECK(pad[0] == 0.0);
  CHECK(pad[1] == 0.0);
}

TEST_CASE("load_glove degenerate corpus") {
  std::istringstream in("a 1.0 2.0\n");
  const auto store = load_glove(in, 2, {});
  CHECK(store.vocab.size() == 2);
  const auto unk = store.values.row(kUnkId);
  CHECK(unk[0] == 0.0);
  CHECK(unk[1] == 0.0);
}

TEST_CASE("load_glove error reporting") {
  SUBCASE("dimension mismatch names the token") {
    std::istringstream in("a 1.0\n");
    CHECK_THROWS_WITH_AS(load_glove(in, 2, {"a"}),
                         doctest::Contains("a"), DataError);
  }
  SUBCASE("unparsable float names the line") {
    std::istringstream in("a 1.0 2.0\nb 3.0 oops\n");
    CHECK_THROWS_WITH_AS(load_glove(in, 2, {"a", "b"}),
                         doctest::Contains("2"), DataError);
  }
}

TEST_CASE("load_glove skips tokens outside the corpus and duplicate lines") {
  std::istringstream in("x 9.0 9.0\na 1.0 2.0\na 5.0 6.0\n");
  const auto store = load_glove(in, 2, {"a"});
  CHECK(store.vocab.size() == 3);
  const auto ra = store.values.row(store.vocab.id_of("a"));
  CHECK(ra[0] == 1.0);  // first occurrence wins
}

TEST_CASE("lookup returns matrix rows, PAD is zero") {
  const auto store = testutil::make_store({"u", "v", "w"}, 3, 7);
  const auto vecs = store.lookup({kPadId, kPadId, 2});
  REQUIRE(vecs.size() == 3);
  for (const double x : vecs[0]) CHECK(x == 0.0);
  for (const double x : vecs[1]) CHECK(x == 0.0);
  const auto r2 = store.values.row(2);
  for (std::size_t j = 0; j < 3; ++j) CHECK(vecs[2][j] == r2[j]);
}

TEST_CASE("lookup rejects out-of-range ids") {
  const auto store = testutil::make_store({"u"}, 2, 3);
  CHECK_THROWS_AS(store.lookup({99}), DataError);
}

// One training step touches only the embedding rows whose ids appeared in
// the batch; every other row (and PAD always) is untouched.
TEST_CASE("embedding gradient flow is per-row") {
  const auto words = testutil::word_pool(6);
  const auto store = testutil::make_store(words, 4, 21);
  auto cfg = testutil::tiny_config(4, {3}, {4}, 4);
  auto model = SiameseModel::init(cfg, store, 5);
  const Matrix before = model.embedding;

  // batch uses ids 2 and 3 only (plus PAD)
  std::vector<TrainingExample> batch = {{{0, 0, 2, 3}, {0, 0, 3, 2}, 1}};
  TrainConfig tc;
  tc.batch_size = 1;
  tc.epochs = 1;
  tc.keep_prob = 1.0;
  tc.dev_fraction = 0.0;
  train(model, batch, tc);

  bool touched2 = false, touched3 = false;
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(model.embedding(0, j) == 0.0);  // PAD frozen
    CHECK(model.embedding(4, j) == before(4, j));
    CHECK(model.embedding(5, j) == before(5, j));
    CHECK(model.embedding(6, j) == before(6, j));
    CHECK(model.embedding(7, j) == before(7, j));
    touched2 |= model.embedding(2, j) != before(2, j);
    touched3 |= model.embedding(3, j) != before(3, j);
  }
  CHECK(touched2);
  CHECK(touched3);
}

TEST_CASE("store checkpoint round-trips bit-exactly") {
  const auto words = testutil::word_pool(5);
  const auto store = testutil::make_store(words, 3, 77);
  auto cfg = testutil::tiny_config(3, {2}, {3}, 4);
  auto model = SiameseModel::init(cfg, store, 9);

  std::stringstream buf;
  save_gru(buf, model);
  auto back = load_gru(buf);

  CHECK(back.vocab.words() == model.vocab.words());
  auto a = model.tensors();
  auto b = back.tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].data.size() == b[i].data.size());
    for (std::size_t j = 0; j < a[i].data.size(); ++j)
      CHECK(a[i].data[j] == b[i].data[j]);
  }
}
