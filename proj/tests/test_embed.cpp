#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gw/embed.hpp"
#include "gw/error.hpp"
#include "gw/rng.hpp"
#include "gw/synthgen.hpp"
#include "oracles.hpp"

using namespace gw;

namespace {

std::vector<TokenizedDoc> docs_from(const std::vector<std::vector<std::string>>& bodies) {
  std::vector<TokenizedDoc> docs;
  for (size_t i = 0; i < bodies.size(); ++i) {
    docs.push_back({"doc" + std::to_string(i), bodies[i]});
  }
  return docs;
}

EmbedConfig small_config() {
  EmbedConfig cfg;
  cfg.p = 16;
  cfg.epochs = 5;
  cfg.min_count = 1;
  cfg.subsample_threshold = 0.0;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("build_vocab honors min_count") {
  const auto docs = docs_from({{"a", "a", "b"}});
  EmbedConfig cfg;
  cfg.min_count = 2;
  const Vocabulary vocab = build_vocab(docs, cfg);
  CHECK(vocab.size() == 1);
  CHECK(vocab.contains("a"));
  CHECK(!vocab.contains("b"));
  CHECK(vocab.words[0].count == 2);
  CHECK(vocab.total_tokens == 2);
}

TEST_CASE("build_vocab counts across documents") {
  const auto docs = docs_from({{"a", "b"}, {"a", "b"}});
  EmbedConfig cfg;
  cfg.min_count = 1;
  const Vocabulary vocab = build_vocab(docs, cfg);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.contains("a"));
  CHECK(vocab.contains("b"));
  CHECK(vocab.words[0].count == 2);
  CHECK(vocab.words[1].count == 2);
  // Equal counts tie-break by word ascending.
  CHECK(vocab.words[0].word == "a");
}

TEST_CASE("vocab of a topic corpus covers exactly the distinct tokens") {
  const auto docs = gen_topic_corpus(2, 50, 40, 0.3, 7);
  REQUIRE(docs.size() == 100);
  std::set<std::string> distinct;
  for (const TokenizedDoc& d : docs) distinct.insert(d.tokens.begin(), d.tokens.end());

  EmbedConfig cfg;
  cfg.min_count = 1;
  const Vocabulary vocab = build_vocab(docs, cfg);
  CHECK(vocab.size() == distinct.size());
  for (const std::string& w : distinct) CHECK(vocab.contains(w));
}

TEST_CASE("sampling table weights are proportional to count^0.75") {
  const auto docs = docs_from({{"a", "a", "a", "a", "b", "b", "c"}});
  EmbedConfig cfg;
  cfg.min_count = 1;
  const Vocabulary vocab = build_vocab(docs, cfg);
  REQUIRE(vocab.size() == 3);
  REQUIRE(vocab.sampling_cdf.size() == 3);
  // Sorted by count desc: a(4), b(2), c(1).
  CHECK(vocab.words[0].word == "a");
  const double wa = std::pow(4.0, 0.75), wb = std::pow(2.0, 0.75), wc = 1.0;
  CHECK(vocab.sampling_cdf[0] == doctest::Approx(wa).epsilon(1e-12));
  CHECK(vocab.sampling_cdf[1] == doctest::Approx(wa + wb).epsilon(1e-12));
  CHECK(vocab.sampling_cdf[2] == doctest::Approx(wa + wb + wc).epsilon(1e-12));
}

TEST_CASE("dropping every word is an empty-vocabulary error") {
  const auto docs = docs_from({{"a", "b"}});
  EmbedConfig cfg;
  cfg.min_count = 10;
  CHECK_THROWS_WITH_AS(build_vocab(docs, cfg), doctest::Contains("empty vocabulary"),
                       Error);
}

TEST_CASE("lr=0 leaves the initialization untouched") {
  const auto docs = docs_from({{"a", "b", "a", "c"}});
  EmbedConfig cfg = small_config();
  cfg.epochs = 1;
  cfg.initial_lr = 0.0f;
  const Vocabulary vocab = build_vocab(docs, cfg);
  const EmbeddingModel init = init_model(docs, vocab, cfg);
  const EmbeddingModel trained = train_pvdbow(docs, vocab, cfg);
  CHECK(trained.doc_vectors == init.doc_vectors);
  CHECK(trained.word_input_vectors == init.word_input_vectors);
  CHECK(trained.word_output_vectors == init.word_output_vectors);
}

TEST_CASE("lr=0 gives identical per-epoch losses") {
  const auto docs = gen_topic_corpus(2, 8, 30, 0.2, 3);
  EmbedConfig cfg = small_config();
  cfg.epochs = 6;
  cfg.initial_lr = 0.0f;
  cfg.subsample_threshold = 1e-3;  // subsampling draws must not break equality
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);
  const auto& losses = per_epoch_loss(model);
  REQUIRE(losses.size() == 6);
  for (size_t e = 1; e < losses.size(); ++e) CHECK(losses[e] == losses[0]);
}

TEST_CASE("identical documents end up closer than unrelated ones") {
  auto docs = gen_topic_corpus(2, 6, 40, 0.2, 5);
  docs[0].tokens = docs[1].tokens;  // make doc0 and doc1 identical
  EmbedConfig cfg = small_config();
  cfg.epochs = 20;
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);

  const auto v0 = embed_doc(model, docs[0].id);
  const auto v1 = embed_doc(model, docs[1].id);
  const double twin_cosine = oracle::cosine(v0, v1);
  double sum = 0.0;
  for (size_t i = 2; i < docs.size(); ++i) {
    sum += oracle::cosine(v0, embed_doc(model, docs[i].id));
  }
  CHECK(twin_cosine > sum / double(docs.size() - 2));
}

TEST_CASE("two-topic corpus separates by at least 0.2 cosine margin") {
  const auto docs = gen_topic_corpus(2, 50, 50, 0.3, 17);
  EmbedConfig cfg;
  cfg.p = 32;
  cfg.epochs = 12;
  cfg.min_count = 1;
  cfg.seed = 9;
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);

  double intra = 0.0, inter = 0.0;
  size_t intra_n = 0, inter_n = 0;
  for (size_t i = 0; i < docs.size(); ++i) {
    const auto vi = embed_doc(model, docs[i].id);
    for (size_t j = i + 1; j < docs.size(); ++j) {
      const double c = oracle::cosine(vi, embed_doc(model, docs[j].id));
      const bool same = (i < 50) == (j < 50);
      if (same) {
        intra += c;
        ++intra_n;
      } else {
        inter += c;
        ++inter_n;
      }
    }
  }
  CHECK(intra / double(intra_n) - inter / double(inter_n) >= 0.2);

  const auto& losses = per_epoch_loss(model);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("embed_doc is a pure lookup with the configured width") {
  const auto docs = docs_from({{"a", "b"}, {"b", "c"}});
  EmbedConfig cfg = small_config();
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);
  const auto v1 = embed_doc(model, "doc0");
  const auto v2 = embed_doc(model, "doc0");
  REQUIRE(v1.size() == cfg.p);
  CHECK(v1 == v2);
  for (float x : v1) CHECK(std::isfinite(x));
  CHECK_THROWS_WITH_AS(embed_doc(model, "nope"), doctest::Contains("unknown document"),
                       Error);
}

TEST_CASE("per-epoch loss has one finite entry per epoch") {
  const auto docs = gen_topic_corpus(1, 5, 20, 0.0, 2);
  EmbedConfig cfg = small_config();
  cfg.epochs = 10;
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);
  const auto& losses = per_epoch_loss(model);
  REQUIRE(losses.size() == 10);
  for (double loss : losses) CHECK(std::isfinite(loss));
}

TEST_CASE("analytic input gradient matches finite differences") {
  Rng rng(31);
  const size_t p = 12, negatives = 4;
  std::vector<double> input(p), target(p);
  std::vector<std::vector<double>> negative_rows(negatives, std::vector<double>(p));
  for (auto& x : input) x = rng.uniform(-0.8, 0.8);
  for (auto& x : target) x = rng.uniform(-0.8, 0.8);
  for (auto& row : negative_rows) {
    for (auto& x : row) x = rng.uniform(-0.8, 0.8);
  }
  std::vector<const double*> negs;
  for (const auto& row : negative_rows) negs.push_back(row.data());

  std::vector<double> grad(p);
  detail::negsamp_loss_grad<double>(input.data(), target.data(), negs.data(), negatives,
                                    p, grad.data());
  for (size_t i = 0; i < p; ++i) {
    const double fd = oracle::central_diff(
        [&] {
          return detail::negsamp_loss_grad<double>(input.data(), target.data(),
                                                   negs.data(), negatives, p, nullptr);
        },
        input[i], 1e-4);
    CHECK(oracle::rel_err(grad[i], fd) < 1e-4);
  }
}

TEST_CASE("single-worker training is bitwise deterministic") {
  const auto docs = gen_topic_corpus(2, 10, 30, 0.3, 21);
  EmbedConfig cfg = small_config();
  cfg.epochs = 3;
  const Vocabulary vocab = build_vocab(docs, cfg);
  const EmbeddingModel a = train_pvdbow(docs, vocab, cfg);
  const EmbeddingModel b = train_pvdbow(docs, vocab, cfg);
  CHECK(a.doc_vectors == b.doc_vectors);
  CHECK(a.word_output_vectors == b.word_output_vectors);
  CHECK(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("multi-worker training completes with finite losses") {
  const auto docs = gen_topic_corpus(2, 20, 30, 0.3, 23);
  EmbedConfig cfg = small_config();
  cfg.epochs = 2;
  cfg.workers = 3;
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);
  for (double loss : per_epoch_loss(model)) CHECK(std::isfinite(loss));
  for (float x : model.doc_vectors) CHECK(std::isfinite(x));
}

TEST_CASE("checkpoint round trip is bitwise stable") {
  const auto docs = gen_topic_corpus(2, 8, 25, 0.2, 29);
  EmbedConfig cfg = small_config();
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);

  std::stringstream buffer;
  save_model(model, buffer);
  const EmbeddingModel loaded = load_model(buffer);

  CHECK(loaded.p == model.p);
  CHECK(loaded.doc_ids == model.doc_ids);
  CHECK(loaded.doc_vectors == model.doc_vectors);
  CHECK(loaded.word_output_vectors == model.word_output_vectors);
  REQUIRE(loaded.vocab.size() == model.vocab.size());
  for (size_t i = 0; i < model.vocab.size(); ++i) {
    CHECK(loaded.vocab.words[i].word == model.vocab.words[i].word);
    CHECK(loaded.vocab.words[i].count == model.vocab.words[i].count);
  }
  // Lookup still works after reload.
  CHECK(embed_doc(loaded, docs[0].id) == embed_doc(model, docs[0].id));
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::stringstream not_magic("XXXXgarbage");
  CHECK_THROWS_AS(load_model(not_magic), Error);

  const auto docs = docs_from({{"a", "b"}});
  EmbedConfig cfg = small_config();
  const EmbeddingModel model = train_pvdbow(docs, build_vocab(docs, cfg), cfg);
  std::stringstream buffer;
  save_model(model, buffer);
  const std::string full = buffer.str();
  std::stringstream truncated(full.substr(0, full.size() / 2));
  CHECK_THROWS_AS(load_model(truncated), Error);
}

TEST_CASE("training validates its configuration") {
  const auto docs = docs_from({{"a", "b"}});
  EmbedConfig bad = small_config();
  bad.p = 0;
  CHECK_THROWS_AS(build_vocab(docs, bad), Error);
  EmbedConfig neg = small_config();
  neg.initial_lr = -0.1f;
  CHECK_THROWS_AS(build_vocab(docs, neg), Error);
}

}  // TEST_SUITE
