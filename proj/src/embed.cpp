#include "gw/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "gw/binio.hpp"
#include "gw/error.hpp"
#include "gw/rng.hpp"

namespace gw {

namespace {

constexpr uint32_t kModelVersion = 1;

[[noreturn]] void fail(const std::string& msg) { throw Error("embed", msg); }

// Binary search the cumulative count^0.75 table; u in [0, total_weight).
uint32_t sample_word(const Vocabulary& vocab, double u) {
  auto it = std::upper_bound(vocab.sampling_cdf.begin(), vocab.sampling_cdf.end(), u);
  if (it == vocab.sampling_cdf.end()) --it;
  return uint32_t(it - vocab.sampling_cdf.begin());
}

struct EpochStats {
  double loss_sum = 0.0;
  uint64_t examples = 0;
};

// One negative-sampling SGD step: predict `target` from `input`, pushing the
// input vector and the touched output rows. Returns the example loss.
float negsamp_step(float* input, uint32_t target, const Vocabulary& vocab,
                   std::vector<float>& output_table, uint32_t p,
                   uint32_t negatives, float lr, Rng& rng,
                   std::vector<float>& grad_scratch) {
  grad_scratch.assign(p, 0.0f);
  float loss = 0.0f;
  const double total_weight = vocab.sampling_cdf.back();
  auto step_pair = [&](uint32_t word, float label) {
    float* out = &output_table[size_t(word) * p];
    float dot = 0.0f;
    for (uint32_t i = 0; i < p; ++i) dot += input[i] * out[i];
    const float s = 1.0f / (1.0f + std::exp(-dot));
    loss -= label > 0.5f ? std::log(std::max(s, 1e-12f))
                         : std::log(std::max(1.0f - s, 1e-12f));
    const float coeff = s - label;
    for (uint32_t i = 0; i < p; ++i) {
      grad_scratch[i] += coeff * out[i];
      out[i] -= lr * coeff * input[i];
    }
  };
  step_pair(target, 1.0f);
  for (uint32_t k = 0; k < negatives; ++k) {
    const uint32_t neg = sample_word(vocab, rng.uniform() * total_weight);
    if (neg == target) continue;  // skip self-collisions rather than redraw
    step_pair(neg, 0.0f);
  }
  for (uint32_t i = 0; i < p; ++i) input[i] -= lr * grad_scratch[i];
  return loss;
}

// Processes docs [begin, end) for one epoch. The RNG must be seeded
// identically across epochs so that a zero learning rate yields identical
// sampling decisions and therefore identical per-epoch losses.
EpochStats run_epoch_span(EmbeddingModel& model, const std::vector<TokenizedDoc>& docs,
                          size_t begin, size_t end, Rng rng, uint64_t processed_base,
                          uint64_t total_positions) {
  const EmbedConfig& cfg = model.config;
  const Vocabulary& vocab = model.vocab;
  const uint32_t p = cfg.p;
  const float lr0 = cfg.initial_lr;
  const float lr_final = lr0 / 100.0f;

  EpochStats stats;
  uint64_t processed = processed_base;
  std::vector<uint32_t> surviving;
  std::vector<float> grad_scratch(p);

  for (size_t d = begin; d < end; ++d) {
    const TokenizedDoc& doc = docs[d];
    surviving.clear();
    for (const std::string& tok : doc.tokens) {
      auto it = vocab.index.find(tok);
      if (it == vocab.index.end()) continue;
      ++processed;  // counts retained positions, pre-subsampling, so the
                    // decay schedule is independent of random drops
      if (cfg.subsample_threshold > 0.0) {
        const double f = double(vocab.words[it->second].count) / double(vocab.total_tokens);
        const double t = cfg.subsample_threshold;
        const double p_keep = (std::sqrt(f / t) + 1.0) * (t / f);
        if (rng.uniform() >= p_keep) continue;
      }
      surviving.push_back(it->second);
    }
    if (surviving.empty()) continue;

    const double frac = double(processed) / double(total_positions);
    const float lr = std::max(lr_final, lr0 + float(frac) * (lr_final - lr0));
    float* doc_vec = &model.doc_vectors[size_t(d) * p];

    for (size_t pos = 0; pos < surviving.size(); ++pos) {
      const uint32_t target = surviving[pos];
      stats.loss_sum += negsamp_step(doc_vec, target, vocab, model.word_output_vectors,
                                     p, cfg.negative_samples, lr, rng, grad_scratch);
      ++stats.examples;
      if (!cfg.train_word_vectors) continue;
      // Reduced-window skip-gram: effective radius uniform in [1, window].
      const uint32_t radius = 1 + uint32_t(rng.uniform_index(cfg.window));
      const size_t lo = pos > radius ? pos - radius : 0;
      const size_t hi = std::min(surviving.size() - 1, pos + radius);
      float* center = &model.word_input_vectors[size_t(target) * p];
      for (size_t c = lo; c <= hi; ++c) {
        if (c == pos) continue;
        stats.loss_sum += negsamp_step(center, surviving[c], vocab,
                                       model.word_output_vectors, p,
                                       cfg.negative_samples, lr, rng, grad_scratch);
        ++stats.examples;
      }
    }
  }
  return stats;
}

uint64_t retained_positions(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab) {
  uint64_t n = 0;
  for (const TokenizedDoc& doc : docs)
    for (const std::string& tok : doc.tokens)
      if (vocab.contains(tok)) ++n;
  return n;
}

}  // namespace

void EmbedConfig::validate() const {
  if (p < 1) fail("embedding dimension must be at least 1");
  if (epochs < 1) fail("epochs must be at least 1");
  if (negative_samples < 1) fail("negative_samples must be at least 1");
  if (train_word_vectors && window < 1) fail("window must be at least 1");
  if (workers < 1) fail("workers must be at least 1");
  if (!(initial_lr >= 0.0f) || !std::isfinite(initial_lr)) fail("initial_lr must be finite and non-negative");
  if (!(subsample_threshold >= 0.0) || !std::isfinite(subsample_threshold))
    fail("subsample_threshold must be finite and non-negative");
}

Vocabulary build_vocab(const std::vector<TokenizedDoc>& docs, const EmbedConfig& config) {
  config.validate();
  if (docs.empty()) fail("no documents");
  std::unordered_map<std::string, uint64_t> counts;
  for (const TokenizedDoc& doc : docs)
    for (const std::string& tok : doc.tokens) ++counts[tok];

  Vocabulary vocab;
  for (const auto& [word, count] : counts)
    if (count >= config.min_count) vocab.words.push_back({word, count});
  if (vocab.words.empty()) fail("empty vocabulary");

  std::sort(vocab.words.begin(), vocab.words.end(), [](const VocabWord& a, const VocabWord& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.word < b.word;
  });
  vocab.index.reserve(vocab.words.size());
  vocab.sampling_cdf.reserve(vocab.words.size());
  double cumulative = 0.0;
  for (uint32_t i = 0; i < vocab.words.size(); ++i) {
    vocab.index.emplace(vocab.words[i].word, i);
    vocab.total_tokens += vocab.words[i].count;
    cumulative += std::pow(double(vocab.words[i].count), 0.75);
    vocab.sampling_cdf.push_back(cumulative);
  }
  return vocab;
}

EmbeddingModel init_model(const std::vector<TokenizedDoc>& docs,
                          Vocabulary vocab, const EmbedConfig& config) {
  config.validate();
  if (docs.empty()) fail("no documents");
  EmbeddingModel model;
  model.p = config.p;
  model.vocab = std::move(vocab);
  model.config = config;
  model.doc_ids.reserve(docs.size());
  for (uint32_t i = 0; i < docs.size(); ++i) {
    const std::string& id = docs[i].id;
    if (!model.doc_index.emplace(id, i).second) fail("duplicate document id: " + id);
    model.doc_ids.push_back(id);
  }

  const uint32_t p = config.p;
  const float half = 0.5f / float(p);
  Rng rng(config.seed);
  model.doc_vectors.resize(size_t(docs.size()) * p);
  for (float& v : model.doc_vectors) v = float(rng.uniform(-half, half));
  model.word_input_vectors.resize(model.vocab.size() * p);
  for (float& v : model.word_input_vectors) v = float(rng.uniform(-half, half));
  model.word_output_vectors.assign(model.vocab.size() * p, 0.0f);
  return model;
}

void train_epochs(EmbeddingModel& model, const std::vector<TokenizedDoc>& docs) {
  const EmbedConfig& cfg = model.config;
  const uint64_t per_epoch = retained_positions(docs, model.vocab);
  if (per_epoch == 0) fail("no trainable tokens");
  const uint64_t total_positions = per_epoch * cfg.epochs;

  model.epoch_loss.clear();
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const uint64_t processed_base = uint64_t(epoch) * per_epoch;
    EpochStats stats;
    if (cfg.workers <= 1 || docs.size() < 2) {
      stats = run_epoch_span(model, docs, 0, docs.size(), Rng(cfg.seed).fork(1),
                             processed_base, total_positions);
    } else {
      // Asynchronous updates: workers share the parameter tables without
      // locks; per-worker RNGs are still re-seeded identically each epoch.
      const uint32_t n = std::min<uint32_t>(cfg.workers, uint32_t(docs.size()));
      std::vector<EpochStats> partial(n);
      std::vector<std::thread> pool;
      const size_t chunk = (docs.size() + n - 1) / n;
      for (uint32_t w = 0; w < n; ++w) {
        const size_t begin = w * chunk;
        const size_t end = std::min(docs.size(), begin + chunk);
        pool.emplace_back([&, w, begin, end] {
          partial[w] = run_epoch_span(model, docs, begin, end, Rng(cfg.seed).fork(w + 1),
                                      processed_base + begin, total_positions);
        });
      }
      for (std::thread& t : pool) t.join();
      for (const EpochStats& s : partial) {
        stats.loss_sum += s.loss_sum;
        stats.examples += s.examples;
      }
    }
    const double mean = stats.examples ? stats.loss_sum / double(stats.examples) : 0.0;
    if (!std::isfinite(mean)) fail("diverged");
    model.epoch_loss.push_back(mean);
  }
}

EmbeddingModel train_pvdbow(const std::vector<TokenizedDoc>& docs,
                            Vocabulary vocab, const EmbedConfig& config) {
  EmbeddingModel model = init_model(docs, std::move(vocab), config);
  train_epochs(model, docs);
  return model;
}

std::vector<float> embed_doc(const EmbeddingModel& model, const std::string& doc_id) {
  auto it = model.doc_index.find(doc_id);
  if (it == model.doc_index.end()) fail("unknown document: " + doc_id);
  const float* row = model.doc_row(it->second);
  return std::vector<float>(row, row + model.p);
}

const std::vector<double>& per_epoch_loss(const EmbeddingModel& model) {
  return model.epoch_loss;
}

void save_model(const EmbeddingModel& model, std::ostream& out) {
  binio::write_magic(out, "PVDB");
  binio::write_pod(out, kModelVersion);
  binio::write_pod(out, uint64_t(model.doc_ids.size()));
  binio::write_pod(out, uint64_t(model.vocab.size()));
  binio::write_pod(out, model.p);
  for (const std::string& id : model.doc_ids) binio::write_string(out, id);
  binio::write_array(out, model.doc_vectors);
  for (const VocabWord& w : model.vocab.words) {
    binio::write_string(out, w.word);
    binio::write_pod(out, w.count);
  }
  binio::write_array(out, model.word_output_vectors);
  if (!out) fail("failed writing model checkpoint");
}

void save_model_file(const EmbeddingModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  save_model(model, out);
}

EmbeddingModel load_model(std::istream& in) {
  try {
    binio::expect_magic(in, "PVDB", "model checkpoint");
    const auto version = binio::read_pod<uint32_t>(in, "version");
    if (version != kModelVersion) fail("unsupported checkpoint version");
    const auto num_docs = binio::read_pod<uint64_t>(in, "num_docs");
    const auto vocab_size = binio::read_pod<uint64_t>(in, "vocab_size");
    EmbeddingModel model;
    model.p = binio::read_pod<uint32_t>(in, "p");
    if (model.p == 0) fail("corrupt checkpoint: zero dimension");
    model.config.p = model.p;
    model.doc_ids.reserve(num_docs);
    for (uint64_t i = 0; i < num_docs; ++i) {
      std::string id = binio::read_string(in, "doc id");
      if (!model.doc_index.emplace(id, uint32_t(i)).second)
        fail("corrupt checkpoint: duplicate doc id");
      model.doc_ids.push_back(std::move(id));
    }
    binio::read_array(in, model.doc_vectors, size_t(num_docs) * model.p, "doc vectors");
    model.vocab.words.reserve(vocab_size);
    double cumulative = 0.0;
    for (uint64_t i = 0; i < vocab_size; ++i) {
      VocabWord w;
      w.word = binio::read_string(in, "vocab word");
      w.count = binio::read_pod<uint64_t>(in, "vocab count");
      model.vocab.index.emplace(w.word, uint32_t(i));
      model.vocab.total_tokens += w.count;
      cumulative += std::pow(double(w.count), 0.75);
      model.vocab.sampling_cdf.push_back(cumulative);
      model.vocab.words.push_back(std::move(w));
    }
    binio::read_array(in, model.word_output_vectors, size_t(vocab_size) * model.p,
                      "word output vectors");
    return model;
  } catch (const Error& e) {
    throw Error("embed", e.what());
  }
}

EmbeddingModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open: " + path);
  return load_model(in);
}

}  // namespace gw
