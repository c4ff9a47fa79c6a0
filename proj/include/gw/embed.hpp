#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "gw/corpus.hpp"

namespace gw {

struct EmbedConfig {
  uint32_t p = 300;              // embedding dimensionality
  uint32_t epochs = 10;
  uint32_t window = 8;           // context radius for the word-training pass
  uint32_t negative_samples = 5;
  float initial_lr = 0.025f;     // decays linearly to initial_lr/100
  uint32_t min_count = 5;
  double subsample_threshold = 1e-3;  // 0 disables subsampling
  bool train_word_vectors = true;     // skip-gram word pass alongside PV-DBOW
  uint32_t workers = 1;               // >1 trades determinism for speed
  uint64_t seed = 1;

  void validate() const;
};

struct VocabWord {
  std::string word;
  uint64_t count = 0;
};

// Retained words plus the unigram^0.75 negative-sampling distribution.
struct Vocabulary {
  std::vector<VocabWord> words;                       // sorted by count desc, word asc
  std::unordered_map<std::string, uint32_t> index;    // word -> row
  uint64_t total_tokens = 0;                          // retained-token occurrences
  std::vector<double> sampling_cdf;                   // cumulative count^0.75 weights

  bool contains(const std::string& w) const { return index.count(w) > 0; }
  size_t size() const { return words.size(); }
};

Vocabulary build_vocab(const std::vector<TokenizedDoc>& docs, const EmbedConfig& config);

// Trained PV-DBOW model. Document vectors are the product consumed
// downstream; word vectors exist as training state (word inputs are not
// persisted in checkpoints).
struct EmbeddingModel {
  uint32_t p = 0;
  std::vector<std::string> doc_ids;
  std::unordered_map<std::string, uint32_t> doc_index;
  std::vector<float> doc_vectors;         // num_docs x p, row-major
  std::vector<float> word_input_vectors;  // vocab x p; used by the word pass
  std::vector<float> word_output_vectors; // vocab x p
  Vocabulary vocab;
  EmbedConfig config;
  std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch

  const float* doc_row(uint32_t row) const { return &doc_vectors[size_t(row) * p]; }
};

// Seeded uniform [-0.5/p, 0.5/p] initialization for doc and word inputs;
// word outputs start at zero.
EmbeddingModel init_model(const std::vector<TokenizedDoc>& docs,
                          Vocabulary vocab, const EmbedConfig& config);

// Runs the configured number of epochs of negative-sampling SGD over the
// model in place, recording the per-epoch mean loss.
void train_epochs(EmbeddingModel& model, const std::vector<TokenizedDoc>& docs);

EmbeddingModel train_pvdbow(const std::vector<TokenizedDoc>& docs,
                            Vocabulary vocab, const EmbedConfig& config);

// Stored doc vector lookup; throws "unknown document" for ids not trained.
std::vector<float> embed_doc(const EmbeddingModel& model, const std::string& doc_id);

const std::vector<double>& per_epoch_loss(const EmbeddingModel& model);

// Checkpoint: magic "PVDB", version, doc table, doc vectors, vocabulary,
// word output vectors; float payloads round-trip bitwise.
void save_model(const EmbeddingModel& model, std::ostream& out);
void save_model_file(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(std::istream& in);
EmbeddingModel load_model_file(const std::string& path);

namespace detail {

// Negative-sampling loss and input-vector gradient for one (input, target,
// negatives) triple over output rows `out`. Shared by the float training
// path and the double-precision gradient checks. grad_input may be null
// when only the loss is needed.
template <typename T>
T negsamp_loss_grad(const T* input, const T* target_out,
                    const T* const* negative_out, size_t n_negative, size_t p,
                    T* grad_input) {
  auto sigmoid = [](T x) { return T(1) / (T(1) + std::exp(-x)); };
  if (grad_input) {
    for (size_t i = 0; i < p; ++i) grad_input[i] = T(0);
  }
  T loss = T(0);
  auto accumulate = [&](const T* out_row, T label) {
    T dot = T(0);
    for (size_t i = 0; i < p; ++i) dot += input[i] * out_row[i];
    const T s = sigmoid(dot);
    // label 1: -log(s); label 0: -log(1-s)
    loss -= label > T(0.5) ? std::log(std::max(s, T(1e-12)))
                           : std::log(std::max(T(1) - s, T(1e-12)));
    const T coeff = s - label;  // dL/d(dot)
    if (grad_input) {
      for (size_t i = 0; i < p; ++i) grad_input[i] += coeff * out_row[i];
    }
  };
  accumulate(target_out, T(1));
  for (size_t k = 0; k < n_negative; ++k) accumulate(negative_out[k], T(0));
  return loss;
}

}  // namespace detail
}  // namespace gw
