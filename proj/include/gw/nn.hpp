#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "gw/rng.hpp"

namespace gw {

// Double-precision training stack with manual backpropagation. Layers cache
// what their backward pass needs; backward accumulates parameter gradients
// and returns the input gradient.

enum class Activation : uint32_t { Linear = 0, Relu = 1, Sigmoid = 2 };

struct DenseLayer {
  uint32_t in = 0, out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;
  std::vector<double> gw, gb;
  std::vector<double> x_cache;

  void init(uint32_t in_dim, uint32_t out_dim, Rng& rng);
  std::vector<double> forward(const std::vector<double>& x);
  std::vector<double> backward(const std::vector<double>& dy);
  void zero_grad();
};

struct ActivationLayer {
  Activation kind = Activation::Linear;
  std::vector<double> y_cache;

  std::vector<double> forward(const std::vector<double>& x);
  std::vector<double> backward(const std::vector<double>& dy);
};

// Channel-major single-example image tensor.
struct Tensor {
  uint32_t c = 0, h = 0, w = 0;
  std::vector<double> v;

  bool empty() const { return v.empty(); }
  double& at(uint32_t ci, uint32_t y, uint32_t x) {
    return v[(size_t(ci) * h + y) * w + x];
  }
  double at(uint32_t ci, uint32_t y, uint32_t x) const {
    return v[(size_t(ci) * h + y) * w + x];
  }
};

struct ConvLayer {  // 3x3 kernel, stride 1, zero padding 1
  uint32_t in_ch = 0, out_ch = 0;
  std::vector<double> w;  // out_ch x in_ch x 3 x 3
  std::vector<double> b;
  std::vector<double> gw, gb;
  Tensor x_cache;

  void init(uint32_t in_channels, uint32_t out_channels, Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void zero_grad();
};

struct MaxPoolLayer {  // 2x2, stride 2; output dims max(1, in/2)
  uint32_t in_c = 0, in_h = 0, in_w = 0;
  std::vector<uint32_t> argmax;  // flat input index per output cell

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
};

struct GlobalAvgPoolLayer {
  uint32_t in_c = 0, in_h = 0, in_w = 0;

  std::vector<double> forward(const Tensor& x);
  Tensor backward(const std::vector<double>& dy);
};

// Squared-error loss for one example; d/dpred returned for backprop.
double mse_loss(double pred, double truth, double* d_pred);

// One training/inference example. `text` must match the model's text input
// width exactly; `image` must be a 1-channel tensor when the model uses one.
struct Sample {
  std::vector<double> text;
  Tensor image;
  double target = 0.0;
};

struct ParamBlock {
  std::vector<double>* values = nullptr;
  std::vector<double>* grads = nullptr;
};

class Regressor {
 public:
  virtual ~Regressor() = default;
  // Forward one example, caching activations for backward.
  virtual double forward_cached(const Sample& sample) = 0;
  // Backpropagate d(loss)/d(output) through the cached activations.
  virtual void backward(double d_out) = 0;
  virtual void zero_grad() = 0;
  virtual std::vector<ParamBlock> param_blocks() = 0;
  virtual uint32_t text_dim() const = 0;
  virtual bool uses_image() const = 0;
  virtual void save(std::ostream& out) const = 0;
};

// Text-only MLP: hidden widths with per-layer activations, then a linear
// scalar output.
struct MlpConfig {
  uint32_t input_dim = 0;
  std::vector<uint32_t> hidden = {512, 256, 64};
  std::vector<Activation> activations = {Activation::Relu, Activation::Relu,
                                         Activation::Sigmoid};
  uint64_t seed = 1;
};

class MlpRegressor : public Regressor {
 public:
  explicit MlpRegressor(const MlpConfig& config);

  double forward_cached(const Sample& sample) override;
  void backward(double d_out) override;
  void zero_grad() override;
  std::vector<ParamBlock> param_blocks() override;
  uint32_t text_dim() const override { return config_.input_dim; }
  bool uses_image() const override { return false; }
  void save(std::ostream& out) const override;

  const MlpConfig& config() const { return config_; }

 private:
  friend std::unique_ptr<Regressor> load_regressor(std::istream&);
  MlpConfig config_;
  std::vector<DenseLayer> dense_;
  std::vector<ActivationLayer> acts_;
  DenseLayer output_;
};

// Image encoder: conv(3x3)+relu+maxpool blocks, global average pool, then a
// linear projection to out_dim (512). Output width is independent of the
// input resolution.
struct CnnConfig {
  std::vector<uint32_t> channels = {16, 32, 64, 128};
  uint32_t out_dim = 512;
};

struct CnnEncoder {
  CnnConfig config;
  std::vector<ConvLayer> convs;
  std::vector<ActivationLayer> acts;  // one per conv block (tensor relu)
  std::vector<MaxPoolLayer> pools;
  GlobalAvgPoolLayer gap;
  DenseLayer proj;

  void init(const CnnConfig& cfg, Rng& rng);
  std::vector<double> forward(const Tensor& image);
  Tensor backward(const std::vector<double>& d_code);
  void zero_grad();
  void collect(std::vector<ParamBlock>& blocks);
};

// Multi-modal regressor; text_dim = 0 gives the nightlights-only model.
// Image path: encoder -> two relu dense layers (512 -> 384 -> 256); fusion:
// concat(text, 256) -> four relu dense layers (1024/512/256/64) -> linear.
struct MmConfig {
  uint32_t text_dim = 0;
  CnnConfig cnn;
  std::vector<uint32_t> image_head = {384, 256};
  std::vector<uint32_t> trunk = {1024, 512, 256, 64};
  uint64_t seed = 1;
};

class MultiModalRegressor : public Regressor {
 public:
  explicit MultiModalRegressor(const MmConfig& config);

  double forward_cached(const Sample& sample) override;
  void backward(double d_out) override;
  void zero_grad() override;
  std::vector<ParamBlock> param_blocks() override;
  uint32_t text_dim() const override { return config_.text_dim; }
  bool uses_image() const override { return true; }
  void save(std::ostream& out) const override;

  const MmConfig& config() const { return config_; }

 private:
  friend std::unique_ptr<Regressor> load_regressor(std::istream&);
  MmConfig config_;
  CnnEncoder encoder_;
  std::vector<DenseLayer> head_dense_;
  std::vector<ActivationLayer> head_acts_;
  std::vector<DenseLayer> trunk_dense_;
  std::vector<ActivationLayer> trunk_acts_;
  DenseLayer output_;
  std::vector<double> text_cache_;
};

struct TrainConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint32_t epochs = 200;
  uint32_t batch_size = 32;
  uint64_t seed = 1;
  double val_fraction = 0.1;        // seeded holdout for early stopping
  uint32_t early_stop_patience = 20;  // 0 disables early stopping
  bool freeze_embeddings = true;      // inputs are never parameters

  void validate() const;
};

struct TrainResult {
  std::vector<double> train_mse;  // per epoch, over the training split
  std::vector<double> val_mse;    // per epoch; empty when no holdout
  uint32_t epochs_run = 0;
};

// Adam with bias correction over the model's parameter blocks; seeded
// shuffling; early stopping restores the best-validation parameters.
TrainResult train(Regressor& model, const std::vector<Sample>& samples,
                  const TrainConfig& config);

std::vector<double> predict(Regressor& model, const std::vector<Sample>& samples);

// Checkpoint: magic "GWNN", version, architecture descriptor, parameters as
// float32 in layer order.
void save_regressor_file(const Regressor& model, const std::string& path);
std::unique_ptr<Regressor> load_regressor(std::istream& in);
std::unique_ptr<Regressor> load_regressor_file(const std::string& path);

}  // namespace gw
