#include "gw/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gw/binio.hpp"
#include "gw/error.hpp"

namespace gw {

namespace {

constexpr uint32_t kRegressorVersion = 1;
constexpr uint32_t kKindMlp = 0;
constexpr uint32_t kKindMultiModal = 1;

[[noreturn]] void fail(const std::string& msg) { throw Error("nn", msg); }

double glorot_bound(size_t fan_in, size_t fan_out) {
  return std::sqrt(6.0 / double(fan_in + fan_out));
}

}  // namespace

// ---------------------------------------------------------------- layers

void DenseLayer::init(uint32_t in_dim, uint32_t out_dim, Rng& rng) {
  in = in_dim;
  out = out_dim;
  const double s = glorot_bound(in, out);
  w.resize(size_t(in) * out);
  for (double& x : w) x = rng.uniform(-s, s);
  b.assign(out, 0.0);
  gw.assign(w.size(), 0.0);
  gb.assign(out, 0.0);
}

std::vector<double> DenseLayer::forward(const std::vector<double>& x) {
  if (x.size() != in) fail("dimension mismatch: dense layer input");
  x_cache = x;
  std::vector<double> y(out);
  for (uint32_t o = 0; o < out; ++o) {
    const double* row = &w[size_t(o) * in];
    double acc = b[o];
    for (uint32_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  return y;
}

std::vector<double> DenseLayer::backward(const std::vector<double>& dy) {
  if (dy.size() != out) fail("dimension mismatch: dense layer gradient");
  std::vector<double> dx(in, 0.0);
  for (uint32_t o = 0; o < out; ++o) {
    const double g = dy[o];
    gb[o] += g;
    const double* row = &w[size_t(o) * in];
    double* grow = &gw[size_t(o) * in];
    for (uint32_t i = 0; i < in; ++i) {
      grow[i] += g * x_cache[i];
      dx[i] += g * row[i];
    }
  }
  return dx;
}

void DenseLayer::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
}

std::vector<double> ActivationLayer::forward(const std::vector<double>& x) {
  std::vector<double> y(x.size());
  switch (kind) {
    case Activation::Linear:
      y = x;
      break;
    case Activation::Relu:
      for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    case Activation::Sigmoid:
      for (size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
      break;
  }
  y_cache = y;
  return y;
}

std::vector<double> ActivationLayer::backward(const std::vector<double>& dy) {
  if (dy.size() != y_cache.size()) fail("dimension mismatch: activation gradient");
  std::vector<double> dx(dy.size());
  switch (kind) {
    case Activation::Linear:
      dx = dy;
      break;
    case Activation::Relu:
      for (size_t i = 0; i < dy.size(); ++i) dx[i] = y_cache[i] > 0.0 ? dy[i] : 0.0;
      break;
    case Activation::Sigmoid:
      for (size_t i = 0; i < dy.size(); ++i)
        dx[i] = dy[i] * y_cache[i] * (1.0 - y_cache[i]);
      break;
  }
  return dx;
}

void ConvLayer::init(uint32_t in_channels, uint32_t out_channels, Rng& rng) {
  in_ch = in_channels;
  out_ch = out_channels;
  const double s = glorot_bound(size_t(in_ch) * 9, size_t(out_ch) * 9);
  w.resize(size_t(out_ch) * in_ch * 9);
  for (double& x : w) x = rng.uniform(-s, s);
  b.assign(out_ch, 0.0);
  gw.assign(w.size(), 0.0);
  gb.assign(out_ch, 0.0);
}

Tensor ConvLayer::forward(const Tensor& x) {
  if (x.c != in_ch) fail("dimension mismatch: conv input channels");
  if (x.h == 0 || x.w == 0) fail("dimension mismatch: empty conv input");
  x_cache = x;
  Tensor y;
  y.c = out_ch;
  y.h = x.h;
  y.w = x.w;
  y.v.assign(size_t(y.c) * y.h * y.w, 0.0);
  for (uint32_t oc = 0; oc < out_ch; ++oc) {
    for (uint32_t oy = 0; oy < y.h; ++oy) {
      for (uint32_t ox = 0; ox < y.w; ++ox) {
        double acc = b[oc];
        for (uint32_t ic = 0; ic < in_ch; ++ic) {
          const double* kw = &w[(size_t(oc) * in_ch + ic) * 9];
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = int(oy) + ky - 1;
            if (iy < 0 || iy >= int(x.h)) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = int(ox) + kx - 1;
              if (ix < 0 || ix >= int(x.w)) continue;
              acc += kw[ky * 3 + kx] * x.at(ic, uint32_t(iy), uint32_t(ix));
            }
          }
        }
        y.at(oc, oy, ox) = acc;
      }
    }
  }
  return y;
}

Tensor ConvLayer::backward(const Tensor& dy) {
  if (dy.c != out_ch || dy.h != x_cache.h || dy.w != x_cache.w)
    fail("dimension mismatch: conv gradient");
  Tensor dx;
  dx.c = in_ch;
  dx.h = x_cache.h;
  dx.w = x_cache.w;
  dx.v.assign(size_t(dx.c) * dx.h * dx.w, 0.0);
  for (uint32_t oc = 0; oc < out_ch; ++oc) {
    for (uint32_t oy = 0; oy < dy.h; ++oy) {
      for (uint32_t ox = 0; ox < dy.w; ++ox) {
        const double g = dy.at(oc, oy, ox);
        gb[oc] += g;
        for (uint32_t ic = 0; ic < in_ch; ++ic) {
          const double* kw = &w[(size_t(oc) * in_ch + ic) * 9];
          double* kg = &gw[(size_t(oc) * in_ch + ic) * 9];
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = int(oy) + ky - 1;
            if (iy < 0 || iy >= int(dx.h)) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = int(ox) + kx - 1;
              if (ix < 0 || ix >= int(dx.w)) continue;
              kg[ky * 3 + kx] += g * x_cache.at(ic, uint32_t(iy), uint32_t(ix));
              dx.at(ic, uint32_t(iy), uint32_t(ix)) += g * kw[ky * 3 + kx];
            }
          }
        }
      }
    }
  }
  return dx;
}

void ConvLayer::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
}

Tensor MaxPoolLayer::forward(const Tensor& x) {
  if (x.empty()) fail("dimension mismatch: empty pool input");
  in_c = x.c;
  in_h = x.h;
  in_w = x.w;
  Tensor y;
  y.c = x.c;
  y.h = std::max<uint32_t>(1, x.h / 2);
  y.w = std::max<uint32_t>(1, x.w / 2);
  y.v.resize(size_t(y.c) * y.h * y.w);
  argmax.resize(y.v.size());
  size_t out_idx = 0;
  for (uint32_t c = 0; c < y.c; ++c) {
    for (uint32_t oy = 0; oy < y.h; ++oy) {
      const uint32_t y0 = oy * 2, y1 = std::min(x.h, y0 + 2);
      for (uint32_t ox = 0; ox < y.w; ++ox) {
        const uint32_t x0 = ox * 2, x1 = std::min(x.w, x0 + 2);
        double best = -std::numeric_limits<double>::infinity();
        uint32_t best_idx = 0;
        for (uint32_t iy = y0; iy < y1; ++iy) {
          for (uint32_t ix = x0; ix < x1; ++ix) {
            const double v = x.at(c, iy, ix);
            if (v > best) {  // first maximum wins ties
              best = v;
              best_idx = uint32_t((size_t(c) * x.h + iy) * x.w + ix);
            }
          }
        }
        y.v[out_idx] = best;
        argmax[out_idx] = best_idx;
        ++out_idx;
      }
    }
  }
  return y;
}

Tensor MaxPoolLayer::backward(const Tensor& dy) {
  if (dy.v.size() != argmax.size()) fail("dimension mismatch: pool gradient");
  Tensor dx;
  dx.c = in_c;
  dx.h = in_h;
  dx.w = in_w;
  dx.v.assign(size_t(in_c) * in_h * in_w, 0.0);
  for (size_t i = 0; i < dy.v.size(); ++i) dx.v[argmax[i]] += dy.v[i];
  return dx;
}

std::vector<double> GlobalAvgPoolLayer::forward(const Tensor& x) {
  if (x.empty()) fail("dimension mismatch: empty pool input");
  in_c = x.c;
  in_h = x.h;
  in_w = x.w;
  std::vector<double> y(x.c, 0.0);
  const double scale = 1.0 / (double(x.h) * x.w);
  for (uint32_t c = 0; c < x.c; ++c) {
    double acc = 0.0;
    for (uint32_t iy = 0; iy < x.h; ++iy)
      for (uint32_t ix = 0; ix < x.w; ++ix) acc += x.at(c, iy, ix);
    y[c] = acc * scale;
  }
  return y;
}

Tensor GlobalAvgPoolLayer::backward(const std::vector<double>& dy) {
  if (dy.size() != in_c) fail("dimension mismatch: pool gradient");
  Tensor dx;
  dx.c = in_c;
  dx.h = in_h;
  dx.w = in_w;
  dx.v.resize(size_t(in_c) * in_h * in_w);
  const double scale = 1.0 / (double(in_h) * in_w);
  for (uint32_t c = 0; c < in_c; ++c)
    for (uint32_t iy = 0; iy < in_h; ++iy)
      for (uint32_t ix = 0; ix < in_w; ++ix) dx.at(c, iy, ix) = dy[c] * scale;
  return dx;
}

double mse_loss(double pred, double truth, double* d_pred) {
  const double diff = pred - truth;
  if (d_pred) *d_pred = 2.0 * diff;
  return diff * diff;
}

// ------------------------------------------------------------------- MLP

MlpRegressor::MlpRegressor(const MlpConfig& config) : config_(config) {
  if (config.input_dim < 1) fail("mlp input dimension must be at least 1");
  if (config.hidden.size() != config.activations.size())
    fail("mlp hidden widths and activations differ in count");
  Rng rng(config.seed);
  uint32_t width = config.input_dim;
  for (size_t i = 0; i < config.hidden.size(); ++i) {
    if (config.hidden[i] < 1) fail("mlp hidden width must be at least 1");
    DenseLayer layer;
    layer.init(width, config.hidden[i], rng);
    dense_.push_back(std::move(layer));
    acts_.push_back(ActivationLayer{config.activations[i], {}});
    width = config.hidden[i];
  }
  output_.init(width, 1, rng);
}

double MlpRegressor::forward_cached(const Sample& sample) {
  if (sample.text.size() != config_.input_dim)
    fail("dimension mismatch: mlp text input");
  std::vector<double> h = sample.text;
  for (size_t i = 0; i < dense_.size(); ++i) {
    h = dense_[i].forward(h);
    h = acts_[i].forward(h);
  }
  return output_.forward(h)[0];
}

void MlpRegressor::backward(double d_out) {
  std::vector<double> g = output_.backward({d_out});
  for (size_t i = dense_.size(); i-- > 0;) {
    g = acts_[i].backward(g);
    g = dense_[i].backward(g);
  }
}

void MlpRegressor::zero_grad() {
  for (DenseLayer& l : dense_) l.zero_grad();
  output_.zero_grad();
}

std::vector<ParamBlock> MlpRegressor::param_blocks() {
  std::vector<ParamBlock> blocks;
  for (DenseLayer& l : dense_) {
    blocks.push_back({&l.w, &l.gw});
    blocks.push_back({&l.b, &l.gb});
  }
  blocks.push_back({&output_.w, &output_.gw});
  blocks.push_back({&output_.b, &output_.gb});
  return blocks;
}

// ----------------------------------------------------------- CNN encoder

void CnnEncoder::init(const CnnConfig& cfg, Rng& rng) {
  if (cfg.channels.empty()) fail("cnn needs at least one conv block");
  if (cfg.out_dim < 1) fail("cnn output dimension must be at least 1");
  config = cfg;
  convs.clear();
  acts.clear();
  pools.clear();
  uint32_t ch = 1;
  for (uint32_t next : cfg.channels) {
    if (next < 1) fail("cnn channel count must be at least 1");
    ConvLayer conv;
    conv.init(ch, next, rng);
    convs.push_back(std::move(conv));
    acts.push_back(ActivationLayer{Activation::Relu, {}});
    pools.push_back(MaxPoolLayer{});
    ch = next;
  }
  proj.init(ch, cfg.out_dim, rng);
}

std::vector<double> CnnEncoder::forward(const Tensor& image) {
  Tensor t = image;
  for (size_t i = 0; i < convs.size(); ++i) {
    t = convs[i].forward(t);
    Tensor activated = t;
    activated.v = acts[i].forward(t.v);
    t = pools[i].forward(activated);
  }
  return proj.forward(gap.forward(t));
}

Tensor CnnEncoder::backward(const std::vector<double>& d_code) {
  Tensor g = gap.backward(proj.backward(d_code));
  for (size_t i = convs.size(); i-- > 0;) {
    g = pools[i].backward(g);
    g.v = acts[i].backward(g.v);
    g = convs[i].backward(g);
  }
  return g;
}

void CnnEncoder::zero_grad() {
  for (ConvLayer& c : convs) c.zero_grad();
  proj.zero_grad();
}

void CnnEncoder::collect(std::vector<ParamBlock>& blocks) {
  for (ConvLayer& c : convs) {
    blocks.push_back({&c.w, &c.gw});
    blocks.push_back({&c.b, &c.gb});
  }
  blocks.push_back({&proj.w, &proj.gw});
  blocks.push_back({&proj.b, &proj.gb});
}

// ------------------------------------------------------------ multimodal

MultiModalRegressor::MultiModalRegressor(const MmConfig& config) : config_(config) {
  if (config.trunk.empty()) fail("fusion trunk needs at least one layer");
  Rng rng(config.seed);
  encoder_.init(config.cnn, rng);
  uint32_t width = config.cnn.out_dim;
  for (uint32_t next : config.image_head) {
    if (next < 1) fail("image head width must be at least 1");
    DenseLayer layer;
    layer.init(width, next, rng);
    head_dense_.push_back(std::move(layer));
    head_acts_.push_back(ActivationLayer{Activation::Relu, {}});
    width = next;
  }
  width += config.text_dim;  // concat(text, image code)
  for (uint32_t next : config.trunk) {
    if (next < 1) fail("trunk width must be at least 1");
    DenseLayer layer;
    layer.init(width, next, rng);
    trunk_dense_.push_back(std::move(layer));
    trunk_acts_.push_back(ActivationLayer{Activation::Relu, {}});
    width = next;
  }
  output_.init(width, 1, rng);
}

double MultiModalRegressor::forward_cached(const Sample& sample) {
  if (sample.text.size() != config_.text_dim)
    fail("dimension mismatch: multimodal text input");
  if (sample.image.empty() || sample.image.c != 1)
    fail("dimension mismatch: multimodal expects a 1-channel image");
  text_cache_ = sample.text;
  std::vector<double> code = encoder_.forward(sample.image);
  for (size_t i = 0; i < head_dense_.size(); ++i) {
    code = head_dense_[i].forward(code);
    code = head_acts_[i].forward(code);
  }
  std::vector<double> h;
  h.reserve(config_.text_dim + code.size());
  h.insert(h.end(), sample.text.begin(), sample.text.end());
  h.insert(h.end(), code.begin(), code.end());
  for (size_t i = 0; i < trunk_dense_.size(); ++i) {
    h = trunk_dense_[i].forward(h);
    h = trunk_acts_[i].forward(h);
  }
  return output_.forward(h)[0];
}

void MultiModalRegressor::backward(double d_out) {
  std::vector<double> g = output_.backward({d_out});
  for (size_t i = trunk_dense_.size(); i-- > 0;) {
    g = trunk_acts_[i].backward(g);
    g = trunk_dense_[i].backward(g);
  }
  // Split the concat gradient; text inputs are frozen features, so their
  // slice is dropped.
  std::vector<double> g_code(g.begin() + config_.text_dim, g.end());
  for (size_t i = head_dense_.size(); i-- > 0;) {
    g_code = head_acts_[i].backward(g_code);
    g_code = head_dense_[i].backward(g_code);
  }
  encoder_.backward(g_code);
}

void MultiModalRegressor::zero_grad() {
  encoder_.zero_grad();
  for (DenseLayer& l : head_dense_) l.zero_grad();
  for (DenseLayer& l : trunk_dense_) l.zero_grad();
  output_.zero_grad();
}

std::vector<ParamBlock> MultiModalRegressor::param_blocks() {
  std::vector<ParamBlock> blocks;
  encoder_.collect(blocks);
  for (DenseLayer& l : head_dense_) {
    blocks.push_back({&l.w, &l.gw});
    blocks.push_back({&l.b, &l.gb});
  }
  for (DenseLayer& l : trunk_dense_) {
    blocks.push_back({&l.w, &l.gw});
    blocks.push_back({&l.b, &l.gb});
  }
  blocks.push_back({&output_.w, &output_.gw});
  blocks.push_back({&output_.b, &output_.gb});
  return blocks;
}

// --------------------------------------------------------------- training

void TrainConfig::validate() const {
  // lr 0 is tolerated for diagnostics (no-op steps); negative is not.
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("learning rate must be finite and non-negative");
  if (epochs < 1) fail("epochs must be at least 1");
  if (batch_size < 1) fail("batch size must be at least 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) fail("val_fraction must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    fail("adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) fail("adam epsilon must be positive");
}

namespace {

struct Adam {
  const TrainConfig& cfg;
  uint64_t t = 0;
  std::vector<std::vector<double>> m, v;

  explicit Adam(const TrainConfig& c, const std::vector<ParamBlock>& blocks) : cfg(c) {
    for (const ParamBlock& b : blocks) {
      m.emplace_back(b.values->size(), 0.0);
      v.emplace_back(b.values->size(), 0.0);
    }
  }

  void step(std::vector<ParamBlock>& blocks) {
    ++t;
    const double c1 = 1.0 - std::pow(cfg.beta1, double(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(t));
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      std::vector<double>& p = *blocks[bi].values;
      const std::vector<double>& g = *blocks[bi].grads;
      for (size_t i = 0; i < p.size(); ++i) {
        m[bi][i] = cfg.beta1 * m[bi][i] + (1.0 - cfg.beta1) * g[i];
        v[bi][i] = cfg.beta2 * v[bi][i] + (1.0 - cfg.beta2) * g[i] * g[i];
        p[i] -= cfg.lr * (m[bi][i] / c1) / (std::sqrt(v[bi][i] / c2) + cfg.epsilon);
      }
    }
  }
};

double mean_mse(Regressor& model, const std::vector<Sample>& samples,
                const std::vector<size_t>& idx) {
  double acc = 0.0;
  for (size_t i : idx) acc += mse_loss(model.forward_cached(samples[i]), samples[i].target, nullptr);
  return acc / double(idx.size());
}

std::vector<std::vector<double>> snapshot(const std::vector<ParamBlock>& blocks) {
  std::vector<std::vector<double>> out;
  out.reserve(blocks.size());
  for (const ParamBlock& b : blocks) out.push_back(*b.values);
  return out;
}

void restore(std::vector<ParamBlock>& blocks, const std::vector<std::vector<double>>& snap) {
  for (size_t i = 0; i < blocks.size(); ++i) *blocks[i].values = snap[i];
}

}  // namespace

TrainResult train(Regressor& model, const std::vector<Sample>& samples,
                  const TrainConfig& config) {
  config.validate();
  if (samples.empty()) fail("empty dataset");

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);
  rng.shuffle(order);

  const size_t val_count = size_t(double(samples.size()) * config.val_fraction);
  std::vector<size_t> val_idx(order.begin(), order.begin() + val_count);
  std::vector<size_t> train_idx(order.begin() + val_count, order.end());
  if (train_idx.empty()) fail("validation split leaves no training data");
  const bool has_val = !val_idx.empty();

  std::vector<ParamBlock> blocks = model.param_blocks();
  Adam adam(config, blocks);

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  uint32_t since_best = 0;

  for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < train_idx.size(); start += config.batch_size) {
      const size_t stop = std::min(train_idx.size(), start + config.batch_size);
      const double inv_batch = 1.0 / double(stop - start);
      model.zero_grad();
      for (size_t k = start; k < stop; ++k) {
        const Sample& s = samples[train_idx[k]];
        const double pred = model.forward_cached(s);
        double d_pred = 0.0;
        epoch_loss += mse_loss(pred, s.target, &d_pred);
        model.backward(d_pred * inv_batch);
      }
      adam.step(blocks);
    }
    epoch_loss /= double(train_idx.size());
    if (!std::isfinite(epoch_loss)) fail("diverged");
    result.train_mse.push_back(epoch_loss);
    ++result.epochs_run;

    if (has_val) {
      const double val = mean_mse(model, samples, val_idx);
      if (!std::isfinite(val)) fail("diverged");
      result.val_mse.push_back(val);
      if (val < best_val) {
        best_val = val;
        best_params = snapshot(blocks);
        since_best = 0;
      } else {
        ++since_best;
        if (config.early_stop_patience > 0 && since_best >= config.early_stop_patience)
          break;
      }
    }
  }
  if (!best_params.empty()) restore(blocks, best_params);
  return result;
}

std::vector<double> predict(Regressor& model, const std::vector<Sample>& samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(model.forward_cached(s));
  return out;
}

// ------------------------------------------------------------ checkpoints

namespace {

void write_u32_list(std::ostream& out, const std::vector<uint32_t>& v) {
  binio::write_pod(out, uint32_t(v.size()));
  for (uint32_t x : v) binio::write_pod(out, x);
}

std::vector<uint32_t> read_u32_list(std::istream& in, const char* what) {
  const auto n = binio::read_pod<uint32_t>(in, what);
  std::vector<uint32_t> v(n);
  for (uint32_t& x : v) x = binio::read_pod<uint32_t>(in, what);
  return v;
}

void write_params(std::ostream& out, const Regressor& model) {
  auto blocks = const_cast<Regressor&>(model).param_blocks();
  uint64_t total = 0;
  for (const ParamBlock& b : blocks) total += b.values->size();
  binio::write_pod(out, total);
  for (const ParamBlock& b : blocks)
    for (double x : *b.values) binio::write_pod(out, float(x));
}

void read_params(std::istream& in, Regressor& model) {
  auto blocks = model.param_blocks();
  uint64_t total = 0;
  for (const ParamBlock& b : blocks) total += b.values->size();
  const auto stored = binio::read_pod<uint64_t>(in, "parameter count");
  if (stored != total) fail("checkpoint parameter count does not match architecture");
  for (ParamBlock& b : blocks)
    for (double& x : *b.values) x = double(binio::read_pod<float>(in, "parameter"));
}

}  // namespace

void MlpRegressor::save(std::ostream& out) const {
  binio::write_magic(out, "GWNN");
  binio::write_pod(out, kRegressorVersion);
  binio::write_pod(out, kKindMlp);
  binio::write_pod(out, config_.input_dim);
  write_u32_list(out, config_.hidden);
  std::vector<uint32_t> acts;
  for (Activation a : config_.activations) acts.push_back(uint32_t(a));
  write_u32_list(out, acts);
  binio::write_pod(out, config_.seed);
  write_params(out, *this);
  if (!out) fail("failed writing regressor checkpoint");
}

void MultiModalRegressor::save(std::ostream& out) const {
  binio::write_magic(out, "GWNN");
  binio::write_pod(out, kRegressorVersion);
  binio::write_pod(out, kKindMultiModal);
  binio::write_pod(out, config_.text_dim);
  write_u32_list(out, config_.cnn.channels);
  binio::write_pod(out, config_.cnn.out_dim);
  write_u32_list(out, config_.image_head);
  write_u32_list(out, config_.trunk);
  binio::write_pod(out, config_.seed);
  write_params(out, *this);
  if (!out) fail("failed writing regressor checkpoint");
}

void save_regressor_file(const Regressor& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  model.save(out);
}

std::unique_ptr<Regressor> load_regressor(std::istream& in) {
  try {
    binio::expect_magic(in, "GWNN", "regressor checkpoint");
    const auto version = binio::read_pod<uint32_t>(in, "version");
    if (version != kRegressorVersion) fail("unsupported regressor version");
    const auto kind = binio::read_pod<uint32_t>(in, "model kind");
    if (kind == kKindMlp) {
      MlpConfig cfg;
      cfg.input_dim = binio::read_pod<uint32_t>(in, "input dim");
      cfg.hidden = read_u32_list(in, "hidden widths");
      cfg.activations.clear();
      for (uint32_t a : read_u32_list(in, "activations")) {
        if (a > uint32_t(Activation::Sigmoid)) fail("corrupt checkpoint: bad activation");
        cfg.activations.push_back(Activation(a));
      }
      cfg.seed = binio::read_pod<uint64_t>(in, "seed");
      auto model = std::make_unique<MlpRegressor>(cfg);
      read_params(in, *model);
      return model;
    }
    if (kind == kKindMultiModal) {
      MmConfig cfg;
      cfg.text_dim = binio::read_pod<uint32_t>(in, "text dim");
      cfg.cnn.channels = read_u32_list(in, "cnn channels");
      cfg.cnn.out_dim = binio::read_pod<uint32_t>(in, "cnn out dim");
      cfg.image_head = read_u32_list(in, "image head");
      cfg.trunk = read_u32_list(in, "trunk");
      cfg.seed = binio::read_pod<uint64_t>(in, "seed");
      auto model = std::make_unique<MultiModalRegressor>(cfg);
      read_params(in, *model);
      return model;
    }
    fail("unknown regressor kind");
  } catch (const Error& e) {
    throw Error("nn", e.what());
  }
}

std::unique_ptr<Regressor> load_regressor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open: " + path);
  return load_regressor(in);
}

}  // namespace gw
