#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sarc/nn.hpp"
#include "sarc/parallel.hpp"
#include "sarc/segment.hpp"

namespace sarc {

struct CrnnConfig {
  std::size_t conv_blocks = 2;
  std::size_t kernel_size = 7;
  std::size_t filters = 128;
  std::size_t pool_size = 2;
  std::size_t lstm_layers = 2;
  std::size_t lstm_units = 64;
  std::size_t n_classes = kNumClasses;
  double dropout = 0.1;
  double l2 = 0.01;
  nn::AdamHyper adam;
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;

  void validate() const {
    require(conv_blocks >= 1 && lstm_layers >= 1, "crnn needs at least one conv block and one lstm layer");
    require(kernel_size >= 1 && filters >= 1 && pool_size >= 1 && lstm_units >= 1, "crnn layer sizes must be positive");
    require(n_classes >= 2, "crnn needs at least 2 classes");
    require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
    require(l2 >= 0.0, "l2 penalty must be non-negative");
    require(batch_size >= 1, "batch size must be positive");
    require(adam.lr > 0.0, "learning rate must be positive");
  }
  friend bool operator==(const CrnnConfig&, const CrnnConfig&) = default;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct ConvLayer {
  std::size_t in = 0, out = 0;
  nn::Param w, b;
};

struct LstmLayer {
  std::size_t in = 0, units = 0;
  nn::Param wx, wh, b;
  nn::LstmWeights weights() const { return {in, units, wx.value, wh.value, b.value}; }
  nn::LstmGrads grads() { return {wx.grad, wh.grad, b.grad}; }
};

struct CrnnModel {
  CrnnConfig config;
  std::size_t window_length = 0;
  std::size_t channels = kNumChannels;
  std::vector<ConvLayer> convs;
  std::vector<LstmLayer> lstms;
  nn::Param dense_w, dense_b;
  std::vector<EpochStats> history;

  std::vector<nn::Param*> params() {
    std::vector<nn::Param*> p;
    for (auto& c : convs) p.insert(p.end(), {&c.w, &c.b});
    for (auto& l : lstms) p.insert(p.end(), {&l.wx, &l.wh, &l.b});
    p.insert(p.end(), {&dense_w, &dense_b});
    return p;
  }
  std::size_t parameter_count() const {
    std::size_t n = dense_w.size() + dense_b.size();
    for (const auto& c : convs) n += c.w.size() + c.b.size();
    for (const auto& l : lstms) n += l.wx.size() + l.wh.size() + l.b.size();
    return n;
  }
  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }
};

/// Time steps reaching the recurrent stack; throws ShapeError naming the
/// first stage whose input is too short.
inline std::size_t crnn_sequence_length(const CrnnConfig& cfg, std::size_t window_length) {
  std::size_t t = window_length;
  for (std::size_t b = 0; b < cfg.conv_blocks; ++b) {
    if (t < cfg.kernel_size)
      throw ShapeError("window of " + std::to_string(window_length) + " samples is too short: conv block " +
                       std::to_string(b + 1) + " receives " + std::to_string(t) + " steps, kernel needs " +
                       std::to_string(cfg.kernel_size));
    t = t - cfg.kernel_size + 1;
    if (t < cfg.pool_size)
      throw ShapeError("window of " + std::to_string(window_length) + " samples is too short: pooling in block " +
                       std::to_string(b + 1) + " receives " + std::to_string(t) + " steps");
    t /= cfg.pool_size;
  }
  return t;
}

/// Allocates and initializes a model for windows of `window_length` samples.
inline CrnnModel crnn_init(const CrnnConfig& cfg, std::size_t window_length, std::size_t channels = kNumChannels) {
  cfg.validate();
  crnn_sequence_length(cfg, window_length);
  CrnnModel m;
  m.config = cfg;
  m.window_length = window_length;
  m.channels = channels;
  Rng rng(cfg.seed, {0xC0DE});
  std::size_t in = channels;
  for (std::size_t b = 0; b < cfg.conv_blocks; ++b) {
    ConvLayer c{in, cfg.filters, nn::Param(cfg.kernel_size * in * cfg.filters), nn::Param(cfg.filters)};
    nn::init_fan_in(c.w, cfg.kernel_size * in, rng);
    m.convs.push_back(std::move(c));
    in = cfg.filters;
  }
  const std::size_t u = cfg.lstm_units;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    LstmLayer ly{in, u, nn::Param(in * 4 * u), nn::Param(u * 4 * u), nn::Param(4 * u)};
    nn::init_fan_in(ly.wx, in, rng);
    nn::init_fan_in(ly.wh, u, rng);
    for (std::size_t j = 0; j < u; ++j) ly.b.value[u + j] = 1.0;  // forget gate bias
    m.lstms.push_back(std::move(ly));
    in = u;
  }
  m.dense_w = nn::Param(u * cfg.n_classes);
  m.dense_b = nn::Param(cfg.n_classes);
  nn::init_fan_in(m.dense_w, u, rng);
  return m;
}

namespace crnn_detail {

struct SampleCache {
  std::vector<Matrix> conv_in, conv_out;  // conv_out is post-ReLU
  std::vector<nn::PoolResult> pool;
  std::vector<nn::LstmCache> lstm;
  std::size_t last_steps = 0;
};

inline Matrix as_matrix(std::span<const double> window, std::size_t length, std::size_t channels) {
  require(window.size() == length * channels, "window shape does not match the model");
  Matrix x(length, channels);
  std::copy(window.begin(), window.end(), x.data().begin());
  return x;
}

/// Final hidden state of the recurrent stack. `masks[l]` is the dropout
/// multiplier for the input of lstm layer l (empty for inference).
inline std::vector<double> forward(const CrnnModel& m, const Matrix& x0, std::span<const std::vector<double>> masks,
                                   SampleCache* cache) {
  Matrix x = x0;
  const auto& cfg = m.config;
  for (std::size_t b = 0; b < m.convs.size(); ++b) {
    const auto& c = m.convs[b];
    Matrix y = nn::relu_forward(nn::conv1d_forward(x, c.w.value, c.b.value, cfg.kernel_size));
    auto p = nn::maxpool1d_forward(y, cfg.pool_size);
    if (cache) {
      cache->conv_in.push_back(std::move(x));
      cache->conv_out.push_back(std::move(y));
    }
    x = p.y;
    if (cache) cache->pool.push_back(std::move(p));
  }
  for (std::size_t l = 0; l < m.lstms.size(); ++l) {
    std::span<const double> mask = masks.empty() ? std::span<const double>{} : std::span<const double>(masks[l]);
    nn::LstmCache* lc = nullptr;
    if (cache) lc = &cache->lstm.emplace_back();
    x = nn::lstm_forward(x, m.lstms[l].weights(), mask, lc);
  }
  if (cache) cache->last_steps = x.rows();
  const auto last = x.row(x.rows() - 1);
  return {last.begin(), last.end()};
}

/// Backpropagates dL/dh_last through one sample, accumulating into `g`
/// (a model with the same shapes used as a gradient buffer).
inline void backward(const CrnnModel& m, const SampleCache& cache, std::span<const double> dh_last, CrnnModel& g) {
  const auto& cfg = m.config;
  Matrix dh(cache.last_steps, cfg.lstm_units);
  std::copy(dh_last.begin(), dh_last.end(), dh.row(cache.last_steps - 1).begin());
  for (std::size_t l = m.lstms.size(); l-- > 0;) dh = nn::lstm_backward(cache.lstm[l], dh, m.lstms[l].weights(), g.lstms[l].grads());
  for (std::size_t b = m.convs.size(); b-- > 0;) {
    Matrix dy = nn::maxpool1d_backward(cache.pool[b], dh, cache.conv_out[b].rows());
    dy = nn::relu_backward(cache.conv_out[b], std::move(dy));
    dh = nn::conv1d_backward(cache.conv_in[b], dy, m.convs[b].w.value, cfg.kernel_size, 1, g.convs[b].w.grad,
                             g.convs[b].b.grad);
  }
}

inline CrnnModel gradient_buffer(const CrnnModel& m) {
  CrnnModel g;
  g.config = m.config;
  for (const auto& c : m.convs) g.convs.push_back({c.in, c.out, nn::Param(c.w.size()), nn::Param(c.b.size())});
  for (const auto& l : m.lstms)
    g.lstms.push_back({l.in, l.units, nn::Param(l.wx.size()), nn::Param(l.wh.size()), nn::Param(l.b.size())});
  g.dense_w = nn::Param(m.dense_w.size());
  g.dense_b = nn::Param(m.dense_b.size());
  return g;
}

inline std::vector<std::vector<double>> dropout_masks(const CrnnModel& m, Rng& rng) {
  std::vector<std::vector<double>> masks;
  const double p = m.config.dropout;
  for (const auto& l : m.lstms) {
    std::vector<double> mk(l.in, 1.0);
    if (p > 0.0)
      for (auto& v : mk) v = rng.uniform() < p ? 0.0 : 1.0 / (1.0 - p);
    masks.push_back(std::move(mk));
  }
  return masks;
}

// Fixed number of gradient partitions so the summation order, and hence the
// result, does not depend on the thread count.
inline constexpr std::size_t kGradChunks = 8;

}  // namespace crnn_detail

struct CrnnBatchResult {
  double loss = 0.0;
  std::size_t correct = 0;
};

/// Loss and gradients (written to the model's `grad` fields) for one batch
/// with fixed dropout masks per sample (`masks` may be empty for no dropout).
inline CrnnBatchResult crnn_loss_and_grad(CrnnModel& m, std::span<const Matrix> xs, std::span<const int> labels,
                                          std::span<const std::vector<std::vector<double>>> masks) {
  using namespace crnn_detail;
  const std::size_t bn = xs.size();
  require(labels.size() == bn, "crnn batch label count mismatch");
  require(masks.empty() || masks.size() == bn, "crnn batch mask count mismatch");
  m.zero_grad();
  std::vector<SampleCache> caches(bn);
  Matrix h(bn, m.config.lstm_units);
  parallel_for(bn, [&](std::size_t i) {
    const std::span<const std::vector<double>> mk =
        masks.empty() ? std::span<const std::vector<double>>{} : std::span<const std::vector<double>>(masks[i]);
    const auto hl = forward(m, xs[i], mk, &caches[i]);
    std::copy(hl.begin(), hl.end(), h.row(i).begin());
  });
  const auto out = nn::dense_softmax_xent(h, m.dense_w.value, m.dense_b.value, labels, m.config.l2, m.dense_w.grad,
                                          m.dense_b.grad);
  CrnnBatchResult r{out.loss, 0};
  for (std::size_t i = 0; i < bn; ++i) {
    const auto p = out.probs.row(i);
    r.correct += static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) == labels[i];
  }
  const std::size_t chunks = std::min(kGradChunks, bn);
  std::vector<CrnnModel> bufs;
  for (std::size_t c = 0; c < chunks; ++c) bufs.push_back(gradient_buffer(m));
  parallel_for(chunks, [&](std::size_t c) {
    for (std::size_t i = bn * c / chunks; i < bn * (c + 1) / chunks; ++i) {
      backward(m, caches[i], out.dh.row(i), bufs[c]);
      caches[i] = SampleCache{};
    }
  });
  auto dst = m.params();
  for (auto& b : bufs) {
    auto src = b.params();
    for (std::size_t k = 0; k + 2 < dst.size(); ++k)  // dense grads already set
      for (std::size_t i = 0; i < dst[k]->size(); ++i) dst[k]->grad[i] += src[k]->grad[i];
  }
  return r;
}

/// Mini-batch training with a seeded shuffle per epoch.
inline CrnnModel crnn_train(std::span<const Matrix> xs, std::span<const int> labels, const CrnnConfig& cfg) {
  require(!xs.empty(), "crnn training set is empty");
  require(labels.size() == xs.size(), "crnn label count mismatch");
  CrnnModel m = crnn_init(cfg, xs.front().rows(), xs.front().cols());
  for (const auto& x : xs)
    if (x.rows() != m.window_length || x.cols() != m.channels) throw ShapeError("crnn training windows differ in shape");
  nn::AdamState adam;
  std::vector<std::size_t> order(xs.size());
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(cfg.seed, {0xE90C, e});
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
      std::vector<Matrix> bx;
      std::vector<int> by;
      std::vector<std::vector<std::vector<double>>> bm;
      for (std::size_t k = b0; k < b1; ++k) {
        bx.push_back(xs[order[k]]);
        by.push_back(labels[order[k]]);
        Rng drop(cfg.seed, {0xD809, e, order[k]});
        bm.push_back(crnn_detail::dropout_masks(m, drop));
      }
      const auto r = crnn_loss_and_grad(m, bx, by, bm);
      loss_sum += r.loss * static_cast<double>(b1 - b0);
      correct += r.correct;
      const auto ps = m.params();
      nn::adam_step(ps, adam, cfg.adam);
    }
    const double n = static_cast<double>(xs.size());
    if (!std::isfinite(loss_sum)) throw ConvergenceError("crnn training diverged at epoch " + std::to_string(e + 1));
    m.history.push_back({e + 1, loss_sum / n, static_cast<double>(correct) / n});
  }
  return m;
}

inline std::vector<Matrix> crnn_inputs(const WindowTensor& wt) {
  std::vector<Matrix> xs;
  xs.reserve(wt.size());
  for (std::size_t i = 0; i < wt.size(); ++i) xs.push_back(crnn_detail::as_matrix(wt.window(i), wt.length, kNumChannels));
  return xs;
}

inline std::vector<int> class_indices(std::span<const ExerciseClass> labels) {
  std::vector<int> y;
  for (auto c : labels) y.push_back(static_cast<int>(c));
  return y;
}

inline CrnnModel crnn_train(const WindowTensor& wt, const CrnnConfig& cfg) {
  crnn_sequence_length(cfg, wt.length);
  const auto xs = crnn_inputs(wt);
  const auto y = class_indices(wt.labels);
  return crnn_train(xs, y, cfg);
}

/// Class probabilities per window (no dropout). Each row depends only on its
/// own window, so results do not depend on batching.
inline Matrix crnn_predict_proba(const CrnnModel& m, std::span<const Matrix> xs) {
  Matrix p(xs.size(), m.config.n_classes);
  parallel_for(xs.size(), [&](std::size_t i) {
    if (xs[i].rows() != m.window_length || xs[i].cols() != m.channels)
      throw ShapeError("window shape " + std::to_string(xs[i].rows()) + "x" + std::to_string(xs[i].cols()) +
                       " does not match the model");
    const auto h = crnn_detail::forward(m, xs[i], {}, nullptr);
    Matrix hm(1, h.size());
    std::copy(h.begin(), h.end(), hm.data().begin());
    const int dummy = 0;
    const auto out = nn::dense_softmax_xent(hm, m.dense_w.value, m.dense_b.value, std::span<const int>(&dummy, 1), 0.0);
    std::copy(out.probs.row(0).begin(), out.probs.row(0).end(), p.row(i).begin());
  });
  return p;
}

inline std::vector<int> crnn_predict(const CrnnModel& m, std::span<const Matrix> xs) {
  const Matrix p = crnn_predict_proba(m, xs);
  std::vector<int> y(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto r = p.row(i);
    y[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return y;
}

inline std::vector<ExerciseClass> crnn_predict(const CrnnModel& m, const WindowTensor& wt) {
  if (wt.length != m.window_length) throw ShapeError("window length does not match the model");
  std::vector<ExerciseClass> out;
  for (int c : crnn_predict(m, crnn_inputs(wt))) out.push_back(static_cast<ExerciseClass>(c));
  return out;
}

}  // namespace sarc
