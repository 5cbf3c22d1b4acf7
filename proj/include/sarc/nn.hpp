#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sarc/matrix.hpp"
#include "sarc/random.hpp"

namespace sarc::nn {

/// A trainable tensor and its gradient accumulator (flat storage).
struct Param {
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  explicit Param(std::size_t n) : value(n, 0.0), grad(n, 0.0) {}
  std::size_t size() const noexcept { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
  friend bool operator==(const Param& a, const Param& b) { return a.value == b.value; }
};

/// Uniform in [-limit, limit] with limit = sqrt(3 / fan_in), i.e. variance 1 / fan_in.
inline void init_fan_in(Param& p, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (auto& v : p.value) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------
// Conv1d: valid cross-correlation. Kernel layout [k][c_in][c_out].
// ---------------------------------------------------------------------------

inline std::size_t conv_output_length(std::size_t t, std::size_t k, std::size_t stride) {
  return t < k ? 0 : (t - k) / stride + 1;
}

inline Matrix conv1d_forward(const Matrix& x, std::span<const double> kernel, std::span<const double> bias,
                             std::size_t k, std::size_t stride = 1) {
  const std::size_t cin = x.cols();
  if (x.rows() < k)
    throw ShapeError("conv1d input length " + std::to_string(x.rows()) + " is shorter than kernel " + std::to_string(k));
  require(stride >= 1 && k >= 1, "conv1d needs kernel >= 1 and stride >= 1");
  require(kernel.size() % (k * cin) == 0, "conv1d kernel size does not match input channels");
  const std::size_t cout = kernel.size() / (k * cin);
  require(bias.size() == cout, "conv1d bias size mismatch");
  const std::size_t tout = conv_output_length(x.rows(), k, stride);
  Matrix y(tout, cout);
  for (std::size_t t = 0; t < tout; ++t) {
    double* yr = y.row(t).data();
    std::copy(bias.begin(), bias.end(), yr);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double* xr = x.row(t * stride + kk).data();
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double xv = xr[ci];
        const double* w = kernel.data() + (kk * cin + ci) * cout;
        for (std::size_t co = 0; co < cout; ++co) yr[co] += xv * w[co];
      }
    }
  }
  return y;
}

/// Accumulates kernel and bias gradients; returns dL/dx.
inline Matrix conv1d_backward(const Matrix& x, const Matrix& dy, std::span<const double> kernel, std::size_t k,
                              std::size_t stride, std::span<double> dkernel, std::span<double> dbias) {
  const std::size_t cin = x.cols(), cout = dy.cols();
  Matrix dx(x.rows(), cin);
  for (std::size_t t = 0; t < dy.rows(); ++t) {
    const double* g = dy.row(t).data();
    for (std::size_t co = 0; co < cout; ++co) dbias[co] += g[co];
    for (std::size_t kk = 0; kk < k; ++kk) {
      const std::size_t src = t * stride + kk;
      const double* xr = x.row(src).data();
      double* dxr = dx.row(src).data();
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* w = kernel.data() + (kk * cin + ci) * cout;
        double* dw = dkernel.data() + (kk * cin + ci) * cout;
        const double xv = xr[ci];
        double acc = 0.0;
        for (std::size_t co = 0; co < cout; ++co) {
          dw[co] += xv * g[co];
          acc += w[co] * g[co];
        }
        dxr[ci] += acc;
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ReLU and max pooling
// ---------------------------------------------------------------------------

inline Matrix relu_forward(Matrix x) {
  for (auto& v : x.data()) v = std::max(0.0, v);
  return x;
}

/// Gradient through ReLU given the layer's output.
inline Matrix relu_backward(const Matrix& y, Matrix dy) {
  for (std::size_t i = 0; i < dy.data().size(); ++i)
    if (!(y.data()[i] > 0.0)) dy.data()[i] = 0.0;
  return dy;
}

struct PoolResult {
  Matrix y;
  std::vector<std::size_t> argmax;  // source row per output element, row-major
};

/// Max over disjoint runs of `size` rows per channel; an odd tail is dropped.
/// Ties route to the first element of the run.
inline PoolResult maxpool1d_forward(const Matrix& x, std::size_t size = 2) {
  if (x.rows() < size)
    throw ShapeError("max pooling input length " + std::to_string(x.rows()) + " is shorter than pool " +
                     std::to_string(size));
  const std::size_t tout = x.rows() / size, c = x.cols();
  PoolResult r{Matrix(tout, c), std::vector<std::size_t>(tout * c)};
  for (std::size_t t = 0; t < tout; ++t)
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::size_t best = t * size;
      for (std::size_t j = 1; j < size; ++j)
        if (x(t * size + j, ch) > x(best, ch)) best = t * size + j;
      r.y(t, ch) = x(best, ch);
      r.argmax[t * c + ch] = best;
    }
  return r;
}

inline Matrix maxpool1d_backward(const PoolResult& p, const Matrix& dy, std::size_t input_rows) {
  Matrix dx(input_rows, dy.cols());
  for (std::size_t t = 0; t < dy.rows(); ++t)
    for (std::size_t ch = 0; ch < dy.cols(); ++ch) dx(p.argmax[t * dy.cols() + ch], ch) += dy(t, ch);
  return dx;
}

// ---------------------------------------------------------------------------
// LSTM: gates i, f, o use the hard sigmoid clamp(0.2 z + 0.5, 0, 1); the
// candidate and cell output use tanh. Gate block order in the weight
// matrices is [i | f | g | o].
// ---------------------------------------------------------------------------

inline double hard_sigmoid(double z) noexcept { return std::clamp(0.2 * z + 0.5, 0.0, 1.0); }
inline double hard_sigmoid_grad(double z) noexcept { return (z > -2.5 && z < 2.5) ? 0.2 : 0.0; }

struct LstmWeights {
  std::size_t input = 0, units = 0;
  std::span<const double> wx;  // input x 4U
  std::span<const double> wh;  // U x 4U
  std::span<const double> b;   // 4U
};

struct LstmGrads {
  std::span<double> wx, wh, b;
};

struct LstmCache {
  Matrix x;      // T x input, after the dropout mask
  Matrix z;      // T x 4U pre-activations
  Matrix act;    // T x 4U gate activations
  Matrix c;      // (T+1) x U, row 0 is the initial state
  Matrix h;      // (T+1) x U
  std::vector<double> mask;  // per input channel multiplier (empty: none)
};

/// Runs the recurrence from a zero state. `mask`, when non-empty, scales each
/// input channel (inverted dropout, same mask at every step). Returns the
/// T x U hidden sequence.
inline Matrix lstm_forward(const Matrix& x, const LstmWeights& p, std::span<const double> mask = {},
                           LstmCache* cache = nullptr) {
  const std::size_t tn = x.rows(), cin = x.cols(), u = p.units, g4 = 4 * u;
  if (cin != p.input) throw ShapeError("lstm input has " + std::to_string(cin) + " channels, expected " + std::to_string(p.input));
  require(p.wx.size() == cin * g4 && p.wh.size() == u * g4 && p.b.size() == g4, "lstm weight shapes inconsistent");
  require(mask.empty() || mask.size() == cin, "lstm dropout mask size mismatch");
  LstmCache local;
  LstmCache& cc = cache ? *cache : local;
  cc.x = x;
  cc.mask.assign(mask.begin(), mask.end());
  if (!mask.empty())
    for (std::size_t t = 0; t < tn; ++t)
      for (std::size_t j = 0; j < cin; ++j) cc.x(t, j) *= mask[j];
  cc.z = Matrix(tn, g4);
  cc.act = Matrix(tn, g4);
  cc.c = Matrix(tn + 1, u);
  cc.h = Matrix(tn + 1, u);
  for (std::size_t t = 0; t < tn; ++t) {
    double* z = cc.z.row(t).data();
    std::copy(p.b.begin(), p.b.end(), z);
    for (std::size_t j = 0; j < cin; ++j) {
      const double xv = cc.x(t, j);
      const double* w = p.wx.data() + j * g4;
      for (std::size_t q = 0; q < g4; ++q) z[q] += xv * w[q];
    }
    for (std::size_t j = 0; j < u; ++j) {
      const double hv = cc.h(t, j);
      const double* w = p.wh.data() + j * g4;
      for (std::size_t q = 0; q < g4; ++q) z[q] += hv * w[q];
    }
    double* a = cc.act.row(t).data();
    for (std::size_t j = 0; j < u; ++j) {
      a[j] = hard_sigmoid(z[j]);
      a[u + j] = hard_sigmoid(z[u + j]);
      a[2 * u + j] = std::tanh(z[2 * u + j]);
      a[3 * u + j] = hard_sigmoid(z[3 * u + j]);
      const double c = a[u + j] * cc.c(t, j) + a[j] * a[2 * u + j];
      cc.c(t + 1, j) = c;
      cc.h(t + 1, j) = a[3 * u + j] * std::tanh(c);
    }
  }
  Matrix out(tn, u);
  for (std::size_t t = 0; t < tn; ++t) std::copy(cc.h.row(t + 1).begin(), cc.h.row(t + 1).end(), out.row(t).begin());
  return out;
}

/// Backpropagation through time. `dh` is dL/dH for every step; accumulates
/// weight gradients and returns dL/dx for the (unmasked) input.
inline Matrix lstm_backward(const LstmCache& cc, const Matrix& dh, const LstmWeights& p, const LstmGrads& g) {
  const std::size_t tn = cc.x.rows(), cin = cc.x.cols(), u = p.units, g4 = 4 * u;
  Matrix dx(tn, cin);
  std::vector<double> dh_next(u, 0.0), dc_next(u, 0.0), dz(g4);
  for (std::size_t ti = tn; ti-- > 0;) {
    const double* a = cc.act.row(ti).data();
    const double* z = cc.z.row(ti).data();
    for (std::size_t j = 0; j < u; ++j) {
      const double dhj = dh(ti, j) + dh_next[j];
      const double c = cc.c(ti + 1, j);
      const double tc = std::tanh(c);
      const double o = a[3 * u + j];
      const double dc = dc_next[j] + dhj * o * (1.0 - tc * tc);
      dz[j] = dc * a[2 * u + j] * hard_sigmoid_grad(z[j]);                 // i
      dz[u + j] = dc * cc.c(ti, j) * hard_sigmoid_grad(z[u + j]);          // f
      dz[2 * u + j] = dc * a[j] * (1.0 - a[2 * u + j] * a[2 * u + j]);     // g
      dz[3 * u + j] = dhj * tc * hard_sigmoid_grad(z[3 * u + j]);          // o
      dc_next[j] = dc * a[u + j];
    }
    for (std::size_t q = 0; q < g4; ++q) g.b[q] += dz[q];
    for (std::size_t j = 0; j < cin; ++j) {
      const double xv = cc.x(ti, j);
      const double* w = p.wx.data() + j * g4;
      double* gw = g.wx.data() + j * g4;
      double acc = 0.0;
      for (std::size_t q = 0; q < g4; ++q) {
        gw[q] += xv * dz[q];
        acc += w[q] * dz[q];
      }
      dx(ti, j) = cc.mask.empty() ? acc : acc * cc.mask[j];
    }
    for (std::size_t j = 0; j < u; ++j) {
      const double hv = cc.h(ti, j);
      const double* w = p.wh.data() + j * g4;
      double* gw = g.wh.data() + j * g4;
      double acc = 0.0;
      for (std::size_t q = 0; q < g4; ++q) {
        gw[q] += hv * dz[q];
        acc += w[q] * dz[q];
      }
      dh_next[j] = acc;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Dense + softmax + cross-entropy with an l2 penalty on the weights
// ---------------------------------------------------------------------------

struct SoftmaxLoss {
  double loss = 0.0;       // mean cross-entropy + lambda * ||W||^2
  double xent = 0.0;       // mean cross-entropy alone
  Matrix probs;            // B x K
  Matrix dh;               // B x U
};

/// Batch loss for logits = h W + b (W is U x K). Gradients of the full loss
/// are accumulated into dw / db; the l2 term excludes the bias.
inline SoftmaxLoss dense_softmax_xent(const Matrix& h, std::span<const double> w, std::span<const double> b,
                                      std::span<const int> labels, double lambda, std::span<double> dw = {},
                                      std::span<double> db = {}) {
  const std::size_t bn = h.rows(), u = h.cols(), k = b.size();
  require(w.size() == u * k, "dense weight shape mismatch");
  require(labels.size() == bn, "dense label count mismatch");
  SoftmaxLoss out{0.0, 0.0, Matrix(bn, k), Matrix(bn, u)};
  const double inv_b = bn > 0 ? 1.0 / static_cast<double>(bn) : 0.0;
  const bool want_grad = !dw.empty();
  std::vector<double> dlogit(k);
  for (std::size_t r = 0; r < bn; ++r) {
    auto p = out.probs.row(r);
    for (std::size_t c = 0; c < k; ++c) p[c] = b[c];
    for (std::size_t j = 0; j < u; ++j) {
      const double hv = h(r, j);
      for (std::size_t c = 0; c < k; ++c) p[c] += hv * w[j * k + c];
    }
    const double mx = *std::max_element(p.begin(), p.end());
    double s = 0.0;
    for (auto& v : p) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    const auto y = static_cast<std::size_t>(labels[r]);
    require(y < k, "label out of range for dense layer");
    out.xent += (lse - p[y]) * inv_b;
    for (auto& v : p) v = std::exp(v - lse);
    if (!want_grad) continue;
    for (std::size_t c = 0; c < k; ++c) dlogit[c] = (p[c] - (c == y ? 1.0 : 0.0)) * inv_b;
    for (std::size_t c = 0; c < k; ++c) db[c] += dlogit[c];
    for (std::size_t j = 0; j < u; ++j) {
      const double hv = h(r, j);
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        dw[j * k + c] += hv * dlogit[c];
        acc += w[j * k + c] * dlogit[c];
      }
      out.dh(r, j) = acc;
    }
  }
  double l2 = 0.0;
  for (double v : w) l2 += v * v;
  out.loss = out.xent + lambda * l2;
  if (want_grad && lambda != 0.0)
    for (std::size_t i = 0; i < w.size(); ++i) dw[i] += 2.0 * lambda * w[i];
  return out;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::size_t step = 0;
};

/// Bias-corrected Adam update of every parameter from its `grad`.
inline void adam_step(std::span<Param* const> params, AdamState& st, const AdamHyper& hp) {
  if (st.m.size() != params.size()) {
    st.m.clear();
    st.v.clear();
    for (auto* p : params) {
      st.m.emplace_back(p->size(), 0.0);
      st.v.emplace_back(p->size(), 0.0);
    }
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = st.m[k];
    auto& v = st.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      p.value[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
  }
}

}  // namespace sarc::nn
