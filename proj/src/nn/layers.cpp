// Copyright 2026 The skinscreen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skinscreen/errors.hpp"
#include "skinscreen/nn.hpp"
#include "skinscreen/simd.hpp"

namespace skinscreen::nn {
namespace {

void he_normal(Tensor& t, int fan_in, std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
  for (auto& v : t.values()) v = dist(rng);
}

void glorot_uniform(Tensor& t, int fan_in, int fan_out, std::mt19937_64& rng) {
  const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  std::uniform_real_distribution<float> dist(-limit, limit);
  for (auto& v : t.values()) v = dist(rng);
}

Parameter make_param(std::string name, std::vector<int> shape, float fill = 0.0f) {
  Parameter p{std::move(name), Tensor(shape, fill), Tensor(shape, 0.0f)};
  return p;
}

void require_rank(const Tensor& x, std::size_t rank, const char* layer) {
  if (x.rank() != rank) {
    std::ostringstream msg;
    msg << layer << " expects a rank-" << rank << " tensor, got rank " << x.rank();
    throw InvalidInput(msg.str());
  }
}

float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

}  // namespace

// --- Sequential -------------------------------------------------------------

Tensor Sequential::forward(const Tensor& x, Mode mode) {
  Tensor cur = x;
  for (auto& layer : layers_) cur = layer->forward(cur, mode);
  return cur;
}

Tensor Sequential::backward(const Tensor& grad) {
  Tensor cur = grad;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
  return cur;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    auto p = layer->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<Tensor*> Sequential::buffers() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    auto b = layer->buffers();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

double Sequential::penalty() const {
  double total = 0.0;
  for (const auto& layer : layers_) total += layer->penalty();
  return total;
}

// --- Conv2d -----------------------------------------------------------------

Conv2d::Conv2d(const Conv2dOptions& options, std::mt19937_64& rng) : options_(options) {
  if (options_.padding < 0) options_.padding = options_.kernel / 2;
  if (options_.depthwise && options_.in_channels != options_.out_channels) {
    throw InvalidInput("depthwise convolution requires in_channels == out_channels");
  }
  const int k = options_.kernel;
  if (options_.depthwise) {
    weight_ = make_param("weight", {options_.out_channels, 1, k, k});
    he_normal(weight_.value, k * k, rng);
  } else {
    weight_ = make_param("weight", {options_.out_channels, options_.in_channels, k, k});
    he_normal(weight_.value, options_.in_channels * k * k, rng);
  }
  bias_ = make_param("bias", {options_.bias ? options_.out_channels : 0});
}

std::vector<Parameter*> Conv2d::parameters() {
  if (options_.bias) return {&weight_, &bias_};
  return {&weight_};
}

namespace {

struct ConvGeometry {
  int n, c, h, w, k, s, p, ho, wo;
};

ConvGeometry geometry(const Tensor& x, const Conv2dOptions& o) {
  require_rank(x, 4, "conv2d");
  if (x.dim(1) != o.in_channels) throw InvalidInput("conv2d channel mismatch");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), o.kernel, o.stride, o.padding, 0, 0};
  g.ho = (g.h + 2 * g.p - g.k) / g.s + 1;
  g.wo = (g.w + 2 * g.p - g.k) / g.s + 1;
  if (g.ho < 1 || g.wo < 1) throw InvalidInput("conv2d input smaller than kernel");
  return g;
}

void im2col(const float* x, const ConvGeometry& g, float* col) {
  const std::size_t plane = static_cast<std::size_t>(g.ho) * g.wo;
  for (int c = 0; c < g.c; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        float* dst = col + (static_cast<std::size_t>(c) * g.k * g.k + ky * g.k + kx) * plane;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.s + ky - g.p;
          float* drow = dst + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(drow, drow + g.wo, 0.0f);
            continue;
          }
          const float* srow = x + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.s + kx - g.p;
            drow[ox] = (ix >= 0 && ix < g.w) ? srow[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, const ConvGeometry& g, float* x) {
  const std::size_t plane = static_cast<std::size_t>(g.ho) * g.wo;
  for (int c = 0; c < g.c; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const float* src = col + (static_cast<std::size_t>(c) * g.k * g.k + ky * g.k + kx) * plane;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.s + ky - g.p;
          if (iy < 0 || iy >= g.h) continue;
          float* xrow = x + (static_cast<std::size_t>(c) * g.h + iy) * g.w;
          const float* srow = src + static_cast<std::size_t>(oy) * g.wo;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.s + kx - g.p;
            if (ix >= 0 && ix < g.w) xrow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

// Valid output column range [lo, hi) for kernel offset kx at stride 1.
std::pair<int, int> valid_range(int kx, int pad, int in_len, int out_len) {
  const int lo = std::max(0, pad - kx);
  const int hi = std::min(out_len, in_len + pad - kx);
  return {lo, std::max(lo, hi)};
}

}  // namespace

Tensor Conv2d::forward(const Tensor& x, Mode) {
  const ConvGeometry g = geometry(x, options_);
  input_ = x;
  const int out_c = options_.out_channels;
  Tensor y({g.n, out_c, g.ho, g.wo});
  const std::size_t plane = static_cast<std::size_t>(g.ho) * g.wo;
  const std::size_t in_plane = static_cast<std::size_t>(g.h) * g.w;
  const auto& kern = simd::kernels();

  if (options_.depthwise) {
    for (int n = 0; n < g.n; ++n) {
      for (int c = 0; c < g.c; ++c) {
        const float* xin = x.data() + (static_cast<std::size_t>(n) * g.c + c) * in_plane;
        float* yout = y.data() + (static_cast<std::size_t>(n) * out_c + c) * plane;
        const float* wk = weight_.value.data() + static_cast<std::size_t>(c) * g.k * g.k;
        if (options_.bias) std::fill(yout, yout + plane, bias_.value[static_cast<std::size_t>(c)]);
        for (int oy = 0; oy < g.ho; ++oy) {
          float* yrow = yout + static_cast<std::size_t>(oy) * g.wo;
          for (int ky = 0; ky < g.k; ++ky) {
            const int iy = oy * g.s + ky - g.p;
            if (iy < 0 || iy >= g.h) continue;
            const float* xrow = xin + static_cast<std::size_t>(iy) * g.w;
            for (int kx = 0; kx < g.k; ++kx) {
              const float wv = wk[ky * g.k + kx];
              if (g.s == 1) {
                const auto [lo, hi] = valid_range(kx, g.p, g.w, g.wo);
                if (hi > lo) kern.axpy(wv, xrow + lo + kx - g.p, yrow + lo, static_cast<std::size_t>(hi - lo));
              } else {
                for (int ox = 0; ox < g.wo; ++ox) {
                  const int ix = ox * g.s + kx - g.p;
                  if (ix >= 0 && ix < g.w) yrow[ox] += wv * xrow[ix];
                }
              }
            }
          }
        }
      }
    }
    return y;
  }

  const int ckk = g.c * g.k * g.k;
  const bool pointwise = g.k == 1 && g.s == 1 && g.p == 0;
  std::vector<float> col(pointwise ? 0 : static_cast<std::size_t>(ckk) * plane);
  for (int n = 0; n < g.n; ++n) {
    const float* xin = x.data() + static_cast<std::size_t>(n) * g.c * in_plane;
    float* yout = y.data() + static_cast<std::size_t>(n) * out_c * plane;
    if (options_.bias) {
      for (int o = 0; o < out_c; ++o) {
        std::fill(yout + o * plane, yout + (o + 1) * plane, bias_.value[static_cast<std::size_t>(o)]);
      }
    }
    const float* cols = xin;
    if (!pointwise) {
      im2col(xin, g, col.data());
      cols = col.data();
    }
    gemm_nn(out_c, static_cast<int>(plane), ckk, weight_.value.data(), cols, yout);
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad) {
  const ConvGeometry g = geometry(input_, options_);
  const int out_c = options_.out_channels;
  const std::size_t plane = static_cast<std::size_t>(g.ho) * g.wo;
  const std::size_t in_plane = static_cast<std::size_t>(g.h) * g.w;
  Tensor dx(input_.shape());
  const auto& kern = simd::kernels();

  if (options_.bias) {
    for (int n = 0; n < g.n; ++n) {
      for (int o = 0; o < out_c; ++o) {
        bias_.grad[static_cast<std::size_t>(o)] +=
            kern.sum(grad.data() + (static_cast<std::size_t>(n) * out_c + o) * plane, plane);
      }
    }
  }

  if (options_.depthwise) {
    for (int n = 0; n < g.n; ++n) {
      for (int c = 0; c < g.c; ++c) {
        const float* xin = input_.data() + (static_cast<std::size_t>(n) * g.c + c) * in_plane;
        float* dxin = dx.data() + (static_cast<std::size_t>(n) * g.c + c) * in_plane;
        const float* gout = grad.data() + (static_cast<std::size_t>(n) * out_c + c) * plane;
        const float* wk = weight_.value.data() + static_cast<std::size_t>(c) * g.k * g.k;
        float* dwk = weight_.grad.data() + static_cast<std::size_t>(c) * g.k * g.k;
        for (int oy = 0; oy < g.ho; ++oy) {
          const float* grow = gout + static_cast<std::size_t>(oy) * g.wo;
          for (int ky = 0; ky < g.k; ++ky) {
            const int iy = oy * g.s + ky - g.p;
            if (iy < 0 || iy >= g.h) continue;
            const float* xrow = xin + static_cast<std::size_t>(iy) * g.w;
            float* dxrow = dxin + static_cast<std::size_t>(iy) * g.w;
            for (int kx = 0; kx < g.k; ++kx) {
              const float wv = wk[ky * g.k + kx];
              if (g.s == 1) {
                const auto [lo, hi] = valid_range(kx, g.p, g.w, g.wo);
                if (hi <= lo) continue;
                const auto len = static_cast<std::size_t>(hi - lo);
                dwk[ky * g.k + kx] += kern.dot(grow + lo, xrow + lo + kx - g.p, len);
                kern.axpy(wv, grow + lo, dxrow + lo + kx - g.p, len);
              } else {
                float acc = 0.0f;
                for (int ox = 0; ox < g.wo; ++ox) {
                  const int ix = ox * g.s + kx - g.p;
                  if (ix < 0 || ix >= g.w) continue;
                  acc += grow[ox] * xrow[ix];
                  dxrow[ix] += wv * grow[ox];
                }
                dwk[ky * g.k + kx] += acc;
              }
            }
          }
        }
      }
    }
    return dx;
  }

  const int ckk = g.c * g.k * g.k;
  const bool pointwise = g.k == 1 && g.s == 1 && g.p == 0;
  std::vector<float> col(pointwise ? 0 : static_cast<std::size_t>(ckk) * plane);
  std::vector<float> dcol(pointwise ? 0 : static_cast<std::size_t>(ckk) * plane);
  for (int n = 0; n < g.n; ++n) {
    const float* xin = input_.data() + static_cast<std::size_t>(n) * g.c * in_plane;
    float* dxin = dx.data() + static_cast<std::size_t>(n) * g.c * in_plane;
    const float* gout = grad.data() + static_cast<std::size_t>(n) * out_c * plane;
    if (pointwise) {
      gemm_nt(out_c, ckk, static_cast<int>(plane), gout, xin, weight_.grad.data());
      gemm_tn(ckk, static_cast<int>(plane), out_c, weight_.value.data(), gout, dxin);
    } else {
      im2col(xin, g, col.data());
      gemm_nt(out_c, ckk, static_cast<int>(plane), gout, col.data(), weight_.grad.data());
      std::fill(dcol.begin(), dcol.end(), 0.0f);
      gemm_tn(ckk, static_cast<int>(plane), out_c, weight_.value.data(), gout, dcol.data());
      col2im(dcol.data(), g, dxin);
    }
  }
  return dx;
}

// --- BatchNorm --------------------------------------------------------------

BatchNorm::BatchNorm(int features, float momentum, float epsilon)
    : features_(features),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_(make_param("gamma", {features}, 1.0f)),
      beta_(make_param("beta", {features}, 0.0f)),
      running_mean_({features}, 0.0f),
      running_var_({features}, 1.0f) {}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
  if (x.rank() != 2 && x.rank() != 4) throw InvalidInput("batch_norm expects rank 2 or 4");
  if (x.dim(1) != features_) throw InvalidInput("batch_norm feature mismatch");
  const int n = x.dim(0);
  const std::size_t spatial = x.rank() == 4 ? static_cast<std::size_t>(x.dim(2)) * x.dim(3) : 1;
  const auto& kern = simd::kernels();
  Tensor y(x.shape());
  x_hat_ = Tensor(x.shape());
  inv_std_.assign(static_cast<std::size_t>(features_), 0.0f);
  last_mode_ = mode;
  const double count = static_cast<double>(n) * static_cast<double>(spatial);

  for (int c = 0; c < features_; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    float mean = running_mean_[ci];
    float var = running_var_[ci];
    if (mode == Mode::train) {
      double s = 0.0, sq = 0.0;
      for (int b = 0; b < n; ++b) {
        const float* src = x.data() + (static_cast<std::size_t>(b) * features_ + ci) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) {
          s += src[i];
          sq += static_cast<double>(src[i]) * src[i];
        }
      }
      const double m = s / count;
      const double v = std::max(0.0, sq / count - m * m);
      mean = static_cast<float>(m);
      var = static_cast<float>(v);
      running_mean_[ci] = momentum_ * running_mean_[ci] + (1.0f - momentum_) * mean;
      running_var_[ci] = momentum_ * running_var_[ci] + (1.0f - momentum_) * var;
    }
    const float inv = 1.0f / std::sqrt(var + epsilon_);
    inv_std_[ci] = inv;
    const float g = gamma_.value[ci];
    const float bt = beta_.value[ci];
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * features_ + ci) * spatial;
      kern.scale_shift(x.data() + off, inv, -mean * inv, x_hat_.data() + off, spatial);
      kern.scale_shift(x_hat_.data() + off, g, bt, y.data() + off, spatial);
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad) {
  const int n = grad.dim(0);
  const std::size_t spatial = grad.rank() == 4 ? static_cast<std::size_t>(grad.dim(2)) * grad.dim(3) : 1;
  const auto& kern = simd::kernels();
  Tensor dx(grad.shape());
  const double count = static_cast<double>(n) * static_cast<double>(spatial);
  for (int c = 0; c < features_; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * features_ + ci) * spatial;
      sum_dy += kern.sum(grad.data() + off, spatial);
      sum_dy_xhat += kern.dot(grad.data() + off, x_hat_.data() + off, spatial);
    }
    gamma_.grad[ci] += static_cast<float>(sum_dy_xhat);
    beta_.grad[ci] += static_cast<float>(sum_dy);
    const float g = gamma_.value[ci] * inv_std_[ci];
    if (last_mode_ == Mode::eval) {
      for (int b = 0; b < n; ++b) {
        const std::size_t off = (static_cast<std::size_t>(b) * features_ + ci) * spatial;
        kern.scale_shift(grad.data() + off, g, 0.0f, dx.data() + off, spatial);
      }
      continue;
    }
    const auto mean_dy = static_cast<float>(sum_dy / count);
    const auto mean_dy_xhat = static_cast<float>(sum_dy_xhat / count);
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * features_ + ci) * spatial;
      const float* dy = grad.data() + off;
      const float* xh = x_hat_.data() + off;
      float* out = dx.data() + off;
      for (std::size_t i = 0; i < spatial; ++i) out[i] = g * (dy[i] - mean_dy - xh[i] * mean_dy_xhat);
    }
  }
  return dx;
}

// --- Activations ------------------------------------------------------------

std::string ActivationLayer::type() const {
  switch (kind_) {
    case Activation::none: return "identity";
    case Activation::relu: return "relu";
    case Activation::silu: return "silu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "activation";
}

namespace {

void activate(Activation kind, const Tensor& x, Tensor& y) {
  const std::size_t n = x.size();
  switch (kind) {
    case Activation::none: std::copy(x.data(), x.data() + n, y.data()); break;
    case Activation::relu: simd::kernels().relu(x.data(), y.data(), n); break;
    case Activation::silu:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * sigmoid(x[i]);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid(x[i]);
      break;
  }
}

void activation_grad(Activation kind, const Tensor& x, const Tensor& y, const Tensor& grad, Tensor& dx) {
  const std::size_t n = x.size();
  switch (kind) {
    case Activation::none: std::copy(grad.data(), grad.data() + n, dx.data()); break;
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? grad[i] : 0.0f;
      break;
    case Activation::silu:
      for (std::size_t i = 0; i < n; ++i) {
        const float s = sigmoid(x[i]);
        dx[i] = grad[i] * (s + x[i] * s * (1.0f - s));
      }
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) dx[i] = grad[i] * y[i] * (1.0f - y[i]);
      break;
  }
}

}  // namespace

Tensor ActivationLayer::forward(const Tensor& x, Mode) {
  input_ = x;
  Tensor y(x.shape());
  activate(kind_, x, y);
  output_ = y;
  return y;
}

Tensor ActivationLayer::backward(const Tensor& grad) {
  Tensor dx(grad.shape());
  activation_grad(kind_, input_, output_, grad, dx);
  return dx;
}

// --- Pooling ----------------------------------------------------------------

Tensor GlobalAvgPool::forward(const Tensor& x, Mode) {
  require_rank(x, 4, "global_avg_pool");
  in_shape_ = x.shape();
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t spatial = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor y({n, c});
  const auto& kern = simd::kernels();
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * c; ++i) {
    y[i] = kern.sum(x.data() + i * spatial, spatial) / static_cast<float>(spatial);
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad) {
  Tensor dx(in_shape_);
  const std::size_t spatial = static_cast<std::size_t>(in_shape_[2]) * in_shape_[3];
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const float g = grad[i] / static_cast<float>(spatial);
    std::fill(dx.data() + i * spatial, dx.data() + (i + 1) * spatial, g);
  }
  return dx;
}

// --- Dense ------------------------------------------------------------------

Dense::Dense(const DenseOptions& options, std::mt19937_64& rng)
    : options_(options),
      weight_(make_param("kernel", {options.out_features, options.in_features})),
      bias_(make_param("bias", {options.out_features})) {
  glorot_uniform(weight_.value, options.in_features, options.out_features, rng);
}

Tensor Dense::forward(const Tensor& x, Mode) {
  require_rank(x, 2, "dense");
  if (x.dim(1) != options_.in_features) throw InvalidInput("dense input width mismatch");
  input_ = x;
  const int n = x.dim(0);
  Tensor z({n, options_.out_features});
  for (int b = 0; b < n; ++b) {
    std::copy(bias_.value.data(), bias_.value.data() + options_.out_features,
              z.data() + static_cast<std::size_t>(b) * options_.out_features);
  }
  gemm_nt(n, options_.out_features, options_.in_features, x.data(), weight_.value.data(), z.data());
  Tensor y(z.shape());
  activate(options_.activation, z, y);
  output_ = y;
  pre_activation_ = std::move(z);
  activity_penalty_ = 0.0;
  if (options_.activity_l1 != 0.0f && n > 0) {
    double s = 0.0;
    for (float v : y.values()) s += std::fabs(v);
    activity_penalty_ = options_.activity_l1 * s / n;
  }
  return y;
}

Tensor Dense::backward(const Tensor& grad) {
  const int n = grad.dim(0);
  Tensor dy = grad;
  if (options_.activity_l1 != 0.0f) {
    const float scale = options_.activity_l1 / static_cast<float>(n);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const float a = output_[i];
      dy[i] += a > 0.0f ? scale : (a < 0.0f ? -scale : 0.0f);
    }
  }
  Tensor dz(grad.shape());
  activation_grad(options_.activation, pre_activation_, output_, dy, dz);

  gemm_tn(options_.out_features, options_.in_features, n, dz.data(), input_.data(), weight_.grad.data());
  for (int b = 0; b < n; ++b) {
    simd::kernels().axpy(1.0f, dz.data() + static_cast<std::size_t>(b) * options_.out_features,
                         bias_.grad.data(), static_cast<std::size_t>(options_.out_features));
  }
  if (options_.kernel_l2 != 0.0f) {
    simd::kernels().axpy(2.0f * options_.kernel_l2, weight_.value.data(), weight_.grad.data(),
                         weight_.value.size());
  }
  if (options_.bias_l1 != 0.0f) {
    for (std::size_t i = 0; i < bias_.value.size(); ++i) {
      const float b = bias_.value[i];
      bias_.grad[i] += b > 0.0f ? options_.bias_l1 : (b < 0.0f ? -options_.bias_l1 : 0.0f);
    }
  }
  Tensor dx({n, options_.in_features});
  gemm_nn(n, options_.in_features, options_.out_features, dz.data(), weight_.value.data(), dx.data());
  return dx;
}

double Dense::penalty() const {
  double total = activity_penalty_;
  if (options_.kernel_l2 != 0.0f) {
    double s = 0.0;
    for (float w : weight_.value.values()) s += static_cast<double>(w) * w;
    total += options_.kernel_l2 * s;
  }
  if (options_.bias_l1 != 0.0f) {
    double s = 0.0;
    for (float b : bias_.value.values()) s += std::fabs(b);
    total += options_.bias_l1 * s;
  }
  return total;
}

// --- Dropout ----------------------------------------------------------------

Tensor Dropout::forward(const Tensor& x, Mode mode) {
  if (mode == Mode::eval || rate_ == 0.0f) {
    keep_.assign(x.size(), 1.0f);
    return x;
  }
  keep_.resize(x.size());
  const float scale = 1.0f / (1.0f - rate_);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool keep = std::generate_canonical<float, 24>(rng_) >= rate_;
    keep_[i] = keep ? scale : 0.0f;
    y[i] = x[i] * keep_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& grad) {
  Tensor dx(grad.shape());
  for (std::size_t i = 0; i < grad.size(); ++i) dx[i] = grad[i] * keep_[i];
  return dx;
}

// --- Residual ---------------------------------------------------------------

Tensor Residual::forward(const Tensor& x, Mode mode) {
  Tensor y = body_->forward(x, mode);
  if (y.shape() != x.shape()) throw InvalidInput("residual body changed the tensor shape");
  simd::kernels().axpy(1.0f, x.data(), y.data(), y.size());
  return y;
}

Tensor Residual::backward(const Tensor& grad) {
  Tensor dx = body_->backward(grad);
  simd::kernels().axpy(1.0f, grad.data(), dx.data(), dx.size());
  return dx;
}

// --- Loss -------------------------------------------------------------------

Tensor softmax(const Tensor& logits) {
  require_rank(logits, 2, "softmax");
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor p(logits.shape());
  for (int b = 0; b < n; ++b) {
    const float* z = logits.data() + static_cast<std::size_t>(b) * c;
    float* out = p.data() + static_cast<std::size_t>(b) * c;
    const float zmax = *std::max_element(z, z + c);
    double total = 0.0;
    for (int j = 0; j < c; ++j) total += std::exp(static_cast<double>(z[j]) - zmax);
    for (int j = 0; j < c; ++j) out[j] = static_cast<float>(std::exp(static_cast<double>(z[j]) - zmax) / total);
  }
  return p;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> targets) {
  require_rank(logits, 2, "softmax_cross_entropy");
  const int n = logits.dim(0), c = logits.dim(1);
  if (static_cast<std::size_t>(n) != targets.size()) throw InvalidInput("target count mismatch");
  LossResult result{0.0, Tensor(logits.shape())};
  for (int b = 0; b < n; ++b) {
    const float* z = logits.data() + static_cast<std::size_t>(b) * c;
    const float zmax = *std::max_element(z, z + c);
    double total = 0.0;
    for (int j = 0; j < c; ++j) total += std::exp(static_cast<double>(z[j]) - zmax);
    const double log_total = std::log(total);
    const int t = targets[static_cast<std::size_t>(b)];
    if (t < 0 || t >= c) throw InvalidInput("target class out of range");
    result.loss += -(static_cast<double>(z[t]) - zmax - log_total);
    for (int j = 0; j < c; ++j) {
      const double pj = std::exp(static_cast<double>(z[j]) - zmax - log_total);
      result.grad[static_cast<std::size_t>(b) * c + j] = static_cast<float>((pj - (j == t ? 1.0 : 0.0)) / n);
    }
  }
  result.loss /= n;
  return result;
}

}  // namespace skinscreen::nn
