/* Copyright 2026 The LookLab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "looklab/nn/layers.h"

#include <algorithm>
#include <cmath>

#include "looklab/errors.h"
#include "looklab/simd/kernels.h"

namespace looklab::nn {
namespace {

void he_init(Param& p, int fan_in, Rng& rng) {
  const double std = std::sqrt(2.0 / fan_in);
  for (float& w : p.value) w = static_cast<float>(rng.normal() * std);
}

}  // namespace

Tensor image_to_tensor(const Image& image, int height, int width) {
  const Image sized = resize_bilinear(image, width, height);
  Tensor t(3, height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Rgb c = sized.at(x, y);
      t.at(0, y, x) = c.r / 255.0f - 0.5f;
      t.at(1, y, x) = c.g / 255.0f - 0.5f;
      t.at(2, y, x) = c.b / 255.0f - 0.5f;
    }
  }
  return t;
}

// Row-major [rows x cols] -> [cols x rows].
static std::vector<float> transpose(const float* src, size_t rows, size_t cols) {
  std::vector<float> out(rows * cols);
  constexpr size_t kTile = 32;
  for (size_t r0 = 0; r0 < rows; r0 += kTile) {
    const size_t r1 = std::min(rows, r0 + kTile);
    for (size_t c0 = 0; c0 < cols; c0 += kTile) {
      const size_t c1 = std::min(cols, c0 + kTile);
      for (size_t r = r0; r < r1; ++r) {
        for (size_t c = c0; c < c1; ++c) out[c * rows + r] = src[r * cols + c];
      }
    }
  }
  return out;
}

std::vector<float> im2col(const Tensor& x, const ConvGeometry& g, int out_h, int out_w) {
  const int k = g.kernel;
  const size_t n = static_cast<size_t>(out_h) * out_w;
  std::vector<float> col(static_cast<size_t>(x.channels) * k * k * n, 0.0f);
  for (int c = 0; c < x.channels; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        float* row = &col[((static_cast<size_t>(c) * k + ki) * k + kj) * n];
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ki * g.dilation;
          if (iy < 0 || iy >= x.height) continue;
          const float* src = &x.values[(static_cast<size_t>(c) * x.height + iy) * x.width];
          float* dst = row + static_cast<size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kj * g.dilation;
            if (ix >= 0 && ix < x.width) dst[ox] = src[ix];
          }
        }
      }
    }
  }
  return col;
}

void col2im(const std::vector<float>& col, const ConvGeometry& g, int out_h, int out_w,
            Tensor& x) {
  const int k = g.kernel;
  const size_t n = static_cast<size_t>(out_h) * out_w;
  for (int c = 0; c < x.channels; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const float* row = &col[((static_cast<size_t>(c) * k + ki) * k + kj) * n];
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ki * g.dilation;
          if (iy < 0 || iy >= x.height) continue;
          float* dst = &x.values[(static_cast<size_t>(c) * x.height + iy) * x.width];
          const float* src = row + static_cast<size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kj * g.dilation;
            if (ix >= 0 && ix < x.width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, ConvGeometry geom, Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      geom_(geom),
      weight_(static_cast<size_t>(out_channels) * in_channels * geom.kernel * geom.kernel),
      bias_(static_cast<size_t>(out_channels)) {
  he_init(weight_, in_channels * geom.kernel * geom.kernel, rng);
}

Tensor Conv2d::forward(const Tensor& x, Context* ctx) const {
  if (x.channels != in_channels_) throw DimensionError("Conv2d: channel mismatch");
  const int oh = geom_.out_extent(x.height);
  const int ow = geom_.out_extent(x.width);
  if (oh <= 0 || ow <= 0) throw DimensionError("Conv2d: input too small");
  std::vector<float> col = im2col(x, geom_, oh, ow);
  const size_t n = static_cast<size_t>(oh) * ow;
  const size_t kdim = static_cast<size_t>(in_channels_) * geom_.kernel * geom_.kernel;
  const auto& kern = simd::kernels();
  Tensor y(out_channels_, oh, ow);
  for (int co = 0; co < out_channels_; ++co) {
    std::fill_n(y.values.data() + co * n, n, bias_.value[co]);
  }
  kern.gemm_f32(out_channels_, n, kdim, weight_.value.data(), kdim, col.data(), n,
                y.values.data(), n);
  if (ctx != nullptr) {
    ctx->input = x;
    ctx->saved = Tensor();
    ctx->saved.values = std::move(col);
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out, const Context& ctx) {
  const Tensor& x = ctx.input;
  const std::vector<float>& col = ctx.saved.values;
  const int oh = grad_out.height;
  const int ow = grad_out.width;
  const size_t n = static_cast<size_t>(oh) * ow;
  const size_t kdim = static_cast<size_t>(in_channels_) * geom_.kernel * geom_.kernel;
  const auto& kern = simd::kernels();
  for (int co = 0; co < out_channels_; ++co) {
    const float* gy = grad_out.values.data() + co * n;
    float gsum = 0.0f;
    for (size_t i = 0; i < n; ++i) gsum += gy[i];
    bias_.grad[co] += gsum;
  }
  const std::vector<float> col_t = transpose(col.data(), kdim, n);
  kern.gemm_f32(out_channels_, kdim, n, grad_out.values.data(), n, col_t.data(), kdim,
                weight_.grad.data(), kdim);
  const std::vector<float> w_t = transpose(weight_.value.data(), out_channels_, kdim);
  std::vector<float> dcol(kdim * n, 0.0f);
  kern.gemm_f32(kdim, n, out_channels_, w_t.data(), out_channels_, grad_out.values.data(), n,
                dcol.data(), n);
  Tensor dx(x.channels, x.height, x.width);
  col2im(dcol, geom_, oh, ow, dx);
  return dx;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel,
                                 int stride, int pad, Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      geom_{kernel, stride, pad, 1},
      weight_(static_cast<size_t>(in_channels) * out_channels * kernel * kernel),
      bias_(static_cast<size_t>(out_channels)) {
  // Fan-in of an output pixel is in * (k / stride)^2 on average.
  const int taps = std::max(1, kernel / std::max(stride, 1));
  he_init(weight_, in_channels * taps * taps, rng);
}

Tensor ConvTranspose2d::forward(const Tensor& x, Context* ctx) const {
  if (x.channels != in_channels_) throw DimensionError("ConvTranspose2d: channel mismatch");
  const int oh = (x.height - 1) * geom_.stride - 2 * geom_.pad + geom_.kernel;
  const int ow = (x.width - 1) * geom_.stride - 2 * geom_.pad + geom_.kernel;
  const size_t n = x.plane();
  const size_t kdim = static_cast<size_t>(out_channels_) * geom_.kernel * geom_.kernel;
  const auto& kern = simd::kernels();
  std::vector<float> col(kdim * n, 0.0f);
  const std::vector<float> w_t = transpose(weight_.value.data(), in_channels_, kdim);
  kern.gemm_f32(kdim, n, in_channels_, w_t.data(), in_channels_, x.values.data(), n, col.data(),
                n);
  Tensor y(out_channels_, oh, ow);
  col2im(col, geom_, x.height, x.width, y);
  for (int co = 0; co < out_channels_; ++co) {
    for (float& v : y.channel(co)) v += bias_.value[co];
  }
  if (ctx != nullptr) ctx->input = x;
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& grad_out, const Context& ctx) {
  const Tensor& x = ctx.input;
  const size_t n = x.plane();
  const size_t kdim = static_cast<size_t>(out_channels_) * geom_.kernel * geom_.kernel;
  const auto& kern = simd::kernels();
  const std::vector<float> gcol = im2col(grad_out, geom_, x.height, x.width);
  for (int co = 0; co < out_channels_; ++co) {
    float s = 0.0f;
    for (float v : grad_out.channel(co)) s += v;
    bias_.grad[co] += s;
  }
  const std::vector<float> gcol_t = transpose(gcol.data(), kdim, n);
  kern.gemm_f32(in_channels_, kdim, n, x.values.data(), n, gcol_t.data(), kdim,
                weight_.grad.data(), kdim);
  Tensor dx(x.channels, x.height, x.width);
  kern.gemm_f32(in_channels_, n, kdim, weight_.value.data(), kdim, gcol.data(), n,
                dx.values.data(), n);
  return dx;
}

void ConvTranspose2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------------------ Relu

Tensor Relu::forward(const Tensor& x, Context* ctx) const {
  Tensor y = x;
  for (float& v : y.values) v = v > 0.0f ? v : 0.0f;
  if (ctx != nullptr) ctx->saved = y;
  return y;
}

Tensor Relu::backward(const Tensor& grad_out, const Context& ctx) {
  Tensor dx = grad_out;
  for (size_t i = 0; i < dx.values.size(); ++i) {
    if (ctx.saved.values[i] <= 0.0f) dx.values[i] = 0.0f;
  }
  return dx;
}

// --------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(int in_channels, int out_channels, int stride, Rng& rng)
    : conv1_(in_channels, out_channels, {3, stride, 1, 1}, rng),
      conv2_(out_channels, out_channels, {3, 1, 1, 1}, rng) {
  if (stride != 1 || in_channels != out_channels) {
    projection_ =
        std::make_unique<Conv2d>(in_channels, out_channels, ConvGeometry{1, stride, 0, 1}, rng);
  }
}

Tensor ResidualBlock::forward(const Tensor& x, Context* ctx) const {
  Context* c1 = nullptr;
  Context* r1 = nullptr;
  Context* c2 = nullptr;
  Context* pr = nullptr;
  Context* ro = nullptr;
  if (ctx != nullptr) {
    ctx->children.assign(5, Context{});
    c1 = &ctx->children[0];
    r1 = &ctx->children[1];
    c2 = &ctx->children[2];
    pr = &ctx->children[3];
    ro = &ctx->children[4];
  }
  Tensor h = conv2_.forward(relu1_.forward(conv1_.forward(x, c1), r1), c2);
  const Tensor shortcut = projection_ ? projection_->forward(x, pr) : x;
  for (size_t i = 0; i < h.values.size(); ++i) h.values[i] += shortcut.values[i];
  return relu_out_.forward(h, ro);
}

Tensor ResidualBlock::backward(const Tensor& grad_out, const Context& ctx) {
  const Tensor g = relu_out_.backward(grad_out, ctx.children[4]);
  Tensor dx = conv1_.backward(relu1_.backward(conv2_.backward(g, ctx.children[2]),
                                              ctx.children[1]),
                              ctx.children[0]);
  const Tensor ds = projection_ ? projection_->backward(g, ctx.children[3]) : g;
  for (size_t i = 0; i < dx.values.size(); ++i) dx.values[i] += ds.values[i];
  return dx;
}

void ResidualBlock::collect_params(std::vector<Param*>& out) {
  conv1_.collect_params(out);
  conv2_.collect_params(out);
  if (projection_) projection_->collect_params(out);
}

// --------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, Context* ctx) const {
  Tensor y(x.channels, 1, 1);
  const float inv = 1.0f / static_cast<float>(x.plane());
  for (int c = 0; c < x.channels; ++c) {
    float s = 0.0f;
    for (float v : x.channel(c)) s += v;
    y.values[c] = s * inv;
  }
  if (ctx != nullptr) {
    ctx->input = Tensor(x.channels, x.height, x.width);  // shape only
    ctx->input.values.clear();
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out, const Context& ctx) {
  Tensor dx(ctx.input.channels, ctx.input.height, ctx.input.width);
  const float inv = 1.0f / static_cast<float>(dx.plane());
  for (int c = 0; c < dx.channels; ++c) {
    for (float& v : dx.channel(c)) v = grad_out.values[c] * inv;
  }
  return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(int in_features, int out_features, Rng& rng)
    : in_features_(in_features),
      out_features_(out_features),
      weight_(static_cast<size_t>(in_features) * out_features),
      bias_(static_cast<size_t>(out_features)) {
  const double std = std::sqrt(1.0 / in_features);
  for (float& w : weight_.value) w = static_cast<float>(rng.normal() * std);
}

Tensor Linear::forward(const Tensor& x, Context* ctx) const {
  if (static_cast<int>(x.size()) != in_features_) {
    throw DimensionError("Linear: expected " + std::to_string(in_features_) +
                         " inputs, got " + std::to_string(x.size()));
  }
  const auto& kern = simd::kernels();
  Tensor y(out_features_, 1, 1);
  for (int o = 0; o < out_features_; ++o) {
    y.values[o] = bias_.value[o] +
                  kern.dot_f32(&weight_.value[static_cast<size_t>(o) * in_features_],
                               x.values.data(), in_features_);
  }
  if (ctx != nullptr) ctx->input = x;
  return y;
}

Tensor Linear::backward(const Tensor& grad_out, const Context& ctx) {
  const Tensor& x = ctx.input;
  const auto& kern = simd::kernels();
  Tensor dx(x.channels, x.height, x.width);
  for (int o = 0; o < out_features_; ++o) {
    const float g = grad_out.values[o];
    bias_.grad[o] += g;
    kern.axpy_f32(g, x.values.data(), &weight_.grad[static_cast<size_t>(o) * in_features_],
                  in_features_);
    kern.axpy_f32(g, &weight_.value[static_cast<size_t>(o) * in_features_], dx.values.data(),
                  in_features_);
  }
  return dx;
}

void Linear::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------------ Sequential

Tensor Sequential::forward(const Tensor& x, Context* ctx) const {
  if (ctx != nullptr) ctx->children.assign(layers_.size(), Context{});
  Tensor h = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, ctx != nullptr ? &ctx->children[i] : nullptr);
  }
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out, const Context& ctx) {
  Tensor g = grad_out;
  for (size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, ctx.children[i]);
  return g;
}

void Sequential::collect_params(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect_params(out);
}

std::vector<Param*> Sequential::params() {
  std::vector<Param*> out;
  collect_params(out);
  return out;
}

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0f);
}

}  // namespace looklab::nn
