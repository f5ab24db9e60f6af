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

#ifndef LOOKLAB_NN_LAYERS_H_
#define LOOKLAB_NN_LAYERS_H_

#include <memory>
#include <string>
#include <vector>

#include "looklab/nn/tensor.h"
#include "looklab/rng.h"

namespace looklab::nn {

struct Param {
  std::vector<float> value;
  std::vector<float> grad;

  explicit Param(size_t n = 0) : value(n, 0.0f), grad(n, 0.0f) {}
};

// Whatever a layer needs from its forward pass to run backward.
struct Context {
  Tensor input;
  Tensor saved;
  std::vector<Context> children;
};

// A differentiable layer. forward() is const and may be called concurrently
// when ctx is null (inference). backward() accumulates parameter gradients
// and is single-threaded by contract.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, Context* ctx) const = 0;
  virtual Tensor backward(const Tensor& grad_out, const Context& ctx) = 0;
  virtual void collect_params(std::vector<Param*>& out) { (void)out; }
};

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  int dilation = 1;

  int out_extent(int in) const {
    return (in + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
  }
};

class Conv2d : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, ConvGeometry geom, Rng& rng);
  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
  void collect_params(std::vector<Param*>& out) override;

 private:
  int in_channels_;
  int out_channels_;
  ConvGeometry geom_;
  Param weight_;  // [out][in * k * k]
  Param bias_;
};

// Transposed convolution; output extent (in - 1) * stride - 2 * pad + kernel.
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int pad,
                  Rng& rng);
  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
  void collect_params(std::vector<Param*>& out) override;

 private:
  int in_channels_;
  int out_channels_;
  ConvGeometry geom_;
  Param weight_;  // [in][out * k * k]
  Param bias_;
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
};

// conv3x3(stride) -> relu -> conv3x3 plus a shortcut (identity, or a 1x1
// projection when the shape changes), then relu.
class ResidualBlock : public Layer {
 public:
  ResidualBlock(int in_channels, int out_channels, int stride, Rng& rng);
  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
  void collect_params(std::vector<Param*>& out) override;

 private:
  Conv2d conv1_;
  Relu relu1_;
  Conv2d conv2_;
  std::unique_ptr<Conv2d> projection_;
  Relu relu_out_;
};

class GlobalAvgPool : public Layer {
 public:
  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
};

// Fully connected over the flattened input; output shape (out, 1, 1).
class Linear : public Layer {
 public:
  Linear(int in_features, int out_features, Rng& rng);
  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
  void collect_params(std::vector<Param*>& out) override;

 private:
  int in_features_;
  int out_features_;
  Param weight_;  // [out][in]
  Param bias_;
};

class Sequential : public Layer {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor forward(const Tensor& x, Context* ctx) const override;
  Tensor backward(const Tensor& grad_out, const Context& ctx) override;
  void collect_params(std::vector<Param*>& out) override;
  std::vector<Param*> params();
  size_t num_layers() const { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

void zero_grads(const std::vector<Param*>& params);

// Low-level helpers, exposed for tests.
// col[(c * k + ki) * k + kj][oy * ow + ox]
std::vector<float> im2col(const Tensor& x, const ConvGeometry& g, int out_h, int out_w);
void col2im(const std::vector<float>& col, const ConvGeometry& g, int out_h, int out_w,
            Tensor& x);

}  // namespace looklab::nn

#endif  // LOOKLAB_NN_LAYERS_H_
