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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <functional>

#include "looklab/errors.h"
#include "looklab/nn/checkpoint.h"
#include "looklab/nn/layers.h"
#include "looklab/nn/optim.h"

namespace looklab::nn {
namespace {

Tensor random_tensor(Rng& rng, int c, int h, int w) {
  Tensor t(c, h, w);
  for (float& v : t.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// loss = sum(out * probe); compares analytic input and parameter gradients
// with central differences computed in float.
void check_gradients(Layer& layer, const Tensor& x, Rng& rng, double tol = 2e-2) {
  Context ctx;
  const Tensor y = layer.forward(x, &ctx);
  Tensor probe = random_tensor(rng, y.channels, y.height, y.width);
  auto loss = [&](const Tensor& in) {
    const Tensor out = layer.forward(in, nullptr);
    double s = 0;
    for (size_t i = 0; i < out.size(); ++i) s += out.values[i] * probe.values[i];
    return s;
  };
  std::vector<Param*> params;
  layer.collect_params(params);
  zero_grads(params);
  const Tensor dx = layer.backward(probe, ctx);
  ASSERT_TRUE(dx.same_shape(x));
  const double h = 1e-3;
  for (size_t i = 0; i < x.size(); i += std::max<size_t>(1, x.size() / 23)) {
    Tensor xp = x, xm = x;
    xp.values[i] += h;
    xm.values[i] -= h;
    const double fd = (loss(xp) - loss(xm)) / (2 * h);
    EXPECT_NEAR(dx.values[i], fd, tol * std::max(1.0, std::abs(fd))) << "input " << i;
  }
  for (Param* p : params) {
    for (size_t i = 0; i < p->value.size(); i += std::max<size_t>(1, p->value.size() / 11)) {
      const float saved = p->value[i];
      p->value[i] = saved + static_cast<float>(h);
      const double lp = loss(x);
      p->value[i] = saved - static_cast<float>(h);
      const double lm = loss(x);
      p->value[i] = saved;
      const double fd = (lp - lm) / (2 * h);
      EXPECT_NEAR(p->grad[i], fd, tol * std::max(1.0, std::abs(fd))) << "param " << i;
    }
  }
}

TEST(NnLayers, ConvGradients) {
  Rng rng(1);
  Conv2d conv(2, 3, {3, 1, 1, 1}, rng);
  check_gradients(conv, random_tensor(rng, 2, 5, 6), rng);
  Conv2d strided(2, 2, {3, 2, 1, 1}, rng);
  check_gradients(strided, random_tensor(rng, 2, 7, 6), rng);
  Conv2d dilated(2, 2, {3, 1, 2, 2}, rng);
  check_gradients(dilated, random_tensor(rng, 2, 6, 6), rng);
}

TEST(NnLayers, ConvTransposeGradientsAndShape) {
  Rng rng(2);
  ConvTranspose2d deconv(3, 2, 4, 2, 1, rng);
  const Tensor x = random_tensor(rng, 3, 3, 4);
  const Tensor y = deconv.forward(x, nullptr);
  EXPECT_EQ(y.height, 6);
  EXPECT_EQ(y.width, 8);
  check_gradients(deconv, x, rng);
}

TEST(NnLayers, ConvTransposeIsAdjointOfConv) {
  // <conv(x), y> == <x, deconv(y)> when both share weights and have no bias.
  Rng rng(4);
  const ConvGeometry g{4, 2, 1, 1};
  const Tensor x = random_tensor(rng, 1, 8, 8);
  const int oh = g.out_extent(8);
  const Tensor y = random_tensor(rng, 1, oh, oh);
  const auto col = im2col(x, g, oh, oh);
  std::vector<float> ycol(16 * y.plane());
  Tensor back(1, 8, 8);
  // Identity kernel tap 5: conv picks one tap; the adjoint scatters it back.
  const int tap = 5;
  double lhs = 0;
  for (size_t i = 0; i < y.plane(); ++i) lhs += col[tap * y.plane() + i] * y.values[i];
  std::copy(y.values.begin(), y.values.end(), ycol.begin() + tap * y.plane());
  col2im(ycol, g, oh, oh, back);
  double rhs = 0;
  for (size_t i = 0; i < x.size(); ++i) rhs += x.values[i] * back.values[i];
  EXPECT_NEAR(lhs, rhs, 1e-5);
}

TEST(NnLayers, ResidualAndHeadGradients) {
  Rng rng(13);
  ResidualBlock same(2, 2, 1, rng);
  SCOPED_TRACE("same");
  check_gradients(same, random_tensor(rng, 2, 4, 4), rng);
}

TEST(NnLayers, ResidualDown) {
  Rng rng(8);
  ResidualBlock down(2, 3, 2, rng);
  check_gradients(down, random_tensor(rng, 2, 6, 6), rng);
}

TEST(NnLayers, HeadGradients) {
  Rng rng(9);
  Sequential head;
  head.add<GlobalAvgPool>();
  head.add<Linear>(3, 4, rng);
  check_gradients(head, random_tensor(rng, 3, 2, 3), rng);
}

TEST(NnLayers, LinearRejectsWrongWidth) {
  Rng rng(5);
  Linear fc(4, 2, rng);
  EXPECT_THROW(fc.forward(Tensor(5, 1, 1), nullptr), DimensionError);
}

TEST(NnLayers, AdamReducesQuadratic) {
  Param p(3);
  p.value = {1.0f, -2.0f, 0.5f};
  Adam adam({&p}, {.learning_rate = 0.05});
  for (int i = 0; i < 300; ++i) {
    for (size_t j = 0; j < 3; ++j) p.grad[j] = 2 * p.value[j];
    adam.step();
  }
  for (float v : p.value) EXPECT_LT(std::abs(v), 0.05);
}

TEST(NnLayers, CheckpointRoundTrip) {
  Rng rng(6);
  Sequential net;
  net.add<Conv2d>(3, 4, ConvGeometry{3, 1, 1, 1}, rng);
  net.add<Relu>();
  const std::string path = ::testing::TempDir() + "/ckpt.bin";
  save_checkpoint(path, "test", "{\"a\":1}", net.params());
  const Checkpoint ck = load_checkpoint(path);
  EXPECT_EQ(ck.kind, "test");
  EXPECT_EQ(ck.config_json, "{\"a\":1}");
  Rng rng2(99);
  Sequential other;
  other.add<Conv2d>(3, 4, ConvGeometry{3, 1, 1, 1}, rng2);
  other.add<Relu>();
  restore_params(ck, other.params());
  const Tensor x = random_tensor(rng, 3, 5, 5);
  EXPECT_EQ(net.forward(x, nullptr).values, other.forward(x, nullptr).values);

  std::FILE* f = std::fopen(path.c_str(), "wb");
  std::fputs("garbage", f);
  std::fclose(f);
  EXPECT_THROW(load_checkpoint(path), DecodeError);
}

}  // namespace
}  // namespace looklab::nn
