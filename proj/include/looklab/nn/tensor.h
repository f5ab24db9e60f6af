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

#ifndef LOOKLAB_NN_TENSOR_H_
#define LOOKLAB_NN_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

#include "looklab/image.h"

namespace looklab::nn {

// Single-sample activation, channel-major (C, H, W).
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  Tensor() = default;
  Tensor(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        values(static_cast<size_t>(c) * h * w, fill) {}

  size_t size() const { return values.size(); }
  size_t plane() const { return static_cast<size_t>(height) * width; }
  bool same_shape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  float& at(int c, int y, int x) {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }
  std::span<float> channel(int c) { return {values.data() + c * plane(), plane()}; }
  std::span<const float> channel(int c) const {
    return {values.data() + c * plane(), plane()};
  }
};

// Resizes to (height, width) and maps 8-bit values to [-0.5, 0.5].
Tensor image_to_tensor(const Image& image, int height, int width);

}  // namespace looklab::nn

#endif  // LOOKLAB_NN_TENSOR_H_
