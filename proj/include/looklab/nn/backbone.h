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

#ifndef LOOKLAB_NN_BACKBONE_H_
#define LOOKLAB_NN_BACKBONE_H_

#include <string>
#include <vector>

#include "looklab/nn/layers.h"
#include "looklab/rng.h"

namespace looklab::nn {

struct StageSpec {
  int channels;
  int blocks;
  int stride;
};

// Residual feature extractor: a 3x3 stem conv followed by stages of basic
// residual blocks.
struct BackboneSpec {
  std::string name;
  int stem_channels = 16;
  int stem_stride = 1;
  std::vector<StageSpec> stages;

  int out_channels() const;
  int total_stride() const;
};

// "tiny" (desk scale), "resnet18", "resnet34", "resnet50". Throws ConfigError
// on an unknown name.
BackboneSpec backbone_preset(const std::string& name);
std::vector<std::string> backbone_presets();

// Appends the backbone layers to `net`.
void append_backbone(Sequential& net, const BackboneSpec& spec, int in_channels, Rng& rng);

struct TrainOptions {
  int epochs = 20;
  int batch_size = 8;
  double learning_rate = 1e-3;
  uint64_t seed = 1;
};

}  // namespace looklab::nn

#endif  // LOOKLAB_NN_BACKBONE_H_
