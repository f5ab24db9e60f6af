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

#include "looklab/nn/backbone.h"

#include "looklab/errors.h"

namespace looklab::nn {

int BackboneSpec::out_channels() const {
  return stages.empty() ? stem_channels : stages.back().channels;
}

int BackboneSpec::total_stride() const {
  int s = stem_stride;
  for (const auto& st : stages) s *= st.stride;
  return s;
}

BackboneSpec backbone_preset(const std::string& name) {
  if (name == "tiny") return {name, 12, 1, {{16, 1, 2}, {24, 1, 2}, {32, 1, 2}}};
  // Full-size layouts keep the residual stage structure; the stem's pooling
  // step is folded into a strided first stage.
  if (name == "resnet18") return {name, 64, 2, {{64, 2, 2}, {128, 2, 2}, {256, 2, 2}, {512, 2, 2}}};
  if (name == "resnet34") return {name, 64, 2, {{64, 3, 2}, {128, 4, 2}, {256, 6, 2}, {512, 3, 2}}};
  if (name == "resnet50") {
    return {name, 64, 2, {{256, 3, 2}, {512, 4, 2}, {1024, 6, 2}, {2048, 3, 2}}};
  }
  throw ConfigError("unknown backbone '" + name + "'");
}

std::vector<std::string> backbone_presets() { return {"tiny", "resnet18", "resnet34", "resnet50"}; }

void append_backbone(Sequential& net, const BackboneSpec& spec, int in_channels, Rng& rng) {
  net.add<Conv2d>(in_channels, spec.stem_channels, ConvGeometry{3, spec.stem_stride, 1, 1}, rng);
  net.add<Relu>();
  int c = spec.stem_channels;
  for (const StageSpec& st : spec.stages) {
    for (int b = 0; b < st.blocks; ++b) {
      net.add<ResidualBlock>(c, st.channels, b == 0 ? st.stride : 1, rng);
      c = st.channels;
    }
  }
}

}  // namespace looklab::nn
