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

#ifndef LOOKLAB_NN_CHECKPOINT_H_
#define LOOKLAB_NN_CHECKPOINT_H_

#include <string>
#include <vector>

#include "looklab/nn/layers.h"

namespace looklab::nn {

// On-disk model: magic "LOOKLAB\x01", format version, a model kind string, the
// model's JSON config, then each parameter blob as little-endian float32.
struct Checkpoint {
  std::string kind;
  std::string config_json;
  std::vector<std::vector<float>> blobs;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::string& config_json, const std::vector<Param*>& params);
Checkpoint load_checkpoint(const std::string& path);

// Copies blobs into params; shapes must agree exactly.
void restore_params(const Checkpoint& ckpt, const std::vector<Param*>& params);

}  // namespace looklab::nn

#endif  // LOOKLAB_NN_CHECKPOINT_H_
