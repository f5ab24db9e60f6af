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

#ifndef LOOKLAB_NN_OPTIM_H_
#define LOOKLAB_NN_OPTIM_H_

#include <vector>

#include "looklab/nn/layers.h"

namespace looklab::nn {

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive moment estimation with bias correction.
class Adam {
 public:
  Adam(std::vector<Param*> params, AdamConfig config);

  // Applies one update using grad * grad_scale (e.g. 1 / batch size).
  void step(float grad_scale = 1.0f);
  long steps() const { return t_; }

 private:
  std::vector<Param*> params_;
  AdamConfig config_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  long t_ = 0;
};

}  // namespace looklab::nn

#endif  // LOOKLAB_NN_OPTIM_H_
