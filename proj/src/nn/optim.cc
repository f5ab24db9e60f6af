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

#include "looklab/nn/optim.h"

#include <cmath>

namespace looklab::nn {

Adam::Adam(std::vector<Param*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const Param* p : params_) {
    m_.emplace_back(p->value.size(), 0.0f);
    v_.emplace_back(p->value.size(), 0.0f);
  }
}

void Adam::step(float grad_scale) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double lr_t = config_.learning_rate * std::sqrt(1.0 - std::pow(b2, t_)) /
                      (1.0 - std::pow(b1, t_));
  const float fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
  const float flr = static_cast<float>(lr_t), eps = static_cast<float>(config_.epsilon);
  for (size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < p.value.size(); ++j) {
      const float g = p.grad[j] * grad_scale;
      m[j] = fb1 * m[j] + (1.0f - fb1) * g;
      v[j] = fb2 * v[j] + (1.0f - fb2) * g * g;
      p.value[j] -= flr * m[j] / (std::sqrt(v[j]) + eps);
    }
  }
}

}  // namespace looklab::nn
