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

#ifndef LOOKLAB_EMBED_LOSSES_H_
#define LOOKLAB_EMBED_LOSSES_H_

#include <span>
#include <vector>

namespace looklab::embed {

// Weighted triplet objective:
//   total = max(0, m + |a-p|^2 - |a-n|^2) + alpha * tau * (|a|^2 + |p|^2 + |n|^2)
// with tau = 1 / (3d) for d-dimensional embeddings.
struct TripletLossConfig {
  double margin = 0.2;
  double alpha = 5e-5;

  static double tau(size_t dim) { return 1.0 / (3.0 * static_cast<double>(dim)); }
  void validate() const;
};

using Vec = std::span<const double>;

double sq_euclidean(Vec x, Vec y);
double triplet_margin_loss(Vec anchor, Vec positive, Vec negative, double margin);
double embedding_norm_loss(Vec anchor, Vec positive, Vec negative);
double total_loss(Vec anchor, Vec positive, Vec negative, const TripletLossConfig& cfg);

struct TripletGradient {
  double loss = 0.0;
  bool hinge_active = false;
  std::vector<double> anchor;
  std::vector<double> positive;
  std::vector<double> negative;
};

// Loss plus its gradient with respect to each embedding. At the hinge
// (margin term exactly 0) the zero subgradient is used.
TripletGradient total_loss_with_gradient(Vec anchor, Vec positive, Vec negative,
                                         const TripletLossConfig& cfg);

}  // namespace looklab::embed

#endif  // LOOKLAB_EMBED_LOSSES_H_
