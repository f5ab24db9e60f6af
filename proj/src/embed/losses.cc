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

#include "looklab/embed/losses.h"

#include <algorithm>
#include <string>

#include "looklab/errors.h"
#include "looklab/simd/kernels.h"

namespace looklab::embed {
namespace {

void require_same_dim(Vec a, Vec b) {
  if (a.size() != b.size()) {
    throw DimensionError("embedding dimensions differ: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

void require_triplet(Vec a, Vec p, Vec n) {
  require_same_dim(a, p);
  require_same_dim(a, n);
}

double sq_norm(Vec x) { return simd::kernels().dot_f64(x.data(), x.data(), x.size()); }

}  // namespace

void TripletLossConfig::validate() const {
  if (!(margin > 0.0)) throw ConfigError("triplet margin must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
}

double sq_euclidean(Vec x, Vec y) {
  require_same_dim(x, y);
  return simd::kernels().sq_dist_f64(x.data(), y.data(), x.size());
}

double triplet_margin_loss(Vec anchor, Vec positive, Vec negative, double margin) {
  require_triplet(anchor, positive, negative);
  if (!(margin > 0.0)) throw ConfigError("triplet margin must be > 0");
  return std::max(0.0, margin + sq_euclidean(anchor, positive) -
                           sq_euclidean(anchor, negative));
}

double embedding_norm_loss(Vec anchor, Vec positive, Vec negative) {
  require_triplet(anchor, positive, negative);
  if (anchor.empty()) return 0.0;
  return TripletLossConfig::tau(anchor.size()) *
         (sq_norm(anchor) + sq_norm(positive) + sq_norm(negative));
}

double total_loss(Vec anchor, Vec positive, Vec negative, const TripletLossConfig& cfg) {
  return triplet_margin_loss(anchor, positive, negative, cfg.margin) +
         cfg.alpha * embedding_norm_loss(anchor, positive, negative);
}

TripletGradient total_loss_with_gradient(Vec anchor, Vec positive, Vec negative,
                                         const TripletLossConfig& cfg) {
  require_triplet(anchor, positive, negative);
  const size_t d = anchor.size();
  const double hinge =
      cfg.margin + sq_euclidean(anchor, positive) - sq_euclidean(anchor, negative);
  TripletGradient g;
  g.hinge_active = hinge > 0.0;
  g.loss = std::max(0.0, hinge) + cfg.alpha * embedding_norm_loss(anchor, positive, negative);
  g.anchor.resize(d);
  g.positive.resize(d);
  g.negative.resize(d);
  const double reg = d == 0 ? 0.0 : 2.0 * cfg.alpha * TripletLossConfig::tau(d);
  for (size_t i = 0; i < d; ++i) {
    g.anchor[i] = reg * anchor[i];
    g.positive[i] = reg * positive[i];
    g.negative[i] = reg * negative[i];
    if (g.hinge_active) {
      g.anchor[i] += 2.0 * (negative[i] - positive[i]);
      g.positive[i] += 2.0 * (positive[i] - anchor[i]);
      g.negative[i] += 2.0 * (anchor[i] - negative[i]);
    }
  }
  return g;
}

}  // namespace looklab::embed
