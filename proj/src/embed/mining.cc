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

#include "looklab/embed/mining.h"

#include <limits>

#include "looklab/embed/losses.h"
#include "looklab/errors.h"

namespace looklab::embed {

std::optional<MinedTriplet> mine_semi_hard(size_t anchor_index, const LabeledBatch& batch,
                                           double margin) {
  const size_t n = batch.embeddings.size();
  if (batch.labels.size() != n) throw DimensionError("labels/embeddings size mismatch");
  if (anchor_index >= n) throw OutOfBoundsError("anchor index outside batch");
  const auto& anchor = batch.embeddings[anchor_index];
  const std::string& label = batch.labels[anchor_index];

  std::vector<double> dist(n);
  for (size_t i = 0; i < n; ++i) dist[i] = sq_euclidean(anchor, batch.embeddings[i]);

  std::optional<size_t> positive;
  for (size_t i = 0; i < n; ++i) {
    if (i == anchor_index || batch.labels[i] != label) continue;
    if (!positive || dist[i] < dist[*positive]) positive = i;
  }
  if (!positive) throw MiningError("anchor " + std::to_string(anchor_index) +
                                   " has no positive in the batch");
  const double d_ap = dist[*positive];

  std::optional<size_t> semi_hard;
  std::optional<size_t> beyond;
  for (size_t i = 0; i < n; ++i) {
    if (batch.labels[i] == label) continue;
    const double d_an = dist[i];
    if (d_an > d_ap && d_an < d_ap + margin) {
      if (!semi_hard || d_an < dist[*semi_hard]) semi_hard = i;
    } else if (d_an >= d_ap + margin) {
      if (!beyond || d_an < dist[*beyond]) beyond = i;
    }
  }
  if (semi_hard) return MinedTriplet{anchor_index, *positive, *semi_hard, true};
  if (beyond) return MinedTriplet{anchor_index, *positive, *beyond, false};
  return std::nullopt;
}

std::vector<MinedTriplet> mine_batch(const LabeledBatch& batch, double margin) {
  std::vector<MinedTriplet> out;
  for (size_t a = 0; a < batch.embeddings.size(); ++a) {
    bool has_positive = false;
    for (size_t i = 0; i < batch.labels.size() && !has_positive; ++i) {
      has_positive = i != a && batch.labels[i] == batch.labels[a];
    }
    if (!has_positive) continue;
    if (auto t = mine_semi_hard(a, batch, margin)) out.push_back(*t);
  }
  return out;
}

}  // namespace looklab::embed
