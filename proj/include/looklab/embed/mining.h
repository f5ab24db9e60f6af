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

#ifndef LOOKLAB_EMBED_MINING_H_
#define LOOKLAB_EMBED_MINING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace looklab::embed {

// A mini-batch of embeddings with a garment label per row.
struct LabeledBatch {
  std::vector<std::vector<double>> embeddings;
  std::vector<std::string> labels;
};

struct MinedTriplet {
  size_t anchor = 0;
  size_t positive = 0;
  size_t negative = 0;
  bool semi_hard = false;  // false: fallback branch (beyond the margin)
};

// Positive = nearest same-label row (ties: lowest index). Negatives n with
// d(a,p) < d(a,n) < d(a,p) + m are semi-hard and the closest wins; otherwise
// the closest negative with d(a,n) >= d(a,p) + m; otherwise none. d is the
// squared Euclidean distance. Throws MiningError when the anchor has no
// positive in the batch.
std::optional<MinedTriplet> mine_semi_hard(size_t anchor_index, const LabeledBatch& batch,
                                           double margin);

// Runs the miner for every row that has a positive; rows without a usable
// negative are dropped.
std::vector<MinedTriplet> mine_batch(const LabeledBatch& batch, double margin);

}  // namespace looklab::embed

#endif  // LOOKLAB_EMBED_MINING_H_
