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

#ifndef LOOKLAB_BOOTSTRAP_H_
#define LOOKLAB_BOOTSTRAP_H_

#include <map>
#include <string>
#include <vector>

#include "looklab/detect.h"
#include "looklab/embed/model.h"
#include "looklab/retrieve.h"

namespace looklab::pipeline {

// Embeds every catalog row ({product_id, article_type, broad_category,
// image_path}) whose broad category is the model's.
std::vector<retrieve::CatalogEntry> embed_catalog(const embed::EmbeddingModel& model,
                                                  const std::string& catalog_manifest);

// Desk-scale training schedule for a generated world.
struct BootstrapOptions {
  int keypoint_epochs = 40;
  double keypoint_learning_rate = 2e-3;
  int pose_epochs = 15;
  double pose_learning_rate = 2e-3;
  int detector_epochs = 15;
  double detector_learning_rate = 2e-3;
  int embed_epochs = 20;
  double embed_learning_rate = 1e-3;
  int embed_batch_size = 16;
  // Written to the registry; the embedders are trained on squared distance.
  retrieve::ScoringMode scoring = retrieve::ScoringMode::kEuclidean;
  uint64_t seed = 1;
  // Independent trainings run on separate threads.
  bool parallel = true;
};

struct BootstrapReport {
  std::map<std::string, double> train_seconds;  // per model
  double wall_seconds = 0.0;
  std::string registry_path;
};

// Trains keypoint, pose, detector and per-category embedding models on the
// world at `world_dir`, embeds its catalog and writes `out_dir/registry.json`.
BootstrapReport bootstrap_registry(const std::string& world_dir, const std::string& out_dir,
                                   const BootstrapOptions& options);

}  // namespace looklab::pipeline

#endif  // LOOKLAB_BOOTSTRAP_H_
