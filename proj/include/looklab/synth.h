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

#ifndef LOOKLAB_SYNTH_H_
#define LOOKLAB_SYNTH_H_

#include <array>
#include <string>
#include <vector>

#include "looklab/detect.h"
#include "looklab/image.h"
#include "looklab/pose.h"
#include "looklab/rng.h"

// Procedural stick-figure world: a textured product catalog, scenes of a
// figure wearing catalog items in one of five views, and the dataset files
// every stage trains and evaluates on.
namespace looklab::synth {

enum class GarmentKind { kTop, kBottom, kBag };

struct ArticleSpec {
  std::string article_type;
  std::string broad_category;
  GarmentKind kind;
};

struct WorldConfig {
  int image_width = 64;
  int image_height = 96;
  int items_per_type = 20;
  std::vector<ArticleSpec> articles = {{"T-shirts", "Topwear", GarmentKind::kTop},
                                       {"Shorts", "BottomWear", GarmentKind::kBottom},
                                       {"Hand bags", "Bags", GarmentKind::kBag}};
  uint64_t seed = 7;
};

struct Item {
  std::string product_id;
  size_t article_index = 0;  // into WorldConfig::articles
  Rgb base;
  Rgb accent;
  int pattern = 0;
  int frequency = 2;
};

std::vector<Item> make_catalog(const WorldConfig& config);
Rgb texture_at(const Item& item, double u, double v);
// The item alone on white, cropped to the garment.
Image render_catalog_image(const WorldConfig& config, const Item& item);

enum class Framing { kFull, kHeadCut, kFeetCut, kBothCut };

struct SceneRequest {
  pose::PoseLabel view = pose::PoseLabel::kFront;
  Framing framing = Framing::kFull;
  // One optional item per article slot, aligned with WorldConfig::articles.
  std::vector<const Item*> worn;
};

struct Scene {
  Image image;
  std::vector<std::array<double, 3>> keypoints;  // COCO-17 order; x, y, visible
  std::vector<detect::GroundTruthBox> boxes;
  std::vector<std::string> box_product_ids;  // aligned with boxes
  pose::PoseLabel view = pose::PoseLabel::kFront;
  bool full_shot = false;  // a head keypoint and both ankles in frame
};

Scene render_scene(const WorldConfig& config, const SceneRequest& request, Rng& rng);

// Random view, framing and outfit.
Scene random_scene(const WorldConfig& config, const std::vector<Item>& catalog, Rng& rng);

struct DatasetSizes {
  int train_scenes = 360;
  int pair_scenes = 600;  // extra scenes that only contribute wild crops
  int fullshot_eval = 200;
  int pose_eval = 100;
  int pdps = 50;
};

// Writes the whole world under `dir` (see README for the layout).
void generate_world(const std::string& dir, const WorldConfig& config, const DatasetSizes& sizes);

}  // namespace looklab::synth

#endif  // LOOKLAB_SYNTH_H_
