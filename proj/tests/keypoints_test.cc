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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "looklab/errors.h"
#include "looklab/keypoints.h"
#include "looklab/rng.h"

namespace looklab::keypoints {
namespace {

KeypointSet uniform_set(double conf) {
  KeypointSet s;
  s.points.assign(17, {1.0, 1.0, conf});
  return s;
}

TEST(TargetHeatmap, PeakAndFalloff) {
  const Heatmap h = make_target_heatmap(3, 4, 8, 8, 1.0);
  EXPECT_FLOAT_EQ(h.at(4, 3), 1.0f);
  EXPECT_NEAR(h.at(4, 4), std::exp(-0.5), 1e-7);
  EXPECT_NEAR(h.at(6, 5), std::exp(-4.0), 1e-7);
  const auto kp = decode_heatmaps({h}, 1);
  EXPECT_EQ(kp.points[0].x, 3.0);
  EXPECT_EQ(kp.points[0].y, 4.0);
}

TEST(TargetHeatmap, Errors) {
  EXPECT_THROW(make_target_heatmap(8, 0, 8, 8, 1.0), OutOfBoundsError);
  EXPECT_THROW(make_target_heatmap(-0.1, 0, 8, 8, 1.0), OutOfBoundsError);
  EXPECT_THROW(make_target_heatmap(1, 1, 8, 8, 0.0), ConfigError);
}

TEST(HeatmapLoss, MeanSquaredAndGradient) {
  Rng rng(5);
  std::vector<Heatmap> pred(3, Heatmap(4, 5)), target(3, Heatmap(4, 5));
  for (size_t k = 0; k < 3; ++k) {
    for (auto& v : pred[k].values) v = static_cast<float>(rng.uniform());
    for (auto& v : target[k].values) v = static_cast<float>(rng.uniform());
  }
  double expected = 0;
  for (size_t k = 0; k < 3; ++k) {
    for (size_t i = 0; i < 20; ++i) {
      const double d = static_cast<double>(pred[k].values[i]) - target[k].values[i];
      expected += d * d;
    }
  }
  expected /= 60.0;
  EXPECT_NEAR(heatmap_l2_loss(pred, target), expected, 1e-12);

  std::vector<Heatmap> grad;
  heatmap_l2_loss_with_gradient(pred, target, &grad);
  const float h = 1e-2f;
  for (size_t k : {0u, 2u}) {
    for (size_t i : {0u, 7u, 19u}) {
      const float saved = pred[k].values[i];
      pred[k].values[i] = saved + h;
      const double lp = heatmap_l2_loss(pred, target);
      pred[k].values[i] = saved - h;
      const double lm = heatmap_l2_loss(pred, target);
      pred[k].values[i] = saved;
      EXPECT_NEAR(grad[k].values[i], (lp - lm) / (2 * h), 1e-5);
    }
  }
}

TEST(HeatmapLoss, ShapeMismatch) {
  EXPECT_THROW(heatmap_l2_loss({Heatmap(2, 2)}, {Heatmap(2, 3)}), DimensionError);
  EXPECT_THROW(heatmap_l2_loss({Heatmap(2, 2)}, {}), DimensionError);
}

TEST(DecodeHeatmaps, ZeroMapAndTies) {
  const auto zero = decode_heatmaps({Heatmap(3, 3)}, 4);
  EXPECT_EQ(zero.points[0].x, 0.0);
  EXPECT_EQ(zero.points[0].y, 0.0);
  EXPECT_EQ(zero.points[0].confidence, 0.0);

  Heatmap h(4, 4);
  h.at(2, 3) = 0.7f;
  h.at(3, 1) = 0.7f;
  const auto kp = decode_heatmaps({h}, 4.0, 2.0);
  EXPECT_EQ(kp.points[0].x, 12.0);
  EXPECT_EQ(kp.points[0].y, 4.0);
  EXPECT_NEAR(kp.points[0].confidence, 0.7, 1e-7);

  h.at(0, 0) = 1.8f;
  EXPECT_EQ(decode_heatmaps({h}, 1).points[0].confidence, 1.0);
}

TEST(FullShot, HeadAndBothAnkles) {
  const auto& schema = KeypointSchema::coco17();
  auto s = uniform_set(0.0);
  EXPECT_FALSE(is_full_shot(s, schema));
  s.points[schema.index_of("left_ear")].confidence = 0.5;  // threshold is inclusive
  s.points[schema.index_of("left_ankle")].confidence = 0.9;
  EXPECT_FALSE(is_full_shot(s, schema));
  s.points[schema.index_of("right_ankle")].confidence = 0.5;
  EXPECT_TRUE(is_full_shot(s, schema));
  EXPECT_FALSE(is_full_shot(s, schema, 0.6));
  s.points[schema.index_of("left_ear")].confidence = 0.49;
  EXPECT_FALSE(is_full_shot(s, schema));
  EXPECT_TRUE(is_full_shot(uniform_set(1.0), schema));

  KeypointSet short_set;
  short_set.points.resize(5);
  EXPECT_THROW(is_full_shot(short_set, schema), DimensionError);
}

TEST(Schema, ValidationAndLookup) {
  const auto& coco = KeypointSchema::coco17();
  EXPECT_EQ(coco.size(), 17u);
  EXPECT_EQ(coco.index_of("right_ankle"), 16u);
  EXPECT_THROW(coco.index_of("tail"), NotFoundError);
  EXPECT_EQ(KeypointSchema::from_json(coco.to_json()).names, coco.names);

  KeypointSchema dup{{"a", "a"}, {"a"}, {"a"}};
  EXPECT_THROW(dup.validate(), ValidationError);
  KeypointSchema overlap{{"a", "b"}, {"a"}, {"a"}};
  EXPECT_THROW(overlap.validate(), ValidationError);
  KeypointSchema missing{{"a", "b"}, {"a"}, {"c"}};
  EXPECT_THROW(missing.validate(), ValidationError);
}

TEST(ModelConfig, Validation) {
  auto cfg = KeypointModelConfig::tiny();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(KeypointModelConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
  cfg.deconv_layers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = KeypointModelConfig::tiny();
  cfg.heatmap_sigma = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// A bright square marks the "nose"; every other point is unannotated.
KeypointSample square_sample(int x, int y) {
  KeypointSample s;
  s.image = Image(32, 48, {20, 20, 20});
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) s.image.set_clipped(x + dx, y + dy, {250, 250, 250});
  }
  s.keypoints.assign(17, {0.0, 0.0, 0.0});
  s.keypoints[0] = {static_cast<double>(x), static_cast<double>(y), 2.0};
  return s;
}

TEST(KeypointModel, TrainsSaveLoadAndShapes) {
  std::vector<KeypointSample> data;
  for (int i = 0; i < 6; ++i) data.push_back(square_sample(6 + 4 * i, 8 + 5 * i));
  const auto cfg = KeypointModelConfig::tiny();
  nn::TrainOptions short_run{1, 4, 2e-3, 3}, long_run{25, 4, 2e-3, 3};
  TrainReport first, last;
  train_keypoint_model(data, cfg, short_run, KeypointSchema::coco17(), &first);
  const auto model = train_keypoint_model(data, cfg, long_run, KeypointSchema::coco17(), &last);
  EXPECT_LT(last.final_loss, first.final_loss);

  const auto maps = model->predict_heatmaps(data[2].image);
  ASSERT_EQ(maps.size(), 17u);
  EXPECT_EQ(maps[0].height, cfg.heatmap_height());
  EXPECT_EQ(maps[0].width, cfg.heatmap_width());

  const auto path = (std::filesystem::temp_directory_path() / "looklab_kp_test.llm").string();
  model->save(path);
  const auto loaded = KeypointModel::load(path);
  const auto a = model->infer(data[3].image), b = loaded->infer(data[3].image);
  for (size_t i = 0; i < 17; ++i) {
    EXPECT_EQ(a.points[i].x, b.points[i].x);
    EXPECT_EQ(a.points[i].confidence, b.points[i].confidence);
  }
  std::filesystem::remove(path);
}

TEST(KeypointModel, RejectsBadData) {
  const auto cfg = KeypointModelConfig::tiny();
  EXPECT_THROW(train_keypoint_model({}, cfg, {}), ConfigError);
  auto s = square_sample(5, 5);
  s.keypoints.pop_back();
  EXPECT_THROW(train_keypoint_model({s}, cfg, {}), ValidationError);
}

TEST(KeypointManifest, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "looklab_kp_manifest";
  std::filesystem::create_directories(dir);
  std::vector<KeypointRecord> rows{{"a.ppm", std::vector<std::array<double, 3>>(17, {1, 2, 2})}};
  write_keypoint_manifest((dir / "kp.jsonl").string(), rows);
  const auto back = read_keypoint_manifest((dir / "kp.jsonl").string());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].keypoints, rows[0].keypoints);
  EXPECT_EQ(std::filesystem::path(back[0].image_path).filename(), "a.ppm");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace looklab::keypoints
