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

#include <filesystem>
#include <functional>

#include "looklab/detect.h"
#include "looklab/errors.h"
#include "looklab/rng.h"

namespace looklab::detect {
namespace {

std::vector<ScoredFlag> ranked(const std::vector<bool>& flags) {
  std::vector<ScoredFlag> out;
  for (size_t i = 0; i < flags.size(); ++i) {
    out.push_back({1.0 - 0.01 * static_cast<double>(i), flags[i]});
  }
  return out;
}

// Maximum same-class matching by exhaustive search over assignments.
size_t optimal_matching(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                        double thr) {
  std::vector<bool> used(gts.size(), false);
  std::function<size_t(size_t)> go = [&](size_t i) -> size_t {
    if (i == dets.size()) return 0;
    size_t best = go(i + 1);
    for (size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].article_type != dets[i].article_type) continue;
      if (iou(dets[i].box, gts[g].box) < thr) continue;
      used[g] = true;
      best = std::max(best, 1 + go(i + 1));
      used[g] = false;
    }
    return best;
  };
  return go(0);
}

BoundingBox random_box(Rng& rng) {
  const double x = rng.uniform(0, 10), y = rng.uniform(0, 10);
  return {x, y, x + rng.uniform(1, 6), y + rng.uniform(1, 6)};
}

TEST(Iou, AnalyticCases) {
  EXPECT_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0);
  EXPECT_EQ(iou({0, 0, 2, 2}, {1, 0, 3, 2}), 1.0 / 3.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);
}

TEST(Iou, SymmetricAndScaleInvariant) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const BoundingBox a = random_box(rng), b = random_box(rng);
    EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    const double s = rng.uniform(0.1, 10);
    const BoundingBox as{a.x_min * s, a.y_min * s, a.x_max * s, a.y_max * s};
    const BoundingBox bs{b.x_min * s, b.y_min * s, b.x_max * s, b.y_max * s};
    EXPECT_NEAR(iou(as, bs), iou(a, b), 1e-12);
  }
}

TEST(Match, Examples) {
  const std::vector<GroundTruthBox> gt{{{0, 0, 10, 10}, "Jeans"}};
  auto f = match_detections({{{0, 0, 10, 10}, "Jeans", 0.9}}, gt, 0.5);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_TRUE(f[0].true_positive);
  EXPECT_EQ(f[0].gt_index, 0u);

  f = match_detections({{{0, 0, 10, 10}, "Shorts", 0.9}}, gt, 0.5);
  EXPECT_FALSE(f[0].true_positive);

  // Both at IoU 0.8 with the single GT; listed low score first.
  const std::vector<Detection> two{{{0, 0, 10, 8}, "Jeans", 0.8}, {{0, 0, 8, 10}, "Jeans", 0.9}};
  ASSERT_DOUBLE_EQ(iou(two[0].box, gt[0].box), 0.8);
  f = match_detections(two, gt, 0.5);
  EXPECT_FALSE(f[0].true_positive);
  EXPECT_TRUE(f[1].true_positive);
  EXPECT_EQ(optimal_matching(two, gt, 0.5), 1u);
}

TEST(Match, EqualScoresKeepInputOrder) {
  const std::vector<GroundTruthBox> gt{{{0, 0, 10, 10}, "Jeans"}};
  const auto f = match_detections({{{0, 0, 10, 10}, "Jeans", 0.5}, {{0, 0, 10, 10}, "Jeans", 0.5}},
                                  gt, 0.5);
  EXPECT_TRUE(f[0].true_positive);
  EXPECT_FALSE(f[1].true_positive);
}

TEST(Match, ThresholdValidated) {
  EXPECT_THROW(match_detections({}, {}, 0.0), ConfigError);
  EXPECT_THROW(match_detections({}, {}, 1.5), ConfigError);
  EXPECT_NO_THROW(match_detections({}, {}, 1.0));
}

TEST(Match, GreedyNeverBeatsOptimal) {
  Rng rng(77);
  const std::vector<std::string> classes{"Jeans", "Shorts"};
  size_t unequal = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<Detection> dets;
    std::vector<GroundTruthBox> gts;
    const size_t nd = rng.below(7), ng = rng.below(7);
    for (size_t i = 0; i < nd; ++i) {
      dets.push_back({random_box(rng), classes[rng.below(2)], rng.uniform()});
    }
    for (size_t i = 0; i < ng; ++i) gts.push_back({random_box(rng), classes[rng.below(2)]});
    const auto flags = match_detections(dets, gts, 0.3);
    size_t tp = 0;
    std::vector<int> hits(gts.size(), 0);
    for (size_t i = 0; i < flags.size(); ++i) {
      if (!flags[i].true_positive) continue;
      ++tp;
      ASSERT_TRUE(flags[i].gt_index.has_value());
      const size_t g = *flags[i].gt_index;
      ++hits[g];
      EXPECT_EQ(gts[g].article_type, dets[i].article_type);
      EXPECT_GE(iou(dets[i].box, gts[g].box), 0.3);
    }
    for (int h : hits) EXPECT_LE(h, 1);
    const size_t opt = optimal_matching(dets, gts, 0.3);
    EXPECT_LE(tp, opt);
    if (tp != opt) ++unequal;
  }
  std::cout << "greedy below optimum on " << unequal << " of 500 instances\n";
}

TEST(Match, NonOverlappingFixtureMatchesOptimal) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<Detection> dets;
    std::vector<GroundTruthBox> gts;
    for (int i = 0; i < 6; ++i) {
      const double x = 20.0 * i;
      gts.push_back({{x, 0, x + 10, 10}, "Jeans"});
      if (rng.bernoulli(0.7)) {
        dets.push_back({{x + rng.uniform(-1, 1), 0, x + 10, 10}, "Jeans", 1.0 - 0.1 * i});
      }
    }
    const auto flags = match_detections(dets, gts, 0.5);
    size_t tp = 0;
    for (const auto& f : flags) tp += f.true_positive;
    EXPECT_EQ(tp, optimal_matching(dets, gts, 0.5));
  }
}

TEST(AveragePrecision, HandEnumeratedFixtures) {
  EXPECT_NEAR(average_precision(ranked({true, false, true}), 2), 5.0 / 6.0, 1e-9);
  EXPECT_NEAR(average_precision(ranked({false, true}), 1), 0.5, 1e-9);
  EXPECT_NEAR(average_precision(ranked({true, true, false, false, true}), 4), 0.65, 1e-9);
  EXPECT_NEAR(average_precision(ranked({true}), 3), 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(average_precision(ranked({false, false, true, false, true}), 2), 0.4, 1e-9);
}

TEST(AveragePrecision, TrivialCases) {
  EXPECT_EQ(average_precision(ranked({true, true}), 2), 1.0);
  EXPECT_EQ(average_precision({}, 3), 0.0);
  EXPECT_EQ(average_precision({}, 0), 0.0);
}

TEST(AveragePrecision, SortsByScore) {
  const std::vector<ScoredFlag> shuffled{{0.2, true}, {0.9, true}, {0.5, false}};
  EXPECT_NEAR(average_precision(shuffled, 2), 5.0 / 6.0, 1e-12);
}

TEST(AveragePrecision, TrailingFalsePositiveNeverIncreases) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<bool> flags;
    const size_t n = 1 + rng.below(10);
    size_t tps = 0;
    for (size_t i = 0; i < n; ++i) {
      flags.push_back(rng.bernoulli(0.5));
      tps += flags.back();
    }
    const size_t num_gt = tps + rng.below(3);
    const double before = average_precision(ranked(flags), num_gt);
    flags.push_back(false);
    EXPECT_LE(average_precision(ranked(flags), num_gt), before + 1e-15);
  }
}

TEST(MeanAp, Examples) {
  EXPECT_EQ(mean_average_precision({{"a", 1, 1, 1.0}, {"b", 1, 1, 0.0}}), 0.5);
  EXPECT_EQ(mean_average_precision({{"a", 3, 2, 0.37}}), 0.37);
  EXPECT_EQ(mean_average_precision({{"a", 1, 1, 0.6}, {"ghost", 0, 4, 0.0}}), 0.6);
  EXPECT_THROW(mean_average_precision({{"ghost", 0, 2, 0.0}}), ConfigError);
  const std::vector<double> aps{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
  std::vector<ClassAp> seven;
  for (size_t i = 0; i < aps.size(); ++i) seven.push_back({std::to_string(i), 1, 1, aps[i]});
  EXPECT_NEAR(mean_average_precision(seven), 4.2 / 7.0, 1e-15);
}

TEST(Evaluate, PerClassAndBroad) {
  const std::vector<AnnotatedImage> gt{
      {"a.ppm", {{{0, 0, 10, 10}, "Jeans"}, {{20, 20, 30, 30}, "Shirts"}}},
      {"b.ppm", {{{0, 0, 10, 10}, "Shorts"}}}};
  const std::vector<ImageDetections> dets{
      {"a.ppm", {{{0, 0, 10, 10}, "Jeans", 0.9}, {{20, 20, 30, 30}, "Jeans", 0.8}}},
      {"b.ppm", {{{0, 0, 10, 10}, "Shorts", 0.7}}},
      {"c.ppm", {{{0, 0, 5, 5}, "Shirts", 0.95}}}};
  const auto fine = evaluate(gt, dets, 0.5, Grouping::kArticleType);
  ASSERT_EQ(fine.per_class.size(), 3u);
  EXPECT_EQ(fine.per_class[0].name, "Jeans");
  EXPECT_NEAR(fine.per_class[0].ap, 1.0, 1e-12);
  EXPECT_EQ(fine.per_class[1].name, "Shirts");
  EXPECT_EQ(fine.per_class[1].ap, 0.0);
  EXPECT_EQ(fine.per_class[2].ap, 1.0);
  EXPECT_NEAR(fine.map, 2.0 / 3.0, 1e-12);

  const auto broad = evaluate(gt, dets, 0.5, Grouping::kBroadCategory);
  ASSERT_EQ(broad.per_class.size(), 2u);
  EXPECT_EQ(broad.per_class[0].name, "BottomWear");
  EXPECT_EQ(broad.per_class[0].num_gt, 2u);
  // Ranked: Jeans TP 0.9, Jeans FP 0.8, Shorts TP 0.7.
  EXPECT_NEAR(broad.per_class[0].ap, 5.0 / 6.0, 1e-12);
  EXPECT_EQ(broad.per_class[1].name, "Topwear");

  const std::string csv = format_ap_table(fine);
  EXPECT_EQ(csv.rfind("class,num_gt,num_det,ap\n", 0), 0u);
  EXPECT_NE(csv.find("mAP,,,0.666667"), std::string::npos);
}

TEST(CropRois, Examples) {
  Image img(100, 80);
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 100; ++x) img.set(x, y, {uint8_t(x), uint8_t(y), 7});

  auto rois = crop_rois(img, {{{10, 10, 20, 20}, "Jeans", 0.9}}, 0.1);
  ASSERT_EQ(rois.size(), 1u);
  EXPECT_EQ(rois[0].padded_box, (BoundingBox{9, 9, 21, 21}));
  EXPECT_EQ(rois[0].crop.width(), 12);
  EXPECT_EQ(rois[0].crop.at(0, 0).r, 9);

  rois = crop_rois(img, {{{0, 0, 100, 80}, "Jeans", 0.9}}, 0.0);
  EXPECT_EQ(rois[0].crop.pixels(), img.pixels());

  rois = crop_rois(img, {{{90, 70, 100, 80}, "Hand bags", 0.5}}, 0.5);
  EXPECT_EQ(rois[0].padded_box, (BoundingBox{85, 65, 100, 80}));

  rois = crop_rois(img, {{{120, 90, 130, 95}, "Jeans", 0.5}, {{1, 1, 2, 2}, "Skirts", 0.4}}, 0.0);
  ASSERT_EQ(rois.size(), 1u);
  EXPECT_EQ(rois[0].detection_index, 1u);
  EXPECT_EQ(rois[0].article_type, "Skirts");

  EXPECT_THROW(crop_rois(img, {}, -0.1), ConfigError);
}

TEST(Taxonomy, DefaultTable) {
  const auto& t = ArticleTaxonomy::fashion_default();
  EXPECT_EQ(t.broad_categories().size(), 7u);
  EXPECT_EQ(t.article_types().size(), 20u);
  EXPECT_EQ(t.broad_of("Track pants"), "BottomWear");
  EXPECT_EQ(t.broad_of("Hand bags"), "Bags");
  EXPECT_THROW(t.broad_of("Hats"), NotFoundError);
  const auto again = ArticleTaxonomy::from_json(t.to_json());
  EXPECT_EQ(again.categories(), t.categories());
}

TEST(Taxonomy, ConfigFormsAndValidation) {
  const auto t = ArticleTaxonomy::from_json(Json::parse(R"({"Tops": ["Tee"], "Bags": ["Tote"]})"));
  EXPECT_EQ(t.broad_of("Tote"), "Bags");
  EXPECT_THROW(ArticleTaxonomy({{"A", {"x"}}, {"B", {"x"}}}), ValidationError);
  EXPECT_THROW(ArticleTaxonomy({{"A", std::vector<std::string>{}}}), ValidationError);
  EXPECT_THROW(ArticleTaxonomy::from_json(Json::parse(R"({"A": 3})")), DecodeError);
}

TEST(Manifests, RoundTripAndReplay) {
  const auto dir = std::filesystem::temp_directory_path() / "looklab_detect_test";
  std::filesystem::create_directories(dir);
  const std::vector<AnnotatedImage> gt{{"img/a.ppm", {{{1, 2, 3, 4}, "Jeans"}}}};
  write_gt_manifest((dir / "gt.jsonl").string(), gt);
  const auto back = read_gt_manifest((dir / "gt.jsonl").string());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].image_path, (dir / "img/a.ppm").string());
  EXPECT_EQ(back[0].boxes, gt[0].boxes);

  const std::vector<ImageDetections> dets{{"img/a.ppm", {{{1, 2, 3, 4}, "Jeans", 0.25}}}};
  write_detections((dir / "dets.jsonl").string(), dets);
  const auto replay = ReplayDetector::load((dir / "dets.jsonl").string());
  EXPECT_EQ(replay->detect({(dir / "img/./a.ppm").string(), nullptr}), dets[0].detections);
  EXPECT_TRUE(replay->detect({"elsewhere.ppm", nullptr}).empty());
  EXPECT_EQ(replay->info().name, "replay");

  write_text_file((dir / "bad.jsonl").string(),
                  R"({"image_path": "x", "boxes": [{"x_min": 5, "y_min": 0, "x_max": 1, "y_max": 2, "article_type": "Jeans", "score": 0.5}]})"
                  "\n");
  EXPECT_THROW(read_detections((dir / "bad.jsonl").string()), ValidationError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace looklab::detect
