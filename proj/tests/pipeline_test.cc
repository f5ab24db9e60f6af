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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "looklab/errors.h"
#include "looklab/pipeline.h"
#include "registry_fixture.h"

namespace looklab::pipeline {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world_ = new looklab::testing::TestWorld(looklab::testing::make_test_world("looklab_pipeline_world"));
    registry_ = new std::shared_ptr<const ModelRegistry>(ModelRegistry::load(world_->registry_path));
  }
  static void TearDownTestSuite() {
    fs::remove_all(world_->dir);
    delete registry_;
    delete world_;
  }

  const ModelRegistry& reg() const { return **registry_; }
  ImageLoader loader() const { return file_loader(world_->dir); }
  std::string front_image(size_t i) const { return world_->truth[i]["full_shot_image"].get<std::string>(); }

  static looklab::testing::TestWorld* world_;
  static std::shared_ptr<const ModelRegistry>* registry_;
};

looklab::testing::TestWorld* PipelineTest::world_ = nullptr;
std::shared_ptr<const ModelRegistry>* PipelineTest::registry_ = nullptr;

TEST_F(PipelineTest, RegistryLoadsAndDescribes) {
  const Json d = reg().describe();
  EXPECT_EQ(d["version"], "test-1");
  EXPECT_EQ(d["scoring"], "euclidean");
  EXPECT_EQ(d["catalog"]["size"], 60);
  EXPECT_EQ(d["detector"]["name"], "replay");
  EXPECT_EQ(d["embedders"].size(), reg().taxonomy.broad_categories().size());
}

TEST_F(PipelineTest, RegistryRejectsMismatchedCatalog) {
  Json j = read_json_file(world_->registry_path);
  auto& emb = j["embedders"];
  const auto first = emb.begin().key();
  // Point the first category at another category's weights.
  emb[first] = std::next(emb.begin()).value();
  const auto path = (world_->dir / "models" / "bad_registry.json").string();
  write_text_file(path, j.dump());
  EXPECT_THROW(ModelRegistry::load(path), ConfigError);

  j = read_json_file(world_->registry_path);
  j["detector"]["kind"] = "magic";
  write_text_file(path, j.dump());
  EXPECT_THROW(ModelRegistry::load(path), ConfigError);

  j = read_json_file(world_->registry_path);
  j["embedders"].erase(first);
  j["catalog"].erase(0);
  write_text_file(path, j.dump());
  EXPECT_THROW(ModelRegistry::load(path), ConfigError);
}

TEST_F(PipelineTest, RequestParsing) {
  const auto r = pdp_request_from_json({{"request_id", "a"}, {"images", {"x.ppm"}}, {"ugc", true}});
  EXPECT_EQ(r.request_id, "a");
  EXPECT_TRUE(r.ugc);
  EXPECT_EQ(to_json(r)["images"][0], "x.ppm");
  EXPECT_THROW(pdp_request_from_json({{"request_id", "a"}, {"images", "x.ppm"}}), Error);
  EXPECT_THROW(pdp_request_from_json({{"request_id", "a"}}), Error);
  EXPECT_THROW(pdp_request_from_json({{"images", Json::array()}}), ValidationError);
}

TEST_F(PipelineTest, RequestValidation) {
  EXPECT_THROW(recommend_look({"r", {}, false}, reg(), 14, loader()), ValidationError);
  EXPECT_THROW(recommend_look({"r", {front_image(0), front_image(1)}, true}, reg(), 14, loader()),
               ValidationError);
  EXPECT_THROW(recommend_look({"r", {front_image(0)}, false}, reg(), 0, loader()), ValidationError);
  EXPECT_THROW(recommend_look({"r", {"missing.ppm"}, false}, reg(), 14, loader()), DecodeError);
  EXPECT_THROW(recommend_look({"r", {"missing.ppm"}, true}, reg(), 14, loader()), DecodeError);
}

TEST_F(PipelineTest, UgcSkipsSelectionAndRetrievesPerArticle) {
  const auto rec = recommend_look({"u", {front_image(0)}, true}, reg(), 5, loader());
  EXPECT_TRUE(rec.ugc);
  ASSERT_TRUE(rec.selected_image);
  EXPECT_EQ(*rec.selected_image, front_image(0));
  ASSERT_EQ(rec.rejection_reasons.size(), 1u);
  EXPECT_EQ(rec.rejection_reasons[0].reason, kUgcInput);
  ASSERT_EQ(rec.per_article.size(), 3u);
  for (const auto& a : rec.per_article) {
    EXPECT_TRUE(a.reason.empty()) << a.reason;
    EXPECT_EQ(a.retrieval.ranked.size(), 5u);
    EXPECT_EQ(a.retrieval.query_ref, "u/" + a.detection.article_type);
    EXPECT_EQ(a.broad_category, reg().taxonomy.broad_of(a.detection.article_type));
    EXPECT_EQ(a.model_version, reg().embedders.at(a.broad_category)->version());
    for (const auto& p : a.retrieval.ranked) {
      EXPECT_EQ(reg().index->find(p.product_id)->article_type, a.detection.article_type);
    }
  }
}

TEST_F(PipelineTest, SelectionDecisionsCoverEveryImage) {
  for (double threshold : {0.0, 0.5, 1.0}) {
    ModelRegistry r = reg();
    r.thresholds.keypoint = threshold;
    auto images = world_->pdps[1]["images"].get<std::vector<std::string>>();
    images.push_back("missing.ppm");
    const auto rec = recommend_look({"p", images, false}, r, 14, loader());
    ASSERT_EQ(rec.rejection_reasons.size(), images.size());
    size_t selected = 0;
    for (size_t i = 0; i < images.size(); ++i) {
      const auto& d = rec.rejection_reasons[i];
      EXPECT_EQ(d.image, images[i]);
      const std::vector<std::string_view> allowed{kSelected, kNoFullShot, kNotFront, kLowerFrontConfidence};
      if (i + 1 == images.size()) {
        EXPECT_EQ(d.reason, kUndecodable);
      } else {
        EXPECT_NE(std::find(allowed.begin(), allowed.end(), d.reason), allowed.end()) << d.reason;
      }
      if (d.reason == kSelected) {
        ++selected;
        ASSERT_TRUE(rec.selected_image);
        EXPECT_EQ(*rec.selected_image, images[i]);
        ASSERT_TRUE(d.pose);
        EXPECT_EQ(d.pose->label, pose::PoseLabel::kFront);
      }
      if (d.reason == kNotFront || d.reason == kLowerFrontConfidence) EXPECT_TRUE(d.pose);
    }
    EXPECT_EQ(selected, rec.selected_image ? 1u : 0u);
    if (!rec.selected_image) EXPECT_TRUE(rec.per_article.empty());
  }
}

// Emits one box of an unknown type and one box outside the image.
class OddDetector : public detect::Detector {
 public:
  std::vector<detect::Detection> detect(const detect::ImageInput& in) const override {
    return {{{1, 1, 20, 20}, "Spacesuits", 0.8},
            {{500, 2, 520, 30}, "T-shirts", 0.7},
            {{4, 4, 40, 40}, "Shorts", 0.2},
            {{5, 5, 30, 30}, "Shorts", 0.6}};
  }
  detect::DetectorInfo info() const override { return {"odd", "1"}; }
};

TEST_F(PipelineTest, PerArticleFailuresAreRecorded) {
  ModelRegistry r = reg();
  r.detector = std::make_shared<OddDetector>();
  r.thresholds.min_detection = 0.5;
  r.embedders.erase(r.taxonomy.broad_of("Shorts"));
  const auto rec = recommend_look({"o", {front_image(0)}, true}, r, 14, loader());
  ASSERT_EQ(rec.per_article.size(), 3u);
  EXPECT_EQ(rec.per_article[0].reason, kUnknownArticleType);
  EXPECT_EQ(rec.per_article[1].reason, kDegenerateBox);
  EXPECT_EQ(rec.per_article[2].reason, kNoModel);
  const Json j = to_json(rec);
  EXPECT_EQ(j["per_article"][0]["reason"], "unknown_article_type");
  EXPECT_EQ(j["selected_image"], front_image(0));
}

TEST_F(PipelineTest, ProfileReportsStages) {
  const auto [rec, timings] = profile_request({"t", {front_image(0)}, true}, reg(), 3, loader());
  EXPECT_EQ(rec.per_article.size(), 3u);
  std::vector<std::string_view> names;
  for (const auto& t : timings) {
    names.push_back(stage_name(t.stage));
    EXPECT_GE(t.elapsed_ms, 0.0);
  }
  for (const char* s : {"detect", "embed", "retrieve"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), s), names.end()) << s;
  }
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST_F(PipelineTest, BatchIsDeterministicAndKeepsGoing) {
  const auto manifest = (world_->dir / "batch.jsonl").string();
  auto rows = world_->pdps;
  rows.push_back({{"request_id", "broken"}, {"images", Json::array()}});
  rows.push_back({{"request_id", "ugc"}, {"images", {front_image(2)}}, {"ugc", true}});
  write_jsonl(manifest, rows);
  const auto a = (world_->dir / "a.jsonl").string(), b = (world_->dir / "b.jsonl").string();
  const auto recs = run_batch(manifest, a, reg(), {7});
  run_batch(manifest, b, reg(), {7});
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(recs.size(), rows.size() - 1);

  const auto lines = read_jsonl(a);
  ASSERT_EQ(lines.size(), rows.size());
  EXPECT_EQ(lines[rows.size() - 2]["request_id"], "broken");
  EXPECT_TRUE(lines[rows.size() - 2].contains("error"));

  // Reading the written file matches reducing the in-memory results.
  const auto from_file = read_retrieval_results(a);
  const auto from_memory = retrieval_results(recs);
  EXPECT_EQ(from_file, from_memory);
  EXPECT_GE(from_file.size(), 3u);
  for (const auto& r : from_file) EXPECT_LE(r.ranked.size(), 7u);
}

TEST(RetrievalResults, RepeatedTypeKeepsTopDetection) {
  LookRecommendation rec;
  ArticleResult hi, lo;
  hi.detection = {{0, 0, 1, 1}, "Shorts", 0.9};
  hi.retrieval = {"q/hi", {{"a", 1.0}}};
  lo.detection = {{0, 0, 2, 2}, "Shorts", 0.4};
  lo.retrieval = {"q/lo", {{"b", 1.0}}};
  rec.per_article = {hi, lo};
  const auto out = retrieval_results({rec});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].query_ref, "q/hi");
}

TEST(Thresholds, RangeChecked) {
  EXPECT_EQ(Thresholds::from_json(Json::object()).keypoint, 0.5);
  EXPECT_THROW(Thresholds::from_json({{"keypoint", 1.5}}), ConfigError);
  EXPECT_THROW(Thresholds::from_json({{"min_detection", -0.1}}), ConfigError);
  const Thresholds t = Thresholds::from_json({{"keypoint", 0.3}});
  EXPECT_EQ(Thresholds::from_json(t.to_json()).keypoint, 0.3);
}

}  // namespace
}  // namespace looklab::pipeline
