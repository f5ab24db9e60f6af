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

#ifndef LOOKLAB_PIPELINE_H_
#define LOOKLAB_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "looklab/detect.h"
#include "looklab/embed/model.h"
#include "looklab/image.h"
#include "looklab/jsonl.h"
#include "looklab/keypoints.h"
#include "looklab/pose.h"
#include "looklab/retrieve.h"

namespace looklab::pipeline {

struct Thresholds {
  double keypoint = 0.5;        // full-shot visibility threshold
  double min_detection = 0.0;   // detections scoring below are dropped
  double pad_fraction = detect::kDefaultPadFraction;

  Json to_json() const;
  static Thresholds from_json(const Json& j);
};

// Immutable bundle of every model plus the catalog index. Shared read-only
// across concurrent requests; the service swaps whole registries.
struct ModelRegistry {
  std::string version;
  detect::ArticleTaxonomy taxonomy;
  std::shared_ptr<const keypoints::KeypointModel> keypoints;
  std::shared_ptr<const pose::PoseModel> pose;
  std::shared_ptr<const detect::Detector> detector;
  // Keyed by broad category.
  std::map<std::string, std::shared_ptr<const embed::EmbeddingModel>> embedders;
  std::shared_ptr<const retrieve::Index> index;
  retrieve::ScoringMode mode = retrieve::ScoringMode::kCosine;
  Thresholds thresholds;

  // Registry file: {"version", "taxonomy", "keypoints", "pose",
  // "detector": {"kind": "tiny"|"replay", "path"}, "embedders": {broad: path},
  // "catalog": [paths], "scoring", "thresholds"}. Paths are relative to the
  // file. Throws ConfigError when a catalog file was embedded by a different
  // model version than the registered embedder.
  static std::shared_ptr<const ModelRegistry> load(const std::string& path);
  // Throws ConfigError when a broad category of the taxonomy has no embedder.
  void validate() const;
  Json describe() const;
};

struct PdpRequest {
  std::string request_id;
  std::vector<std::string> images;  // image refs
  bool ugc = false;
};

Json to_json(const PdpRequest& r);
// Throws DecodeError/ValidationError on malformed input.
PdpRequest pdp_request_from_json(const Json& j);

// Maps an image ref to a canonical key (what detectors see as the image
// path) and the key to pixels. read throws on failure.
struct ImageLoader {
  std::function<std::string(const std::string& ref)> resolve;
  std::function<Image(const std::string& key)> read;
};
// Relative refs resolve against base_dir.
ImageLoader file_loader(std::filesystem::path base_dir);

// Reason codes attached to each image of a request.
inline constexpr std::string_view kSelected = "selected";
inline constexpr std::string_view kUndecodable = "undecodable";
inline constexpr std::string_view kNoFullShot = "no_full_shot";
inline constexpr std::string_view kNotFront = "not_front";
inline constexpr std::string_view kLowerFrontConfidence = "lower_front_confidence";
inline constexpr std::string_view kUgcInput = "ugc_input";

// Reason codes attached to a detected article.
inline constexpr std::string_view kNoModel = "no_model";
inline constexpr std::string_view kUnknownArticleType = "unknown_article_type";
inline constexpr std::string_view kDegenerateBox = "degenerate_box";
inline constexpr std::string_view kEmbedFailed = "embed_failed";
inline constexpr std::string_view kEmptyIndex = "empty_index";

struct ImageDecision {
  std::string image;
  std::string reason;
  std::optional<pose::PosePrediction> pose;
};

struct ArticleResult {
  detect::Detection detection;
  std::string broad_category;
  std::string model_version;
  retrieve::RetrievalResult retrieval;
  std::string reason;  // empty on success
};

struct LookRecommendation {
  std::string request_id;
  bool ugc = false;
  std::optional<std::string> selected_image;
  std::vector<ImageDecision> rejection_reasons;  // one per input image
  std::vector<ArticleResult> per_article;
};

Json to_json(const LookRecommendation& r);

enum class Stage { kKeypoints, kPose, kDetect, kEmbed, kRetrieve };
std::string_view stage_name(Stage s);

struct StageTiming {
  Stage stage = Stage::kKeypoints;
  double elapsed_ms = 0.0;
};

struct LoadedImage {
  std::string ref;
  std::string key;
  std::optional<Image> image;  // empty when undecodable
};

struct Selection {
  std::optional<size_t> chosen;
  std::vector<ImageDecision> decisions;  // aligned with the input
};

// Pass one keeps full shots, pass two keeps front poses, then the highest
// front confidence wins (ties: first image). Throws DecodeError when no
// image decodes.
Selection select_full_shot(const std::vector<LoadedImage>& images,
                           const keypoints::KeypointModel& keypoints,
                           const pose::PoseModel& pose, const Thresholds& thresholds,
                           std::vector<StageTiming>* timings = nullptr);

// Stage failures after selection are recorded per article. Throws
// ValidationError for an empty request or a multi-image UGC request, and
// DecodeError when no image decodes.
LookRecommendation recommend_look(const PdpRequest& req, const ModelRegistry& registry, int k,
                                  const ImageLoader& loader);

std::pair<LookRecommendation, std::vector<StageTiming>> profile_request(
    const PdpRequest& req, const ModelRegistry& registry, int k, const ImageLoader& loader);

// Retrieval results of a batch, one per article, for P@K / R@K scoring.
// When an article type repeats within a request the top-scoring detection
// represents it.
std::vector<retrieve::RetrievalResult> retrieval_results(
    const std::vector<LookRecommendation>& recs);

// Reads retrieval results from JSONL holding either {query_ref, ranked}
// rows or recommendation rows (reduced as by retrieval_results). Failed
// batch requests are skipped.
std::vector<retrieve::RetrievalResult> read_retrieval_results(const std::string& path);

struct BatchOptions {
  int k = retrieve::kDefaultK;
};

// Runs every request of a JSONL manifest in order and writes one
// recommendation per line. A request that fails as a whole is written as
// {"request_id", "error"} and the batch continues. Returns the results.
std::vector<LookRecommendation> run_batch(const std::string& manifest_path,
                                          const std::string& out_path,
                                          const ModelRegistry& registry,
                                          const BatchOptions& options);

}  // namespace looklab::pipeline

#endif  // LOOKLAB_PIPELINE_H_
