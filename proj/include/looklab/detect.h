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

#ifndef LOOKLAB_DETECT_H_
#define LOOKLAB_DETECT_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "looklab/image.h"
#include "looklab/jsonl.h"

namespace looklab::detect {

// Broad category -> finer article types. Finer types are globally unique.
class ArticleTaxonomy {
 public:
  ArticleTaxonomy() = default;
  // Throws ValidationError on duplicate finer types or empty categories.
  explicit ArticleTaxonomy(std::vector<std::pair<std::string, std::vector<std::string>>> categories);

  // The shipped default: 7 broad categories, 20 finer types.
  static const ArticleTaxonomy& fashion_default();
  static ArticleTaxonomy from_json(const Json& j);
  static ArticleTaxonomy load(const std::string& path);
  Json to_json() const;

  bool contains(std::string_view article_type) const;
  // Throws NotFoundError for unknown types.
  const std::string& broad_of(std::string_view article_type) const;
  const std::vector<std::pair<std::string, std::vector<std::string>>>& categories() const {
    return categories_;
  }
  std::vector<std::string> broad_categories() const;
  std::vector<std::string> article_types() const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> categories_;
  std::map<std::string, std::string, std::less<>> broad_by_type_;
};

struct BoundingBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  BoundingBox box;
  std::string article_type;
  double score = 0.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthBox {
  BoundingBox box;
  std::string article_type;
  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);

struct MatchFlag {
  bool true_positive = false;
  std::optional<size_t> gt_index;
};

// Greedy by descending score (stable on input order). Each detection takes
// the highest-IoU still-unmatched ground truth of the same class with
// IoU >= iou_thresh (ties: lowest index). Output aligned with `dets`.
std::vector<MatchFlag> match_detections(const std::vector<Detection>& dets,
                                        const std::vector<GroundTruthBox>& gts,
                                        double iou_thresh);

struct ScoredFlag {
  double score = 0.0;
  bool true_positive = false;
};

// All-point interpolated area under the precision-recall curve. Detections
// are ranked by descending score, stable on input order. 0 when num_gt == 0.
double average_precision(const std::vector<ScoredFlag>& ranked, size_t num_gt);

// Unweighted mean over classes with ground truth. Throws ConfigError when no
// class is evaluable.
struct ClassAp {
  std::string name;
  size_t num_gt = 0;
  size_t num_det = 0;
  double ap = 0.0;
};
double mean_average_precision(const std::vector<ClassAp>& per_class);

// One image worth of annotations or predictions, keyed by image path.
struct AnnotatedImage {
  std::string image_path;
  std::vector<GroundTruthBox> boxes;
};
struct ImageDetections {
  std::string image_path;
  std::vector<Detection> detections;
};

enum class Grouping { kArticleType, kBroadCategory };

struct EvaluationReport {
  std::vector<ClassAp> per_class;
  double map = 0.0;
};

// Matches per image at the finer-type level (a correct class is required),
// then pools flags by article type or by broad category.
EvaluationReport evaluate(const std::vector<AnnotatedImage>& gt,
                          const std::vector<ImageDetections>& dets, double iou_thresh,
                          Grouping grouping = Grouping::kArticleType,
                          const ArticleTaxonomy& taxonomy = ArticleTaxonomy::fashion_default());

std::string format_ap_table(const EvaluationReport& report);

struct Roi {
  size_t detection_index = 0;
  std::string article_type;
  BoundingBox padded_box;  // integer pixel bounds actually cropped
  Image crop;
};

inline constexpr double kDefaultPadFraction = 0.05;

// Expands each box by pad_fraction of its width/height per side, clamps to
// the image, and crops. Boxes that are degenerate after clamping are skipped
// with a warning.
std::vector<Roi> crop_rois(const Image& image, const std::vector<Detection>& dets,
                           double pad_fraction = kDefaultPadFraction);

// ------------------------------------------------------------ detectors

struct DetectorInfo {
  std::string name;
  std::string version;
};

// An image plus the reference it was loaded from (path or request-local id).
struct ImageInput {
  std::string ref;
  const Image* image = nullptr;
};

class Detector {
 public:
  virtual ~Detector() = default;
  // Outputs satisfy the Detection invariants: valid box inside the image,
  // known article type, score in [0, 1].
  virtual std::vector<Detection> detect(const ImageInput& input) const = 0;
  virtual DetectorInfo info() const = 0;
};

// Replays precomputed detections by image path. Stateless after
// construction, fully concurrent. Unknown images yield no detections.
class ReplayDetector : public Detector {
 public:
  explicit ReplayDetector(std::vector<ImageDetections> recorded, std::string version = "replay-1");
  static std::shared_ptr<ReplayDetector> load(const std::string& detections_path);

  std::vector<Detection> detect(const ImageInput& input) const override;
  DetectorInfo info() const override { return {"replay", version_}; }

 private:
  std::map<std::string, std::vector<Detection>> by_path_;
  std::string version_;
};

// GT manifest: {image_path, boxes: [{x_min, y_min, x_max, y_max, article_type}]}.
// Detections file: same, each box with a "score".
std::vector<AnnotatedImage> read_gt_manifest(const std::string& path);
void write_gt_manifest(const std::string& path, const std::vector<AnnotatedImage>& images);
std::vector<ImageDetections> read_detections(const std::string& path);
void write_detections(const std::string& path, const std::vector<ImageDetections>& images);

Json box_to_json(const BoundingBox& b);
BoundingBox box_from_json(const Json& j);
Json to_json(const Detection& d);
Detection detection_from_json(const Json& j);

}  // namespace looklab::detect

#endif  // LOOKLAB_DETECT_H_
