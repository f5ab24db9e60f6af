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

#ifndef LOOKLAB_POSE_H_
#define LOOKLAB_POSE_H_

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "looklab/image.h"
#include "looklab/jsonl.h"
#include "looklab/nn/backbone.h"
#include "looklab/nn/layers.h"

namespace looklab::pose {

// Canonical order; also the tie-break order.
enum class PoseLabel { kFront = 0, kBack = 1, kLeft = 2, kRight = 3, kDetailed = 4 };
inline constexpr int kNumPoses = 5;
inline constexpr std::array<PoseLabel, kNumPoses> kAllPoses = {
    PoseLabel::kFront, PoseLabel::kBack, PoseLabel::kLeft, PoseLabel::kRight,
    PoseLabel::kDetailed};

std::string_view pose_name(PoseLabel p);
// Throws ValidationError.
PoseLabel parse_pose(std::string_view name);

struct PosePrediction {
  PoseLabel label = PoseLabel::kFront;
  double confidence = 0.0;
  std::array<double, kNumPoses> scores{};
};

// Argmax with ties going to the earliest label in canonical order.
PosePrediction classify_from_scores(const std::array<double, kNumPoses>& scores);

struct ConfusionMatrix {
  std::array<std::array<long, kNumPoses>, kNumPoses> counts{};  // [truth][pred]
  long total() const;
};

// Throws ValidationError on length mismatch or empty input.
ConfusionMatrix confusion_matrix(const std::vector<PoseLabel>& truths,
                                 const std::vector<PoseLabel>& preds);

struct ClassPrecisionRecall {
  PoseLabel label;
  double precision;
  double recall;
};
// 0/0 is reported as 0.
std::vector<ClassPrecisionRecall> precision_recall_per_class(const ConfusionMatrix& cm);

std::string confusion_matrix_csv(const ConfusionMatrix& cm);
Json precision_recall_json(const std::vector<ClassPrecisionRecall>& pr);

struct PoseModelConfig {
  std::string backbone = "resnet18";
  int input_height = 224;
  int input_width = 224;

  static PoseModelConfig tiny();
  void validate() const;
  Json to_json() const;
  static PoseModelConfig from_json(const Json& j);
};

class PoseModel {
 public:
  PoseModel(PoseModelConfig config, uint64_t seed);

  static std::unique_ptr<PoseModel> load(const std::string& path);
  void save(const std::string& path) const;

  // Softmax over the five classes. Safe for concurrent callers.
  PosePrediction classify(const Image& image) const;

  nn::Tensor forward(const nn::Tensor& x, nn::Context* ctx) const { return net_.forward(x, ctx); }
  void backward(const nn::Tensor& grad, const nn::Context& ctx) { net_.backward(grad, ctx); }
  std::vector<nn::Param*> params() { return net_.params(); }
  const PoseModelConfig& config() const { return config_; }

 private:
  PoseModelConfig config_;
  nn::Sequential net_;
};

struct PoseSample {
  Image image;
  PoseLabel label;
};

// Cross-entropy training. Throws ConfigError on an empty dataset.
std::unique_ptr<PoseModel> train_pose_model(const std::vector<PoseSample>& data,
                                            const PoseModelConfig& config,
                                            const nn::TrainOptions& options);

// Manifest rows: {image_path, pose_label}.
struct PoseRecord {
  std::string image_path;
  PoseLabel label;
};
std::vector<PoseRecord> read_pose_manifest(const std::string& path);
void write_pose_manifest(const std::string& path, const std::vector<PoseRecord>& rows);

}  // namespace looklab::pose

#endif  // LOOKLAB_POSE_H_
