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

#ifndef LOOKLAB_KEYPOINTS_H_
#define LOOKLAB_KEYPOINTS_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "looklab/image.h"
#include "looklab/jsonl.h"
#include "looklab/nn/backbone.h"
#include "looklab/nn/layers.h"

namespace looklab::keypoints {

struct KeypointSchema {
  std::vector<std::string> names;
  std::vector<std::string> head_group;
  std::vector<std::string> ankle_group;

  // The 17-point COCO layout; head = nose, eyes, ears; ankles = left, right.
  static const KeypointSchema& coco17();
  static KeypointSchema from_json(const Json& j);
  Json to_json() const;

  // Throws ValidationError on duplicate names or bad groups.
  void validate() const;
  size_t size() const { return names.size(); }
  // Throws NotFoundError.
  size_t index_of(const std::string& name) const;
};

// One keypoint's score grid, row-major.
struct Heatmap {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  Heatmap() = default;
  Heatmap(int h, int w, float fill = 0.0f)
      : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {}
  float& at(int row, int col) { return values[static_cast<size_t>(row) * width + col]; }
  float at(int row, int col) const { return values[static_cast<size_t>(row) * width + col]; }
};

struct KeypointEstimate {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

// Positional: points[i] belongs to schema.names[i].
struct KeypointSet {
  std::vector<KeypointEstimate> points;
};

Json to_json(const KeypointSet& kps, const KeypointSchema& schema);

// Unnormalized Gaussian centred on grid point (x = column, y = row), peak 1.
// Throws OutOfBoundsError when the point is outside the grid, ConfigError for
// sigma <= 0.
Heatmap make_target_heatmap(double x, double y, int height, int width, double sigma);

// Mean squared difference over every cell of every keypoint.
double heatmap_l2_loss(const std::vector<Heatmap>& predicted, const std::vector<Heatmap>& target);
// Same, and writes d(loss)/d(predicted) into *grad.
double heatmap_l2_loss_with_gradient(const std::vector<Heatmap>& predicted,
                                     const std::vector<Heatmap>& target,
                                     std::vector<Heatmap>* grad);

// Argmax cell (ties: smallest row, then smallest column) scaled by stride;
// confidence is the peak clamped to [0, 1].
KeypointSet decode_heatmaps(const std::vector<Heatmap>& heatmaps, double stride_x,
                            double stride_y);
inline KeypointSet decode_heatmaps(const std::vector<Heatmap>& heatmaps, int stride) {
  return decode_heatmaps(heatmaps, stride, stride);
}

inline constexpr double kDefaultFullShotThreshold = 0.5;

// At least one head keypoint and every ankle keypoint at or above threshold.
// Throws DimensionError when kps does not have one point per schema name.
bool is_full_shot(const KeypointSet& kps, const KeypointSchema& schema,
                  double conf_threshold = kDefaultFullShotThreshold);

struct KeypointModelConfig {
  std::string backbone = "resnet50";
  int input_height = 256;
  int input_width = 192;
  int deconv_layers = 3;
  int deconv_filters = 256;
  int deconv_kernel = 4;
  int deconv_stride = 2;
  double heatmap_sigma = 2.0;  // grid cells

  // Desk-scale variant for synthetic data.
  static KeypointModelConfig tiny();

  // Throws ConfigError.
  void validate() const;
  int heatmap_height() const;
  int heatmap_width() const;
  Json to_json() const;
  static KeypointModelConfig from_json(const Json& j);
};

// Pixel coordinates in `image`; visible > 0 means annotated and in frame.
struct KeypointSample {
  Image image;
  std::vector<std::array<double, 3>> keypoints;  // x, y, visible
};

class KeypointModel {
 public:
  KeypointModel(KeypointModelConfig config, KeypointSchema schema, uint64_t seed);

  static std::unique_ptr<KeypointModel> load(const std::string& path);
  void save(const std::string& path) const;

  // Safe for concurrent callers.
  std::vector<Heatmap> predict_heatmaps(const Image& image) const;
  KeypointSet infer(const Image& image) const;

  // Training hooks.
  nn::Tensor forward(const nn::Tensor& x, nn::Context* ctx) const { return net_.forward(x, ctx); }
  void backward(const nn::Tensor& grad, const nn::Context& ctx) { net_.backward(grad, ctx); }
  std::vector<nn::Param*> params() { return net_.params(); }

  const KeypointModelConfig& config() const { return config_; }
  const KeypointSchema& schema() const { return schema_; }

 private:
  KeypointModelConfig config_;
  KeypointSchema schema_;
  nn::Sequential net_;
};

// Heatmap targets for a sample, in grid coordinates (x * grid_w / image_w).
std::vector<Heatmap> make_targets(const KeypointSample& sample, int height, int width,
                                  double sigma);

struct TrainReport {
  int epochs = 0;
  double final_loss = 0.0;  // mean over the last epoch
};

// Throws ConfigError on an empty dataset or one without any visible keypoint,
// ValidationError on a sample whose keypoint count differs from the schema.
std::unique_ptr<KeypointModel> train_keypoint_model(
    const std::vector<KeypointSample>& data, const KeypointModelConfig& config,
    const nn::TrainOptions& options, const KeypointSchema& schema = KeypointSchema::coco17(),
    TrainReport* report = nullptr);

// Manifest rows: {image_path, keypoints: [[x, y, visible], ...]}.
struct KeypointRecord {
  std::string image_path;
  std::vector<std::array<double, 3>> keypoints;
};
std::vector<KeypointRecord> read_keypoint_manifest(const std::string& path);
void write_keypoint_manifest(const std::string& path, const std::vector<KeypointRecord>& rows);
std::vector<KeypointSample> load_samples(const std::vector<KeypointRecord>& rows);

}  // namespace looklab::keypoints

#endif  // LOOKLAB_KEYPOINTS_H_
