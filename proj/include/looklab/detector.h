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

#ifndef LOOKLAB_DETECTOR_H_
#define LOOKLAB_DETECTOR_H_

#include <memory>
#include <string>
#include <vector>

#include "looklab/detect.h"
#include "looklab/nn/backbone.h"
#include "looklab/nn/layers.h"

namespace looklab::detect {

// Single-stage dense detector: every output cell is classified as background
// or one article type, and each connected region of one type becomes a box
// scored by its mean class probability.
struct TinyDetectorConfig {
  std::vector<std::string> article_types;
  std::string backbone = "tiny";
  int input_height = 96;
  int input_width = 64;
  int deconv_layers = 2;
  int deconv_filters = 32;
  int min_area_cells = 3;  // smaller regions are dropped

  void validate() const;
  int output_height() const;
  int output_width() const;
  Json to_json() const;
  static TinyDetectorConfig from_json(const Json& j);
};

// Per-cell class targets; 0 is background, i + 1 is article_types[i]. Boxes
// are painted largest first so smaller boxes stay visible.
std::vector<int> box_label_map(const std::vector<GroundTruthBox>& boxes,
                               const std::vector<std::string>& article_types, int image_width,
                               int image_height, int out_height, int out_width);

// Connected components (4-neighbour) of the argmax map.
std::vector<Detection> regions_to_detections(const std::vector<std::vector<float>>& probs,
                                             int out_height, int out_width,
                                             const std::vector<std::string>& article_types,
                                             double cell_w, double cell_h, int min_area_cells);

class TinyDetector : public Detector {
 public:
  TinyDetector(TinyDetectorConfig config, uint64_t seed, std::string version = "tiny-1");

  static std::unique_ptr<TinyDetector> load(const std::string& path);
  void save(const std::string& path) const;

  // Concurrent-safe. input.image must be set.
  std::vector<Detection> detect(const ImageInput& input) const override;
  DetectorInfo info() const override { return {"tiny", version_}; }

  // Per-class probability planes, background first.
  std::vector<std::vector<float>> predict(const Image& image) const;

  nn::Tensor forward(const nn::Tensor& x, nn::Context* ctx) const { return net_.forward(x, ctx); }
  void backward(const nn::Tensor& grad, const nn::Context& ctx) { net_.backward(grad, ctx); }
  std::vector<nn::Param*> params() { return net_.params(); }
  const TinyDetectorConfig& config() const { return config_; }

 private:
  TinyDetectorConfig config_;
  std::string version_;
  nn::Sequential net_;
};

struct DetectorSample {
  Image image;
  std::vector<GroundTruthBox> boxes;
};

// Per-cell cross-entropy. Throws ConfigError on an empty dataset.
std::unique_ptr<TinyDetector> train_tiny_detector(const std::vector<DetectorSample>& data,
                                                  const TinyDetectorConfig& config,
                                                  const nn::TrainOptions& options);

}  // namespace looklab::detect

#endif  // LOOKLAB_DETECTOR_H_
