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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "looklab/detector.h"
#include "looklab/errors.h"
#include "looklab/log.h"
#include "looklab/nn/checkpoint.h"
#include "looklab/nn/optim.h"
#include "looklab/rng.h"

namespace looklab::detect {

namespace {
constexpr const char* kKind = "detector";
}

void TinyDetectorConfig::validate() const {
  if (article_types.empty()) throw ConfigError("detector needs at least one article type");
  const int s = nn::backbone_preset(backbone).total_stride();
  if (input_height <= 0 || input_width <= 0 || input_height % s != 0 || input_width % s != 0) {
    throw ConfigError("detector input size must be a positive multiple of " + std::to_string(s));
  }
  if (deconv_layers < 0 || deconv_filters < 1) throw ConfigError("bad detector deconv settings");
  if (min_area_cells < 1) throw ConfigError("min_area_cells must be >= 1");
}

int TinyDetectorConfig::output_height() const {
  return (input_height / nn::backbone_preset(backbone).total_stride()) << deconv_layers;
}
int TinyDetectorConfig::output_width() const {
  return (input_width / nn::backbone_preset(backbone).total_stride()) << deconv_layers;
}

Json TinyDetectorConfig::to_json() const {
  return {{"article_types", article_types}, {"backbone", backbone},
          {"input_height", input_height},   {"input_width", input_width},
          {"deconv_layers", deconv_layers}, {"deconv_filters", deconv_filters},
          {"min_area_cells", min_area_cells}};
}

TinyDetectorConfig TinyDetectorConfig::from_json(const Json& j) {
  TinyDetectorConfig c;
  c.article_types = field<std::vector<std::string>>(j, "article_types");
  c.backbone = j.value("backbone", c.backbone);
  c.input_height = j.value("input_height", c.input_height);
  c.input_width = j.value("input_width", c.input_width);
  c.deconv_layers = j.value("deconv_layers", c.deconv_layers);
  c.deconv_filters = j.value("deconv_filters", c.deconv_filters);
  c.min_area_cells = j.value("min_area_cells", c.min_area_cells);
  c.validate();
  return c;
}

std::vector<int> box_label_map(const std::vector<GroundTruthBox>& boxes,
                               const std::vector<std::string>& article_types, int image_width,
                               int image_height, int out_height, int out_width) {
  std::vector<int> labels(static_cast<size_t>(out_height) * out_width, 0);
  std::vector<size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return boxes[a].box.area() > boxes[b].box.area(); });
  const double cw = static_cast<double>(image_width) / out_width;
  const double ch = static_cast<double>(image_height) / out_height;
  for (size_t i : order) {
    auto it = std::find(article_types.begin(), article_types.end(), boxes[i].article_type);
    if (it == article_types.end()) continue;
    const int cls = static_cast<int>(it - article_types.begin()) + 1;
    const BoundingBox& b = boxes[i].box;
    for (int r = 0; r < out_height; ++r) {
      const double cy = (r + 0.5) * ch;
      if (cy < b.y_min || cy >= b.y_max) continue;
      for (int c = 0; c < out_width; ++c) {
        const double cx = (c + 0.5) * cw;
        if (cx >= b.x_min && cx < b.x_max) labels[static_cast<size_t>(r) * out_width + c] = cls;
      }
    }
  }
  return labels;
}

std::vector<Detection> regions_to_detections(const std::vector<std::vector<float>>& probs,
                                             int out_height, int out_width,
                                             const std::vector<std::string>& article_types,
                                             double cell_w, double cell_h, int min_area_cells) {
  const size_t n = static_cast<size_t>(out_height) * out_width;
  std::vector<int> arg(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 1; c < probs.size(); ++c) {
      if (probs[c][i] > probs[arg[i]][i]) arg[i] = static_cast<int>(c);
    }
  }
  std::vector<bool> seen(n, false);
  std::vector<Detection> out;
  std::vector<size_t> stack;
  for (size_t start = 0; start < n; ++start) {
    if (seen[start] || arg[start] == 0) continue;
    const int cls = arg[start];
    int r0 = out_height, r1 = -1, c0 = out_width, c1 = -1;
    double psum = 0.0;
    int area = 0;
    stack.assign(1, start);
    seen[start] = true;
    while (!stack.empty()) {
      const size_t i = stack.back();
      stack.pop_back();
      const int r = static_cast<int>(i / out_width), c = static_cast<int>(i % out_width);
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
      psum += probs[cls][i];
      ++area;
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int k = 0; k < 4; ++k) {
        if (nr[k] < 0 || nc[k] < 0 || nr[k] >= out_height || nc[k] >= out_width) continue;
        const size_t j = static_cast<size_t>(nr[k]) * out_width + nc[k];
        if (!seen[j] && arg[j] == cls) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    if (area < min_area_cells) continue;
    out.push_back({{c0 * cell_w, r0 * cell_h, (c1 + 1) * cell_w, (r1 + 1) * cell_h},
                   article_types[cls - 1],
                   std::clamp(psum / area, 0.0, 1.0)});
  }
  // Score descending, then box coordinates.
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max) <
           std::tie(b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
  });
  return out;
}

TinyDetector::TinyDetector(TinyDetectorConfig config, uint64_t seed, std::string version)
    : config_(std::move(config)), version_(std::move(version)) {
  config_.validate();
  Rng rng(seed);
  const auto spec = nn::backbone_preset(config_.backbone);
  nn::append_backbone(net_, spec, 3, rng);
  int c = spec.out_channels();
  for (int i = 0; i < config_.deconv_layers; ++i) {
    net_.add<nn::ConvTranspose2d>(c, config_.deconv_filters, 4, 2, 1, rng);
    net_.add<nn::Relu>();
    c = config_.deconv_filters;
  }
  net_.add<nn::Conv2d>(c, static_cast<int>(config_.article_types.size()) + 1,
                       nn::ConvGeometry{1, 1, 0, 1}, rng);
}

std::unique_ptr<TinyDetector> TinyDetector::load(const std::string& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != kKind) throw DecodeError(path + ": not a detector model (" + ck.kind + ")");
  const Json cfg = Json::parse(ck.config_json);
  auto model = std::make_unique<TinyDetector>(TinyDetectorConfig::from_json(cfg.at("model")), 0,
                                              cfg.value("version", std::string("tiny-1")));
  nn::restore_params(ck, model->params());
  return model;
}

void TinyDetector::save(const std::string& path) const {
  const Json cfg = {{"model", config_.to_json()}, {"version", version_}};
  nn::save_checkpoint(path, kKind, cfg.dump(), const_cast<nn::Sequential&>(net_).params());
}

static std::vector<std::vector<float>> softmax_planes(const nn::Tensor& logits) {
  const size_t n = logits.plane();
  std::vector<std::vector<float>> p(logits.channels, std::vector<float>(n));
  for (size_t i = 0; i < n; ++i) {
    float mx = -1e30f;
    for (int c = 0; c < logits.channels; ++c) mx = std::max(mx, logits.values[c * n + i]);
    double sum = 0.0;
    for (int c = 0; c < logits.channels; ++c) {
      p[c][i] = std::exp(logits.values[c * n + i] - mx);
      sum += p[c][i];
    }
    for (int c = 0; c < logits.channels; ++c) p[c][i] = static_cast<float>(p[c][i] / sum);
  }
  return p;
}

std::vector<std::vector<float>> TinyDetector::predict(const Image& image) const {
  if (image.empty()) throw DecodeError("empty image");
  const auto x = nn::image_to_tensor(image, config_.input_height, config_.input_width);
  return softmax_planes(net_.forward(x, nullptr));
}

std::vector<Detection> TinyDetector::detect(const ImageInput& input) const {
  if (input.image == nullptr) throw ValidationError("tiny detector needs pixels");
  const Image& img = *input.image;
  const int oh = config_.output_height(), ow = config_.output_width();
  return regions_to_detections(predict(img), oh, ow, config_.article_types,
                               static_cast<double>(img.width()) / ow,
                               static_cast<double>(img.height()) / oh, config_.min_area_cells);
}

std::unique_ptr<TinyDetector> train_tiny_detector(const std::vector<DetectorSample>& data,
                                                  const TinyDetectorConfig& config,
                                                  const nn::TrainOptions& options) {
  if (data.empty()) throw ConfigError("detector training set is empty");
  if (options.epochs < 1 || options.batch_size < 1) throw ConfigError("bad training options");
  auto model = std::make_unique<TinyDetector>(config, options.seed);
  const int oh = config.output_height(), ow = config.output_width();
  const size_t n = static_cast<size_t>(oh) * ow;
  std::vector<nn::Tensor> inputs;
  std::vector<std::vector<int>> labels;
  for (const auto& s : data) {
    inputs.push_back(nn::image_to_tensor(s.image, config.input_height, config.input_width));
    labels.push_back(box_label_map(s.boxes, config.article_types, s.image.width(),
                                   s.image.height(), oh, ow));
  }
  auto params = model->params();
  nn::Adam adam(params, {options.learning_rate});
  Rng rng(options.seed ^ 0x6465u);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double loss = 0.0;
    for (size_t b = 0; b < order.size(); b += options.batch_size) {
      const size_t e = std::min(order.size(), b + options.batch_size);
      nn::zero_grads(params);
      for (size_t i = b; i < e; ++i) {
        nn::Context ctx;
        const nn::Tensor logits = model->forward(inputs[order[i]], &ctx);
        const auto p = softmax_planes(logits);
        const auto& y = labels[order[i]];
        nn::Tensor g(logits.channels, logits.height, logits.width);
        for (size_t k = 0; k < n; ++k) {
          loss -= std::log(std::max(p[y[k]][k], 1e-12f)) / n;
          for (int c = 0; c < logits.channels; ++c) {
            g.values[c * n + k] = (p[c][k] - (c == y[k] ? 1.0f : 0.0f)) / static_cast<float>(n);
          }
        }
        model->backward(g, ctx);
      }
      adam.step(1.0f / static_cast<float>(e - b));
    }
    log::debug("detector epoch " + std::to_string(epoch + 1) + " loss " +
               std::to_string(loss / order.size()));
  }
  return model;
}

}  // namespace looklab::detect
