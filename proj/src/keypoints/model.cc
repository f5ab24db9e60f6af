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

#include <cmath>
#include <numeric>

#include "looklab/errors.h"
#include "looklab/keypoints.h"
#include "looklab/log.h"
#include "looklab/nn/checkpoint.h"
#include "looklab/nn/optim.h"
#include "looklab/rng.h"

namespace looklab::keypoints {

namespace {
constexpr const char* kKind = "keypoints";
}

KeypointModelConfig KeypointModelConfig::tiny() {
  KeypointModelConfig c;
  c.backbone = "tiny";
  c.input_height = 48;
  c.input_width = 32;
  c.deconv_layers = 2;
  c.deconv_filters = 32;
  return c;
}

void KeypointModelConfig::validate() const {
  const auto spec = nn::backbone_preset(backbone);
  if (deconv_layers < 1) throw ConfigError("deconv_layers must be >= 1");
  if (deconv_filters < 1) throw ConfigError("deconv_filters must be >= 1");
  if (deconv_stride < 1) throw ConfigError("deconv_stride must be >= 1");
  if (deconv_kernel < deconv_stride || (deconv_kernel - deconv_stride) % 2 != 0) {
    throw ConfigError("deconv_kernel - deconv_stride must be even and >= 0");
  }
  if (!(heatmap_sigma > 0.0)) throw ConfigError("heatmap_sigma must be > 0");
  const int s = spec.total_stride();
  if (input_height <= 0 || input_width <= 0 || input_height % s != 0 || input_width % s != 0) {
    throw ConfigError("input size must be a positive multiple of the backbone stride " +
                      std::to_string(s));
  }
}

static int upsample(int extent, const KeypointModelConfig& c) {
  int e = extent / nn::backbone_preset(c.backbone).total_stride();
  for (int i = 0; i < c.deconv_layers; ++i) e *= c.deconv_stride;
  return e;
}

int KeypointModelConfig::heatmap_height() const { return upsample(input_height, *this); }
int KeypointModelConfig::heatmap_width() const { return upsample(input_width, *this); }

Json KeypointModelConfig::to_json() const {
  return {{"backbone", backbone},           {"input_height", input_height},
          {"input_width", input_width},     {"deconv_layers", deconv_layers},
          {"deconv_filters", deconv_filters}, {"deconv_kernel", deconv_kernel},
          {"deconv_stride", deconv_stride}, {"heatmap_sigma", heatmap_sigma}};
}

KeypointModelConfig KeypointModelConfig::from_json(const Json& j) {
  KeypointModelConfig c;
  c.backbone = j.value("backbone", c.backbone);
  c.input_height = j.value("input_height", c.input_height);
  c.input_width = j.value("input_width", c.input_width);
  c.deconv_layers = j.value("deconv_layers", c.deconv_layers);
  c.deconv_filters = j.value("deconv_filters", c.deconv_filters);
  c.deconv_kernel = j.value("deconv_kernel", c.deconv_kernel);
  c.deconv_stride = j.value("deconv_stride", c.deconv_stride);
  c.heatmap_sigma = j.value("heatmap_sigma", c.heatmap_sigma);
  c.validate();
  return c;
}

KeypointModel::KeypointModel(KeypointModelConfig config, KeypointSchema schema, uint64_t seed)
    : config_(std::move(config)), schema_(std::move(schema)) {
  config_.validate();
  schema_.validate();
  Rng rng(seed);
  const auto spec = nn::backbone_preset(config_.backbone);
  nn::append_backbone(net_, spec, 3, rng);
  int c = spec.out_channels();
  const int pad = (config_.deconv_kernel - config_.deconv_stride) / 2;
  for (int i = 0; i < config_.deconv_layers; ++i) {
    net_.add<nn::ConvTranspose2d>(c, config_.deconv_filters, config_.deconv_kernel,
                                  config_.deconv_stride, pad, rng);
    net_.add<nn::Relu>();
    c = config_.deconv_filters;
  }
  net_.add<nn::Conv2d>(c, static_cast<int>(schema_.size()), nn::ConvGeometry{1, 1, 0, 1}, rng);
}

std::unique_ptr<KeypointModel> KeypointModel::load(const std::string& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != kKind) throw DecodeError(path + ": not a keypoint model (" + ck.kind + ")");
  const Json cfg = Json::parse(ck.config_json);
  auto model = std::make_unique<KeypointModel>(KeypointModelConfig::from_json(cfg.at("model")),
                                               KeypointSchema::from_json(cfg.at("schema")), 0);
  nn::restore_params(ck, model->params());
  return model;
}

void KeypointModel::save(const std::string& path) const {
  const Json cfg = {{"model", config_.to_json()}, {"schema", schema_.to_json()}};
  nn::save_checkpoint(path, kKind, cfg.dump(), const_cast<nn::Sequential&>(net_).params());
}

static std::vector<Heatmap> to_heatmaps(const nn::Tensor& t) {
  std::vector<Heatmap> out;
  for (int k = 0; k < t.channels; ++k) {
    Heatmap h(t.height, t.width);
    const auto ch = t.channel(k);
    std::copy(ch.begin(), ch.end(), h.values.begin());
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Heatmap> KeypointModel::predict_heatmaps(const Image& image) const {
  if (image.empty()) throw DecodeError("empty image");
  const nn::Tensor x = nn::image_to_tensor(image, config_.input_height, config_.input_width);
  return to_heatmaps(net_.forward(x, nullptr));
}

KeypointSet KeypointModel::infer(const Image& image) const {
  const auto hms = predict_heatmaps(image);
  return decode_heatmaps(hms, static_cast<double>(image.width()) / config_.heatmap_width(),
                         static_cast<double>(image.height()) / config_.heatmap_height());
}

std::vector<Heatmap> make_targets(const KeypointSample& sample, int height, int width,
                                  double sigma) {
  std::vector<Heatmap> out;
  const double sx = static_cast<double>(width) / sample.image.width();
  const double sy = static_cast<double>(height) / sample.image.height();
  for (const auto& kp : sample.keypoints) {
    if (kp[2] > 0.0) {
      out.push_back(make_target_heatmap(kp[0] * sx, kp[1] * sy, height, width, sigma));
    } else {
      out.emplace_back(height, width);
    }
  }
  return out;
}

std::unique_ptr<KeypointModel> train_keypoint_model(const std::vector<KeypointSample>& data,
                                                    const KeypointModelConfig& config,
                                                    const nn::TrainOptions& options,
                                                    const KeypointSchema& schema,
                                                    TrainReport* report) {
  if (data.empty()) throw ConfigError("keypoint training set is empty");
  size_t visible = 0;
  for (const auto& s : data) {
    if (s.keypoints.size() != schema.size()) {
      throw ValidationError("sample has " + std::to_string(s.keypoints.size()) +
                            " keypoints, schema has " + std::to_string(schema.size()));
    }
    for (const auto& kp : s.keypoints) visible += kp[2] > 0.0;
  }
  if (visible == 0) throw ConfigError("no annotated keypoints in training set");
  if (options.epochs < 1 || options.batch_size < 1) throw ConfigError("bad training options");

  auto model = std::make_unique<KeypointModel>(config, schema, options.seed);
  const int hh = config.heatmap_height(), hw = config.heatmap_width();
  std::vector<nn::Tensor> inputs;
  std::vector<std::vector<Heatmap>> targets;
  for (const auto& s : data) {
    inputs.push_back(nn::image_to_tensor(s.image, config.input_height, config.input_width));
    targets.push_back(make_targets(s, hh, hw, config.heatmap_sigma));
  }

  auto params = model->params();
  nn::Adam adam(params, {options.learning_rate});
  Rng rng(options.seed ^ 0x6b70u);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    epoch_loss = 0.0;
    for (size_t b = 0; b < order.size(); b += options.batch_size) {
      const size_t e = std::min(order.size(), b + options.batch_size);
      nn::zero_grads(params);
      for (size_t i = b; i < e; ++i) {
        nn::Context ctx;
        const nn::Tensor y = model->forward(inputs[order[i]], &ctx);
        std::vector<Heatmap> grad;
        epoch_loss += heatmap_l2_loss_with_gradient(to_heatmaps(y), targets[order[i]], &grad);
        nn::Tensor g(y.channels, y.height, y.width);
        for (int k = 0; k < y.channels; ++k) {
          std::copy(grad[k].values.begin(), grad[k].values.end(), g.channel(k).begin());
        }
        model->backward(g, ctx);
      }
      adam.step(1.0f / static_cast<float>(e - b));
    }
    epoch_loss /= static_cast<double>(order.size());
    log::debug("keypoints epoch " + std::to_string(epoch + 1) + " loss " +
               std::to_string(epoch_loss));
  }
  if (report != nullptr) *report = {options.epochs, epoch_loss};
  return model;
}

std::vector<KeypointRecord> read_keypoint_manifest(const std::string& path) {
  std::vector<KeypointRecord> rows;
  for (const Json& j : read_jsonl(path)) {
    KeypointRecord r;
    r.image_path = resolve_relative(path, field<std::string>(j, "image_path"));
    r.keypoints = field<std::vector<std::array<double, 3>>>(j, "keypoints");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_keypoint_manifest(const std::string& path, const std::vector<KeypointRecord>& rows) {
  std::vector<Json> out;
  for (const auto& r : rows) out.push_back({{"image_path", r.image_path}, {"keypoints", r.keypoints}});
  write_jsonl(path, out);
}

std::vector<KeypointSample> load_samples(const std::vector<KeypointRecord>& rows) {
  std::vector<KeypointSample> out;
  for (const auto& r : rows) out.push_back({read_image(r.image_path), r.keypoints});
  return out;
}

}  // namespace looklab::keypoints
