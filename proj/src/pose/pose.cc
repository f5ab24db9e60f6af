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

#include "looklab/pose.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "looklab/errors.h"
#include "looklab/log.h"
#include "looklab/nn/checkpoint.h"
#include "looklab/nn/optim.h"
#include "looklab/rng.h"

namespace looklab::pose {

namespace {
constexpr const char* kKind = "pose";
constexpr std::array<std::string_view, kNumPoses> kNames = {"front", "back", "left", "right",
                                                            "detailed"};
}  // namespace

std::string_view pose_name(PoseLabel p) { return kNames[static_cast<int>(p)]; }

PoseLabel parse_pose(std::string_view name) {
  for (int i = 0; i < kNumPoses; ++i) {
    if (kNames[i] == name) return static_cast<PoseLabel>(i);
  }
  throw ValidationError("unknown pose label '" + std::string(name) + "'");
}

PosePrediction classify_from_scores(const std::array<double, kNumPoses>& scores) {
  int best = 0;
  for (int i = 1; i < kNumPoses; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return {static_cast<PoseLabel>(best), scores[best], scores};
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<PoseLabel>& truths,
                                 const std::vector<PoseLabel>& preds) {
  if (truths.size() != preds.size()) throw ValidationError("truths and preds differ in length");
  if (truths.empty()) throw ValidationError("confusion matrix needs at least one sample");
  ConfusionMatrix cm;
  for (size_t i = 0; i < truths.size(); ++i) {
    ++cm.counts[static_cast<int>(truths[i])][static_cast<int>(preds[i])];
  }
  return cm;
}

std::vector<ClassPrecisionRecall> precision_recall_per_class(const ConfusionMatrix& cm) {
  std::vector<ClassPrecisionRecall> out;
  for (int c = 0; c < kNumPoses; ++c) {
    long row = 0, col = 0;
    for (int j = 0; j < kNumPoses; ++j) {
      row += cm.counts[c][j];
      col += cm.counts[j][c];
    }
    const double diag = static_cast<double>(cm.counts[c][c]);
    out.push_back({static_cast<PoseLabel>(c), col == 0 ? 0.0 : diag / col,
                   row == 0 ? 0.0 : diag / row});
  }
  return out;
}

std::string confusion_matrix_csv(const ConfusionMatrix& cm) {
  std::ostringstream os;
  os << "truth\\pred";
  for (auto n : kNames) os << ',' << n;
  os << '\n';
  for (int t = 0; t < kNumPoses; ++t) {
    os << kNames[t];
    for (int p = 0; p < kNumPoses; ++p) os << ',' << cm.counts[t][p];
    os << '\n';
  }
  return os.str();
}

Json precision_recall_json(const std::vector<ClassPrecisionRecall>& pr) {
  Json out = Json::array();
  for (const auto& c : pr) {
    out.push_back({{"label", pose_name(c.label)}, {"precision", c.precision}, {"recall", c.recall}});
  }
  return out;
}

PoseModelConfig PoseModelConfig::tiny() { return {"tiny", 48, 32}; }

void PoseModelConfig::validate() const {
  const auto spec = nn::backbone_preset(backbone);
  const int s = spec.total_stride();
  if (input_height <= 0 || input_width <= 0 || input_height % s != 0 || input_width % s != 0) {
    throw ConfigError("pose input size must be a positive multiple of " + std::to_string(s));
  }
}

Json PoseModelConfig::to_json() const {
  return {{"backbone", backbone}, {"input_height", input_height}, {"input_width", input_width}};
}

PoseModelConfig PoseModelConfig::from_json(const Json& j) {
  PoseModelConfig c;
  c.backbone = j.value("backbone", c.backbone);
  c.input_height = j.value("input_height", c.input_height);
  c.input_width = j.value("input_width", c.input_width);
  c.validate();
  return c;
}

PoseModel::PoseModel(PoseModelConfig config, uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const auto spec = nn::backbone_preset(config_.backbone);
  nn::append_backbone(net_, spec, 3, rng);
  net_.add<nn::GlobalAvgPool>();
  net_.add<nn::Linear>(spec.out_channels(), kNumPoses, rng);
}

std::unique_ptr<PoseModel> PoseModel::load(const std::string& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != kKind) throw DecodeError(path + ": not a pose model (" + ck.kind + ")");
  auto model = std::make_unique<PoseModel>(PoseModelConfig::from_json(Json::parse(ck.config_json)), 0);
  nn::restore_params(ck, model->params());
  return model;
}

void PoseModel::save(const std::string& path) const {
  nn::save_checkpoint(path, kKind, config_.to_json().dump(),
                      const_cast<nn::Sequential&>(net_).params());
}

static std::array<double, kNumPoses> softmax(const nn::Tensor& logits) {
  std::array<double, kNumPoses> p{};
  const double mx = *std::max_element(logits.values.begin(), logits.values.end());
  double sum = 0.0;
  for (int i = 0; i < kNumPoses; ++i) sum += p[i] = std::exp(logits.values[i] - mx);
  for (double& v : p) v /= sum;
  return p;
}

PosePrediction PoseModel::classify(const Image& image) const {
  if (image.empty()) throw DecodeError("empty image");
  const auto x = nn::image_to_tensor(image, config_.input_height, config_.input_width);
  return classify_from_scores(softmax(net_.forward(x, nullptr)));
}

std::unique_ptr<PoseModel> train_pose_model(const std::vector<PoseSample>& data,
                                            const PoseModelConfig& config,
                                            const nn::TrainOptions& options) {
  if (data.empty()) throw ConfigError("pose training set is empty");
  if (options.epochs < 1 || options.batch_size < 1) throw ConfigError("bad training options");
  auto model = std::make_unique<PoseModel>(config, options.seed);
  std::vector<nn::Tensor> inputs;
  for (const auto& s : data) {
    inputs.push_back(nn::image_to_tensor(s.image, config.input_height, config.input_width));
  }
  auto params = model->params();
  nn::Adam adam(params, {options.learning_rate});
  Rng rng(options.seed ^ 0x706fu);
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
        const auto p = softmax(logits);
        const int y = static_cast<int>(data[order[i]].label);
        loss -= std::log(std::max(p[y], 1e-12));
        nn::Tensor g(kNumPoses, 1, 1);
        for (int c = 0; c < kNumPoses; ++c) g.values[c] = static_cast<float>(p[c] - (c == y));
        model->backward(g, ctx);
      }
      adam.step(1.0f / static_cast<float>(e - b));
    }
    log::debug("pose epoch " + std::to_string(epoch + 1) + " loss " +
               std::to_string(loss / order.size()));
  }
  return model;
}

std::vector<PoseRecord> read_pose_manifest(const std::string& path) {
  std::vector<PoseRecord> rows;
  for (const Json& j : read_jsonl(path)) {
    rows.push_back({resolve_relative(path, field<std::string>(j, "image_path")),
                    parse_pose(field<std::string>(j, "pose_label"))});
  }
  return rows;
}

void write_pose_manifest(const std::string& path, const std::vector<PoseRecord>& rows) {
  std::vector<Json> out;
  for (const auto& r : rows) {
    out.push_back({{"image_path", r.image_path}, {"pose_label", pose_name(r.label)}});
  }
  write_jsonl(path, out);
}

}  // namespace looklab::pose
