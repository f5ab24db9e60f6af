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

#ifndef LOOKLAB_EMBED_MODEL_H_
#define LOOKLAB_EMBED_MODEL_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "looklab/embed/losses.h"
#include "looklab/embed/triplets.h"
#include "looklab/image.h"
#include "looklab/jsonl.h"
#include "looklab/nn/backbone.h"
#include "looklab/nn/layers.h"

namespace looklab::embed {

struct EmbeddingModelConfig {
  std::string backbone = "resnet50";
  int input_height = 224;
  int input_width = 224;
  int dim = 2048;

  // Desk-scale variant: tiny backbone, 32 x 32 input, d = 64.
  static EmbeddingModelConfig tiny();
  void validate() const;
  Json to_json() const;
  static EmbeddingModelConfig from_json(const Json& j);
};

struct EmbedTrainConfig {
  double learning_rate = 5e-5;
  int batch_size = 32;
  int epochs = 10;
  // Extra epochs whose negatives are mined semi-hard within each batch.
  int mining_epochs = 0;
  // Epochs after the first draw a fresh negative for every pair.
  bool resample_negatives = true;
  uint64_t seed = 1;
  TripletLossConfig loss;

  void validate() const;
  Json to_json() const;
  static EmbedTrainConfig from_json(const Json& j);
};

// One shared encoder: every triplet branch is this same function.
class EmbeddingModel {
 public:
  EmbeddingModel(EmbeddingModelConfig config, std::string category, uint64_t seed);

  static std::unique_ptr<EmbeddingModel> load(const std::string& path);
  void save(const std::string& path) const;

  // Safe for concurrent callers. Throws DecodeError on an empty image.
  std::vector<float> embed(const Image& image) const;

  nn::Tensor preprocess(const Image& image) const;
  nn::Tensor forward(const nn::Tensor& x, nn::Context* ctx) const { return net_.forward(x, ctx); }
  void backward(const nn::Tensor& grad, const nn::Context& ctx) { net_.backward(grad, ctx); }
  std::vector<nn::Param*> params() { return net_.params(); }

  const EmbeddingModelConfig& config() const { return config_; }
  const std::string& category() const { return category_; }
  // Content hash of the weights; stamps catalog files and recommendations.
  const std::string& version() const { return version_; }
  void refresh_version();

 private:
  EmbeddingModelConfig config_;
  std::string category_;
  std::string version_;
  nn::Sequential net_;
};

// Images loaded once and referenced by index.
struct TripletDataset {
  std::vector<Image> images;
  std::vector<std::string> garment_ids;                // per image
  std::vector<bool> is_catalog;                        // per image
  std::vector<std::string> article_types;              // per image
  std::vector<std::array<size_t, 3>> triplets;         // anchor, positive, negative
  std::vector<std::pair<size_t, size_t>> pairs;        // wild, catalog
};

// Loads every referenced image once. Pairs whose article type is not in
// `article_types` are ignored (empty = keep all).
TripletDataset load_triplet_dataset(const std::vector<ImagePair>& pairs,
                                    const std::vector<std::string>& article_types,
                                    uint64_t seed);

// One triplet per pair with a negative catalog image drawn uniformly among
// the other garments of the same article type.
std::vector<std::array<size_t, 3>> resample_triplets(const TripletDataset& data, uint64_t seed);

struct EmbedTrainReport {
  std::vector<double> epoch_losses;
  size_t mined_semi_hard = 0;
  size_t mined_fallback = 0;
};

// Throws ConfigError on an empty dataset.
std::unique_ptr<EmbeddingModel> train_embedding_model(const TripletDataset& data,
                                                      const EmbeddingModelConfig& model_config,
                                                      const EmbedTrainConfig& train_config,
                                                      const std::string& category,
                                                      EmbedTrainReport* report = nullptr);

// Fraction of triplets with d(a,p) + margin < d(a,n).
double triplet_accuracy(const EmbeddingModel& model, const TripletDataset& data, double margin);

// Binary vector record: uint32 d, then d little-endian float32.
std::vector<uint8_t> encode_vector(const std::vector<float>& v);
std::vector<float> decode_vector(const std::vector<uint8_t>& bytes);

}  // namespace looklab::embed

#endif  // LOOKLAB_EMBED_MODEL_H_
