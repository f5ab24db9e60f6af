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

#include "looklab/embed/model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>

#include "looklab/binary_io.h"
#include "looklab/embed/mining.h"
#include "looklab/errors.h"
#include "looklab/log.h"
#include "looklab/nn/checkpoint.h"
#include "looklab/nn/optim.h"
#include "looklab/rng.h"

namespace looklab::embed {

namespace {
constexpr const char* kKind = "embedding";
}

EmbeddingModelConfig EmbeddingModelConfig::tiny() { return {"tiny", 32, 32, 64}; }

void EmbeddingModelConfig::validate() const {
  const int s = nn::backbone_preset(backbone).total_stride();
  if (input_height <= 0 || input_width <= 0 || input_height % s != 0 || input_width % s != 0) {
    throw ConfigError("embedding input size must be a positive multiple of " + std::to_string(s));
  }
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
}

Json EmbeddingModelConfig::to_json() const {
  return {{"backbone", backbone}, {"input_height", input_height}, {"input_width", input_width},
          {"dim", dim}};
}

EmbeddingModelConfig EmbeddingModelConfig::from_json(const Json& j) {
  EmbeddingModelConfig c;
  c.backbone = j.value("backbone", c.backbone);
  c.input_height = j.value("input_height", c.input_height);
  c.input_width = j.value("input_width", c.input_width);
  c.dim = j.value("dim", c.dim);
  c.validate();
  return c;
}

void EmbedTrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0 || mining_epochs < 0 || epochs + mining_epochs < 1) {
    throw ConfigError("need at least one training epoch");
  }
  loss.validate();
}

Json EmbedTrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size},
          {"epochs", epochs},               {"mining_epochs", mining_epochs},
          {"seed", seed},                   {"resample_negatives", resample_negatives},
          {"margin", loss.margin},
          {"alpha", loss.alpha}};
}

EmbedTrainConfig EmbedTrainConfig::from_json(const Json& j) {
  EmbedTrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.mining_epochs = j.value("mining_epochs", c.mining_epochs);
  c.seed = j.value("seed", c.seed);
  c.resample_negatives = j.value("resample_negatives", c.resample_negatives);
  c.loss.margin = j.value("margin", c.loss.margin);
  c.loss.alpha = j.value("alpha", c.loss.alpha);
  c.validate();
  return c;
}

EmbeddingModel::EmbeddingModel(EmbeddingModelConfig config, std::string category, uint64_t seed)
    : config_(std::move(config)), category_(std::move(category)) {
  config_.validate();
  Rng rng(seed);
  const auto spec = nn::backbone_preset(config_.backbone);
  nn::append_backbone(net_, spec, 3, rng);
  net_.add<nn::GlobalAvgPool>();
  net_.add<nn::Linear>(spec.out_channels(), config_.dim, rng);
  refresh_version();
}

void EmbeddingModel::refresh_version() {
  // FNV-1a over the raw weights.
  uint64_t h = 1469598103934665603ull;
  for (const nn::Param* p : net_.params()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
    for (size_t i = 0; i < p->value.size() * sizeof(float); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << category_ << '-' << std::hex << h;
  version_ = os.str();
}

std::unique_ptr<EmbeddingModel> EmbeddingModel::load(const std::string& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != kKind) throw DecodeError(path + ": not an embedding model (" + ck.kind + ")");
  const Json cfg = Json::parse(ck.config_json);
  auto model = std::make_unique<EmbeddingModel>(EmbeddingModelConfig::from_json(cfg.at("model")),
                                                cfg.value("category", std::string()), 0);
  nn::restore_params(ck, model->params());
  model->refresh_version();
  return model;
}

void EmbeddingModel::save(const std::string& path) const {
  const Json cfg = {{"model", config_.to_json()}, {"category", category_}};
  nn::save_checkpoint(path, kKind, cfg.dump(), const_cast<nn::Sequential&>(net_).params());
}

nn::Tensor EmbeddingModel::preprocess(const Image& image) const {
  if (image.empty()) throw DecodeError("empty image");
  return nn::image_to_tensor(image, config_.input_height, config_.input_width);
}

std::vector<float> EmbeddingModel::embed(const Image& image) const {
  return net_.forward(preprocess(image), nullptr).values;
}

TripletDataset load_triplet_dataset(const std::vector<ImagePair>& pairs,
                                    const std::vector<std::string>& article_types,
                                    uint64_t seed) {
  std::vector<ImagePair> kept;
  for (const auto& p : pairs) {
    if (article_types.empty() ||
        std::find(article_types.begin(), article_types.end(), p.article_type) != article_types.end()) {
      kept.push_back(p);
    }
  }
  TripletDataset ds;
  std::map<std::string, size_t> by_path;
  auto intern = [&](const std::string& path, const std::string& garment, bool catalog,
                    const std::string& type) {
    auto it = by_path.find(path);
    if (it != by_path.end()) return it->second;
    ds.images.push_back(read_image(path));
    ds.garment_ids.push_back(garment);
    ds.is_catalog.push_back(catalog);
    ds.article_types.push_back(type);
    by_path.emplace(path, ds.images.size() - 1);
    return ds.images.size() - 1;
  };
  for (const auto& p : kept) {
    ds.pairs.emplace_back(intern(p.wild_path, p.garment_id, false, p.article_type),
                          intern(p.catalog_path, p.garment_id, true, p.article_type));
  }
  const auto built = build_triplets(kept, seed);
  for (const auto& w : built.warnings) log::warning(w);
  for (const auto& t : built.triplets) {
    ds.triplets.push_back({intern(t.anchor.path, t.anchor.garment_id, false, t.anchor.article_type),
                           intern(t.positive.path, t.positive.garment_id, true,
                                  t.positive.article_type),
                           intern(t.negative.path, t.negative.garment_id, true,
                                  t.negative.article_type)});
  }
  return ds;
}

std::vector<std::array<size_t, 3>> resample_triplets(const TripletDataset& data, uint64_t seed) {
  // type -> garment -> catalog image indices, ordered for determinism
  std::map<std::string, std::map<std::string, std::vector<size_t>>> catalog;
  for (size_t i = 0; i < data.images.size(); ++i) {
    if (data.is_catalog[i]) catalog[data.article_types[i]][data.garment_ids[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::array<size_t, 3>> out;
  for (const auto& [wild, positive] : data.pairs) {
    const auto& garments = catalog[data.article_types[wild]];
    std::vector<const std::vector<size_t>*> others;
    for (const auto& [g, imgs] : garments) {
      if (g != data.garment_ids[wild]) others.push_back(&imgs);
    }
    if (others.empty()) continue;
    const auto& imgs = *others[rng.below(others.size())];
    out.push_back({wild, positive, imgs[rng.below(imgs.size())]});
  }
  return out;
}

namespace {

std::vector<double> to_double(const nn::Tensor& t) {
  return std::vector<double>(t.values.begin(), t.values.end());
}

nn::Tensor to_tensor(const std::vector<double>& g) {
  nn::Tensor t(static_cast<int>(g.size()), 1, 1);
  for (size_t i = 0; i < g.size(); ++i) t.values[i] = static_cast<float>(g[i]);
  return t;
}

// Forward/backward of one triplet through the shared encoder; returns the loss.
double train_triplet(EmbeddingModel& model, const nn::Tensor& a, const nn::Tensor& p,
                     const nn::Tensor& n, const TripletLossConfig& cfg) {
  nn::Context ca, cp, cn;
  const auto ea = to_double(model.forward(a, &ca));
  const auto ep = to_double(model.forward(p, &cp));
  const auto en = to_double(model.forward(n, &cn));
  const TripletGradient g = total_loss_with_gradient(ea, ep, en, cfg);
  model.backward(to_tensor(g.anchor), ca);
  model.backward(to_tensor(g.positive), cp);
  model.backward(to_tensor(g.negative), cn);
  return g.loss;
}

}  // namespace

std::unique_ptr<EmbeddingModel> train_embedding_model(const TripletDataset& data,
                                                      const EmbeddingModelConfig& model_config,
                                                      const EmbedTrainConfig& cfg,
                                                      const std::string& category,
                                                      EmbedTrainReport* report) {
  cfg.validate();
  if (data.triplets.empty()) throw ConfigError("no training triplets for '" + category + "'");
  auto model = std::make_unique<EmbeddingModel>(model_config, category, cfg.seed);
  std::vector<nn::Tensor> inputs;
  for (const auto& img : data.images) inputs.push_back(model->preprocess(img));

  auto params = model->params();
  nn::Adam adam(params, {cfg.learning_rate});
  Rng rng(cfg.seed ^ 0x656du);
  EmbedTrainReport rep;
  const size_t bs = static_cast<size_t>(cfg.batch_size);

  std::vector<std::array<size_t, 3>> triplets = data.triplets;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0 && cfg.resample_negatives) {
      triplets = resample_triplets(data, cfg.seed + static_cast<uint64_t>(epoch));
    }
    std::vector<size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), size_t{0});
    rng.shuffle(order);
    double loss = 0.0;
    for (size_t b = 0; b < order.size(); b += bs) {
      const size_t e = std::min(order.size(), b + bs);
      nn::zero_grads(params);
      for (size_t i = b; i < e; ++i) {
        const auto& t = triplets[order[i]];
        loss += train_triplet(*model, inputs[t[0]], inputs[t[1]], inputs[t[2]], cfg.loss);
      }
      adam.step(1.0f / static_cast<float>(e - b));
    }
    rep.epoch_losses.push_back(loss / order.size());
    log::debug(category + " triplet epoch " + std::to_string(epoch + 1) + " loss " +
               std::to_string(rep.epoch_losses.back()));
  }

  // Online semi-hard mining over batches of (wild, catalog) pairs.
  std::vector<size_t> pair_order(data.pairs.size());
  std::iota(pair_order.begin(), pair_order.end(), size_t{0});
  for (int epoch = 0; epoch < cfg.mining_epochs; ++epoch) {
    rng.shuffle(pair_order);
    double loss = 0.0;
    size_t used = 0;
    for (size_t b = 0; b < pair_order.size(); b += bs) {
      const size_t e = std::min(pair_order.size(), b + bs);
      std::vector<size_t> rows;
      for (size_t i = b; i < e; ++i) {
        rows.push_back(data.pairs[pair_order[i]].first);
        rows.push_back(data.pairs[pair_order[i]].second);
      }
      LabeledBatch batch;
      for (size_t r : rows) {
        batch.embeddings.push_back(to_double(model->forward(inputs[r], nullptr)));
        batch.labels.push_back(data.garment_ids[r]);
      }
      nn::zero_grads(params);
      size_t count = 0;
      for (size_t r = 0; r < rows.size(); r += 2) {  // wild rows anchor
        const auto mined = mine_semi_hard(r, batch, cfg.loss.margin);
        if (!mined) continue;
        (mined->semi_hard ? rep.mined_semi_hard : rep.mined_fallback) += 1;
        loss += train_triplet(*model, inputs[rows[mined->anchor]], inputs[rows[mined->positive]],
                              inputs[rows[mined->negative]], cfg.loss);
        ++count;
      }
      if (count > 0) adam.step(1.0f / static_cast<float>(count));
      used += count;
    }
    rep.epoch_losses.push_back(used ? loss / used : 0.0);
    log::debug(category + " mined epoch " + std::to_string(epoch + 1) + " loss " +
               std::to_string(rep.epoch_losses.back()) + " over " + std::to_string(used));
  }
  model->refresh_version();
  if (report != nullptr) *report = rep;
  return model;
}

double triplet_accuracy(const EmbeddingModel& model, const TripletDataset& data, double margin) {
  if (data.triplets.empty()) return 0.0;
  std::vector<std::vector<double>> emb(data.images.size());
  auto get = [&](size_t i) -> const std::vector<double>& {
    if (emb[i].empty()) {
      const auto v = model.embed(data.images[i]);
      emb[i].assign(v.begin(), v.end());
    }
    return emb[i];
  };
  size_t ok = 0;
  for (const auto& t : data.triplets) {
    const double dap = sq_euclidean(get(t[0]), get(t[1]));
    const double dan = sq_euclidean(get(t[0]), get(t[2]));
    ok += dap + margin < dan;
  }
  return static_cast<double>(ok) / data.triplets.size();
}

std::vector<uint8_t> encode_vector(const std::vector<float>& v) {
  std::ostringstream os;
  bin::write_u32(os, static_cast<uint32_t>(v.size()));
  bin::write_f32s(os, v.data(), v.size());
  const std::string s = os.str();
  return std::vector<uint8_t>(s.begin(), s.end());
}

std::vector<float> decode_vector(const std::vector<uint8_t>& bytes) {
  std::istringstream is(std::string(bytes.begin(), bytes.end()));
  const uint32_t d = bin::read_u32(is);
  if (bytes.size() != 4 + static_cast<size_t>(d) * 4) {
    throw DecodeError("vector record length does not match its header");
  }
  return bin::read_f32s(is, d);
}

}  // namespace looklab::embed
