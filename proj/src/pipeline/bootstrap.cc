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

#include "looklab/bootstrap.h"

#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <mutex>

#include "looklab/detector.h"
#include "looklab/errors.h"
#include "looklab/keypoints.h"
#include "looklab/log.h"
#include "looklab/pose.h"

namespace looklab::pipeline {

namespace fs = std::filesystem;

std::vector<retrieve::CatalogEntry> embed_catalog(const embed::EmbeddingModel& model,
                                                  const std::string& catalog_manifest) {
  std::vector<retrieve::CatalogEntry> out;
  for (const Json& row : read_jsonl(catalog_manifest)) {
    if (field<std::string>(row, "broad_category") != model.category()) continue;
    retrieve::CatalogEntry e;
    e.product_id = field<std::string>(row, "product_id");
    e.article_type = field<std::string>(row, "article_type");
    e.broad_category = model.category();
    e.embedding =
        model.embed(read_image(resolve_relative(catalog_manifest, field<std::string>(row, "image_path"))));
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

BootstrapReport bootstrap_registry(const std::string& world_dir, const std::string& out_dir,
                                   const BootstrapOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path world(world_dir), out(out_dir);
  fs::create_directories(out);
  const auto taxonomy = detect::ArticleTaxonomy::load((world / "taxonomy.json").string());
  write_text_file((out / "taxonomy.json").string(), taxonomy.to_json().dump(2) + "\n");
  const std::string catalog = (world / "catalog.jsonl").string();

  BootstrapReport report;
  std::mutex mu;
  auto timed = [&](const std::string& name, std::function<void()> fn) {
    return [&, name, fn = std::move(fn)] {
      const auto t = std::chrono::steady_clock::now();
      fn();
      const double s = seconds_since(t);
      std::lock_guard lock(mu);
      report.train_seconds[name] = s;
      log::info("trained " + name + " in " + std::to_string(s) + " s");
    };
  };

  std::vector<std::function<void()>> jobs;
  jobs.push_back(timed("keypoints", [&] {
    const auto data = keypoints::load_samples(
        keypoints::read_keypoint_manifest((world / "train/keypoints.jsonl").string()));
    nn::TrainOptions o;
    o.epochs = opt.keypoint_epochs;
    o.learning_rate = opt.keypoint_learning_rate;
    o.seed = opt.seed;
    keypoints::train_keypoint_model(data, keypoints::KeypointModelConfig::tiny(), o)
        ->save((out / "keypoints.llm").string());
  }));
  jobs.push_back(timed("pose", [&] {
    std::vector<pose::PoseSample> data;
    for (const auto& r : pose::read_pose_manifest((world / "train/pose.jsonl").string())) {
      data.push_back({read_image(r.image_path), r.label});
    }
    nn::TrainOptions o;
    o.epochs = opt.pose_epochs;
    o.learning_rate = opt.pose_learning_rate;
    o.seed = opt.seed + 1;
    pose::train_pose_model(data, pose::PoseModelConfig::tiny(), o)->save((out / "pose.llm").string());
  }));
  jobs.push_back(timed("detector", [&] {
    std::vector<detect::DetectorSample> data;
    for (auto& a : detect::read_gt_manifest((world / "train/detect_gt.jsonl").string())) {
      data.push_back({read_image(a.image_path), std::move(a.boxes)});
    }
    detect::TinyDetectorConfig cfg;
    cfg.article_types = taxonomy.article_types();
    nn::TrainOptions o;
    o.epochs = opt.detector_epochs;
    o.learning_rate = opt.detector_learning_rate;
    o.seed = opt.seed + 2;
    detect::train_tiny_detector(data, cfg, o)->save((out / "detector.llm").string());
  }));
  const auto pairs = embed::read_pairs_manifest((world / "train/pairs.jsonl").string());
  std::vector<std::string> broads = taxonomy.broad_categories();
  for (size_t b = 0; b < broads.size(); ++b) {
    const std::string broad = broads[b];
    jobs.push_back(timed("embed:" + broad, [&, broad, b] {
      const auto types = taxonomy.categories()[b].second;
      const auto data = embed::load_triplet_dataset(pairs, types, opt.seed + 10 + b);
      embed::EmbedTrainConfig tc;
      tc.learning_rate = opt.embed_learning_rate;
      tc.batch_size = opt.embed_batch_size;
      tc.epochs = opt.embed_epochs;
      tc.seed = opt.seed + 10 + b;
      auto model = embed::train_embedding_model(data, embed::EmbeddingModelConfig::tiny(), tc, broad);
      const std::string stem = "embed_" + std::to_string(b);
      model->save((out / (stem + ".llm")).string());
      retrieve::write_catalog_embeddings((out / (stem + ".catalog")).string(),
                                         {model->version(), broad}, embed_catalog(*model, catalog));
    }));
  }

  if (opt.parallel) {
    std::vector<std::future<void>> running;
    for (auto& job : jobs) running.push_back(std::async(std::launch::async, job));
    for (auto& f : running) f.get();
  } else {
    for (auto& job : jobs) job();
  }

  Json embedders = Json::object();
  Json catalogs = Json::array();
  for (size_t b = 0; b < broads.size(); ++b) {
    embedders[broads[b]] = "embed_" + std::to_string(b) + ".llm";
    catalogs.push_back("embed_" + std::to_string(b) + ".catalog");
  }
  const Json registry = {{"version", "bootstrap-" + std::to_string(opt.seed)},
                         {"taxonomy", "taxonomy.json"},
                         {"keypoints", "keypoints.llm"},
                         {"pose", "pose.llm"},
                         {"detector", {{"kind", "tiny"}, {"path", "detector.llm"}}},
                         {"embedders", embedders},
                         {"catalog", catalogs},
                         {"scoring", std::string(retrieve::mode_name(opt.scoring))}};
  report.registry_path = (out / "registry.json").string();
  write_text_file(report.registry_path, registry.dump(2) + "\n");
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace looklab::pipeline
