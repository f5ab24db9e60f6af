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

#include <malloc.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "looklab/bootstrap.h"
#include "looklab/detector.h"
#include "looklab/embed/model.h"
#include "looklab/errors.h"
#include "looklab/feedback.h"
#include "looklab/keypoints.h"
#include "looklab/log.h"
#include "looklab/pipeline.h"
#include "looklab/pose.h"
#include "looklab/service.h"
#include "looklab/synth.h"

namespace fs = std::filesystem;
using namespace looklab;

namespace {

service::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

std::vector<int> parse_ks(const std::string& csv) {
  std::vector<int> ks;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      ks.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ValidationError("bad k list: " + csv);
    }
  }
  if (ks.empty()) throw ValidationError("empty k list");
  return ks;
}

detect::ArticleTaxonomy taxonomy_or_default(const std::string& path) {
  return path.empty() ? detect::ArticleTaxonomy::fashion_default() : detect::ArticleTaxonomy::load(path);
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

nn::TrainOptions train_options(int epochs, double lr, int batch, uint64_t seed) {
  nn::TrainOptions o;
  o.epochs = epochs;
  o.learning_rate = lr;
  o.batch_size = batch;
  o.seed = seed;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // Training allocates many mid-sized tensors; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);

  CLI::App app{"looklab: shop-the-look recommendation toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log at info level");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic world");
  std::string synth_out;
  synth::WorldConfig world;
  synth::DatasetSizes sizes;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", world.seed);
  synth->add_option("--items-per-type", world.items_per_type);
  synth->add_option("--train-scenes", sizes.train_scenes);
  synth->add_option("--pair-scenes", sizes.pair_scenes);
  synth->add_option("--fullshot-eval", sizes.fullshot_eval);
  synth->add_option("--pose-eval", sizes.pose_eval);
  synth->add_option("--pdps", sizes.pdps);

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Train every model on a synthetic world and write a registry");
  std::string boot_world, boot_out, boot_scoring = "euclidean";
  pipeline::BootstrapOptions bopt;
  bool boot_serial = false;
  boot->add_option("--world", boot_world)->required();
  boot->add_option("--out", boot_out)->required();
  boot->add_option("--seed", bopt.seed);
  boot->add_option("--keypoint-epochs", bopt.keypoint_epochs);
  boot->add_option("--pose-epochs", bopt.pose_epochs);
  boot->add_option("--detector-epochs", bopt.detector_epochs);
  boot->add_option("--embed-epochs", bopt.embed_epochs);
  boot->add_option("--scoring", boot_scoring)->check(CLI::IsMember({"cosine", "euclidean", "combined"}));
  boot->add_flag("--serial", boot_serial, "Train one model at a time");

  // keypoints
  auto* kp = app.add_subcommand("keypoints", "Keypoint model");
  kp->require_subcommand(1);
  auto* kp_train = kp->add_subcommand("train", "Train from a keypoint manifest");
  std::string kp_manifest, kp_out, kp_model, kp_image;
  int kp_epochs = 40, kp_batch = 8;
  double kp_lr = 2e-3, kp_threshold = keypoints::kDefaultFullShotThreshold;
  uint64_t kp_seed = 1;
  kp_train->add_option("--manifest", kp_manifest)->required();
  kp_train->add_option("--out", kp_out)->required();
  kp_train->add_option("--epochs", kp_epochs);
  kp_train->add_option("--batch-size", kp_batch);
  kp_train->add_option("--lr", kp_lr);
  kp_train->add_option("--seed", kp_seed);
  auto* kp_infer = kp->add_subcommand("infer", "Keypoints and full-shot decision for one image");
  kp_infer->add_option("--model", kp_model)->required();
  kp_infer->add_option("--image", kp_image)->required();
  kp_infer->add_option("--threshold", kp_threshold);

  // pose
  auto* po = app.add_subcommand("pose", "Pose classifier");
  po->require_subcommand(1);
  std::string po_manifest, po_out, po_model, po_image, po_out_dir = ".";
  int po_epochs = 15, po_batch = 8;
  double po_lr = 2e-3;
  uint64_t po_seed = 2;
  auto* po_train = po->add_subcommand("train", "Train from a pose manifest");
  po_train->add_option("--manifest", po_manifest)->required();
  po_train->add_option("--out", po_out)->required();
  po_train->add_option("--epochs", po_epochs);
  po_train->add_option("--batch-size", po_batch);
  po_train->add_option("--lr", po_lr);
  po_train->add_option("--seed", po_seed);
  auto* po_eval = po->add_subcommand("eval", "Confusion CSV and per-class precision/recall JSON");
  po_eval->add_option("--model", po_model)->required();
  po_eval->add_option("--manifest", po_manifest)->required();
  po_eval->add_option("--out-dir", po_out_dir);
  auto* po_infer = po->add_subcommand("infer", "Classify one image");
  po_infer->add_option("--model", po_model)->required();
  po_infer->add_option("--image", po_image)->required();

  // detect
  auto* de = app.add_subcommand("detect", "Article detector");
  de->require_subcommand(1);
  std::string de_gt, de_dets, de_out, de_taxonomy, de_manifest, de_model, de_image;
  double de_iou = 0.5;
  bool de_broad = false;
  int de_epochs = 15, de_batch = 8;
  double de_lr = 2e-3;
  uint64_t de_seed = 3;
  auto* de_eval = de->add_subcommand("eval", "Per-class AP and mAP");
  de_eval->add_option("--gt", de_gt)->required();
  de_eval->add_option("--dets", de_dets)->required();
  de_eval->add_option("--iou", de_iou);
  de_eval->add_option("--out", de_out, "CSV path (stdout when omitted)");
  de_eval->add_option("--taxonomy", de_taxonomy);
  de_eval->add_flag("--broad", de_broad, "Pool by broad category");
  auto* de_train = de->add_subcommand("train", "Train the tiny detector from a GT manifest");
  de_train->add_option("--manifest", de_manifest)->required();
  de_train->add_option("--taxonomy", de_taxonomy);
  de_train->add_option("--out", de_out)->required();
  de_train->add_option("--epochs", de_epochs);
  de_train->add_option("--batch-size", de_batch);
  de_train->add_option("--lr", de_lr);
  de_train->add_option("--seed", de_seed);
  auto* de_infer = de->add_subcommand("infer", "Detect articles in images listed by a GT-style manifest");
  de_infer->add_option("--model", de_model)->required();
  de_infer->add_option("--manifest", de_manifest)->required();
  de_infer->add_option("--out", de_out)->required();

  // embed
  auto* em = app.add_subcommand("embed", "Per-category embedding models");
  em->require_subcommand(1);
  std::string em_category, em_pairs, em_taxonomy, em_out, em_model, em_image, em_catalog;
  embed::EmbedTrainConfig etc;
  etc.learning_rate = 1e-3;
  etc.batch_size = 16;
  etc.epochs = 20;
  auto* em_train = em->add_subcommand("train", "Triplet training for one broad category");
  em_train->add_option("--category", em_category)->required();
  em_train->add_option("--pairs", em_pairs)->required();
  em_train->add_option("--taxonomy", em_taxonomy);
  em_train->add_option("--out", em_out)->required();
  em_train->add_option("--epochs", etc.epochs);
  em_train->add_option("--mining-epochs", etc.mining_epochs);
  em_train->add_option("--batch-size", etc.batch_size);
  em_train->add_option("--lr", etc.learning_rate);
  em_train->add_option("--margin", etc.loss.margin);
  em_train->add_option("--alpha", etc.loss.alpha);
  em_train->add_option("--seed", etc.seed);
  auto* em_infer = em->add_subcommand("infer", "Embed one image");
  em_infer->add_option("--model", em_model)->required();
  em_infer->add_option("--image", em_image)->required();
  em_infer->add_option("--out", em_out, "Vector path (default: <image>.vec)");
  auto* em_index = em->add_subcommand("index", "Embed a catalog manifest into a catalog file");
  em_index->add_option("--model", em_model)->required();
  em_index->add_option("--catalog", em_catalog)->required();
  em_index->add_option("--out", em_out)->required();

  // retrieve
  auto* re = app.add_subcommand("retrieve", "Retrieval metrics");
  re->require_subcommand(1);
  std::string re_results, re_relevance, re_ks = "3,5,10,14", re_method = "looklab", re_out;
  auto* re_eval = re->add_subcommand("eval", "P@K and R@K");
  re_eval->add_option("--results", re_results)->required();
  re_eval->add_option("--relevance", re_relevance)->required();
  re_eval->add_option("--k", re_ks);
  re_eval->add_option("--method", re_method);
  re_eval->add_option("--out", re_out, "CSV path (stdout when omitted)");

  // run
  auto* run = app.add_subcommand("run", "Batch recommendations for a PDP manifest");
  std::string run_manifest, run_out, run_registry;
  int run_k = retrieve::kDefaultK;
  run->add_option("--manifest", run_manifest)->required();
  run->add_option("--out", run_out)->required();
  run->add_option("--registry", run_registry)->required();
  run->add_option("--k", run_k);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP service");
  service::ServiceConfig scfg;
  std::string sv_candidates, sv_feedback;
  double sv_lease = 300.0;
  serve->add_option("--registry", scfg.registry_path)->required();
  serve->add_option("--host", scfg.host);
  serve->add_option("--port", scfg.port);
  serve->add_option("--image-root", scfg.image_root);
  serve->add_option("--threads", scfg.threads);
  serve->add_option("--candidates", sv_candidates, "Review candidates JSONL");
  serve->add_option("--feedback", sv_feedback, "Append-only verdict log JSONL");
  serve->add_option("--lease-seconds", sv_lease);

  // review / feedback
  auto* rv = app.add_subcommand("review", "Active-learning review queue");
  rv->require_subcommand(1);
  std::string rv_dets, rv_out, rv_gt, rv_candidates, rv_feedback, rv_taxonomy, rv_noise_class;
  double rv_lo = 0.3, rv_hi = 0.8;
  int rv_budget = 50;
  auto* rv_enqueue = rv->add_subcommand("enqueue", "Queue uncertain detections");
  rv_enqueue->add_option("--dets", rv_dets)->required();
  rv_enqueue->add_option("--out", rv_out)->required();
  rv_enqueue->add_option("--lo", rv_lo);
  rv_enqueue->add_option("--hi", rv_hi);
  rv_enqueue->add_option("--budget", rv_budget);
  auto* rv_assemble = rv->add_subcommand("assemble", "Apply verdicts to a GT manifest");
  rv_assemble->add_option("--gt", rv_gt)->required();
  rv_assemble->add_option("--candidates", rv_candidates)->required();
  rv_assemble->add_option("--feedback", rv_feedback)->required();
  rv_assemble->add_option("--out", rv_out)->required();
  auto* rv_harness = rv->add_subcommand("harness", "Label-noise experiment");
  feedback::HarnessConfig hcfg;
  rv_harness->add_option("--gt", rv_gt)->required();
  rv_harness->add_option("--taxonomy", rv_taxonomy);
  rv_harness->add_option("--noise-class", hcfg.noise_class)->required();
  rv_harness->add_option("--noise-rate", hcfg.noise_rate);
  rv_harness->add_option("--lo", hcfg.band_lo);
  rv_harness->add_option("--hi", hcfg.band_hi);
  rv_harness->add_option("--budget", hcfg.budget);
  rv_harness->add_option("--rounds", hcfg.rounds);
  rv_harness->add_option("--seed", hcfg.seed);
  rv_harness->add_option("--out", rv_out, "AP delta CSV");

  CLI11_PARSE(app, argc, argv);
  log::set_level(verbose ? log::Level::kInfo : log::Level::kWarning);

  try {
    if (*synth) {
      synth::generate_world(synth_out, world, sizes);
    } else if (*boot) {
      bopt.parallel = !boot_serial;
      bopt.scoring = retrieve::parse_mode(boot_scoring);
      const auto rep = pipeline::bootstrap_registry(boot_world, boot_out, bopt);
      Json secs = rep.train_seconds;
      print_json({{"registry", rep.registry_path}, {"wall_seconds", rep.wall_seconds}, {"train_seconds", secs}});
    } else if (*kp_train) {
      const auto data = keypoints::load_samples(keypoints::read_keypoint_manifest(kp_manifest));
      keypoints::TrainReport rep;
      keypoints::train_keypoint_model(data, keypoints::KeypointModelConfig::tiny(),
                                      train_options(kp_epochs, kp_lr, kp_batch, kp_seed),
                                      keypoints::KeypointSchema::coco17(), &rep)
          ->save(kp_out);
      print_json({{"model", kp_out}, {"epochs", rep.epochs}, {"final_loss", rep.final_loss}});
    } else if (*kp_infer) {
      const auto model = keypoints::KeypointModel::load(kp_model);
      const auto kps = model->infer(read_image(kp_image));
      print_json({{"image", kp_image},
                  {"keypoints", keypoints::to_json(kps, model->schema())},
                  {"full_shot", keypoints::is_full_shot(kps, model->schema(), kp_threshold)}});
    } else if (*po_train) {
      std::vector<pose::PoseSample> data;
      for (const auto& r : pose::read_pose_manifest(po_manifest)) data.push_back({read_image(r.image_path), r.label});
      pose::train_pose_model(data, pose::PoseModelConfig::tiny(), train_options(po_epochs, po_lr, po_batch, po_seed))
          ->save(po_out);
    } else if (*po_eval) {
      const auto model = pose::PoseModel::load(po_model);
      std::vector<pose::PoseLabel> truths, preds;
      for (const auto& r : pose::read_pose_manifest(po_manifest)) {
        truths.push_back(r.label);
        preds.push_back(model->classify(read_image(r.image_path)).label);
      }
      const auto cm = pose::confusion_matrix(truths, preds);
      const auto pr = pose::precision_recall_per_class(cm);
      fs::create_directories(po_out_dir);
      write_text_file((fs::path(po_out_dir) / "confusion.csv").string(), pose::confusion_matrix_csv(cm));
      write_text_file((fs::path(po_out_dir) / "per_class.json").string(), pose::precision_recall_json(pr).dump(2) + "\n");
      std::cout << pose::confusion_matrix_csv(cm);
    } else if (*po_infer) {
      const auto p = pose::PoseModel::load(po_model)->classify(read_image(po_image));
      Json scores = Json::object();
      for (size_t i = 0; i < pose::kNumPoses; ++i) scores[std::string(pose::pose_name(pose::kAllPoses[i]))] = p.scores[i];
      print_json({{"image", po_image}, {"label", pose::pose_name(p.label)}, {"confidence", p.confidence}, {"scores", scores}});
    } else if (*de_eval) {
      const auto rep = detect::evaluate(detect::read_gt_manifest(de_gt), detect::read_detections(de_dets), de_iou,
                                        de_broad ? detect::Grouping::kBroadCategory : detect::Grouping::kArticleType,
                                        taxonomy_or_default(de_taxonomy));
      const std::string table = detect::format_ap_table(rep);
      if (de_out.empty()) {
        std::cout << table;
      } else {
        write_text_file(de_out, table);
        std::printf("mAP %.6f\n", rep.map);
      }
    } else if (*de_train) {
      std::vector<detect::DetectorSample> data;
      for (auto& a : detect::read_gt_manifest(de_manifest)) data.push_back({read_image(a.image_path), std::move(a.boxes)});
      detect::TinyDetectorConfig cfg;
      cfg.article_types = taxonomy_or_default(de_taxonomy).article_types();
      detect::train_tiny_detector(data, cfg, train_options(de_epochs, de_lr, de_batch, de_seed))->save(de_out);
    } else if (*de_infer) {
      const auto model = detect::TinyDetector::load(de_model);
      std::vector<detect::ImageDetections> out;
      for (const auto& a : detect::read_gt_manifest(de_manifest)) {
        const Image img = read_image(a.image_path);
        detect::ImageInput in;
        in.ref = a.image_path;
        in.image = &img;
        out.push_back({a.image_path, model->detect(in)});
      }
      detect::write_detections(de_out, out);
    } else if (*em_train) {
      const auto taxonomy = taxonomy_or_default(em_taxonomy);
      std::vector<std::string> types;
      for (const auto& [broad, t] : taxonomy.categories()) {
        if (broad == em_category) types = t;
      }
      if (types.empty()) throw NotFoundError("unknown broad category " + em_category);
      const auto data = embed::load_triplet_dataset(embed::read_pairs_manifest(em_pairs), types, etc.seed);
      embed::EmbedTrainReport rep;
      auto model = embed::train_embedding_model(data, embed::EmbeddingModelConfig::tiny(), etc, em_category, &rep);
      model->save(em_out);
      print_json({{"model", em_out},
                  {"version", model->version()},
                  {"epoch_losses", rep.epoch_losses},
                  {"triplet_accuracy", embed::triplet_accuracy(*model, data, etc.loss.margin)}});
    } else if (*em_infer) {
      const auto model = embed::EmbeddingModel::load(em_model);
      const auto v = model->embed(read_image(em_image));
      const std::string out = em_out.empty() ? em_image + ".vec" : em_out;
      const auto bytes = embed::encode_vector(v);
      write_text_file(out, std::string(bytes.begin(), bytes.end()));
      const Json sidecar = {{"image", em_image},
                            {"dim", v.size()},
                            {"category", model->category()},
                            {"model_version", model->version()},
                            {"format", "uint32 d, float32 x d, little-endian"}};
      write_text_file(out + ".json", sidecar.dump(2) + "\n");
    } else if (*em_index) {
      const auto model = embed::EmbeddingModel::load(em_model);
      const auto entries = pipeline::embed_catalog(*model, em_catalog);
      retrieve::write_catalog_embeddings(em_out, {model->version(), model->category()}, entries);
      print_json({{"catalog", em_out}, {"count", entries.size()}, {"model_version", model->version()}});
    } else if (*re_eval) {
      // Scored over the relevance file's queries; a query without results
      // counts as an empty ranking.
      const auto relevance = retrieve::read_relevance(re_relevance);
      std::map<std::string, retrieve::RetrievalResult> by_query;
      for (auto& r : pipeline::read_retrieval_results(re_results)) by_query.emplace(r.query_ref, std::move(r));
      std::vector<retrieve::RetrievalResult> results;
      size_t missing = 0;
      for (const auto& [q, rel] : relevance) {
        const auto it = by_query.find(q);
        if (it == by_query.end()) ++missing;
        results.push_back(it == by_query.end() ? retrieve::RetrievalResult{q, {}} : it->second);
      }
      if (missing > 0) log::warning(std::to_string(missing) + " queries have no results");
      const auto rows = retrieve::precision_recall_at_k(results, relevance, parse_ks(re_ks));
      const std::string grid = retrieve::format_metric_grid(re_method, rows);
      if (re_out.empty()) {
        std::cout << grid;
      } else {
        write_text_file(re_out, grid);
      }
    } else if (*run) {
      const auto registry = pipeline::ModelRegistry::load(run_registry);
      pipeline::BatchOptions o;
      o.k = run_k;
      pipeline::run_batch(run_manifest, run_out, *registry, o);
    } else if (*serve) {
      std::shared_ptr<const pipeline::ModelRegistry> registry = pipeline::ModelRegistry::load(scfg.registry_path);
      std::shared_ptr<feedback::ReviewStore> store;
      if (!sv_candidates.empty() || !sv_feedback.empty()) {
        store = std::make_shared<feedback::ReviewStore>(sv_candidates, sv_feedback, sv_lease);
        store->load();
      }
      service::Service svc(registry, store, scfg);
      const int port = svc.bind();
      if (port < 0) throw Error("cannot bind " + scfg.host + ":" + std::to_string(scfg.port));
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on %s:%d\n", scfg.host.c_str(), port);
      std::fflush(stdout);
      svc.serve();
      g_service = nullptr;
    } else if (*rv_enqueue) {
      const auto cands = feedback::enqueue_candidates(detect::read_detections(rv_dets), rv_lo, rv_hi, rv_budget);
      feedback::ReviewStore store(rv_out, "");
      store.load();
      store.add_candidates(cands);
      std::printf("queued %zu candidates\n", cands.size());
    } else if (*rv_assemble) {
      feedback::ReviewStore store(rv_candidates, rv_feedback);
      store.load();
      detect::write_gt_manifest(
          rv_out, feedback::assemble_retrain_set(detect::read_gt_manifest(rv_gt), store.candidates(), store.records()));
    } else if (*rv_harness) {
      const auto rep =
          feedback::run_noise_harness(detect::read_gt_manifest(rv_gt), taxonomy_or_default(rv_taxonomy), hcfg);
      const auto& last = rep.rounds.back();
      const std::string csv = feedback::format_ap_deltas(last.deltas);
      if (!rv_out.empty()) write_text_file(rv_out, csv);
      std::cout << csv;
      std::printf("corrupted %zu, %s delta %.6f\n", rep.corrupted, rep.noise_broad.c_str(), rep.final_delta());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
