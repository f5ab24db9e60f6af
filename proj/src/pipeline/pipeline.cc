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

#include "looklab/pipeline.h"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "looklab/detector.h"
#include "looklab/errors.h"
#include "looklab/log.h"

namespace looklab::pipeline {

namespace fs = std::filesystem;

Json Thresholds::to_json() const {
  return {{"keypoint", keypoint}, {"min_detection", min_detection}, {"pad_fraction", pad_fraction}};
}

Thresholds Thresholds::from_json(const Json& j) {
  Thresholds t;
  t.keypoint = j.value("keypoint", t.keypoint);
  t.min_detection = j.value("min_detection", t.min_detection);
  t.pad_fraction = j.value("pad_fraction", t.pad_fraction);
  if (!(t.keypoint >= 0.0 && t.keypoint <= 1.0) || !(t.min_detection >= 0.0 && t.min_detection <= 1.0) ||
      !(t.pad_fraction >= 0.0)) {
    throw ConfigError("thresholds out of range");
  }
  return t;
}

// ------------------------------------------------------------- registry

std::shared_ptr<const ModelRegistry> ModelRegistry::load(const std::string& path) {
  const Json j = read_json_file(path);
  auto rel = [&](const std::string& ref) { return resolve_relative(path, ref); };
  auto reg = std::make_shared<ModelRegistry>();
  try {
    reg->version = j.value("version", std::string("unversioned"));
    reg->taxonomy = j.contains("taxonomy")
                        ? detect::ArticleTaxonomy::load(rel(field<std::string>(j, "taxonomy")))
                        : detect::ArticleTaxonomy::fashion_default();
    reg->keypoints = keypoints::KeypointModel::load(rel(field<std::string>(j, "keypoints")));
    reg->pose = pose::PoseModel::load(rel(field<std::string>(j, "pose")));
    const Json& det = j.at("detector");
    const std::string kind = field<std::string>(det, "kind");
    const std::string det_path = rel(field<std::string>(det, "path"));
    if (kind == "tiny") {
      reg->detector = detect::TinyDetector::load(det_path);
    } else if (kind == "replay") {
      reg->detector = detect::ReplayDetector::load(det_path);
    } else {
      throw ConfigError("unknown detector kind '" + kind + "'");
    }
    for (const auto& [broad, p] : j.at("embedders").items()) {
      reg->embedders[broad] = embed::EmbeddingModel::load(rel(p.get<std::string>()));
    }
    std::vector<retrieve::CatalogEntry> entries;
    for (const auto& p : j.value("catalog", Json::array())) {
      retrieve::CatalogFileHeader header;
      auto rows = retrieve::read_catalog_embeddings(rel(p.get<std::string>()), &header);
      const auto it = reg->embedders.find(header.category);
      if (it == reg->embedders.end() || it->second->version() != header.model_version) {
        throw ConfigError(p.get<std::string>() + ": embedded by model '" + header.model_version +
                          "', which is not the registered '" + header.category + "' embedder");
      }
      for (auto& e : rows) entries.push_back(std::move(e));
    }
    reg->index = retrieve::index_catalog(std::move(entries));
    reg->mode = retrieve::parse_mode(j.value("scoring", std::string("cosine")));
    reg->thresholds = Thresholds::from_json(j.value("thresholds", Json::object()));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(path + ": " + e.what());
  }
  reg->validate();
  return reg;
}

void ModelRegistry::validate() const {
  if (!keypoints || !pose || !detector || !index) throw ConfigError("registry is incomplete");
  for (const auto& broad : taxonomy.broad_categories()) {
    if (!embedders.contains(broad)) throw ConfigError("no embedding model for '" + broad + "'");
  }
}

Json ModelRegistry::describe() const {
  Json emb = Json::object();
  for (const auto& [broad, m] : embedders) {
    emb[broad] = {{"version", m->version()}, {"dim", m->config().dim}};
  }
  Json parts = Json::object();
  for (const auto& type : index->article_types()) parts[type] = index->partition_size(type);
  const auto det = detector->info();
  return {{"version", version},
          {"keypoints", keypoints->config().to_json()},
          {"pose", pose->config().to_json()},
          {"detector", {{"name", det.name}, {"version", det.version}}},
          {"embedders", emb},
          {"catalog", {{"size", index->size()}, {"partitions", parts}}},
          {"scoring", std::string(retrieve::mode_name(mode))},
          {"thresholds", thresholds.to_json()},
          {"taxonomy", taxonomy.to_json()}};
}

// ------------------------------------------------------------- requests

Json to_json(const PdpRequest& r) {
  return {{"request_id", r.request_id}, {"images", r.images}, {"ugc", r.ugc}};
}

PdpRequest pdp_request_from_json(const Json& j) {
  PdpRequest r;
  r.request_id = j.contains("request_id") ? field<std::string>(j, "request_id") : std::string();
  r.images = field<std::vector<std::string>>(j, "images");
  r.ugc = j.contains("ugc") ? field<bool>(j, "ugc") : false;
  if (r.images.empty()) throw ValidationError("request needs at least one image");
  return r;
}

ImageLoader file_loader(fs::path base_dir) {
  ImageLoader l;
  l.resolve = [base = std::move(base_dir)](const std::string& ref) {
    const fs::path p(ref);
    return (p.is_absolute() ? p : base / p).lexically_normal().string();
  };
  l.read = [](const std::string& key) { return read_image(key); };
  return l;
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kKeypoints: return "keypoints";
    case Stage::kPose: return "pose";
    case Stage::kDetect: return "detect";
    case Stage::kEmbed: return "embed";
    case Stage::kRetrieve: return "retrieve";
  }
  return "unknown";
}

namespace {

class StageClock {
 public:
  StageClock(std::vector<StageTiming>* out, Stage stage)
      : out_(out), stage_(stage), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    if (out_ == nullptr) return;
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    for (auto& t : *out_) {
      if (t.stage == stage_) {
        t.elapsed_ms += ms;
        return;
      }
    }
    out_->push_back({stage_, ms});
  }

 private:
  std::vector<StageTiming>* out_;
  Stage stage_;
  std::chrono::steady_clock::time_point start_;
};

Json pose_json(const pose::PosePrediction& p) {
  return {{"label", std::string(pose::pose_name(p.label))}, {"confidence", p.confidence}};
}

bool box_less(const detect::BoundingBox& a, const detect::BoundingBox& b) {
  return std::tie(a.x_min, a.y_min, a.x_max, a.y_max) < std::tie(b.x_min, b.y_min, b.x_max, b.y_max);
}

bool article_less(const ArticleResult& a, const ArticleResult& b) {
  if (a.detection.score != b.detection.score) return a.detection.score > b.detection.score;
  if (a.detection.box != b.detection.box) return box_less(a.detection.box, b.detection.box);
  return a.detection.article_type < b.detection.article_type;
}

}  // namespace

Json to_json(const LookRecommendation& r) {
  Json reasons = Json::array();
  for (const auto& d : r.rejection_reasons) {
    Json e = {{"image", d.image}, {"reason", d.reason}};
    e["pose"] = d.pose ? pose_json(*d.pose) : Json(nullptr);
    reasons.push_back(e);
  }
  Json arts = Json::array();
  for (const auto& a : r.per_article) {
    arts.push_back({{"detection", detect::to_json(a.detection)},
                    {"broad_category", a.broad_category},
                    {"model_version", a.model_version},
                    {"retrieval", retrieve::to_json(a.retrieval)},
                    {"reason", a.reason.empty() ? Json(nullptr) : Json(a.reason)}});
  }
  return {{"request_id", r.request_id},
          {"ugc", r.ugc},
          {"selected_image", r.selected_image ? Json(*r.selected_image) : Json(nullptr)},
          {"rejection_reasons", reasons},
          {"per_article", arts}};
}

// ------------------------------------------------------------- stages

Selection select_full_shot(const std::vector<LoadedImage>& images,
                           const keypoints::KeypointModel& kp_model,
                           const pose::PoseModel& pose_model, const Thresholds& thresholds,
                           std::vector<StageTiming>* timings) {
  Selection sel;
  sel.decisions.resize(images.size());
  std::vector<bool> full(images.size(), false);
  bool any_decoded = false;
  {
    StageClock clock(timings, Stage::kKeypoints);
    for (size_t i = 0; i < images.size(); ++i) {
      sel.decisions[i].image = images[i].ref;
      if (!images[i].image) {
        sel.decisions[i].reason = kUndecodable;
        continue;
      }
      any_decoded = true;
      const auto kps = kp_model.infer(*images[i].image);
      full[i] = keypoints::is_full_shot(kps, kp_model.schema(), thresholds.keypoint);
      if (!full[i]) sel.decisions[i].reason = kNoFullShot;
    }
  }
  if (!any_decoded) throw DecodeError("no decodable image in request");
  std::optional<size_t> best;
  {
    StageClock clock(timings, Stage::kPose);
    for (size_t i = 0; i < images.size(); ++i) {
      if (!full[i]) continue;
      const auto p = pose_model.classify(*images[i].image);
      sel.decisions[i].pose = p;
      if (p.label != pose::PoseLabel::kFront) {
        sel.decisions[i].reason = kNotFront;
        continue;
      }
      if (!best || p.confidence > sel.decisions[*best].pose->confidence) best = i;
    }
  }
  for (size_t i = 0; i < images.size(); ++i) {
    if (sel.decisions[i].reason.empty()) {
      sel.decisions[i].reason = (best && i == *best) ? kSelected : kLowerFrontConfidence;
    }
  }
  sel.chosen = best;
  return sel;
}

namespace {

LookRecommendation run(const PdpRequest& req, const ModelRegistry& reg, int k,
                       const ImageLoader& loader, std::vector<StageTiming>* timings) {
  if (req.images.empty()) throw ValidationError("request needs at least one image");
  if (req.ugc && req.images.size() != 1) throw ValidationError("UGC requests carry one image");
  if (k < 1) throw ValidationError("k must be >= 1");

  std::vector<LoadedImage> images;
  for (const auto& ref : req.images) {
    LoadedImage li{ref, ref, std::nullopt};
    try {
      li.key = loader.resolve ? loader.resolve(ref) : ref;
      li.image = loader.read(li.key);
      if (li.image->empty()) li.image.reset();
    } catch (const std::exception& e) {
      log::warning("request " + req.request_id + ": cannot decode '" + ref + "': " + e.what());
    }
    images.push_back(std::move(li));
  }

  LookRecommendation rec;
  rec.request_id = req.request_id;
  rec.ugc = req.ugc;
  size_t chosen = 0;
  if (req.ugc) {
    if (!images[0].image) throw DecodeError("UGC image is not decodable");
    rec.rejection_reasons.push_back({req.images[0], std::string(kUgcInput), std::nullopt});
  } else {
    Selection sel = select_full_shot(images, *reg.keypoints, *reg.pose, reg.thresholds, timings);
    rec.rejection_reasons = std::move(sel.decisions);
    if (!sel.chosen) return rec;
    chosen = *sel.chosen;
  }
  rec.selected_image = images[chosen].ref;
  const Image& image = *images[chosen].image;

  std::vector<detect::Detection> dets;
  {
    StageClock clock(timings, Stage::kDetect);
    for (auto& d : reg.detector->detect({images[chosen].key, &image})) {
      if (d.score >= reg.thresholds.min_detection) dets.push_back(std::move(d));
    }
  }
  std::vector<detect::Roi> rois;
  {
    StageClock clock(timings, Stage::kEmbed);
    rois = detect::crop_rois(image, dets, reg.thresholds.pad_fraction);
  }
  std::vector<const detect::Roi*> roi_of(dets.size(), nullptr);
  for (const auto& r : rois) roi_of[r.detection_index] = &r;

  for (size_t i = 0; i < dets.size(); ++i) {
    ArticleResult a;
    a.detection = dets[i];
    a.retrieval.query_ref = req.request_id + "/" + dets[i].article_type;
    if (!reg.taxonomy.contains(dets[i].article_type)) {
      a.reason = kUnknownArticleType;
    } else if (roi_of[i] == nullptr) {
      a.broad_category = reg.taxonomy.broad_of(dets[i].article_type);
      a.reason = kDegenerateBox;
    } else {
      a.broad_category = reg.taxonomy.broad_of(dets[i].article_type);
      const auto it = reg.embedders.find(a.broad_category);
      if (it == reg.embedders.end()) {
        a.reason = kNoModel;
      } else {
        a.model_version = it->second->version();
        std::vector<float> q;
        try {
          StageClock clock(timings, Stage::kEmbed);
          q = it->second->embed(roi_of[i]->crop);
        } catch (const std::exception& e) {
          log::warning("request " + req.request_id + ": embedding failed: " + e.what());
          a.reason = kEmbedFailed;
        }
        if (a.reason.empty()) {
          StageClock clock(timings, Stage::kRetrieve);
          try {
            const std::string qref = a.retrieval.query_ref;
            a.retrieval = reg.index->top_k(q, dets[i].article_type, k, reg.mode);
            a.retrieval.query_ref = qref;
            if (a.retrieval.ranked.empty()) a.reason = kEmptyIndex;
          } catch (const std::exception& e) {
            log::warning("request " + req.request_id + ": retrieval failed: " + e.what());
            a.reason = kEmbedFailed;
          }
        }
      }
    }
    rec.per_article.push_back(std::move(a));
  }
  std::stable_sort(rec.per_article.begin(), rec.per_article.end(), article_less);
  return rec;
}

}  // namespace

LookRecommendation recommend_look(const PdpRequest& req, const ModelRegistry& registry, int k,
                                  const ImageLoader& loader) {
  return run(req, registry, k, loader, nullptr);
}

std::pair<LookRecommendation, std::vector<StageTiming>> profile_request(
    const PdpRequest& req, const ModelRegistry& registry, int k, const ImageLoader& loader) {
  std::vector<StageTiming> timings;
  LookRecommendation rec = run(req, registry, k, loader, &timings);
  return {std::move(rec), std::move(timings)};
}

std::vector<retrieve::RetrievalResult> retrieval_results(
    const std::vector<LookRecommendation>& recs) {
  std::vector<retrieve::RetrievalResult> out;
  for (const auto& rec : recs) {
    std::vector<std::string> seen;
    for (const auto& a : rec.per_article) {  // already score-ordered
      if (std::find(seen.begin(), seen.end(), a.detection.article_type) != seen.end()) continue;
      seen.push_back(a.detection.article_type);
      out.push_back(a.retrieval);
    }
  }
  return out;
}

std::vector<retrieve::RetrievalResult> read_retrieval_results(const std::string& path) {
  std::vector<retrieve::RetrievalResult> out;
  for (const Json& row : read_jsonl(path)) {
    if (row.contains("error")) continue;  // failed batch request
    if (!row.contains("per_article")) {
      out.push_back(retrieve::retrieval_result_from_json(row));
      continue;
    }
    std::vector<std::string> seen;
    for (const Json& a : row.at("per_article")) {
      if (a.at("retrieval").is_null()) continue;
      const auto type = field<std::string>(a.at("detection"), "article_type");
      if (std::find(seen.begin(), seen.end(), type) != seen.end()) continue;
      seen.push_back(type);
      out.push_back(retrieve::retrieval_result_from_json(a.at("retrieval")));
    }
  }
  return out;
}

std::vector<LookRecommendation> run_batch(const std::string& manifest_path,
                                          const std::string& out_path,
                                          const ModelRegistry& registry,
                                          const BatchOptions& options) {
  const auto rows = read_jsonl(manifest_path);
  const ImageLoader loader = file_loader(fs::path(manifest_path).parent_path());
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + out_path);
  std::vector<LookRecommendation> recs;
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string id = rows[i].value("request_id", "line-" + std::to_string(i + 1));
    try {
      PdpRequest req = pdp_request_from_json(rows[i]);
      if (req.request_id.empty()) req.request_id = id;
      recs.push_back(recommend_look(req, registry, options.k, loader));
      out << to_json(recs.back()).dump() << '\n';
    } catch (const Error& e) {
      log::error("request " + id + ": " + e.what());
      out << Json{{"request_id", id}, {"error", e.what()}}.dump() << '\n';
    }
  }
  if (!out) throw Error("failed writing " + out_path);
  return recs;
}

}  // namespace looklab::pipeline
