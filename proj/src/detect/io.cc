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

#include <filesystem>

#include "looklab/detect.h"
#include "looklab/errors.h"

namespace looklab::detect {

Json box_to_json(const BoundingBox& b) {
  return {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

BoundingBox box_from_json(const Json& j) {
  BoundingBox b{field<double>(j, "x_min"), field<double>(j, "y_min"), field<double>(j, "x_max"),
                field<double>(j, "y_max")};
  if (!b.valid()) throw ValidationError("box must satisfy x_min < x_max and y_min < y_max");
  return b;
}

Json to_json(const Detection& d) {
  Json j = box_to_json(d.box);
  j["article_type"] = d.article_type;
  j["score"] = d.score;
  return j;
}

Detection detection_from_json(const Json& j) {
  Detection d{box_from_json(j), field<std::string>(j, "article_type"), field<double>(j, "score")};
  if (!(d.score >= 0.0 && d.score <= 1.0)) throw ValidationError("score outside [0, 1]");
  return d;
}

std::vector<AnnotatedImage> read_gt_manifest(const std::string& path) {
  std::vector<AnnotatedImage> out;
  for (const Json& row : read_jsonl(path)) {
    try {
      AnnotatedImage img;
      img.image_path = resolve_relative(path, field<std::string>(row, "image_path"));
      for (const Json& b : row.at("boxes")) {
        img.boxes.push_back({box_from_json(b), field<std::string>(b, "article_type")});
      }
      out.push_back(std::move(img));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw DecodeError(path + ": " + e.what());
    }
  }
  return out;
}

void write_gt_manifest(const std::string& path, const std::vector<AnnotatedImage>& images) {
  std::vector<Json> rows;
  for (const auto& img : images) {
    Json boxes = Json::array();
    for (const auto& b : img.boxes) {
      Json jb = box_to_json(b.box);
      jb["article_type"] = b.article_type;
      boxes.push_back(jb);
    }
    rows.push_back({{"image_path", img.image_path}, {"boxes", boxes}});
  }
  write_jsonl(path, rows);
}

std::vector<ImageDetections> read_detections(const std::string& path) {
  std::vector<ImageDetections> out;
  for (const Json& row : read_jsonl(path)) {
    try {
      ImageDetections img;
      img.image_path = resolve_relative(path, field<std::string>(row, "image_path"));
      for (const Json& b : row.at("boxes")) img.detections.push_back(detection_from_json(b));
      out.push_back(std::move(img));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw DecodeError(path + ": " + e.what());
    }
  }
  return out;
}

void write_detections(const std::string& path, const std::vector<ImageDetections>& images) {
  std::vector<Json> rows;
  for (const auto& img : images) {
    Json boxes = Json::array();
    for (const auto& d : img.detections) boxes.push_back(to_json(d));
    rows.push_back({{"image_path", img.image_path}, {"boxes", boxes}});
  }
  write_jsonl(path, rows);
}

ReplayDetector::ReplayDetector(std::vector<ImageDetections> recorded, std::string version)
    : version_(std::move(version)) {
  for (auto& r : recorded) {
    auto& slot = by_path_[std::filesystem::path(r.image_path).lexically_normal().string()];
    slot.insert(slot.end(), r.detections.begin(), r.detections.end());
  }
}

std::shared_ptr<ReplayDetector> ReplayDetector::load(const std::string& detections_path) {
  return std::make_shared<ReplayDetector>(read_detections(detections_path),
                                          "replay:" + detections_path);
}

std::vector<Detection> ReplayDetector::detect(const ImageInput& input) const {
  auto it = by_path_.find(std::filesystem::path(input.ref).lexically_normal().string());
  if (it == by_path_.end()) return {};
  return it->second;
}

}  // namespace looklab::detect
