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
#include <set>

#include "looklab/errors.h"
#include "looklab/keypoints.h"

namespace looklab::keypoints {

const KeypointSchema& KeypointSchema::coco17() {
  static const KeypointSchema schema{
      {"nose", "left_eye", "right_eye", "left_ear", "right_ear", "left_shoulder",
       "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip",
       "right_hip", "left_knee", "right_knee", "left_ankle", "right_ankle"},
      {"nose", "left_eye", "right_eye", "left_ear", "right_ear"},
      {"left_ankle", "right_ankle"}};
  return schema;
}

KeypointSchema KeypointSchema::from_json(const Json& j) {
  KeypointSchema s{field<std::vector<std::string>>(j, "names"),
                   field<std::vector<std::string>>(j, "head_group"),
                   field<std::vector<std::string>>(j, "ankle_group")};
  s.validate();
  return s;
}

Json KeypointSchema::to_json() const {
  return {{"names", names}, {"head_group", head_group}, {"ankle_group", ankle_group}};
}

void KeypointSchema::validate() const {
  const std::set<std::string> all(names.begin(), names.end());
  if (all.size() != names.size()) throw ValidationError("duplicate keypoint names");
  if (head_group.empty() || ankle_group.empty()) {
    throw ValidationError("head and ankle groups must be non-empty");
  }
  for (const auto& n : head_group) {
    if (!all.count(n)) throw ValidationError("head keypoint '" + n + "' not in schema");
    if (std::find(ankle_group.begin(), ankle_group.end(), n) != ankle_group.end()) {
      throw ValidationError("'" + n + "' is in both head and ankle groups");
    }
  }
  for (const auto& n : ankle_group) {
    if (!all.count(n)) throw ValidationError("ankle keypoint '" + n + "' not in schema");
  }
}

size_t KeypointSchema::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw NotFoundError("no keypoint named '" + name + "'");
  return static_cast<size_t>(it - names.begin());
}

Json to_json(const KeypointSet& kps, const KeypointSchema& schema) {
  if (kps.points.size() != schema.size()) throw DimensionError("keypoint count mismatch");
  Json out = Json::object();
  for (size_t i = 0; i < kps.points.size(); ++i) {
    const auto& p = kps.points[i];
    out[schema.names[i]] = {{"x", p.x}, {"y", p.y}, {"confidence", p.confidence}};
  }
  return out;
}

Heatmap make_target_heatmap(double x, double y, int height, int width, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("heatmap sigma must be > 0");
  if (!(x >= 0.0 && y >= 0.0 && x < width && y < height)) {
    throw OutOfBoundsError("keypoint outside heatmap grid");
  }
  Heatmap h(height, width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double d2 = (c - x) * (c - x) + (r - y) * (r - y);
      h.at(r, c) = static_cast<float>(std::exp(-d2 * inv));
    }
  }
  return h;
}

static void check_shapes(const std::vector<Heatmap>& a, const std::vector<Heatmap>& b) {
  if (a.size() != b.size()) throw DimensionError("heatmap count mismatch");
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k].height != b[k].height || a[k].width != b[k].width) {
      throw DimensionError("heatmap shape mismatch");
    }
  }
}

double heatmap_l2_loss_with_gradient(const std::vector<Heatmap>& predicted,
                                     const std::vector<Heatmap>& target,
                                     std::vector<Heatmap>* grad) {
  check_shapes(predicted, target);
  size_t n = 0;
  for (const auto& h : predicted) n += h.values.size();
  if (n == 0) return 0.0;
  if (grad != nullptr) grad->assign(predicted.begin(), predicted.end());
  double sum = 0.0;
  for (size_t k = 0; k < predicted.size(); ++k) {
    for (size_t i = 0; i < predicted[k].values.size(); ++i) {
      const double d = static_cast<double>(predicted[k].values[i]) - target[k].values[i];
      sum += d * d;
      if (grad != nullptr) (*grad)[k].values[i] = static_cast<float>(2.0 * d / n);
    }
  }
  return sum / static_cast<double>(n);
}

double heatmap_l2_loss(const std::vector<Heatmap>& predicted, const std::vector<Heatmap>& target) {
  return heatmap_l2_loss_with_gradient(predicted, target, nullptr);
}

KeypointSet decode_heatmaps(const std::vector<Heatmap>& heatmaps, double stride_x,
                            double stride_y) {
  KeypointSet out;
  for (const Heatmap& h : heatmaps) {
    int best_r = 0, best_c = 0;
    float best = h.values.empty() ? 0.0f : h.values[0];
    for (int r = 0; r < h.height; ++r) {
      for (int c = 0; c < h.width; ++c) {
        if (h.at(r, c) > best) {
          best = h.at(r, c);
          best_r = r;
          best_c = c;
        }
      }
    }
    out.points.push_back({best_c * stride_x, best_r * stride_y, std::clamp<double>(best, 0.0, 1.0)});
  }
  return out;
}

bool is_full_shot(const KeypointSet& kps, const KeypointSchema& schema, double conf_threshold) {
  if (kps.points.size() != schema.size()) {
    throw DimensionError("keypoint set does not match schema");
  }
  auto conf = [&](const std::string& n) { return kps.points[schema.index_of(n)].confidence; };
  bool head = false;
  for (const auto& n : schema.head_group) head = head || conf(n) >= conf_threshold;
  if (!head) return false;
  for (const auto& n : schema.ankle_group) {
    if (conf(n) < conf_threshold) return false;
  }
  return true;
}

}  // namespace looklab::keypoints
