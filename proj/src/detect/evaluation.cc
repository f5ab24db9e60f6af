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
#include <set>
#include <sstream>

#include "looklab/detect.h"
#include "looklab/errors.h"
#include "looklab/log.h"

namespace looklab::detect {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<MatchFlag> match_detections(const std::vector<Detection>& dets,
                                        const std::vector<GroundTruthBox>& gts,
                                        double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) {
    throw ConfigError("IoU threshold must be in (0, 1]");
  }
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
  std::vector<bool> taken(gts.size(), false);
  std::vector<MatchFlag> flags(dets.size());
  for (size_t di : order) {
    const Detection& d = dets[di];
    double best = -1.0;
    std::optional<size_t> best_gt;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].article_type != d.article_type) continue;
      const double v = iou(d.box, gts[g].box);
      if (v >= iou_thresh && v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt) {
      taken[*best_gt] = true;
      flags[di] = {true, best_gt};
    }
  }
  return flags;
}

double average_precision(const std::vector<ScoredFlag>& ranked, size_t num_gt) {
  if (num_gt == 0) return 0.0;
  std::vector<size_t> order(ranked.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return ranked[a].score > ranked[b].score; });
  std::vector<double> precision(order.size()), recall(order.size());
  size_t tp = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    if (ranked[order[i]].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  // Monotone envelope from the right.
  for (size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0, prev_recall = 0.0;
  for (size_t i = 0; i < order.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

double mean_average_precision(const std::vector<ClassAp>& per_class) {
  double sum = 0.0;
  size_t n = 0;
  for (const ClassAp& c : per_class) {
    if (c.num_gt == 0) continue;
    sum += c.ap;
    ++n;
  }
  if (n == 0) throw ConfigError("no class with ground truth to average");
  return sum / static_cast<double>(n);
}

EvaluationReport evaluate(const std::vector<AnnotatedImage>& gt,
                          const std::vector<ImageDetections>& dets, double iou_thresh,
                          Grouping grouping, const ArticleTaxonomy& taxonomy) {
  std::map<std::string, const std::vector<Detection>*> dets_by_path;
  for (const auto& d : dets) dets_by_path[d.image_path] = &d.detections;
  auto group_of = [&](const std::string& type) -> std::string {
    if (grouping == Grouping::kArticleType) return type;
    return taxonomy.contains(type) ? taxonomy.broad_of(type) : type;
  };

  std::map<std::string, std::vector<ScoredFlag>> flags;
  std::map<std::string, size_t> num_gt;
  std::map<std::string, size_t> num_det;
  std::set<std::string> gt_paths;
  static const std::vector<Detection> kNone;
  for (const AnnotatedImage& img : gt) {
    gt_paths.insert(img.image_path);
    auto it = dets_by_path.find(img.image_path);
    const auto& image_dets = it == dets_by_path.end() ? kNone : *it->second;
    const auto m = match_detections(image_dets, img.boxes, iou_thresh);
    for (const auto& b : img.boxes) ++num_gt[group_of(b.article_type)];
    for (size_t i = 0; i < image_dets.size(); ++i) {
      const std::string g = group_of(image_dets[i].article_type);
      flags[g].push_back({image_dets[i].score, m[i].true_positive});
      ++num_det[g];
    }
  }
  // Detections on images without annotations are false positives.
  for (const auto& d : dets) {
    if (gt_paths.count(d.image_path)) continue;
    for (const auto& det : d.detections) {
      const std::string g = group_of(det.article_type);
      flags[g].push_back({det.score, false});
      ++num_det[g];
    }
  }

  std::set<std::string> names;
  for (const auto& [k, v] : num_gt) names.insert(k);
  for (const auto& [k, v] : num_det) names.insert(k);
  EvaluationReport report;
  for (const std::string& name : names) {
    ClassAp c;
    c.name = name;
    c.num_gt = num_gt[name];
    c.num_det = num_det[name];
    c.ap = average_precision(flags[name], c.num_gt);
    report.per_class.push_back(c);
  }
  report.map = mean_average_precision(report.per_class);
  return report;
}

std::string format_ap_table(const EvaluationReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << "class,num_gt,num_det,ap\n";
  for (const auto& c : report.per_class) {
    os << c.name << ',' << c.num_gt << ',' << c.num_det << ',' << c.ap << '\n';
  }
  os << "mAP,,," << report.map << '\n';
  return os.str();
}

std::vector<Roi> crop_rois(const Image& image, const std::vector<Detection>& dets,
                           double pad_fraction) {
  if (pad_fraction < 0.0) throw ConfigError("pad_fraction must be >= 0");
  std::vector<Roi> rois;
  for (size_t i = 0; i < dets.size(); ++i) {
    const BoundingBox& b = dets[i].box;
    const double px = b.width() * pad_fraction;
    const double py = b.height() * pad_fraction;
    // Small epsilon so that exact integers survive floor/ceil after padding.
    const int x0 = std::max(0, static_cast<int>(std::floor(b.x_min - px + 1e-9)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.y_min - py + 1e-9)));
    const int x1 = std::min(image.width(), static_cast<int>(std::ceil(b.x_max + px - 1e-9)));
    const int y1 = std::min(image.height(), static_cast<int>(std::ceil(b.y_max + py - 1e-9)));
    if (x0 >= x1 || y0 >= y1) {
      log::warning("skipping degenerate ROI for detection " + std::to_string(i) + " (" +
                   dets[i].article_type + ")");
      continue;
    }
    Roi roi;
    roi.detection_index = i;
    roi.article_type = dets[i].article_type;
    roi.padded_box = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1),
                      static_cast<double>(y1)};
    roi.crop = crop(image, x0, y0, x1, y1);
    rois.push_back(std::move(roi));
  }
  return rois;
}

}  // namespace looklab::detect
