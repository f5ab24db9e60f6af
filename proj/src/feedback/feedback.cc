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

#include "looklab/feedback.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "looklab/errors.h"
#include "looklab/rng.h"

namespace looklab::feedback {

using detect::AnnotatedImage;
using detect::BoundingBox;
using detect::Detection;

std::string_view reason_name(Reason r) {
  switch (r) {
    case Reason::kLowScore: return "low_score";
    case Reason::kClassDisagreement: return "class_disagreement";
    case Reason::kUserFlag: return "user_flag";
  }
  return "low_score";
}

Reason parse_reason(std::string_view s) {
  for (Reason r : {Reason::kLowScore, Reason::kClassDisagreement, Reason::kUserFlag}) {
    if (reason_name(r) == s) return r;
  }
  throw ValidationError("unknown review reason '" + std::string(s) + "'");
}

std::string_view status_name(Status s) { return s == Status::kPending ? "pending" : "reviewed"; }

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kCorrect: return "correct";
    case Verdict::kWrongClass: return "wrong_class";
    case Verdict::kWrongBox: return "wrong_box";
    case Verdict::kMissedObject: return "missed_object";
  }
  return "correct";
}

Verdict parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::kCorrect, Verdict::kWrongClass, Verdict::kWrongBox, Verdict::kMissedObject}) {
    if (verdict_name(v) == s) return v;
  }
  throw ValidationError("unknown verdict '" + std::string(s) + "'");
}

Json to_json(const ReviewCandidate& c) {
  return {{"candidate_id", c.candidate_id},
          {"image_path", c.image_path},
          {"detection", detect::to_json(c.detection)},
          {"reason", std::string(reason_name(c.reason))},
          {"status", std::string(status_name(c.status))}};
}

ReviewCandidate candidate_from_json(const Json& j) {
  ReviewCandidate c;
  c.candidate_id = field<std::string>(j, "candidate_id");
  c.image_path = field<std::string>(j, "image_path");
  c.detection = detect::detection_from_json(j.at("detection"));
  c.reason = parse_reason(j.value("reason", std::string("low_score")));
  c.status = j.value("status", std::string("pending")) == "reviewed" ? Status::kReviewed : Status::kPending;
  return c;
}

Json to_json(const FeedbackRecord& r) {
  Json j = {{"candidate_id", r.candidate_id},
            {"verdict", std::string(verdict_name(r.verdict))},
            {"tagger_id", r.tagger_id},
            {"timestamp", r.timestamp}};
  j["corrected_label"] = r.corrected_label ? Json(*r.corrected_label) : Json(nullptr);
  j["corrected_box"] = r.corrected_box ? detect::box_to_json(*r.corrected_box) : Json(nullptr);
  return j;
}

FeedbackRecord record_from_json(const Json& j) {
  FeedbackRecord r;
  r.candidate_id = field<std::string>(j, "candidate_id");
  r.verdict = parse_verdict(field<std::string>(j, "verdict"));
  r.tagger_id = j.contains("tagger_id") ? field<std::string>(j, "tagger_id") : std::string();
  r.timestamp = j.contains("timestamp") && !j["timestamp"].is_null() ? field<std::string>(j, "timestamp")
                                                                       : std::string();
  if (j.contains("corrected_label") && !j["corrected_label"].is_null()) {
    r.corrected_label = field<std::string>(j, "corrected_label");
  }
  if (j.contains("corrected_box") && !j["corrected_box"].is_null()) {
    r.corrected_box = detect::box_from_json(j["corrected_box"]);
  }
  return r;
}

void validate(const FeedbackRecord& r) {
  if (r.candidate_id.empty()) throw ValidationError("feedback record needs a candidate_id");
  const bool needs_label = r.verdict == Verdict::kWrongClass || r.verdict == Verdict::kMissedObject;
  const bool needs_box = r.verdict == Verdict::kWrongBox || r.verdict == Verdict::kMissedObject;
  if (needs_label && (!r.corrected_label || r.corrected_label->empty())) {
    throw ValidationError(std::string(verdict_name(r.verdict)) + " requires corrected_label");
  }
  if (needs_box && !r.corrected_box) {
    throw ValidationError(std::string(verdict_name(r.verdict)) + " requires corrected_box");
  }
  if (r.corrected_box && !r.corrected_box->valid()) throw ValidationError("corrected_box is degenerate");
}

std::vector<ReviewCandidate> enqueue_candidates(const std::vector<detect::ImageDetections>& corpus,
                                                double lo, double hi, int budget, Reason reason) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw ConfigError("score band must satisfy 0 <= lo < hi <= 1");
  if (budget < 1) throw ConfigError("budget must be >= 1");
  const double mid = 0.5 * (lo + hi);
  std::vector<ReviewCandidate> out;
  for (const auto& img : corpus) {
    for (size_t i = 0; i < img.detections.size(); ++i) {
      const Detection& d = img.detections[i];
      if (d.score < lo || d.score >= hi) continue;
      out.push_back({img.image_path + "#" + std::to_string(i), img.image_path, d, reason, Status::kPending});
    }
  }
  std::stable_sort(out.begin(), out.end(), [&](const ReviewCandidate& a, const ReviewCandidate& b) {
    return std::abs(a.detection.score - mid) < std::abs(b.detection.score - mid);
  });
  if (out.size() > static_cast<size_t>(budget)) out.resize(static_cast<size_t>(budget));
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json to_json(const StoreStats& s) {
  return {{"pending", s.pending}, {"leased", s.leased}, {"reviewed", s.reviewed},
          {"by_verdict", s.by_verdict}, {"by_tagger", s.by_tagger}};
}

// ------------------------------------------------------------ ReviewStore

namespace {

void append_line(const std::string& path, const Json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot append to " + path);
}

}  // namespace

ReviewStore::ReviewStore(std::string candidates_path, std::string feedback_path, double lease_seconds,
                         Clock clock)
    : candidates_path_(std::move(candidates_path)),
      feedback_path_(std::move(feedback_path)),
      lease_seconds_(lease_seconds),
      clock_(std::move(clock)) {
  if (!(lease_seconds_ > 0.0)) throw ConfigError("lease timeout must be > 0");
}

double ReviewStore::now() const {
  if (clock_) return clock_();
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void ReviewStore::load() {
  std::lock_guard lock(mu_);
  candidates_.clear();
  index_.clear();
  records_.clear();
  leases_.clear();
  if (!candidates_path_.empty() && std::filesystem::exists(candidates_path_)) {
    for (const Json& j : read_jsonl(candidates_path_)) {
      ReviewCandidate c = candidate_from_json(j);
      c.status = Status::kPending;
      if (index_.contains(c.candidate_id)) throw ConflictError("duplicate candidate " + c.candidate_id);
      index_.emplace(c.candidate_id, candidates_.size());
      candidates_.push_back(std::move(c));
    }
  }
  if (!feedback_path_.empty() && std::filesystem::exists(feedback_path_)) {
    for (const Json& j : read_jsonl(feedback_path_)) {
      FeedbackRecord r = record_from_json(j);
      const auto it = index_.find(r.candidate_id);
      if (it == index_.end()) throw NotFoundError("feedback for unknown candidate " + r.candidate_id);
      candidates_[it->second].status = Status::kReviewed;
      records_.push_back(std::move(r));
    }
  }
}

void ReviewStore::add_candidates(const std::vector<ReviewCandidate>& candidates) {
  std::lock_guard lock(mu_);
  std::set<std::string> fresh;
  for (const auto& c : candidates) {
    if (index_.contains(c.candidate_id) || !fresh.insert(c.candidate_id).second) {
      throw ConflictError("candidate " + c.candidate_id + " already queued");
    }
  }
  for (ReviewCandidate c : candidates) {
    c.status = Status::kPending;
    append_line(candidates_path_, to_json(c));
    index_.emplace(c.candidate_id, candidates_.size());
    candidates_.push_back(std::move(c));
  }
}

std::optional<Lease> ReviewStore::lease_next(const std::string& tagger_id) {
  if (tagger_id.empty()) throw ValidationError("tagger id is required");
  std::lock_guard lock(mu_);
  const double t = now();
  for (const auto& c : candidates_) {
    if (c.status != Status::kPending) continue;
    auto it = leases_.find(c.candidate_id);
    if (it != leases_.end() && it->second.tagger_id == tagger_id && it->second.expires_at > t) {
      return it->second;
    }
  }
  for (const auto& c : candidates_) {
    if (c.status != Status::kPending) continue;
    auto it = leases_.find(c.candidate_id);
    if (it != leases_.end() && it->second.expires_at > t) continue;
    Lease l{c, tagger_id, t + lease_seconds_};
    leases_[c.candidate_id] = l;
    return l;
  }
  return std::nullopt;
}

FeedbackRecord ReviewStore::ingest(FeedbackRecord record) {
  validate(record);
  std::lock_guard lock(mu_);
  const auto it = index_.find(record.candidate_id);
  if (it == index_.end()) throw NotFoundError("unknown candidate " + record.candidate_id);
  ReviewCandidate& c = candidates_[it->second];
  if (c.status == Status::kReviewed) throw ConflictError("candidate " + c.candidate_id + " already reviewed");
  const auto lease = leases_.find(record.candidate_id);
  if (lease != leases_.end() && lease->second.expires_at > now() &&
      lease->second.tagger_id != record.tagger_id) {
    throw ConflictError("candidate " + c.candidate_id + " is leased to another tagger");
  }
  if (record.timestamp.empty()) record.timestamp = utc_timestamp();
  append_line(feedback_path_, to_json(record));
  c.status = Status::kReviewed;
  if (lease != leases_.end()) leases_.erase(lease);
  records_.push_back(record);
  return record;
}

std::vector<ReviewCandidate> ReviewStore::candidates() const {
  std::lock_guard lock(mu_);
  return candidates_;
}

std::vector<FeedbackRecord> ReviewStore::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::optional<ReviewCandidate> ReviewStore::find(const std::string& candidate_id) const {
  std::lock_guard lock(mu_);
  const auto it = index_.find(candidate_id);
  if (it == index_.end()) return std::nullopt;
  return candidates_[it->second];
}

StoreStats ReviewStore::stats() const {
  std::lock_guard lock(mu_);
  StoreStats s;
  const double t = now();
  for (const auto& c : candidates_) {
    if (c.status == Status::kReviewed) {
      ++s.reviewed;
    } else if (auto it = leases_.find(c.candidate_id); it != leases_.end() && it->second.expires_at > t) {
      ++s.leased;
    } else {
      ++s.pending;
    }
  }
  for (const auto& r : records_) {
    ++s.by_verdict[std::string(verdict_name(r.verdict))];
    ++s.by_tagger[r.tagger_id];
  }
  return s;
}

// ------------------------------------------------------------ retrain set

std::vector<AnnotatedImage> assemble_retrain_set(const std::vector<AnnotatedImage>& base,
                                                 const std::vector<ReviewCandidate>& candidates,
                                                 const std::vector<FeedbackRecord>& records) {
  std::vector<AnnotatedImage> out = base;
  std::map<std::string, size_t> by_image;
  for (size_t i = 0; i < out.size(); ++i) by_image.emplace(out[i].image_path, i);
  std::map<std::string, const ReviewCandidate*> by_id;
  for (const auto& c : candidates) by_id.emplace(c.candidate_id, &c);

  for (const auto& r : records) {
    const auto cit = by_id.find(r.candidate_id);
    if (cit == by_id.end()) throw NotFoundError("feedback for unknown candidate " + r.candidate_id);
    const ReviewCandidate& c = *cit->second;
    const auto iit = by_image.find(c.image_path);
    if (iit == by_image.end()) throw NotFoundError("correction references unknown image " + c.image_path);
    auto& boxes = out[iit->second].boxes;

    auto tied = [&](bool same_class, double min_iou) -> std::optional<size_t> {
      std::optional<size_t> best;
      double best_iou = 0.0;
      for (size_t i = 0; i < boxes.size(); ++i) {
        if (same_class && boxes[i].article_type != c.detection.article_type) continue;
        const double v = detect::iou(boxes[i].box, c.detection.box);
        if (v >= min_iou && v > 0.0 && (!best || v > best_iou)) {
          best = i;
          best_iou = v;
        }
      }
      return best;
    };

    switch (r.verdict) {
      case Verdict::kCorrect:
        break;
      case Verdict::kWrongClass: {
        if (const auto t = tied(false, 0.5)) {
          boxes[*t].article_type = *r.corrected_label;
        } else {
          boxes.push_back({c.detection.box, *r.corrected_label});
        }
        break;
      }
      case Verdict::kWrongBox: {
        if (const auto t = tied(true, 0.0)) {
          boxes[*t].box = *r.corrected_box;
        } else {
          boxes.push_back({*r.corrected_box, c.detection.article_type});
        }
        break;
      }
      case Verdict::kMissedObject: {
        const detect::GroundTruthBox add{*r.corrected_box, *r.corrected_label};
        if (std::find(boxes.begin(), boxes.end(), add) == boxes.end()) boxes.push_back(add);
        break;
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ AP deltas

namespace {

std::vector<detect::ImageDetections> run_detector(const detect::Detector& det,
                                                  const std::vector<AnnotatedImage>& gt) {
  std::vector<detect::ImageDetections> out;
  for (const auto& a : gt) {
    // Replay detectors key on the path alone; real ones need pixels.
    Image img;
    if (det.info().name != "replay") img = read_image(a.image_path);
    out.push_back({a.image_path, det.detect({a.image_path, img.empty() ? nullptr : &img})});
  }
  return out;
}

}  // namespace

std::vector<ApDelta> compare_ap(const detect::Detector& before, const detect::Detector& after,
                                const std::vector<AnnotatedImage>& eval_gt, double iou_thresh,
                                const detect::ArticleTaxonomy& taxonomy) {
  const auto rb = detect::evaluate(eval_gt, run_detector(before, eval_gt), iou_thresh,
                                   detect::Grouping::kBroadCategory, taxonomy);
  const auto ra = detect::evaluate(eval_gt, run_detector(after, eval_gt), iou_thresh,
                                   detect::Grouping::kBroadCategory, taxonomy);
  std::vector<ApDelta> out;
  for (const auto& b : rb.per_class) {
    ApDelta d{b.name, b.ap, 0.0, 0.0};
    for (const auto& a : ra.per_class) {
      if (a.name == b.name) d.ap_after = a.ap;
    }
    d.delta = d.ap_after - d.ap_before;
    out.push_back(d);
  }
  return out;
}

std::string format_ap_deltas(const std::vector<ApDelta>& rows) {
  std::ostringstream os;
  os << "class,ap_before,ap_after,delta\n" << std::fixed << std::setprecision(6);
  for (const auto& r : rows) os << r.name << ',' << r.ap_before << ',' << r.ap_after << ',' << r.delta << '\n';
  return os.str();
}

// ------------------------------------------------------------ harness

double HarnessReport::final_delta() const {
  if (rounds.empty()) return 0.0;
  for (const auto& d : rounds.back().deltas) {
    if (d.name == noise_broad) return d.delta;
  }
  return 0.0;
}

namespace {

// A "trained" detector that reproduces its label set; scores are fixed per
// box slot so that relabeling changes nothing else.
std::shared_ptr<detect::ReplayDetector> replay_of(const std::vector<AnnotatedImage>& labels,
                                                  const std::vector<std::vector<double>>& scores,
                                                  const std::string& version) {
  std::vector<detect::ImageDetections> recorded;
  for (size_t i = 0; i < labels.size(); ++i) {
    detect::ImageDetections d{labels[i].image_path, {}};
    for (size_t b = 0; b < labels[i].boxes.size(); ++b) {
      const double s = b < scores[i].size() ? scores[i][b] : 1.0;
      d.detections.push_back({labels[i].boxes[b].box, labels[i].boxes[b].article_type, s});
    }
    recorded.push_back(std::move(d));
  }
  return std::make_shared<detect::ReplayDetector>(std::move(recorded), version);
}

}  // namespace

HarnessReport run_noise_harness(const std::vector<AnnotatedImage>& clean,
                                const detect::ArticleTaxonomy& taxonomy, const HarnessConfig& cfg) {
  if (!taxonomy.contains(cfg.noise_class)) throw ConfigError("unknown noise class '" + cfg.noise_class + "'");
  if (!(cfg.noise_rate > 0.0 && cfg.noise_rate <= 1.0)) throw ConfigError("noise_rate must be in (0, 1]");
  if (cfg.rounds < 1) throw ConfigError("rounds must be >= 1");

  std::set<std::string> present;
  for (const auto& a : clean) {
    for (const auto& b : a.boxes) present.insert(b.article_type);
  }
  std::vector<std::string> others;
  for (const auto& t : present) {
    if (t != cfg.noise_class) others.push_back(t);
  }
  if (others.empty()) throw ConfigError("label noise needs a second article type");

  Rng rng(cfg.seed);
  HarnessReport report;
  report.noise_broad = taxonomy.broad_of(cfg.noise_class);
  std::vector<AnnotatedImage> noisy = clean;
  std::vector<std::vector<double>> scores(clean.size());
  for (size_t i = 0; i < noisy.size(); ++i) {
    for (auto& b : noisy[i].boxes) {
      scores[i].push_back(rng.uniform(0.05, 1.0));
      if (b.article_type == cfg.noise_class && rng.bernoulli(cfg.noise_rate)) {
        b.article_type = others[rng.below(others.size())];
        ++report.corrupted;
      }
    }
  }

  const auto before = replay_of(noisy, scores, "noisy");
  ReviewStore store("", "");
  std::vector<AnnotatedImage> labels = noisy;
  for (int round = 1; round <= cfg.rounds; ++round) {
    const auto current = replay_of(labels, scores, "round-" + std::to_string(round - 1));
    std::vector<detect::ImageDetections> corpus;
    for (const auto& a : labels) corpus.push_back({a.image_path, current->detect({a.image_path, nullptr})});
    const size_t total = std::accumulate(corpus.begin(), corpus.end(), size_t{0},
                                         [](size_t n, const auto& c) { return n + c.detections.size(); });
    std::vector<ReviewCandidate> fresh;
    for (auto& c : enqueue_candidates(corpus, cfg.band_lo, cfg.band_hi, static_cast<int>(std::max<size_t>(total, 1)))) {
      if (store.find(c.candidate_id)) continue;
      fresh.push_back(std::move(c));
      if (fresh.size() == static_cast<size_t>(cfg.budget)) break;
    }
    store.add_candidates(fresh);

    HarnessRound hr;
    hr.round = round;
    std::map<std::string, size_t> clean_index;
    for (size_t i = 0; i < clean.size(); ++i) clean_index.emplace(clean[i].image_path, i);
    for (const auto& c : fresh) {
      // Oracle tagger: the clean box with the highest IoU decides.
      const auto& truth = clean[clean_index.at(c.image_path)].boxes;
      const detect::GroundTruthBox* best = nullptr;
      double best_iou = 0.0;
      for (const auto& t : truth) {
        const double v = detect::iou(t.box, c.detection.box);
        if (v > best_iou) {
          best = &t;
          best_iou = v;
        }
      }
      FeedbackRecord r;
      r.candidate_id = c.candidate_id;
      r.tagger_id = "oracle";
      r.timestamp = "round-" + std::to_string(round);
      if (best == nullptr || best_iou < cfg.iou) {
        continue;  // nothing to say about a box with no counterpart
      }
      if (best->article_type != c.detection.article_type) {
        r.verdict = Verdict::kWrongClass;
        r.corrected_label = best->article_type;
        ++hr.corrected;
      }
      store.ingest(r);
      ++hr.reviewed;
    }
    labels = assemble_retrain_set(noisy, store.candidates(), store.records());
    const auto after = replay_of(labels, scores, "round-" + std::to_string(round));
    hr.deltas = compare_ap(*before, *after, clean, cfg.iou, taxonomy);
    report.rounds.push_back(std::move(hr));
  }
  return report;
}

}  // namespace looklab::feedback
