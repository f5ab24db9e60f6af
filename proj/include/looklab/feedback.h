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

#ifndef LOOKLAB_FEEDBACK_H_
#define LOOKLAB_FEEDBACK_H_

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "looklab/detect.h"
#include "looklab/jsonl.h"

namespace looklab::feedback {

enum class Reason { kLowScore, kClassDisagreement, kUserFlag };
enum class Status { kPending, kReviewed };
enum class Verdict { kCorrect, kWrongClass, kWrongBox, kMissedObject };

std::string_view reason_name(Reason r);
Reason parse_reason(std::string_view s);
std::string_view status_name(Status s);
std::string_view verdict_name(Verdict v);
Verdict parse_verdict(std::string_view s);  // throws ValidationError

struct ReviewCandidate {
  std::string candidate_id;
  std::string image_path;
  detect::Detection detection;
  Reason reason = Reason::kLowScore;
  Status status = Status::kPending;
  friend bool operator==(const ReviewCandidate&, const ReviewCandidate&) = default;
};

// wrong_class needs corrected_label; wrong_box needs corrected_box;
// missed_object needs both (the box to add and its label).
struct FeedbackRecord {
  std::string candidate_id;
  Verdict verdict = Verdict::kCorrect;
  std::optional<std::string> corrected_label;
  std::optional<detect::BoundingBox> corrected_box;
  std::string tagger_id;
  std::string timestamp;  // ISO 8601, UTC
  friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

Json to_json(const ReviewCandidate& c);
ReviewCandidate candidate_from_json(const Json& j);
Json to_json(const FeedbackRecord& r);
FeedbackRecord record_from_json(const Json& j);

// Throws ValidationError when the verdict's required fields are missing or
// the corrected box is invalid.
void validate(const FeedbackRecord& r);

// Detections with score in [lo, hi), ranked by |score - (lo + hi) / 2|
// ascending (stable on corpus order), truncated to `budget`. Candidate ids
// are "<image_path>#<detection index>". Throws ConfigError unless
// 0 <= lo < hi <= 1 and budget >= 1.
std::vector<ReviewCandidate> enqueue_candidates(const std::vector<detect::ImageDetections>& corpus,
                                                double lo, double hi, int budget,
                                                Reason reason = Reason::kLowScore);

std::string utc_timestamp();

struct Lease {
  ReviewCandidate candidate;
  std::string tagger_id;
  double expires_at = 0.0;  // clock seconds
};

struct StoreStats {
  size_t pending = 0;
  size_t leased = 0;
  size_t reviewed = 0;
  std::map<std::string, size_t> by_verdict;
  std::map<std::string, size_t> by_tagger;
};

Json to_json(const StoreStats& s);

// Review queue plus the append-only verdict log. Candidates and records are
// persisted as JSONL when paths are given (empty path = memory only).
// Thread-safe.
class ReviewStore {
 public:
  using Clock = std::function<double()>;

  ReviewStore(std::string candidates_path, std::string feedback_path, double lease_seconds = 300.0,
              Clock clock = {});

  // Reloads both files; records mark their candidates reviewed.
  void load();

  // Throws ConflictError on a duplicate candidate id.
  void add_candidates(const std::vector<ReviewCandidate>& candidates);

  // Next pending candidate not leased to someone else (a tagger's own live
  // lease is returned again). nullopt when none is available.
  std::optional<Lease> lease_next(const std::string& tagger_id);

  // Throws NotFoundError for an unknown candidate, ConflictError when it is
  // already reviewed or leased to another tagger, ValidationError on a bad
  // record. Fills an empty timestamp.
  FeedbackRecord ingest(FeedbackRecord record);

  std::vector<ReviewCandidate> candidates() const;
  std::vector<FeedbackRecord> records() const;
  std::optional<ReviewCandidate> find(const std::string& candidate_id) const;
  StoreStats stats() const;
  double lease_seconds() const { return lease_seconds_; }

 private:
  double now() const;

  std::string candidates_path_;
  std::string feedback_path_;
  double lease_seconds_;
  Clock clock_;
  mutable std::mutex mu_;
  std::vector<ReviewCandidate> candidates_;
  std::map<std::string, size_t, std::less<>> index_;
  std::vector<FeedbackRecord> records_;
  std::map<std::string, Lease, std::less<>> leases_;
};

// Applies verdicts in record order. The candidate's detection is tied to
// the base box of its image with the highest IoU (ties: lowest index;
// wrong_class needs IoU >= 0.5, wrong_box needs IoU > 0 and the same class).
//   correct        no change
//   wrong_class    relabels the tied box, or adds the detection box
//   wrong_box      moves the tied box, or adds the corrected box
//   missed_object  adds the box unless an identical one exists
// Throws NotFoundError for records whose candidate or image is unknown.
std::vector<detect::AnnotatedImage> assemble_retrain_set(
    const std::vector<detect::AnnotatedImage>& base, const std::vector<ReviewCandidate>& candidates,
    const std::vector<FeedbackRecord>& records);

struct ApDelta {
  std::string name;
  double ap_before = 0.0;
  double ap_after = 0.0;
  double delta = 0.0;
};

// Per broad category.
std::vector<ApDelta> compare_ap(const detect::Detector& before, const detect::Detector& after,
                                const std::vector<detect::AnnotatedImage>& eval_gt,
                                double iou_thresh, const detect::ArticleTaxonomy& taxonomy);
// CSV: "class,ap_before,ap_after,delta".
std::string format_ap_deltas(const std::vector<ApDelta>& rows);

// Label-noise experiment: a detector that reproduces its training labels
// is trained on labels where `noise_rate` of `noise_class` boxes carry a
// wrong type. Each round queues its uncertain detections, an oracle tagger
// reviews them against the clean labels, and the corrected set is replayed.
struct HarnessConfig {
  std::string noise_class;
  double noise_rate = 0.2;
  double band_lo = 0.3;
  double band_hi = 0.8;
  int budget = 50;
  int rounds = 1;
  double iou = 0.5;
  uint64_t seed = 1;
};

struct HarnessRound {
  int round = 0;
  size_t reviewed = 0;
  size_t corrected = 0;
  std::vector<ApDelta> deltas;  // against the noisy starting point
};

struct HarnessReport {
  size_t corrupted = 0;
  std::string noise_broad;
  std::vector<HarnessRound> rounds;
  // Delta on the corrupted class's broad category after the last round.
  double final_delta() const;
};

HarnessReport run_noise_harness(const std::vector<detect::AnnotatedImage>& clean,
                                const detect::ArticleTaxonomy& taxonomy, const HarnessConfig& cfg);

}  // namespace looklab::feedback

#endif  // LOOKLAB_FEEDBACK_H_
