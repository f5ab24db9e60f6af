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

#ifndef LOOKLAB_RETRIEVE_H_
#define LOOKLAB_RETRIEVE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "looklab/jsonl.h"

namespace looklab::retrieve {

using EmbeddingVector = std::vector<float>;

struct CatalogEntry {
  std::string product_id;
  std::string article_type;
  std::string broad_category;
  EmbeddingVector embedding;
  std::map<std::string, std::string> metadata;
};

enum class ScoringMode { kCosine, kEuclidean, kCombined };

std::string_view mode_name(ScoringMode mode);
ScoringMode parse_mode(std::string_view name);

struct ScoredProduct {
  std::string product_id;
  double score = 0.0;  // higher is better in every mode
  friend bool operator==(const ScoredProduct&, const ScoredProduct&) = default;
};

struct RetrievalResult {
  std::string query_ref;
  std::vector<ScoredProduct> ranked;
  friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

Json to_json(const RetrievalResult& r);
RetrievalResult retrieval_result_from_json(const Json& j);

// Reciprocal-rank fusion constant for the combined mode.
inline constexpr double kRrfConstant = 60.0;
inline constexpr int kDefaultK = 14;

// Clamped to [-1, 1]. Throws UndefinedSimilarityError for a zero vector.
double cosine_similarity(std::span<const float> x, std::span<const float> y);

// Nearest-neighbour index over catalog embeddings, partitioned by article
// type. Implementations are immutable once built and safe to query
// concurrently.
class Index {
 public:
  virtual ~Index() = default;

  // Exact top-k within the article type's partition. Ties break by
  // product_id ascending. Unknown/empty partition -> empty result.
  virtual RetrievalResult top_k(std::span<const float> query, std::string_view article_type,
                                int k, ScoringMode mode) const = 0;

  virtual size_t size() const = 0;
  virtual std::vector<std::string> article_types() const = 0;
  virtual size_t partition_size(std::string_view article_type) const = 0;
  // Entry lookup by product id; nullptr when absent.
  virtual const CatalogEntry* find(std::string_view product_id) const = 0;
};

// Brute-force scan; the shipped backend.
class ExactIndex : public Index {
 public:
  // Throws ConflictError on duplicate product ids, DimensionError when
  // embeddings within one broad category differ in length, and
  // UndefinedSimilarityError for zero-norm embeddings.
  explicit ExactIndex(std::vector<CatalogEntry> entries);

  RetrievalResult top_k(std::span<const float> query, std::string_view article_type, int k,
                        ScoringMode mode) const override;
  size_t size() const override { return entries_.size(); }
  std::vector<std::string> article_types() const override;
  size_t partition_size(std::string_view article_type) const override;
  const CatalogEntry* find(std::string_view product_id) const override;

  const std::vector<CatalogEntry>& entries() const { return entries_; }

 private:
  struct Partition {
    size_t dim = 0;
    std::vector<size_t> rows;    // indices into entries_, sorted by product id
    std::vector<float> matrix;   // rows.size() x dim
    std::vector<double> norms;
  };

  // Scores in the partition's row order, higher is better.
  std::vector<double> scan(const Partition& part, std::span<const float> query,
                           ScoringMode mode) const;

  std::vector<CatalogEntry> entries_;
  std::map<std::string, Partition, std::less<>> partitions_;
  std::map<std::string, size_t, std::less<>> by_id_;
};

std::shared_ptr<const Index> index_catalog(std::vector<CatalogEntry> entries);

struct PrAtK {
  int k = 0;
  double precision = 0.0;
  double recall = 0.0;
};

// Macro average over queries. Queries with an empty relevant set count as
// P@K = 0 and are left out of the R@K mean. Throws NotFoundError when a
// result's query has no relevance entry.
std::vector<PrAtK> precision_recall_at_k(
    const std::vector<RetrievalResult>& results,
    const std::map<std::string, std::vector<std::string>>& relevance, const std::vector<int>& ks);

// JSONL rows {query_ref, relevant: [product_id, ...]}. Throws ConflictError
// on a repeated query_ref.
std::map<std::string, std::vector<std::string>> read_relevance(const std::string& path);

// CSV with header "method,P@3,R@3,..." and one row.
std::string format_metric_grid(const std::string& method, const std::vector<PrAtK>& rows);

// Catalog embeddings file: magic "LLCATEMB", uint32 header length, JSON
// header ({"model_version", "category", "count"}), then per record: product_id
// and article_type as (uint32 length, bytes), uint32 d, float32 x d, all
// little-endian.
struct CatalogFileHeader {
  std::string model_version;
  std::string category;
};

void write_catalog_embeddings(const std::string& path, const CatalogFileHeader& header,
                              const std::vector<CatalogEntry>& entries);
std::vector<CatalogEntry> read_catalog_embeddings(const std::string& path,
                                                  CatalogFileHeader* header = nullptr);

}  // namespace looklab::retrieve

#endif  // LOOKLAB_RETRIEVE_H_
