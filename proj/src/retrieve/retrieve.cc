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

#include "looklab/retrieve.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "looklab/binary_io.h"
#include "looklab/errors.h"
#include "looklab/simd/kernels.h"

namespace looklab::retrieve {

std::string_view mode_name(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::kCosine:
      return "cosine";
    case ScoringMode::kEuclidean:
      return "euclidean";
    case ScoringMode::kCombined:
      return "combined";
  }
  return "cosine";
}

ScoringMode parse_mode(std::string_view name) {
  if (name == "cosine" || name == "cos") return ScoringMode::kCosine;
  if (name == "euclidean" || name == "euc") return ScoringMode::kEuclidean;
  if (name == "combined" || name == "ce") return ScoringMode::kCombined;
  throw ConfigError("unknown scoring mode '" + std::string(name) + "'");
}

Json to_json(const RetrievalResult& r) {
  Json ranked = Json::array();
  for (const auto& p : r.ranked) ranked.push_back({{"product_id", p.product_id}, {"score", p.score}});
  return {{"query_ref", r.query_ref}, {"ranked", ranked}};
}

RetrievalResult retrieval_result_from_json(const Json& j) {
  RetrievalResult r;
  r.query_ref = field<std::string>(j, "query_ref");
  for (const Json& p : j.at("ranked")) {
    r.ranked.push_back({field<std::string>(p, "product_id"), field<double>(p, "score")});
  }
  return r;
}

std::map<std::string, std::vector<std::string>> read_relevance(const std::string& path) {
  std::map<std::string, std::vector<std::string>> out;
  for (const Json& row : read_jsonl(path)) {
    const auto q = field<std::string>(row, "query_ref");
    if (!out.emplace(q, field<std::vector<std::string>>(row, "relevant")).second) {
      throw ConflictError("duplicate relevance entry for " + q);
    }
  }
  return out;
}

double cosine_similarity(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw DimensionError("cosine: dimension mismatch");
  const auto& k = simd::kernels();
  const double nx = k.dot_f32_acc64(x.data(), x.data(), x.size());
  const double ny = k.dot_f32_acc64(y.data(), y.data(), y.size());
  if (nx == 0.0 || ny == 0.0) throw UndefinedSimilarityError("cosine of a zero vector");
  const double c = k.dot_f32_acc64(x.data(), y.data(), x.size()) / (std::sqrt(nx) * std::sqrt(ny));
  return std::clamp(c, -1.0, 1.0);
}

// ---------------------------------------------------------------- index

ExactIndex::ExactIndex(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
  std::map<std::string, size_t> dim_by_category;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const CatalogEntry& e = entries_[i];
    if (!by_id_.emplace(e.product_id, i).second) {
      throw ConflictError("duplicate product_id '" + e.product_id + "'");
    }
    if (e.embedding.empty()) throw DimensionError("empty embedding for '" + e.product_id + "'");
    auto [it, inserted] = dim_by_category.emplace(e.broad_category, e.embedding.size());
    if (!inserted && it->second != e.embedding.size()) {
      throw DimensionError("mixed embedding dimensions in category '" + e.broad_category + "'");
    }
    auto& part = partitions_[e.article_type];
    if (part.rows.empty()) part.dim = e.embedding.size();
    if (part.dim != e.embedding.size()) {
      throw DimensionError("mixed embedding dimensions in article type '" + e.article_type + "'");
    }
    part.rows.push_back(i);
  }
  const auto& k = simd::kernels();
  for (auto& [type, part] : partitions_) {
    std::sort(part.rows.begin(), part.rows.end(), [&](size_t a, size_t b) {
      return entries_[a].product_id < entries_[b].product_id;
    });
    part.matrix.reserve(part.rows.size() * part.dim);
    for (size_t r : part.rows) {
      const auto& emb = entries_[r].embedding;
      const double n2 = k.dot_f32_acc64(emb.data(), emb.data(), emb.size());
      if (n2 == 0.0) {
        throw UndefinedSimilarityError("zero-norm embedding for '" + entries_[r].product_id + "'");
      }
      part.norms.push_back(std::sqrt(n2));
      part.matrix.insert(part.matrix.end(), emb.begin(), emb.end());
    }
  }
}

std::vector<double> ExactIndex::scan(const Partition& part, std::span<const float> query,
                                     ScoringMode mode) const {
  const auto& k = simd::kernels();
  const size_t n = part.rows.size();
  std::vector<double> scores(n);
  if (mode == ScoringMode::kCosine) {
    const double nq2 = k.dot_f32_acc64(query.data(), query.data(), query.size());
    if (nq2 == 0.0) throw UndefinedSimilarityError("cosine query is the zero vector");
    const double nq = std::sqrt(nq2);
    for (size_t i = 0; i < n; ++i) {
      const double dot = k.dot_f32_acc64(query.data(), &part.matrix[i * part.dim], part.dim);
      scores[i] = std::clamp(dot / (nq * part.norms[i]), -1.0, 1.0);
    }
  } else if (mode == ScoringMode::kEuclidean) {
    for (size_t i = 0; i < n; ++i) {
      scores[i] = -k.sq_dist_f32_acc64(query.data(), &part.matrix[i * part.dim], part.dim);
    }
  } else {
    // Rows are sorted by product id, so a stable sort on score alone yields
    // the id tie-break.
    auto rank_of = [&](ScoringMode m) {
      const std::vector<double> s = scan(part, query, m);
      std::vector<size_t> order(n);
      std::iota(order.begin(), order.end(), size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return s[a] > s[b]; });
      std::vector<size_t> rank(n);
      for (size_t r = 0; r < n; ++r) rank[order[r]] = r + 1;
      return rank;
    };
    const auto rc = rank_of(ScoringMode::kCosine);
    const auto re = rank_of(ScoringMode::kEuclidean);
    for (size_t i = 0; i < n; ++i) {
      scores[i] = 1.0 / (kRrfConstant + static_cast<double>(rc[i])) +
                  1.0 / (kRrfConstant + static_cast<double>(re[i]));
    }
  }
  return scores;
}

RetrievalResult ExactIndex::top_k(std::span<const float> query, std::string_view article_type,
                                  int k, ScoringMode mode) const {
  if (k < 1) throw ConfigError("k must be >= 1");
  RetrievalResult result;
  auto it = partitions_.find(article_type);
  if (it == partitions_.end() || it->second.rows.empty()) return result;
  const Partition& part = it->second;
  if (query.size() != part.dim) {
    throw DimensionError("query has dimension " + std::to_string(query.size()) + ", index " +
                         std::to_string(part.dim));
  }
  const std::vector<double> scores = scan(part, query, mode);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t take = std::min(order.size(), static_cast<size_t>(k));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](size_t a, size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;  // rows are in product-id order
                    });
  for (size_t i = 0; i < take; ++i) {
    result.ranked.push_back({entries_[part.rows[order[i]]].product_id, scores[order[i]]});
  }
  return result;
}

std::vector<std::string> ExactIndex::article_types() const {
  std::vector<std::string> out;
  for (const auto& [type, part] : partitions_) out.push_back(type);
  return out;
}

size_t ExactIndex::partition_size(std::string_view article_type) const {
  auto it = partitions_.find(article_type);
  return it == partitions_.end() ? 0 : it->second.rows.size();
}

const CatalogEntry* ExactIndex::find(std::string_view product_id) const {
  auto it = by_id_.find(product_id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::shared_ptr<const Index> index_catalog(std::vector<CatalogEntry> entries) {
  return std::make_shared<const ExactIndex>(std::move(entries));
}

// ----------------------------------------------------------- evaluation

std::vector<PrAtK> precision_recall_at_k(
    const std::vector<RetrievalResult>& results,
    const std::map<std::string, std::vector<std::string>>& relevance, const std::vector<int>& ks) {
  std::vector<PrAtK> out;
  for (int k : ks) {
    if (k < 1) throw ConfigError("K must be >= 1");
    double p_sum = 0.0, r_sum = 0.0;
    size_t r_count = 0;
    for (const RetrievalResult& res : results) {
      auto it = relevance.find(res.query_ref);
      if (it == relevance.end()) {
        throw NotFoundError("no relevance set for query '" + res.query_ref + "'");
      }
      const auto& rel = it->second;
      size_t hits = 0;
      const size_t depth = std::min(res.ranked.size(), static_cast<size_t>(k));
      for (size_t i = 0; i < depth; ++i) {
        if (std::find(rel.begin(), rel.end(), res.ranked[i].product_id) != rel.end()) ++hits;
      }
      p_sum += static_cast<double>(hits) / k;
      if (!rel.empty()) {
        r_sum += static_cast<double>(hits) / static_cast<double>(rel.size());
        ++r_count;
      }
    }
    PrAtK row;
    row.k = k;
    row.precision = results.empty() ? 0.0 : p_sum / static_cast<double>(results.size());
    row.recall = r_count == 0 ? 0.0 : r_sum / static_cast<double>(r_count);
    out.push_back(row);
  }
  return out;
}

std::string format_metric_grid(const std::string& method, const std::vector<PrAtK>& rows) {
  std::ostringstream os;
  os << "method";
  for (const auto& r : rows) os << ",P@" << r.k << ",R@" << r.k;
  os << '\n' << method;
  os.setf(std::ios::fixed);
  os.precision(6);
  for (const auto& r : rows) os << ',' << r.precision << ',' << r.recall;
  os << '\n';
  return os.str();
}

// ------------------------------------------------------ embeddings file

namespace {
constexpr char kCatalogMagic[8] = {'L', 'L', 'C', 'A', 'T', 'E', 'M', 'B'};
}

void write_catalog_embeddings(const std::string& path, const CatalogFileHeader& header,
                              const std::vector<CatalogEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(kCatalogMagic, sizeof kCatalogMagic);
  const Json h = {{"model_version", header.model_version},
                  {"category", header.category},
                  {"count", entries.size()}};
  bin::write_string(out, h.dump());
  for (const CatalogEntry& e : entries) {
    bin::write_string(out, e.product_id);
    bin::write_string(out, e.article_type);
    bin::write_u32(out, static_cast<uint32_t>(e.embedding.size()));
    bin::write_f32s(out, e.embedding.data(), e.embedding.size());
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

std::vector<CatalogEntry> read_catalog_embeddings(const std::string& path,
                                                  CatalogFileHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open '" + path + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCatalogMagic, 8) != 0) {
    throw DecodeError("'" + path + "' is not a catalog embeddings file");
  }
  Json h;
  try {
    h = Json::parse(bin::read_string(in));
  } catch (const Json::exception& e) {
    throw DecodeError(path + ": bad header: " + e.what());
  }
  CatalogFileHeader parsed{h.value("model_version", ""), h.value("category", "")};
  const size_t count = h.value("count", size_t{0});
  std::vector<CatalogEntry> entries;
  entries.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    CatalogEntry e;
    e.product_id = bin::read_string(in, 4096);
    e.article_type = bin::read_string(in, 4096);
    e.broad_category = parsed.category;
    const uint32_t d = bin::read_u32(in);
    if (d == 0 || d > (1u << 20)) throw DecodeError(path + ": bad embedding dimension");
    e.embedding = bin::read_f32s(in, d);
    entries.push_back(std::move(e));
  }
  if (header != nullptr) *header = parsed;
  return entries;
}

}  // namespace looklab::retrieve
