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

#include <fstream>
#include <map>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "looklab/errors.h"
#include "looklab/retrieve.h"
#include "looklab/rng.h"

namespace looklab::retrieve {
namespace {

CatalogEntry entry(std::string id, std::string type, EmbeddingVector v,
                   std::string broad = "Topwear") {
  return {std::move(id), std::move(type), std::move(broad), std::move(v), {}};
}

std::vector<CatalogEntry> random_entries(Rng& rng, size_t n, size_t d, const std::string& type,
                                         double dup_fraction = 0.0) {
  std::vector<CatalogEntry> out;
  for (size_t i = 0; i < n; ++i) {
    EmbeddingVector v(d);
    if (i > 0 && rng.bernoulli(dup_fraction)) {
      v = out[rng.below(out.size())].embedding;
    } else {
      for (float& x : v) x = static_cast<float>(rng.normal());
    }
    char id[32];
    std::snprintf(id, sizeof id, "p%05zu", (i * 7919) % n);
    out.push_back(entry(id, type, v));
  }
  return out;
}

// Exhaustive-scan oracle in plain loops.
std::vector<ScoredProduct> oracle_top_k(const std::vector<CatalogEntry>& entries,
                                        const EmbeddingVector& q, const std::string& type,
                                        int k, ScoringMode mode) {
  struct Row {
    std::string id;
    double cos, neg_dist, score;
  };
  std::vector<Row> rows;
  double qn = 0;
  for (float x : q) qn += static_cast<double>(x) * x;
  qn = std::sqrt(qn);
  for (const auto& e : entries) {
    if (e.article_type != type) continue;
    double dot = 0, en = 0, dist = 0;
    for (size_t i = 0; i < q.size(); ++i) {
      dot += static_cast<double>(q[i]) * e.embedding[i];
      en += static_cast<double>(e.embedding[i]) * e.embedding[i];
      const double diff = static_cast<double>(q[i]) - e.embedding[i];
      dist += diff * diff;
    }
    rows.push_back({e.product_id, std::clamp(dot / (qn * std::sqrt(en)), -1.0, 1.0), -dist, 0});
  }
  auto by = [&](auto key) {
    std::vector<Row> r = rows;
    std::sort(r.begin(), r.end(), [&](const Row& a, const Row& b) {
      return key(a) != key(b) ? key(a) > key(b) : a.id < b.id;
    });
    return r;
  };
  std::vector<Row> ranked;
  if (mode == ScoringMode::kCosine) {
    ranked = by([](const Row& r) { return r.cos; });
    for (auto& r : ranked) r.score = r.cos;
  } else if (mode == ScoringMode::kEuclidean) {
    ranked = by([](const Row& r) { return r.neg_dist; });
    for (auto& r : ranked) r.score = r.neg_dist;
  } else {
    const auto rc = by([](const Row& r) { return r.cos; });
    const auto re = by([](const Row& r) { return r.neg_dist; });
    for (auto& row : rows) {
      size_t a = 0, b = 0;
      while (rc[a].id != row.id) ++a;
      while (re[b].id != row.id) ++b;
      row.score = 1.0 / (60.0 + (a + 1)) + 1.0 / (60.0 + (b + 1));
    }
    ranked = by([](const Row& r) { return r.score; });
  }
  std::vector<ScoredProduct> out;
  for (int i = 0; i < k && i < static_cast<int>(ranked.size()); ++i) {
    out.push_back({ranked[i].id, ranked[i].score});
  }
  return out;
}

std::vector<std::string> ids(const std::vector<ScoredProduct>& v) {
  std::vector<std::string> out;
  for (const auto& p : v) out.push_back(p.product_id);
  return out;
}

TEST(CosineSimilarity, Examples) {
  EXPECT_DOUBLE_EQ(cosine_similarity(EmbeddingVector{1, 0}, EmbeddingVector{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(EmbeddingVector{1, 0}, EmbeddingVector{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(EmbeddingVector{1, 1}, EmbeddingVector{1, 0}), 0.70711, 1e-5);
  EXPECT_THROW(cosine_similarity(EmbeddingVector{0, 0}, EmbeddingVector{1, 0}),
               UndefinedSimilarityError);
}

TEST(IndexCatalog, EmptyIndexReturnsEmpty) {
  const auto idx = index_catalog({});
  EXPECT_EQ(idx->size(), 0u);
  EXPECT_TRUE(idx->top_k(EmbeddingVector{1, 0}, "Shirts", 5, ScoringMode::kCosine).ranked.empty());
}

TEST(IndexCatalog, SelfQueryIsNearest) {
  Rng rng(12);
  auto entries = random_entries(rng, 1000, 64, "Shirts");
  const auto idx = index_catalog(entries);
  for (const auto& e : entries) {
    const auto r = idx->top_k(e.embedding, "Shirts", 1, ScoringMode::kCosine);
    ASSERT_EQ(r.ranked.size(), 1u);
    EXPECT_EQ(r.ranked[0].product_id, e.product_id);
  }
}

TEST(IndexCatalog, RejectsBadInput) {
  EXPECT_THROW(index_catalog({entry("a", "Shirts", {1, 0}), entry("a", "Shirts", {0, 1})}),
               ConflictError);
  EXPECT_THROW(index_catalog({entry("a", "Shirts", {1, 0}), entry("b", "T-shirts", {0, 1, 1})}),
               DimensionError);
  const auto idx = index_catalog({entry("a", "Shirts", {1, 0})});
  EXPECT_THROW(idx->top_k(EmbeddingVector{1, 0, 0}, "Shirts", 3, ScoringMode::kCosine),
               DimensionError);
  EXPECT_THROW(idx->top_k(EmbeddingVector{1, 0}, "Shirts", 0, ScoringMode::kCosine), ConfigError);
}

TEST(TopK, SmallExamples) {
  const auto idx = index_catalog({entry("b", "Shirts", {1, 0}), entry("a", "Shirts", {0, 1}),
                                  entry("c", "Jeans", {1, 1})});
  auto r = idx->top_k(EmbeddingVector{0, 1}, "Shirts", 1, ScoringMode::kCosine);
  EXPECT_EQ(ids(r.ranked), std::vector<std::string>{"a"});
  r = idx->top_k(EmbeddingVector{1, 1}, "Shirts", 10, ScoringMode::kEuclidean);
  // Equal distances: tie broken by product id.
  EXPECT_EQ(ids(r.ranked), (std::vector<std::string>{"a", "b"}));
  r = idx->top_k(EmbeddingVector{1, 1}, "Jeans", 5, ScoringMode::kCombined);
  EXPECT_EQ(ids(r.ranked), std::vector<std::string>{"c"});
}

TEST(TopK, MatchesExhaustiveOracleInAllModes) {
  Rng rng(2024);
  auto entries = random_entries(rng, 50, 16, "Shirts", 0.1);
  auto more = random_entries(rng, 30, 16, "Jeans");
  for (auto& e : more) e.product_id = "j" + e.product_id;
  entries.insert(entries.end(), more.begin(), more.end());
  const auto idx = index_catalog(entries);
  for (int q = 0; q < 20; ++q) {
    EmbeddingVector query(16);
    for (float& x : query) x = static_cast<float>(rng.normal());
    for (ScoringMode mode : {ScoringMode::kCosine, ScoringMode::kEuclidean, ScoringMode::kCombined}) {
      for (int k : {1, 5, 14, 80}) {
        const auto got = idx->top_k(query, "Shirts", k, mode);
        const auto want = oracle_top_k(entries, query, "Shirts", k, mode);
        ASSERT_EQ(ids(got.ranked), ids(want)) << mode_name(mode) << " k=" << k;
        for (size_t i = 0; i < want.size(); ++i) {
          EXPECT_NEAR(got.ranked[i].score, want[i].score, 1e-12);
        }
      }
    }
  }
}

TEST(TopK, CosineRankingScaleInvariant) {
  Rng rng(8);
  const auto entries = random_entries(rng, 200, 32, "Shirts");
  const auto idx = index_catalog(entries);
  for (int q = 0; q < 10; ++q) {
    EmbeddingVector query(32);
    for (float& x : query) x = static_cast<float>(rng.normal());
    EmbeddingVector scaled = query;
    for (float& x : scaled) x *= 4.0f;  // power of two: exact in float
    EXPECT_EQ(ids(idx->top_k(query, "Shirts", 20, ScoringMode::kCosine).ranked),
              ids(idx->top_k(scaled, "Shirts", 20, ScoringMode::kCosine).ranked));
  }
}

TEST(TopK, EuclideanMatchesCosineOnEqualNorms) {
  Rng rng(10);
  auto entries = random_entries(rng, 300, 24, "Shirts");
  auto normalize = [](EmbeddingVector& v) {
    double n = 0;
    for (float x : v) n += static_cast<double>(x) * x;
    for (float& x : v) x = static_cast<float>(x / std::sqrt(n));
  };
  for (auto& e : entries) normalize(e.embedding);
  const auto idx = index_catalog(entries);
  for (int q = 0; q < 10; ++q) {
    EmbeddingVector query(24);
    for (float& x : query) x = static_cast<float>(rng.normal());
    normalize(query);
    EXPECT_EQ(ids(idx->top_k(query, "Shirts", 25, ScoringMode::kCosine).ranked),
              ids(idx->top_k(query, "Shirts", 25, ScoringMode::kEuclidean).ranked));
  }
}

TEST(CombinedScoreRank, ConsistentItemBeatsSplitItem) {
  // Five items on a line; "split" is nearest in angle but farthest in
  // distance, "steady" is second in both.
  const auto idx = index_catalog({entry("split", "T", {10, 0.5}), entry("steady", "T", {1.05, 0.3}),
                                  entry("best", "T", {1, 0.1}), entry("d", "T", {1, 2}),
                                  entry("e", "T", {1, 3})});
  const EmbeddingVector q{1, 0.05f};
  const auto cos = idx->top_k(q, "T", 5, ScoringMode::kCosine);
  const auto euc = idx->top_k(q, "T", 5, ScoringMode::kEuclidean);
  ASSERT_EQ(cos.ranked[0].product_id, "split");
  ASSERT_EQ(euc.ranked[4].product_id, "split");
  ASSERT_EQ(cos.ranked[2].product_id, "steady");
  ASSERT_EQ(euc.ranked[1].product_id, "steady");
  const auto fused = idx->top_k(q, "T", 5, ScoringMode::kCombined);
  // Hand values: split 1/61 + 1/65, steady 1/63 + 1/62.
  const double split = 1.0 / 61 + 1.0 / 65, steady = 1.0 / 63 + 1.0 / 62;
  ASSERT_GT(steady, split);
  std::map<std::string, double> score;
  for (const auto& p : fused.ranked) score[p.product_id] = p.score;
  EXPECT_DOUBLE_EQ(score["split"], split);
  EXPECT_DOUBLE_EQ(score["steady"], steady);
}

TEST(CombinedScoreRank, IdenticalRankingsAndSingleton) {
  const auto single = index_catalog({entry("x", "T", {1, 2})});
  EXPECT_EQ(ids(single->top_k(EmbeddingVector{3, 1}, "T", 5, ScoringMode::kCombined).ranked),
            std::vector<std::string>{"x"});
  // Unit-norm entries: cosine and euclidean agree, so fusion agrees too.
  const auto idx = index_catalog({entry("a", "T", {1, 0}), entry("b", "T", {0.6f, 0.8f}),
                                  entry("c", "T", {0, 1})});
  const EmbeddingVector q{1, 0};
  EXPECT_EQ(ids(idx->top_k(q, "T", 3, ScoringMode::kCombined).ranked),
            ids(idx->top_k(q, "T", 3, ScoringMode::kCosine).ranked));
}

TEST(PrecisionRecallAtK, Examples) {
  RetrievalResult r{"q1", {{"a", 1}, {"x", 1}, {"b", 1}, {"y", 1}, {"z", 1}}};
  std::map<std::string, std::vector<std::string>> rel{{"q1", {"a", "b", "c", "d"}}};
  auto rows = precision_recall_at_k({r}, rel, {5});
  EXPECT_DOUBLE_EQ(rows[0].precision, 0.4);
  EXPECT_DOUBLE_EQ(rows[0].recall, 0.5);

  RetrievalResult first{"q2", {{"a", 1}, {"b", 1}, {"x", 1}, {"y", 1}}};
  std::map<std::string, std::vector<std::string>> rel2{{"q2", {"a", "b"}}};
  rows = precision_recall_at_k({first}, rel2, {1, 2, 3});
  EXPECT_DOUBLE_EQ(rows[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(rows[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(rows[2].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rows[2].recall, 1.0);

  EXPECT_THROW(precision_recall_at_k({RetrievalResult{"missing", {}}}, rel, {3}), NotFoundError);
}

TEST(PrecisionRecallAtK, MatchesIndependentTallyAndCountsAreIntegral) {
  Rng rng(55);
  std::vector<RetrievalResult> results;
  std::map<std::string, std::vector<std::string>> rel;
  for (int q = 0; q < 10; ++q) {
    RetrievalResult r{"q" + std::to_string(q), {}};
    for (int i = 0; i < 14; ++i) r.ranked.push_back({"p" + std::to_string(rng.below(30)), 0});
    std::vector<std::string> relevant;
    const int nrel = q == 3 ? 0 : 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < nrel; ++i) relevant.push_back("p" + std::to_string(i * 4 + q % 4));
    rel[r.query_ref] = relevant;
    results.push_back(r);
  }
  const std::vector<int> ks{3, 5, 10, 14};
  const auto rows = precision_recall_at_k(results, rel, ks);
  for (size_t ki = 0; ki < ks.size(); ++ki) {
    const int k = ks[ki];
    double p = 0, rsum = 0;
    int rq = 0;
    for (const auto& r : results) {
      const auto& relevant = rel[r.query_ref];
      int hits = 0;
      for (int i = 0; i < k; ++i) {
        for (const auto& id : relevant) hits += r.ranked[i].product_id == id;
      }
      const double pq = hits / static_cast<double>(k);
      EXPECT_DOUBLE_EQ(pq * k, std::round(pq * k));
      p += pq;
      if (!relevant.empty()) {
        rsum += hits / static_cast<double>(relevant.size());
        ++rq;
      }
    }
    EXPECT_NEAR(rows[ki].precision, p / 10.0, 1e-12);
    EXPECT_NEAR(rows[ki].recall, rsum / rq, 1e-12);
  }
  const std::string csv = format_metric_grid("ours", rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,P@3,R@3,P@5,R@5,P@10,R@10,P@14,R@14");
}

TEST(CatalogEmbeddingsFile, RoundTripAndRejectsGarbage) {
  Rng rng(3);
  auto entries = random_entries(rng, 20, 8, "Shirts");
  const std::string path = ::testing::TempDir() + "/cat.bin";
  write_catalog_embeddings(path, {"v1", "Topwear"}, entries);
  CatalogFileHeader h;
  const auto back = read_catalog_embeddings(path, &h);
  EXPECT_EQ(h.model_version, "v1");
  EXPECT_EQ(h.category, "Topwear");
  ASSERT_EQ(back.size(), entries.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].product_id, entries[i].product_id);
    EXPECT_EQ(back[i].embedding, entries[i].embedding);
  }
  std::ofstream(path) << "nope";
  EXPECT_THROW(read_catalog_embeddings(path), DecodeError);
}

TEST(RetrievalResultJson, RoundTrip) {
  RetrievalResult r{"crop-1", {{"a", 0.5}, {"b", 0.25}}};
  EXPECT_EQ(retrieval_result_from_json(to_json(r)), r);
}

}  // namespace
}  // namespace looklab::retrieve
