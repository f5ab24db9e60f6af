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

#include "looklab/embed/triplets.h"

#include <map>
#include <set>

#include "looklab/errors.h"
#include "looklab/jsonl.h"
#include "looklab/log.h"
#include "looklab/rng.h"

namespace looklab::embed {

TripletBuildResult build_triplets(const std::vector<ImagePair>& pairs, uint64_t seed) {
  // article type -> garment -> distinct catalog paths, in first-seen order.
  std::map<std::string, std::vector<std::string>> garments_by_type;
  std::map<std::string, std::vector<std::string>> catalog_by_garment;
  std::set<std::pair<std::string, std::string>> seen_catalog;
  for (const ImagePair& p : pairs) {
    auto& garments = garments_by_type[p.article_type];
    if (catalog_by_garment.find(p.garment_id) == catalog_by_garment.end()) {
      garments.push_back(p.garment_id);
    }
    if (seen_catalog.insert({p.garment_id, p.catalog_path}).second) {
      catalog_by_garment[p.garment_id].push_back(p.catalog_path);
    }
  }

  TripletBuildResult result;
  std::set<std::string> warned;
  Rng rng(seed);
  for (const ImagePair& p : pairs) {
    const auto& garments = garments_by_type[p.article_type];
    if (garments.size() < 2) {
      ++result.skipped_pairs;
      if (warned.insert(p.article_type).second) {
        result.warnings.push_back("article type '" + p.article_type +
                                  "' has a single garment; its pairs are skipped");
        log::warning(result.warnings.back());
      }
      continue;
    }
    // Uniform over the other garments: draw an index among n-1 and skip self.
    size_t self = 0;
    while (garments[self] != p.garment_id) ++self;
    size_t pick = static_cast<size_t>(rng.below(garments.size() - 1));
    if (pick >= self) ++pick;
    const std::string& neg_garment = garments[pick];
    const auto& neg_paths = catalog_by_garment[neg_garment];
    const std::string& neg_path = neg_paths[rng.below(neg_paths.size())];
    result.triplets.push_back(Triplet{{p.wild_path, p.garment_id, p.article_type},
                                      {p.catalog_path, p.garment_id, p.article_type},
                                      {neg_path, neg_garment, p.article_type}});
  }
  return result;
}

std::vector<ImagePair> read_pairs_manifest(const std::string& path) {
  std::vector<ImagePair> pairs;
  for (const Json& row : read_jsonl(path)) {
    try {
      pairs.push_back({resolve_relative(path, field<std::string>(row, "wild_path")),
                       resolve_relative(path, field<std::string>(row, "catalog_path")),
                       field<std::string>(row, "garment_id"),
                       field<std::string>(row, "article_type")});
    } catch (const std::exception& e) {
      throw DecodeError(path + ": " + e.what());
    }
  }
  return pairs;
}

void write_pairs_manifest(const std::string& path, const std::vector<ImagePair>& pairs) {
  std::vector<Json> rows;
  for (const ImagePair& p : pairs) {
    rows.push_back({{"wild_path", p.wild_path},
                    {"catalog_path", p.catalog_path},
                    {"garment_id", p.garment_id},
                    {"article_type", p.article_type}});
  }
  write_jsonl(path, rows);
}

}  // namespace looklab::embed
