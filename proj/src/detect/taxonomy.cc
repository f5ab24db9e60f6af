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

#include <set>

#include "looklab/detect.h"
#include "looklab/errors.h"

namespace looklab::detect {

ArticleTaxonomy::ArticleTaxonomy(
    std::vector<std::pair<std::string, std::vector<std::string>>> categories)
    : categories_(std::move(categories)) {
  std::set<std::string> broad_seen;
  for (const auto& [broad, types] : categories_) {
    if (broad.empty()) throw ValidationError("empty broad category name");
    if (!broad_seen.insert(broad).second) {
      throw ValidationError("duplicate broad category '" + broad + "'");
    }
    if (types.empty()) throw ValidationError("broad category '" + broad + "' has no types");
    for (const auto& t : types) {
      if (!broad_by_type_.emplace(t, broad).second) {
        throw ValidationError("article type '" + t + "' listed twice");
      }
    }
  }
}

const ArticleTaxonomy& ArticleTaxonomy::fashion_default() {
  static const ArticleTaxonomy taxonomy({
      {"Topwear", {"Women tops", "Shirts", "T-shirts"}},
      {"Outerwear", {"Sweaters", "SweatShirts", "Jackets", "Blazers", "Shrug", "NehruJackets"}},
      {"BottomWear", {"Jeans", "Trousers", "Shorts", "Track pants", "Palazzos", "Capris"}},
      {"Skirts", {"Skirts"}},
      {"Dresses", {"Women dress"}},
      {"Footwear", {"Sports shoes", "Casual shoes"}},
      {"Bags", {"Hand bags"}},
  });
  return taxonomy;
}

ArticleTaxonomy ArticleTaxonomy::from_json(const Json& j) {
  // Either {"categories": [{"broad": ..., "types": [...]}, ...]} (ordered) or
  // a plain object broad -> [types] (keys sorted by the JSON library).
  std::vector<std::pair<std::string, std::vector<std::string>>> cats;
  try {
    if (j.contains("categories")) {
      for (const Json& c : j.at("categories")) {
        cats.emplace_back(c.at("broad").get<std::string>(),
                          c.at("types").get<std::vector<std::string>>());
      }
    } else {
      for (const auto& [broad, types] : j.items()) {
        cats.emplace_back(broad, types.get<std::vector<std::string>>());
      }
    }
  } catch (const Json::exception& e) {
    throw DecodeError(std::string("bad taxonomy config: ") + e.what());
  }
  return ArticleTaxonomy(std::move(cats));
}

ArticleTaxonomy ArticleTaxonomy::load(const std::string& path) {
  return from_json(read_json_file(path));
}

Json ArticleTaxonomy::to_json() const {
  Json cats = Json::array();
  for (const auto& [broad, types] : categories_) cats.push_back({{"broad", broad}, {"types", types}});
  return {{"categories", cats}};
}

bool ArticleTaxonomy::contains(std::string_view article_type) const {
  return broad_by_type_.find(article_type) != broad_by_type_.end();
}

const std::string& ArticleTaxonomy::broad_of(std::string_view article_type) const {
  auto it = broad_by_type_.find(article_type);
  if (it == broad_by_type_.end()) {
    throw NotFoundError("unknown article type '" + std::string(article_type) + "'");
  }
  return it->second;
}

std::vector<std::string> ArticleTaxonomy::broad_categories() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) out.push_back(c.first);
  return out;
}

std::vector<std::string> ArticleTaxonomy::article_types() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) out.insert(out.end(), c.second.begin(), c.second.end());
  return out;
}

}  // namespace looklab::detect
