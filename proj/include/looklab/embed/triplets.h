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

#ifndef LOOKLAB_EMBED_TRIPLETS_H_
#define LOOKLAB_EMBED_TRIPLETS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace looklab::embed {

// One cross-domain pair: an in-the-wild photo of a garment and the catalog
// photo of the same garment.
struct ImagePair {
  std::string wild_path;
  std::string catalog_path;
  std::string garment_id;
  std::string article_type;
};

struct ImageRef {
  std::string path;
  std::string garment_id;
  std::string article_type;
  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

// anchor: wild image; positive: catalog image of the same garment;
// negative: catalog image of a different garment of the same article type.
struct Triplet {
  ImageRef anchor;
  ImageRef positive;
  ImageRef negative;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletBuildResult {
  std::vector<Triplet> triplets;
  std::vector<std::string> warnings;  // article types skipped (single garment)
  size_t skipped_pairs = 0;
};

// One triplet per pair. The negative garment is drawn uniformly (seeded)
// among the other garments of the pair's article type, then one of that
// garment's catalog images uniformly. Article types with a single garment
// are skipped with a warning.
TripletBuildResult build_triplets(const std::vector<ImagePair>& pairs, uint64_t seed);

// Pairs manifest: JSON lines {wild_path, catalog_path, garment_id, article_type}.
// Relative paths are resolved against the manifest's directory.
std::vector<ImagePair> read_pairs_manifest(const std::string& path);
void write_pairs_manifest(const std::string& path, const std::vector<ImagePair>& pairs);

}  // namespace looklab::embed

#endif  // LOOKLAB_EMBED_TRIPLETS_H_
