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

#ifndef LOOKLAB_JSONL_H_
#define LOOKLAB_JSONL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "looklab/errors.h"

namespace looklab {

using Json = nlohmann::json;

// Reads one JSON object per non-blank line. Throws DecodeError with the line
// number on malformed input.
std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& rows);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Resolves `ref` against the directory containing `manifest_path` unless it
// is already absolute.
std::string resolve_relative(const std::string& manifest_path, const std::string& ref);

// Typed field access with a DecodeError naming the missing/mistyped field.
template <typename T>
T field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw DecodeError(std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DecodeError(std::string("mistyped field '") + name + "'");
  }
}

}  // namespace looklab

#endif  // LOOKLAB_JSONL_H_
