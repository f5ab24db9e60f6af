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

#include "looklab/log.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace looklab::log {
namespace {

Level level_from_env() {
  const char* v = std::getenv("LOOKLAB_LOG");
  if (v == nullptr) return Level::kInfo;
  if (std::strcmp(v, "debug") == 0) return Level::kDebug;
  if (std::strcmp(v, "warning") == 0) return Level::kWarning;
  if (std::strcmp(v, "error") == 0) return Level::kError;
  if (std::strcmp(v, "off") == 0) return Level::kOff;
  return Level::kInfo;
}

std::atomic<Level>& current() {
  static std::atomic<Level> lvl{level_from_env()};
  return lvl;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void set_level(Level level) { current().store(level); }
Level level() { return current().load(); }

void write(Level lvl, std::string_view message) {
  if (lvl < current().load()) return;
  static constexpr const char* kTags[] = {"D", "I", "W", "E"};
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[looklab " << kTags[static_cast<int>(lvl)] << "] " << message << '\n';
}

}  // namespace looklab::log
