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

#ifndef LOOKLAB_SERVICE_H_
#define LOOKLAB_SERVICE_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "looklab/feedback.h"
#include "looklab/pipeline.h"

namespace httplib {
class Server;
}

namespace looklab::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Image refs in requests and review candidates resolve under this root;
  // refs may not escape it.
  std::string image_root = ".";
  // Re-read by POST /v1/models/reload; empty disables reloading.
  std::string registry_path;
  int default_k = retrieve::kDefaultK;
  int max_k = 100;
  size_t max_body_bytes = 32u << 20;
  int threads = 8;
};

// Decodes RFC 4648 base64 (standard or URL-safe alphabet, padding optional),
// ignoring whitespace. Throws DecodeError.
std::vector<uint8_t> base64_decode(std::string_view text);

class Service {
 public:
  Service(std::shared_ptr<const pipeline::ModelRegistry> registry,
          std::shared_ptr<feedback::ReviewStore> store, ServiceConfig config);
  ~Service();

  // Requests in flight keep the registry they started with.
  void swap_registry(std::shared_ptr<const pipeline::ModelRegistry> registry);
  std::shared_ptr<const pipeline::ModelRegistry> registry() const;

  // Binds config.port (0 picks a free port) and returns the bound port, or
  // -1 on failure.
  int bind();
  // Blocks until stop().
  void serve();
  void stop();

 private:
  void routes();
  pipeline::ImageLoader loader() const;

  ServiceConfig config_;
  std::shared_ptr<feedback::ReviewStore> store_;
  mutable std::mutex mu_;
  std::shared_ptr<const pipeline::ModelRegistry> registry_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace looklab::service

#endif  // LOOKLAB_SERVICE_H_
