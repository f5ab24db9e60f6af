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

#include "looklab/service.h"

#include <filesystem>

#include "httplib.h"
#include "looklab/errors.h"
#include "looklab/log.h"

namespace looklab::service {

namespace fs = std::filesystem;

std::vector<uint8_t> base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+' || c == '-') return 62;
    if (c == '/' || c == '_') return 63;
    return -1;
  };
  std::vector<uint8_t> out;
  uint32_t acc = 0;
  int bits = 0;
  bool padding = false;
  size_t symbols = 0;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    if (c == '=') {
      padding = true;
      continue;
    }
    const int v = value(c);
    if (v < 0 || padding) throw DecodeError("invalid base64 payload");
    acc = (acc << 6) | static_cast<uint32_t>(v);
    bits += 6;
    ++symbols;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>((acc >> bits) & 0xFF));
    }
  }
  // One symbol carries only 6 bits and cannot end a quantum.
  if (symbols % 4 == 1) throw DecodeError("truncated base64 payload");
  return out;
}

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

// Maps library errors onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    reply_error(res, 400, e.what());
  } catch (const DecodeError& e) {
    reply_error(res, 400, e.what());
  } catch (const NotFoundError& e) {
    reply_error(res, 404, e.what());
  } catch (const ConflictError& e) {
    reply_error(res, 409, e.what());
  } catch (const nlohmann::json::exception& e) {
    reply_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    log::error(std::string("request failed: ") + e.what());
    reply_error(res, 500, e.what());
  }
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

Service::Service(std::shared_ptr<const pipeline::ModelRegistry> registry,
                 std::shared_ptr<feedback::ReviewStore> store, ServiceConfig config)
    : config_(std::move(config)),
      store_(std::move(store)),
      registry_(std::move(registry)),
      server_(std::make_unique<httplib::Server>()) {
  if (!registry_) throw ConfigError("service needs a model registry");
  if (config_.default_k < 1 || config_.max_k < config_.default_k) throw ConfigError("bad k limits");
  config_.image_root = fs::weakly_canonical(fs::absolute(config_.image_root)).string();
  server_->set_payload_max_length(config_.max_body_bytes);
  const int threads = std::max(1, config_.threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<size_t>(threads)); };
  routes();
}

Service::~Service() { stop(); }

void Service::swap_registry(std::shared_ptr<const pipeline::ModelRegistry> registry) {
  if (!registry) throw ConfigError("cannot swap in an empty registry");
  registry->validate();
  std::lock_guard lock(mu_);
  registry_ = std::move(registry);
}

std::shared_ptr<const pipeline::ModelRegistry> Service::registry() const {
  std::lock_guard lock(mu_);
  return registry_;
}

pipeline::ImageLoader Service::loader() const {
  pipeline::ImageLoader l;
  const std::string root = config_.image_root;
  l.resolve = [root](const std::string& ref) -> std::string {
    if (ref.rfind("data:", 0) == 0) return ref;
    const fs::path p = fs::weakly_canonical(fs::path(ref).is_absolute() ? fs::path(ref) : fs::path(root) / ref);
    const std::string s = p.string();
    if (s.size() < root.size() || s.compare(0, root.size(), root) != 0 ||
        (s.size() > root.size() && root.back() != '/' && s[root.size()] != '/')) {
      throw ValidationError("image ref escapes the image root: " + ref);
    }
    return s;
  };
  l.read = [](const std::string& key) -> Image {
    if (key.rfind("data:", 0) == 0) {
      const auto comma = key.find(',');
      if (comma == std::string::npos || key.find(";base64") > comma) {
        throw DecodeError("inline images must be base64 data URLs");
      }
      return decode_pnm(base64_decode(std::string_view(key).substr(comma + 1)));
    }
    return read_image(key);
  };
  return l;
}

void Service::routes() {
  auto& s = *server_;

  s.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    const auto reg = registry();
    reply(res, 200, {{"status", "ok"}, {"registry_version", reg->version}});
  });

  s.Get("/v1/models", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, registry()->describe()); });
  });

  s.Post("/v1/models/reload", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      if (config_.registry_path.empty()) throw ConflictError("service was started without a registry file");
      swap_registry(pipeline::ModelRegistry::load(config_.registry_path));
      reply(res, 200, {{"registry_version", registry()->version}});
    });
  });

  s.Post("/v1/recommend", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = parse_body(req);
      Json with_id = body;
      if (!with_id.contains("request_id")) with_id["request_id"] = "request";
      const pipeline::PdpRequest pdp = pipeline::pdp_request_from_json(with_id);
      const int k = body.contains("k") ? field<int>(body, "k") : config_.default_k;
      if (k < 1 || k > config_.max_k) {
        throw ValidationError("k must be in [1, " + std::to_string(config_.max_k) + "]");
      }
      const auto reg = registry();  // pinned for this request
      const bool profile = req.has_param("profile") && req.get_param_value("profile") != "0";
      auto [rec, timings] = pipeline::profile_request(pdp, *reg, k, loader());
      Json out = pipeline::to_json(rec);
      // Inline images would echo whole payloads back.
      for (auto& r : out["rejection_reasons"]) {
        if (r["image"].get<std::string>().rfind("data:", 0) == 0) r["image"] = "inline";
      }
      if (out["selected_image"].is_string() && out["selected_image"].get<std::string>().rfind("data:", 0) == 0) {
        out["selected_image"] = "inline";
      }
      out["registry_version"] = reg->version;
      if (profile) {
        Json t = Json::array();
        for (const auto& st : timings) {
          t.push_back({{"stage", std::string(pipeline::stage_name(st.stage))}, {"elapsed_ms", st.elapsed_ms}});
        }
        out["timings"] = t;
      }
      reply(res, 200, out);
    });
  });

  s.Get("/v1/review/next", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!store_) throw NotFoundError("review queue is not configured");
      const std::string tagger = req.get_param_value("tagger");
      if (tagger.empty()) throw ValidationError("tagger query parameter is required");
      const auto lease = store_->lease_next(tagger);
      if (!lease) {
        reply(res, 200, {{"candidate", nullptr}});
        return;
      }
      const auto& c = lease->candidate;
      const Json overlay = Json::array({{{"box", detect::box_to_json(c.detection.box)},
                                         {"label", c.detection.article_type},
                                         {"score", c.detection.score}}});
      const std::string url =
          "/v1/review/image?candidate_id=" + httplib::detail::encode_query_param(c.candidate_id);
      const Json body = {{"candidate", feedback::to_json(c)},
                         {"image_url", url},
                         {"overlay", overlay},
                         {"taxonomy", registry()->taxonomy.article_types()},
                         {"tagger_id", lease->tagger_id},
                         {"lease_seconds", store_->lease_seconds()}};
      reply(res, 200, body);
    });
  });

  s.Get("/v1/review/image", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!store_) throw NotFoundError("review queue is not configured");
      const auto c = store_->find(req.get_param_value("candidate_id"));
      if (!c) throw NotFoundError("unknown candidate");
      const auto l = loader();
      const auto bytes = encode_bmp(l.read(l.resolve(c->image_path)));
      res.status = 200;
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/bmp");
    });
  });

  s.Post("/v1/review/verdict", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!store_) throw NotFoundError("review queue is not configured");
      const auto rec = store_->ingest(feedback::record_from_json(parse_body(req)));
      reply(res, 200, {{"status", "recorded"}, {"record", feedback::to_json(rec)}});
    });
  });

  s.Get("/v1/review/stats", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      if (!store_) throw NotFoundError("review queue is not configured");
      reply(res, 200, feedback::to_json(store_->stats()));
    });
  });
}

int Service::bind() {
  if (config_.port == 0) return server_->bind_to_any_port(config_.host);
  return server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
}

void Service::serve() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace looklab::service
