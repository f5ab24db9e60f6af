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

#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <thread>

#include "looklab/errors.h"
#include "looklab/image.h"
#include "looklab/service.h"
#include "registry_fixture.h"

namespace looklab::service {
namespace {

namespace fs = std::filesystem;

std::string base64(const std::vector<uint8_t>& bytes) {
  static const char* kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s : {18, 12, 6, 0}) out += kAlphabet[(v >> s) & 63];
  }
  if (i + 1 == bytes.size()) {
    const uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    for (int s : {18, 12, 6}) out += kAlphabet[(v >> s) & 63];
    out += '=';
  }
  return out;
}

TEST(Base64, DecodesBothAlphabetsAndSkipsWhitespace) {
  auto str = [](const std::vector<uint8_t>& v) { return std::string(v.begin(), v.end()); };
  EXPECT_EQ(str(base64_decode("")), "");
  EXPECT_EQ(str(base64_decode("Zg==")), "f");
  EXPECT_EQ(str(base64_decode("Zm8=")), "fo");
  EXPECT_EQ(str(base64_decode("Zm9v")), "foo");
  EXPECT_EQ(str(base64_decode("Zm9v\nYmFy ")), "foobar");
  const std::vector<uint8_t> raw{0xfb, 0xff, 0xbf};
  EXPECT_EQ(base64_decode("+/+/"), raw);
  EXPECT_EQ(base64_decode("-_-_"), raw);
  std::vector<uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[i] = static_cast<uint8_t>(i);
  EXPECT_EQ(base64_decode(base64(all)), all);
  EXPECT_THROW(base64_decode("Zm9v!"), DecodeError);
  // Padding is optional; a lone trailing character is not.
  EXPECT_EQ(str(base64_decode("Zm9")), "fo");
  EXPECT_THROW(base64_decode("Zm9vY"), DecodeError);
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world_ = new looklab::testing::TestWorld(looklab::testing::make_test_world("looklab_service_world", 2));
  }
  static void TearDownTestSuite() {
    fs::remove_all(world_->dir);
    delete world_;
  }

  void start(bool with_store) {
    if (with_store) {
      store_ = std::make_shared<feedback::ReviewStore>("", "", 60.0);
      feedback::ReviewCandidate c;
      c.candidate_id = "c1";
      c.image_path = front_image(0);
      c.detection = {{2, 3, 20, 30}, "Shorts", 0.55};
      store_->add_candidates({c});
    }
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.image_root = world_->dir.string();
    cfg.registry_path = world_->registry_path;
    cfg.threads = 2;
    cfg.max_k = 20;
    service_ = std::make_unique<Service>(pipeline::ModelRegistry::load(world_->registry_path), store_, cfg);
    port_ = service_->bind();
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_->serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    // The listener is up once health answers.
    for (int i = 0; i < 100; ++i) {
      if (client_->Get("/v1/health")) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }

  void TearDown() override {
    if (service_) service_->stop();
    if (thread_.joinable()) thread_.join();
  }

  Json post(const std::string& path, const Json& body, int* status) {
    auto r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    *status = r->status;
    return Json::parse(r->body);
  }

  Json get(const std::string& path, int* status) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    *status = r->status;
    return Json::parse(r->body);
  }

  static std::string front_image(size_t i) { return world_->truth[i]["full_shot_image"].get<std::string>(); }

  static looklab::testing::TestWorld* world_;
  std::shared_ptr<feedback::ReviewStore> store_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

looklab::testing::TestWorld* ServiceTest::world_ = nullptr;

TEST_F(ServiceTest, HealthModelsAndReload) {
  start(false);
  int status = 0;
  Json j = get("/v1/health", &status);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["registry_version"], "test-1");
  j = get("/v1/models", &status);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(j["catalog"]["size"], 60);
  j = post("/v1/models/reload", Json::object(), &status);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(j["registry_version"], "test-1");
}

TEST_F(ServiceTest, RecommendByPathAndInline) {
  start(false);
  int status = 0;
  Json j = post("/v1/recommend", {{"images", {front_image(1)}}, {"ugc", true}, {"k", 4}}, &status);
  ASSERT_EQ(status, 200) << j.dump();
  EXPECT_EQ(j["request_id"], "request");
  EXPECT_EQ(j["registry_version"], "test-1");
  EXPECT_EQ(j["selected_image"], front_image(1));
  ASSERT_EQ(j["per_article"].size(), 3u);
  EXPECT_EQ(j["per_article"][0]["retrieval"]["ranked"].size(), 4u);
  EXPECT_FALSE(j.contains("timings"));

  // Inline images decode but do not match the replayed paths.
  const Image img = read_image((world_->dir / front_image(1)).string());
  const std::string data = "data:image/x-portable-pixmap;base64," + base64(encode_ppm(img));
  j = post("/v1/recommend?profile=1", {{"request_id", "inl"}, {"images", {data}}, {"ugc", true}}, &status);
  ASSERT_EQ(status, 200) << j.dump();
  EXPECT_EQ(j["selected_image"], "inline");
  EXPECT_EQ(j["rejection_reasons"][0]["image"], "inline");
  EXPECT_TRUE(j["per_article"].empty());
  EXPECT_TRUE(j["timings"].is_array());
}

TEST_F(ServiceTest, RecommendRejectsBadInput) {
  start(false);
  int status = 0;
  post("/v1/recommend", {{"images", {"../../etc/passwd"}}, {"ugc", true}}, &status);
  EXPECT_EQ(status, 400);
  post("/v1/recommend", {{"images", {front_image(0)}}, {"k", 0}}, &status);
  EXPECT_EQ(status, 400);
  post("/v1/recommend", {{"images", {front_image(0)}}, {"k", 21}}, &status);
  EXPECT_EQ(status, 400);
  post("/v1/recommend", {{"images", Json::array()}}, &status);
  EXPECT_EQ(status, 400);
  post("/v1/recommend", {{"images", {"data:image/x-portable-pixmap;base64,!!!"}}, {"ugc", true}}, &status);
  EXPECT_EQ(status, 400);
  auto r = client_->Post("/v1/recommend", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_TRUE(Json::parse(r->body).contains("error"));
}

TEST_F(ServiceTest, ReviewRoutesNeedAStore) {
  start(false);
  int status = 0;
  get("/v1/review/next?tagger=t", &status);
  EXPECT_EQ(status, 404);
  get("/v1/review/stats", &status);
  EXPECT_EQ(status, 404);
}

TEST_F(ServiceTest, ReviewFlow) {
  start(true);
  int status = 0;
  get("/v1/review/next", &status);
  EXPECT_EQ(status, 400);

  Json j = get("/v1/review/next?tagger=alice", &status);
  ASSERT_EQ(status, 200);
  EXPECT_EQ(j["candidate"]["candidate_id"], "c1");
  EXPECT_EQ(j["tagger_id"], "alice");
  EXPECT_EQ(j["lease_seconds"], 60.0);
  EXPECT_EQ(j["overlay"][0]["label"], "Shorts");
  EXPECT_EQ(j["taxonomy"].size(), 3u);

  auto img = client_->Get(j["image_url"].get<std::string>());
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  EXPECT_EQ(img->get_header_value("Content-Type"), "image/bmp");
  EXPECT_EQ(img->body.substr(0, 2), "BM");

  // Leased to alice, so bob sees nothing.
  j = get("/v1/review/next?tagger=bob", &status);
  EXPECT_TRUE(j["candidate"].is_null());

  post("/v1/review/verdict", {{"candidate_id", "c1"}, {"verdict", "wrong_class"}, {"tagger_id", "alice"}},
       &status);
  EXPECT_EQ(status, 400);
  post("/v1/review/verdict", {{"candidate_id", "c9"}, {"verdict", "correct"}, {"tagger_id", "alice"}}, &status);
  EXPECT_EQ(status, 404);
  post("/v1/review/verdict", {{"candidate_id", "c1"}, {"verdict", "correct"}, {"tagger_id", "bob"}}, &status);
  EXPECT_EQ(status, 409);
  j = post("/v1/review/verdict",
           {{"candidate_id", "c1"}, {"verdict", "wrong_class"}, {"corrected_label", "T-shirts"},
            {"tagger_id", "alice"}},
           &status);
  ASSERT_EQ(status, 200) << j.dump();
  EXPECT_EQ(j["status"], "recorded");
  EXPECT_FALSE(j["record"]["timestamp"].get<std::string>().empty());
  post("/v1/review/verdict", {{"candidate_id", "c1"}, {"verdict", "correct"}, {"tagger_id", "alice"}}, &status);
  EXPECT_EQ(status, 409);

  j = get("/v1/review/stats", &status);
  EXPECT_EQ(j["reviewed"], 1);
  EXPECT_EQ(j["pending"], 0);
  EXPECT_EQ(j["by_verdict"]["wrong_class"], 1);
  get("/v1/review/image?candidate_id=c9", &status);
  EXPECT_EQ(status, 404);
}

TEST(ServiceConfigCheck, RejectsMissingRegistry) {
  ServiceConfig cfg;
  EXPECT_THROW(Service(nullptr, nullptr, cfg), ConfigError);
}

}  // namespace
}  // namespace looklab::service
