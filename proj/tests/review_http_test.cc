// Copyright 2026 The Curate Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>
#include <httplib.h>

#include <json.hpp>

#include "curate/image.h"
#include "curate/review_service.h"
#include "test_util.h"

namespace curate {
namespace {

using Json = nlohmann::json;
using testing::TempDir;

class ReviewHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<ReviewItem> items;
    for (int i = 0; i < 4; ++i) {
      ReviewItem it;
      it.image_id = "img" + std::to_string(i);
      it.full_path = (dir_.path() / (it.image_id + ".png")).string();
      items.push_back(it);
    }
    items[1].partner_id = "img0";
    const auto png = EncodePng(testing::NoiseImage(16, 12, 1));
    WriteFileAtomically(items[0].full_path, png);
    WriteFileAtomically(items[1].full_path, EncodeJpeg(testing::NoiseImage(16, 12, 2), 90));
    queue_ = std::make_unique<ReviewQueue>(items, dir_.path() / "verdicts.jsonl");
    server_ = std::make_unique<ReviewServer>(*queue_, dir_.path() / "final.json");
    port_ = server_->Start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->Stop(); }

  httplib::Result Verdict(const Json& body) {
    return client_->Post("/verdict", body.dump(), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<ReviewQueue> queue_;
  std::unique_ptr<ReviewServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ReviewHttp, QueueNextLeasesItems) {
  auto res = client_->Get("/queue/next?reviewer=alice&n=3");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const Json a = Json::parse(res->body);
  ASSERT_EQ(a["items"].size(), 3u);
  EXPECT_EQ(a["items"][1]["partner_id"], "img0");
  EXPECT_EQ(a["items"][0]["image_url"], "/image/img0");
  const Json b = Json::parse(client_->Get("/queue/next?reviewer=bob&n=3")->body);
  ASSERT_EQ(b["items"].size(), 1u);
  EXPECT_EQ(b["items"][0]["image_id"], "img3");
  EXPECT_EQ(client_->Get("/queue/next?reviewer=bob&n=x")->status, 400);
  EXPECT_EQ(client_->Get("/queue/next")->status, 400);
}

TEST_F(ReviewHttp, VerdictStatusMapping) {
  client_->Get("/queue/next?reviewer=alice&n=1");
  auto ok = Verdict({{"reviewer", "alice"}, {"image_id", "img0"}, {"status", "kept"}});
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(Json::parse(ok->body)["history_length"], 1);
  EXPECT_EQ(Verdict({{"reviewer", "a"}, {"image_id", "nope"}, {"status", "kept"}})->status, 404);
  EXPECT_EQ(Verdict({{"reviewer", "a"}, {"image_id", "img1"}, {"status", "removed"}})->status,
            400);
  EXPECT_EQ(Verdict({{"reviewer", "a"},
                     {"image_id", "img1"},
                     {"status", "removed"},
                     {"reason", "blurry"}})
                ->status,
            400);
  EXPECT_EQ(client_->Post("/verdict", "{not json", "application/json")->status, 400);
  client_->Get("/queue/next?reviewer=bob&n=1");
  EXPECT_EQ(Verdict({{"reviewer", "carol"}, {"image_id", "img1"}, {"status", "kept"}})->status,
            409);
  auto rm = Verdict({{"reviewer", "bob"},
                     {"image_id", "img1"},
                     {"status", "removed"},
                     {"reason", "duplicate"},
                     {"partner_id", "img0"}});
  EXPECT_EQ(rm->status, 200);
}

TEST_F(ReviewHttp, StatsTrackVerdicts) {
  Verdict({{"reviewer", "a"}, {"image_id", "img2"}, {"status", "removed"}, {"reason", "other"}});
  Verdict({{"reviewer", "a"}, {"image_id", "img3"}, {"status", "kept"}});
  const Json s = Json::parse(client_->Get("/stats")->body);
  EXPECT_EQ(s["total"], 4);
  EXPECT_EQ(s["pending"], 2);
  EXPECT_EQ(s["kept"], 1);
  EXPECT_EQ(s["removed"], 1);
  EXPECT_EQ(s["removed_by_reason"]["other"], 1);
}

TEST_F(ReviewHttp, ImageBytesAndContentType) {
  auto png = client_->Get("/image/img0");
  ASSERT_TRUE(png);
  EXPECT_EQ(png->status, 200);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(png->body.size(), ReadFileBytes(dir_.path() / "img0.png").size());
  EXPECT_EQ(client_->Get("/image/img1")->get_header_value("Content-Type"), "image/jpeg");
  EXPECT_EQ(client_->Get("/image/unknown")->status, 404);
  EXPECT_EQ(client_->Get("/image/img3")->status, 500);
}

TEST_F(ReviewHttp, FinalizeRequiresForceWhilePending) {
  Verdict({{"reviewer", "a"}, {"image_id", "img2"}, {"status", "removed"}, {"reason", "other"}});
  EXPECT_EQ(client_->Post("/finalize", "{}", "application/json")->status, 409);
  auto res = client_->Post("/finalize", R"({"force": true})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const Json f = Json::parse(res->body);
  EXPECT_EQ(f["kept_count"], 3);
  EXPECT_EQ(f["removed_count"], 1);
  EXPECT_EQ(f["pending_defaulted"], 3);
  const Json written = Json::parse(testing::ReadText(dir_.path() / "final.json"));
  EXPECT_EQ(written["ids"], f["ids"]);
}

TEST_F(ReviewHttp, VerdictsSurviveRestart) {
  Verdict({{"reviewer", "a"}, {"image_id", "img3"}, {"status", "kept"}});
  server_->Stop();
  ReviewQueue reopened({ReviewItem{.image_id = "img3"}}, dir_.path() / "verdicts.jsonl");
  EXPECT_EQ(reopened.Item("img3")->status, ReviewStatus::kKept);
}

}  // namespace
}  // namespace curate
